"""Exact rank kernels over F_p, Q and Laurent polynomial rings."""

from .fp import PrimeFieldMatrix, dump_triples, inverse_mod_p, load_triples, rank_fp, rank_fp_sparse
from .laurent import LaurentMatrix, rank_laurent, rank_laurent_univariate_exact
from .rational import bareiss_rank, rank_q
from .snf import snf

__all__ = [
    "PrimeFieldMatrix", "LaurentMatrix", "bareiss_rank", "dump_triples", "inverse_mod_p",
    "load_triples", "rank_fp", "rank_fp_sparse", "rank_laurent", "rank_laurent_univariate_exact", "rank_q", "snf",
]
