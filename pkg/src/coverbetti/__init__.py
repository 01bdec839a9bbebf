"""Betti numbers of p-adic towers of finite covers.

Computes b_k of the covers X_i attached to a representation of pi_1(X)
into GL_n(Z_p), over Q and over F_p, estimates the normalized limits, and
cross-checks them against truncated Iwasawa-module dimensions and Fox
calculus.
"""

__version__ = "0.1.0"
