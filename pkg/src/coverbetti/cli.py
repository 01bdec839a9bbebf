"""Command-line interface.

Exit codes: 0 success, 1 a verdict failed, 2 bad input or usage, 3 a size
budget was exceeded.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

from . import alexander, documents, iwasawa, tower
from .cache import DEFAULT_DIR, ENV_VAR, Cache
from .errors import BudgetError, CoverBettiError, DegenerateMatrix, InputError
from .exactla import LaurentMatrix, load_triples, rank_fp, rank_laurent, rank_q
from .fpgroup import DEFAULT_ELEMENT_CAP

EXIT_OK, EXIT_VERDICT, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3
DEFAULT_SEED = 0xB3771

log = logging.getLogger("coverbetti")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _is_prime(n: int) -> bool:
    return n >= 2 and all(n % q for q in range(2, int(n**0.5) + 1))


def _prime(text: str) -> int:
    try:
        p = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if not _is_prime(p):
        raise argparse.ArgumentTypeError(f"{p} is not prime")
    return p


def _positive(text: str) -> int:
    try:
        n = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def _seed(text: str) -> int:
    try:
        return int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None


@dataclass
class RunConfig:
    subcommand: str
    input: str | None
    prime: int | None
    levels: int | None
    fields: tuple
    seed: int
    element_cap: int
    budget: int
    cache_dir: str | None
    use_cache: bool
    output_dir: str | None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=DEFAULT_SEED,
                        help="seed for every randomized kernel (default 0xB3771)")
    common.add_argument("--element-cap", type=_positive, default=DEFAULT_ELEMENT_CAP)
    common.add_argument("--budget", type=_positive, default=iwasawa.DEFAULT_BUDGET,
                        help="dimension budget for truncated Iwasawa modules")
    common.add_argument("--cache-dir", default=None,
                        help=f"cache directory (default ${ENV_VAR} or {DEFAULT_DIR})")
    common.add_argument("--no-cache", action="store_true")
    common.add_argument("--output-dir", default=None, help="write outputs here instead of stdout")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="coverbetti", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("tower", parents=[common], help="Betti numbers along a tower of covers")
    p.add_argument("--input", required=True)
    p.add_argument("--prime", type=_prime, required=True)
    p.add_argument("--levels", type=_positive, required=True)
    p.add_argument("--fields", choices=("q", "fp", "both"), default="both")
    p.add_argument("--base-level", type=_positive, default=1)

    p = sub.add_parser("harris", parents=[common], help="truncated Iwasawa module dimensions")
    p.add_argument("--input", required=True)
    p.add_argument("--levels", type=_positive, required=True)

    p = sub.add_parser("alexander", parents=[common], help="Alexander matrix and predictions")
    p.add_argument("--input", required=True)
    p.add_argument("--prime", type=_prime, required=True)
    p.add_argument("--diagonal", action="store_true", help="also compute Delta(t,t) and Lk")
    p.add_argument("--tower", type=_positive, metavar="LEVELS",
                   help="compare predictions against a tower of this depth")
    p.add_argument("--trials", type=_positive, default=alexander.DEFAULT_TRIALS)

    p = sub.add_parser("rank", parents=[common], help="exact rank of a matrix document")
    p.add_argument("--input", required=True, help="JSON matrix document or 'row col value' triples")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--prime", type=_prime)
    group.add_argument("--rational", action="store_true")
    p.add_argument("--trials", type=_positive, default=alexander.DEFAULT_TRIALS)

    p = sub.add_parser("corpus", parents=[common], help="run a manifest of cases")
    p.add_argument("--manifest", default=None, help="manifest path (default: shipped corpus)")

    p = sub.add_parser("cache", parents=[common], help="inspect or clear the cache")
    action = p.add_mutually_exclusive_group(required=True)
    action.add_argument("--list", action="store_true")
    action.add_argument("--clear", action="store_true")
    action.add_argument("--path", action="store_true")
    return parser


def _config(args) -> RunConfig:
    fields = getattr(args, "fields", "both")
    return RunConfig(
        subcommand=args.subcommand, input=getattr(args, "input", None),
        prime=getattr(args, "prime", None), levels=getattr(args, "levels", None),
        fields=("q", "fp") if fields == "both" else (fields,), seed=args.seed,
        element_cap=args.element_cap, budget=args.budget, cache_dir=args.cache_dir,
        use_cache=not args.no_cache, output_dir=args.output_dir)


def _cache(cfg: RunConfig) -> Cache | None:
    return Cache(cfg.cache_dir) if cfg.use_cache else None


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# -- subcommand bodies: each returns (result document, passed, extra files) ----

def run_tower_doc(doc: dict, prime: int, levels: int, fields, seed: int, cache,
                  element_cap: int = DEFAULT_ELEMENT_CAP, base_level: int = 1):
    gi = documents.parse_group(doc)
    rep = gi.rep(prime, levels)
    table = tower.run_tower(gi.pres, rep, gi.chain_complex(), levels, fields=fields, seed=seed,
                            cache=cache, element_cap=element_cap)
    report = tower.analyze(table, d_user=gi.d_user, base_level=base_level)
    return report.to_document(), report.passed, {"tower.csv": table.to_csv()}


def run_harris_doc(doc: dict, levels: int, seed: int, budget: int):
    mod = documents.parse_module(doc)
    rep = iwasawa.harris_check(mod, levels, budget=budget, seed=seed)
    return rep.to_document(), rep.passed, {}


def _poly_doc(f: dict) -> list:
    return [[c, list(e)] for e, c in sorted(f.items())]


def run_alexander_doc(doc: dict, prime: int, seed: int, trials: int, diagonal: bool,
                      tower_levels: int | None = None, cache=None):
    gi = documents.parse_group(doc)
    if gi.ab is None:
        raise InputError("alexander needs meridian_images or a braid word")
    a = alexander.alexander_matrix(gi.pres, gi.ab)
    out = {
        "num_vars": a.num_vars,
        "matrix": [[_poly_doc(f) for f in row] for row in a.entries],
        "fundamental_identity": alexander.fundamental_identity_holds(a, gi.ab),
        "fox_identity": all(not alexander.fox_identity_residual(r, gi.pres.num_generators)
                            for r in gi.pres.relators),
        "prime": prime,
        "modp_l2_betti_1": alexander.modp_l2_betti_1(gi.pres, gi.ab, prime, trials=trials, seed=seed),
        "rational_l2_betti_1": alexander.rational_l2_betti_1(gi.pres, gi.ab, trials=trials, seed=seed),
    }
    passed = out["fundamental_identity"] and out["fox_identity"]
    if diagonal:
        try:
            res = alexander.diagonal_specialization(a, gi.ab)
            diag = {"minor_gcd": alexander.poly_to_list(res.minor_gcd),
                    "delta": alexander.poly_to_list(res.delta)}
            if a.num_vars == 2:
                diag["linking_number"] = abs(int(res.delta.eval(1)))
                if gi.braid is not None:
                    diag["linking_number_braid"] = alexander.braid_linking_number(*gi.braid)
                    passed = passed and diag["linking_number"] == diag["linking_number_braid"]
        except DegenerateMatrix as exc:
            diag = {"degenerate": str(exc)}
        out["diagonal"] = diag
    if tower_levels is not None:
        pred = alexander.predict_vs_tower(gi.pres, gi.ab, prime, tower_levels, seed=seed,
                                          trials=trials, cache=cache)
        out["prediction"] = pred.to_document()
        passed = passed and pred.passed
    out["verdict"] = "PASS" if passed else "FAIL"
    return out, passed, {}


def _load_matrix(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    if text.lstrip().startswith("{"):
        doc = documents.load_json(path)
        documents.validate(doc, "matrix_doc")
        if "matrix" in doc:
            return doc["matrix"], None
        rows = [[{tuple(e): c for c, e in poly} for poly in row] for row in doc["laurent"]]
        return None, LaurentMatrix(doc["num_vars"], len(rows), len(rows[0]) if rows else 0, rows)
    try:
        return load_triples(text).tolist(), None
    except ValueError as exc:
        raise InputError(f"bad triple dump: {exc}") from None


# -- corpus ---------------------------------------------------------------------

def _lookup(doc, path: str):
    cur = doc
    for part in path.split("."):
        if isinstance(cur, list):
            cur = cur[int(part)]
        elif isinstance(cur, dict) and part in cur:
            cur = cur[part]
        else:
            raise KeyError(path)
    return cur


def run_case(case: dict, base: Path, seed: int, cache, cfg: RunConfig):
    doc = documents.load_json(documents.resolve(base, case["input"]))
    cmd = case["command"]
    if cmd == "tower":
        fields = case.get("fields", "both")
        fields = ("q", "fp") if fields == "both" else (fields,)
        return run_tower_doc(doc, case["prime"], case["levels"], fields, seed, cache, cfg.element_cap)
    if cmd == "harris":
        return run_harris_doc(doc, case["levels"], seed, cfg.budget)
    if cmd == "alexander":
        return run_alexander_doc(doc, case["prime"], seed, alexander.DEFAULT_TRIALS, True)
    if cmd == "predict":
        return run_alexander_doc(doc, case["prime"], seed, alexander.DEFAULT_TRIALS, False,
                                 tower_levels=case["levels"], cache=cache)
    raise InputError(f"unknown command {cmd}")


def corpus_run(manifest_path, seed: int, cache, cfg: RunConfig):
    """Run every case, compare expectations; never abort on a single failure."""
    if manifest_path is None:
        from importlib import resources
        ref = resources.files(__package__).joinpath("corpus/manifest.json")
        manifest_path = Path(str(ref))
    manifest_path = Path(manifest_path)
    manifest = documents.load_json(manifest_path)
    documents.validate(manifest, "manifest")
    results, files = [], {}
    for case in manifest["cases"]:
        name = case["name"]
        entry = {"name": name, "command": case["command"], "diffs": []}
        try:
            doc, passed, extra = run_case(case, manifest_path.parent, seed, cache, cfg)
            files[f"{name}.json"] = dumps(doc)
            for fname, content in extra.items():
                files[f"{name}.{fname}"] = content
            for path, want in sorted(case["expect"].items()):
                try:
                    got = _lookup(doc, path)
                except (KeyError, IndexError, ValueError):
                    got = "<missing>"
                if got != want:
                    entry["diffs"].append({"path": path, "expected": want, "actual": got})
        except CoverBettiError as exc:
            entry["diffs"].append({"path": "<error>", "expected": None,
                                   "actual": f"{type(exc).__name__}: {exc}"})
        entry["status"] = "PASS" if not entry["diffs"] else "FAIL"
        results.append(entry)
    summary = {"schema_version": tower.SCHEMA_VERSION, "seed": seed, "cases": results,
               "passed": sum(r["status"] == "PASS" for r in results),
               "failed": sum(r["status"] == "FAIL" for r in results)}
    return summary, files


def _format_table(summary: dict) -> str:
    lines = [f"{'case':<28} status"]
    for r in summary["cases"]:
        lines.append(f"{r['name']:<28} {r['status']}")
        for d in r["diffs"]:
            lines.append(f"    {d['path']}: expected {d['expected']!r}, got {d['actual']!r}")
    lines.append(f"{summary['passed']} passed, {summary['failed']} failed")
    return "\n".join(lines) + "\n"


def _emit(cfg: RunConfig, files: dict, stdout_order: list[str]):
    if cfg.output_dir:
        out = Path(cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, content in files.items():
            (out / name).write_text(content, encoding="utf-8")
    else:
        sys.stdout.write("\n".join(files[n] for n in stdout_order if n in files))


def dispatch(args) -> int:
    cfg = _config(args)
    cmd = cfg.subcommand
    if cmd == "cache":
        c = Cache(cfg.cache_dir)
        if args.path:
            print(c.root)
        elif args.list:
            for e in c.entries():
                print(e)
        else:
            print(f"removed {c.clear()} entries from {c.root}")
        return EXIT_OK
    if cmd == "tower":
        doc = documents.load_json(cfg.input)
        report, passed, extra = run_tower_doc(doc, cfg.prime, cfg.levels, cfg.fields, cfg.seed,
                                              _cache(cfg), cfg.element_cap, args.base_level)
        _emit(cfg, {"tower.csv": extra["tower.csv"], "report.json": dumps(report)},
              ["tower.csv", "report.json"])
        if report["failed_level"] is not None:
            log.error("stopped at level %s: %s", report["failed_level"], report["error"])
            return EXIT_BUDGET
        return EXIT_OK if passed else EXIT_VERDICT
    if cmd == "harris":
        report, passed, _ = run_harris_doc(documents.load_json(cfg.input), cfg.levels, cfg.seed,
                                           cfg.budget)
        _emit(cfg, {"harris.json": dumps(report)}, ["harris.json"])
        return EXIT_OK if passed else EXIT_VERDICT
    if cmd == "alexander":
        out, passed, _ = run_alexander_doc(documents.load_json(cfg.input), cfg.prime, cfg.seed,
                                           args.trials, args.diagonal, args.tower, _cache(cfg))
        _emit(cfg, {"alexander.json": dumps(out)}, ["alexander.json"])
        return EXIT_OK if passed else EXIT_VERDICT
    if cmd == "rank":
        dense, laurent = _load_matrix(cfg.input)
        if laurent is not None:
            if args.rational:
                raise InputError("Laurent rank is computed over F_p only; pass --prime")
            r = rank_laurent(laurent, cfg.prime, trials=args.trials, seed=cfg.seed)
            out = {"field": f"F_{cfg.prime}(t)", "rank": r}
        elif args.rational:
            out = {"field": "Q", "rank": rank_q(dense, seed=cfg.seed) if dense else 0}
        else:
            out = {"field": f"F_{cfg.prime}", "rank": rank_fp(dense, cfg.prime) if dense else 0}
        _emit(cfg, {"rank.json": dumps(out)}, ["rank.json"])
        return EXIT_OK
    if cmd == "corpus":
        summary, files = corpus_run(args.manifest, cfg.seed, _cache(cfg), cfg)
        files["summary.json"] = dumps(summary)
        if cfg.output_dir:
            _emit(cfg, files, [])
        sys.stdout.write(_format_table(summary))
        return EXIT_OK if summary["failed"] == 0 else EXIT_VERDICT
    raise UsageError(f"unknown subcommand {cmd}")


def parse_and_dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INPUT
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return dispatch(args)
    except BudgetError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (InputError, UsageError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CoverBettiError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VERDICT


def main():
    sys.exit(parse_and_dispatch())


if __name__ == "__main__":
    main()
