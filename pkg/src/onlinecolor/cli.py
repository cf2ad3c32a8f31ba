"""Command-line front end.

Subcommands::

    onlinecolor generate --instance grade --h 3 --seed 1 --format text
    onlinecolor run --algorithm lst89 --instance grade --h 1 2 3 --seed 0 1 2
    onlinecolor analyze-upper --L 2 --B 65 --D 30
    onlinecolor analyze-lower --mode phi2 --workers 4 --checkpoint phi2.json
    onlinecolor verify table3

``run`` writes ``summary.csv`` (rows sorted, no timestamps) and
``runs.json`` into the output directory.  ``ONLINECOLOR_OUT`` overrides
``--out-dir``.  Exit codes: 0 ok, 2 usage error, 3 a coloring failed
validation, 4 a verify check failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from . import analyze_lower, analyze_upper, bipartite, core, general, k4

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INVALID = 3
EXIT_VERIFY = 4

CSV_FIELDS = ["algorithm", "instance", "n", "k", "seed", "colors", "max_level", "aborts", "valid", "bound_ok"]


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# instances and algorithms


def make_instance(kind: str, size: int, seed: int, k: int, density: float) -> core.ArrivalStream:
    if kind == "firstfit-adversary":
        return core.gen_firstfit_adversary(size)
    if kind == "random-k":
        return core.gen_random_k_colorable(size, k, density, seed)
    if kind == "grade":
        return core.gen_grade_instance(size, seed)
    if kind == "tree":
        return core.gen_random_tree(size, seed)
    if kind == "bipartite":
        return core.gen_random_bipartite(size, density, seed)
    if kind == "lst89-adversary":
        return bipartite.gen_lst89_adversary(size)
    raise UsageError(f"unknown instance {kind!r}")


INSTANCES = ("firstfit-adversary", "random-k", "grade", "tree", "bipartite", "lst89-adversary")
ALGORITHMS = ("firstfit", "lst89", "randomized-lst", "locally", "k-colorable", "k4", "competitive")


def run_algorithm(name: str, stream: core.ArrivalStream, seed: int, opts: dict) -> tuple[core.ColoringLedger, dict]:
    params = general.Params(scale=opts["scale"], oracle_cap=opts["oracle_cap"])
    extra: dict = {"max_level": "", "aborts": 0, "bound_ok": ""}
    n = stream.n
    if name in ("lst89", "randomized-lst"):
        run = bipartite.lst89(stream) if name == "lst89" else bipartite.randomized_lst(stream, seed)
        extra["max_level"] = run.max_level
        extra["bound_ok"] = run.colors_used <= 2 * math.log2(n + 1) + 1e-9
        extra["detail"] = run.report()
        return run.ledger, extra
    if name == "firstfit":
        res = general.run_first_fit(stream)
    elif name == "locally":
        res = general.color_locally_l(stream, opts["ell"], params)
    elif name == "k-colorable":
        res = general.color_k_colorable(stream, opts["k"], params)
    elif name == "k4":
        params.improved = True
        res = k4.color_4_colorable(stream, params)
    elif name == "competitive":
        res = general.competitive_wrapper(stream, params)
    else:
        raise UsageError(f"unknown algorithm {name!r}")
    extra["aborts"] = len(res.aborts)
    extra["detail"] = res.report(n)
    if res.certificate is not None and res.certificate.witness:
        extra["detail"]["certificate_verified"] = core.verify_certificate(res.certificate, stream.adjacency(), opts["oracle_cap"])
    if name == "firstfit" and stream.meta.get("generator") == "firstfit-adversary":
        extra["bound_ok"] = res.colors_used == n // 2
    if name == "k4" and res.algo is not None:
        extra["detail"]["k4"] = [e.report() for e in res.algo.epochs]
    return res.ledger, extra


def _one_run(task: tuple) -> dict:
    algorithm, instance, size, seed, opts = task
    stream = make_instance(instance, size, seed, opts["k"], opts["density"])
    t0 = time.perf_counter()
    ledger, extra = run_algorithm(algorithm, stream, seed, opts)
    report = core.validate_coloring(stream, ledger)
    row = {
        "algorithm": algorithm,
        "instance": f"{instance}-{size}",
        "n": stream.n,
        "k": opts["k"] if instance == "random-k" else "",
        "seed": seed,
        "colors": ledger.colors_used,
        "max_level": extra["max_level"],
        "aborts": extra["aborts"],
        "valid": report.ok,
        "bound_ok": extra["bound_ok"],
    }
    detail = {
        "row": row,
        "validation": report.status,
        "layers_disjoint": ledger.layers_disjoint(),
        "detail": extra.get("detail"),
        "wall_time": time.perf_counter() - t0,
    }
    return detail


def _row_key(row: dict):
    return (row["algorithm"], row["instance"], row["n"], row["seed"])


def write_csv(rows: list[dict], fh) -> None:
    w = csv.DictWriter(fh, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for row in sorted(rows, key=_row_key):
        w.writerow(row)


def summary_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# config handling


def out_dir(args) -> Path:
    d = Path(os.environ.get("ONLINECOLOR_OUT") or args.out_dir)
    d.mkdir(parents=True, exist_ok=True)
    return d


def read_seeds(args) -> list[int]:
    seeds = list(args.seed or [])
    if args.seeds_file:
        text = Path(args.seeds_file).read_text()
        seeds += [int(tok) for tok in text.replace(",", " ").split()]
    if args.seed is None and not args.seeds_file:
        seeds = [0]
    return seeds


def apply_config(args, parser: argparse.ArgumentParser) -> None:
    """Overlay keys from ``--config`` (JSON); unknown keys are a usage error."""
    if not getattr(args, "config", None):
        return
    data = json.loads(Path(args.config).read_text())
    known = set(vars(args))
    for key, val in data.items():
        dest = key.replace("-", "_")
        if dest not in known or dest in ("command", "config"):
            parser.error(f"unknown config key {key!r}")
        setattr(args, dest, val)


# ---------------------------------------------------------------------------
# subcommands


def cmd_generate(args) -> int:
    seed = read_seeds(args)[0]
    stream = make_instance(args.instance, args.size[0], seed, args.k, args.density)
    text = stream.to_text() if args.format == "text" else stream.to_json()
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    return EXIT_OK


def cmd_run(args) -> int:
    seeds = read_seeds(args)
    opts = {"scale": args.scale, "oracle_cap": args.oracle_cap, "k": args.k, "ell": args.ell, "density": args.density}
    tasks = [(args.algorithm, args.instance, size, seed, opts) for size in args.size for seed in seeds]
    if args.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(args.workers) as ex:
            details = list(ex.map(_one_run, tasks))
    else:
        details = [_one_run(t) for t in tasks]
    rows = [d["row"] for d in details]
    d = out_dir(args)
    (d / "summary.csv").write_text(summary_csv(rows))
    details.sort(key=lambda x: _row_key(x["row"]))
    (d / "runs.json").write_text(json.dumps({"created": time.time(), "runs": details}, indent=1, default=str))
    if args.format == "json":
        print(json.dumps(rows, indent=1, default=str))
    else:
        sys.stdout.write(summary_csv(rows))
    if not all(r["valid"] for r in rows):
        return EXIT_INVALID
    return EXIT_OK


def cmd_analyze_upper(args) -> int:
    L = args.L
    if L >= 6 and not args.long:
        raise UsageError("L >= 6 takes hours; pass --long")
    B = args.B if args.B is not None else analyze_upper.table3_schedule(L)
    D = 2**args.D
    b_table = analyze_upper.dp_b_prime(L, 2 * B - 1, D)
    res = analyze_upper.gamma_upper_bound(L, B, D, b_table)
    row = res.row()
    d = out_dir(args)
    with open(d / f"upper_L{L}.csv", "w") as fh:
        w = csv.DictWriter(fh, fieldnames=["L", "B", "gamma_prime", "coefficient"], lineterminator="\n")
        w.writeheader()
        w.writerow(row)
    window = {str(m): str(Fraction(int(b_table[m]), D)) for m in range(B, 2 * B)}
    dump = {**row, "D_log2": args.D, "argmax_m": res.argmax_m, "gamma_exact": str(res.gamma), "b_prime_window": window}
    (d / f"upper_L{L}.json").write_text(json.dumps(dump, indent=1))
    if args.format == "json":
        print(json.dumps(row))
    else:
        print("L,B,gamma_prime,coefficient")
        print(f"{row['L']},{row['B']},{row['gamma_prime']},{row['coefficient']}")
    return EXIT_OK


def _search_shards(task):
    mode, shards, evaluate = task
    search = analyze_lower.MatrixSearch(analyze_lower.CONFIGS[mode](), evaluate_potential=evaluate)
    return search.run(shards).to_json()


def run_lower(mode: str, workers: int = 1, checkpoint: str | None = None, evaluate: bool = True) -> analyze_lower.SearchResult:
    result = None
    if checkpoint:
        result = analyze_lower.load_checkpoint(checkpoint)
    if result is None:
        result = analyze_lower.SearchResult(mode)
    if result.mode != mode:
        raise UsageError(f"checkpoint is for mode {result.mode!r}")
    todo = [s for s in [analyze_lower.ROOT_SHARD, *analyze_lower.VALID_CODES] if s not in result.completed_shards]
    t0 = time.perf_counter()

    def save(res):
        if checkpoint:
            analyze_lower.save_checkpoint(checkpoint, res)

    if workers <= 1:
        search = analyze_lower.MatrixSearch(analyze_lower.CONFIGS[mode](), evaluate_potential=evaluate)
        result = search.run(todo, result, on_shard=save)
    else:
        with ProcessPoolExecutor(workers) as ex:
            # one shard per task; the early shards dominate the cost
            for part in ex.map(_search_shards, [(mode, [s], evaluate) for s in todo]):
                part_res = analyze_lower.SearchResult.from_json(part)
                part_res.wall_time = 0.0
                result.merge(part_res)
                save(result)
        result.wall_time += time.perf_counter() - t0
    save(result)
    return result


def cmd_analyze_lower(args) -> int:
    res = run_lower(args.mode, args.workers, args.checkpoint, evaluate=not args.counts_only)
    data = res.to_json()
    out = {"mode": args.mode, "counts": data["counts"], "min_value": data["min_value"], "argmin": data["argmin"], "wall_time": data["wall_time"]}
    (out_dir(args) / f"lower_{args.mode}.json").write_text(json.dumps(out, indent=1))
    print(json.dumps(out))
    return EXIT_OK


# verify ---------------------------------------------------------------------


def check_firstfit() -> tuple[bool, str]:
    got = {}
    for n in (4, 8, 16, 32, 64):
        got[n] = general.run_first_fit(core.gen_firstfit_adversary(n)).colors_used
    return all(got[n] == n // 2 for n in got), f"colors {got}"


def check_lst89() -> tuple[bool, str]:
    worst = 0.0
    for seed in range(200):
        kind = seed % 3
        if kind == 0:
            st = core.gen_grade_instance(1 + seed % 8, seed)
        elif kind == 1:
            st = core.gen_random_tree(10 + seed * 3, seed)
        else:
            st = core.gen_random_bipartite(10 + seed * 2, 0.2, seed)
        run = bipartite.lst89(st)
        worst = max(worst, run.colors_used / (2 * math.log2(st.n + 1)))
    return worst <= 1.0, f"max colors/(2 log2(n+1)) = {worst:.4f}"


def check_table3(rows=range(1, 6)) -> tuple[bool, str]:
    ok, parts = True, []
    for L in rows:
        res = analyze_upper.gamma_upper_bound(L, analyze_upper.table3_schedule(L))
        want = analyze_upper.published_row(L)
        got = (res.gamma_str, str(res.coefficient))
        ok &= got == want
        parts.append(f"L={L} {got[0]} {got[1]}{'' if got == want else ' (published ' + ' '.join(want) + ')'}")
    return ok, "; ".join(parts)


def check_phi1() -> tuple[bool, str]:
    low, exc = analyze_lower.phi1_merge_bound(3)
    return low >= Fraction(3, 4) and exc == {Fraction(1)}, f"min {low}, exceptional {sorted(map(str, exc))}"


def check_anchors() -> tuple[bool, str]:
    a = analyze_lower.phi2_evaluator().g_states(analyze_lower.EMPTY, analyze_lower.EMPTY)
    b = analyze_lower.PairEvaluator(analyze_lower.PHI_B).g_states(analyze_lower.EMPTY, analyze_lower.EMPTY)
    return (a, b) == (Fraction(31, 42), Fraction(1, 3)), f"phi2 {a}, phiB {b}"


def _check_search(mode: str, counts: tuple[int, int, int], target: Fraction, workers: int, checkpoint: str | None):
    res = run_lower(mode, workers, checkpoint)
    got = (res.count_pruned_pass, res.count_rows_with_1_and_2, res.count_threshold_pass)
    ok = got == counts and res.min_potential_increase is not None and res.min_potential_increase >= target
    return ok, f"counts {got}, min {res.min_potential_increase}"


CHECKS = {
    "firstfit": lambda a: check_firstfit(),
    "lst89": lambda a: check_lst89(),
    "table3": lambda a: check_table3(range(1, 11) if a.long else range(1, 6)),
    "phi1": lambda a: check_phi1(),
    "anchors": lambda a: check_anchors(),
    "phi2": lambda a: _check_search("phi2", (62195, 22558, 16829), Fraction(89, 48), a.workers, a.checkpoint),
    "phiAB": lambda a: _check_search("phiAB", (1773334, 700415, 415942), Fraction(91, 96), a.workers, a.checkpoint),
}
LONG_CHECKS = {"phiAB"}


def cmd_verify(args) -> int:
    names = list(CHECKS) if args.check == "all" else [args.check]
    if args.check == "all" and not args.long:
        names = [n for n in names if n not in LONG_CHECKS]
    failed = False
    for name in names:
        t0 = time.perf_counter()
        ok, info = CHECKS[name](args)
        failed |= not ok
        print(f"{'PASS' if ok else 'FAIL'} {name}: {info} ({time.perf_counter() - t0:.1f}s)")
    return EXIT_VERIFY if failed else EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, nargs="*", default=None)
    p.add_argument("--seeds-file", default=None)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--oracle-cap", type=int, default=core.DEFAULT_ORACLE_CAP)
    p.add_argument("--out-dir", default="out")
    p.add_argument("--format", choices=("csv", "json", "text"), default="csv")
    p.add_argument("--long", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--config", default=None, help="JSON file with option overrides")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="onlinecolor", description="Online graph coloring experiments and analyses")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write one instance stream")
    _common(g)
    g.add_argument("--instance", choices=INSTANCES, required=True)
    g.add_argument("--size", "--n", "--h", dest="size", type=int, nargs="+", default=[16])
    g.add_argument("--k", type=int, default=3)
    g.add_argument("--density", type=float, default=0.3)
    g.add_argument("--output", default=None)
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("run", help="algorithm x instance x seed matrix")
    _common(r)
    r.add_argument("--algorithm", choices=ALGORITHMS, required=True)
    r.add_argument("--instance", choices=INSTANCES, required=True)
    r.add_argument("--size", "--n", "--h", dest="size", type=int, nargs="+", default=[16])
    r.add_argument("--k", type=int, default=3)
    r.add_argument("--ell", type=int, default=2)
    r.add_argument("--density", type=float, default=0.3)
    r.set_defaults(func=cmd_run)

    u = sub.add_parser("analyze-upper", help="round-up DP bound for one L")
    _common(u)
    u.add_argument("--L", type=int, required=True)
    u.add_argument("--B", type=int, default=None, help="window start (default 2^(2L+2)+1)")
    u.add_argument("--D", type=int, default=analyze_upper.DEFAULT_LOG2_DENOMINATOR, help="log2 of the denominator")
    u.set_defaults(func=cmd_analyze_upper)

    lo = sub.add_parser("analyze-lower", help="state-matrix search")
    _common(lo)
    lo.add_argument("--mode", choices=tuple(analyze_lower.CONFIGS), required=True)
    lo.add_argument("--checkpoint", default=None)
    lo.add_argument("--counts-only", action="store_true", help="skip the expectimax on surviving matrices")
    lo.set_defaults(func=cmd_analyze_lower)

    v = sub.add_parser("verify", help="reproduce a published number; exit 4 on mismatch")
    _common(v)
    v.add_argument("check", choices=(*CHECKS, "all"))
    v.add_argument("--checkpoint", default=None)
    v.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    apply_config(args, parser)
    try:
        return args.func(args)
    except (UsageError, core.StreamError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
