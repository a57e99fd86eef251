"""``rmq-lab``: generate instances, run solvers, print estimates.

Exit codes: 0 success (for ``solve``: a verified solution was found),
2 the search proved the instance unsatisfiable, 3 inconclusive,
64 usage or parameter error.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
import tempfile
import time
from dataclasses import dataclass, field

from . import __version__
from .errors import RmqError, SizeError
from .instance import brute_force_solve, default_m, parse_instance, plant_instance, render_instance

HEADER = "# rmq-lab v1"
EXIT_OK, EXIT_UNSAT, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 2, 3, 64
DEFAULT_SEED = 42

SOLVE_METHODS = ("brute", "xl", "hybrid-full", "hybrid-partial", "hybrid-different", "polymethod", "alt-xl")
ESTIMATE_METHODS = ("plain", "plain-fq", "brute", "full", "partial", "different", "hybrid", "poly",
                    "bjorklund", "dinur", "plain-alt", "full-alt", "partial-alt", "dinur-alt", "simple")
FIGURE_LS = (2, 3, 4, 5, 6, 10, 20, 50, 100)
COMPACT_LS = (2, 4, 8, 16, 32, 64, 128)

# (s, w) rows small enough for a desk run
TABLE1_QUADRATIC = ((2, 5), (2, 6), (2, 7), (3, 4), (4, 2), (4, 3), (5, 2))
TABLE1_COMPACT = ((2, 5), (2, 6), (2, 8), (3, 4), (4, 2), (5, 2))
TABLE1_FIELDS = ("s", "w", "l", "m", "seed", "d_quadratic", "rows_quadratic", "cols_quadratic",
                 "d_alt", "rows_alt", "cols_alt", "elapsed_quadratic_s", "elapsed_alt_s")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)
    seed: int = DEFAULT_SEED
    out: str | None = None
    fmt: str = "csv"


def _emit(text: str, out: str | None) -> None:
    if not out or out == "-":
        sys.stdout.write(text)
        return
    d = os.path.dirname(os.path.abspath(out))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".rmq-lab-")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, out)


def _csv(fields, rows) -> str:
    buf = io.StringIO()
    buf.write(HEADER + "\n")
    wr = csv.DictWriter(buf, fieldnames=list(fields), lineterminator="\n")
    wr.writeheader()
    for r in rows:
        wr.writerow(r)
    return buf.getvalue()


def _apply_thread_cap() -> None:
    cap = os.environ.get("RMQ_LAB_THREADS")
    if not cap:
        return
    try:
        n = max(1, int(cap))
    except ValueError:
        raise UsageError(f"RMQ_LAB_THREADS={cap!r} is not an integer") from None
    import numba

    numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


# --- commands ------------------------------------------------------------------


def cmd_gen(cfg: RunConfig) -> int:
    p = cfg.params
    m = p["m"] if p.get("m") is not None else default_m(p["l"], p["w"])
    inst = plant_instance(p["l"], p["w"], m, cfg.seed)
    _emit(render_instance(inst), cfg.out)
    return EXIT_OK


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.replace(";", ",").split(",") if x.strip()]


def run_solver(inst, method: str, p: dict):
    from .altmodel import alt_solve
    from .modeling import SolveReport, hybrid_solve, solve_plain
    from .polymethod import PolyMethodParams, default_params, polymethod_solve

    d_max = p.get("d_max")
    if method == "brute":
        t0 = time.perf_counter()
        rep = SolveReport("brute", inst.l, inst.w, inst.m, inst.seed)
        rep.solutions = brute_force_solve(inst)
        rep.guesses_tried = inst.l**inst.w
        rep.status = "solved" if rep.solutions else "unsat"
        rep.elapsed = time.perf_counter() - t0
        return rep
    if method == "xl":
        return solve_plain(inst, d_max)
    if method == "hybrid-full":
        return hybrid_solve(inst, "full", p.get("gamma") if p.get("gamma") is not None else 0.5,
                            d_max, all_solutions=p.get("all", False))
    if method == "hybrid-partial":
        return hybrid_solve(inst, "partial", p.get("l_prime") or 2, d_max, all_solutions=p.get("all", False))
    if method == "hybrid-different":
        wins = _int_list(p["windows"]) if p.get("windows") else [2] * inst.w
        return hybrid_solve(inst, "different", wins, d_max, all_solutions=p.get("all", False))
    if method == "polymethod":
        base = default_params(inst.l, seed=inst.seed, t=p.get("t"))
        if p.get("gamma") is not None or p.get("l_prime"):
            base = PolyMethodParams(p.get("gamma") or base.gamma, p.get("l_prime") or base.l_prime,
                                    t=p.get("t"), seed=inst.seed)
        return polymethod_solve(inst, base)
    if method == "alt-xl":
        return alt_solve(inst, d_max, s_prime=p.get("s_prime"))
    raise UsageError(f"unknown method {method!r}")


def cmd_solve(cfg: RunConfig) -> int:
    from .modeling import CSV_FIELDS

    p = cfg.params
    with open(p["file"]) as fh:
        inst = parse_instance(fh.read())
    rep = run_solver(inst, p["method"], p)
    _emit(_csv(CSV_FIELDS, [rep.csv_row()]), cfg.out)
    return {"solved": EXIT_OK, "unsat": EXIT_UNSAT}.get(rep.status, EXIT_INCONCLUSIVE)


def cmd_estimate(cfg: RunConfig) -> int:
    from .estimator import REPORT_FIELDS, estimate

    p = cfg.params
    rep = estimate(p["method"], p["l"], p["omega"], q=p.get("q") or 2, split=p.get("split"))
    _emit(_csv(REPORT_FIELDS, [rep.csv_row()]), cfg.out)
    if rep.beats_brute_force is False:
        print(f"note: exhaustive search is cheaper at l={rep.l}, q={rep.q}", file=sys.stderr)
    for n in rep.notes:
        print(f"note: {n}", file=sys.stderr)
    return EXIT_OK


def cmd_compare(cfg: RunConfig) -> int:
    from .estimator import COMPACT_METHODS, REPORT_FIELDS, STANDARD_METHODS, compare_all

    p = cfg.params
    compact = p.get("sheet") == "alt"
    ls = _int_list(p["ls"]) if p.get("ls") else list(COMPACT_LS if compact else FIGURE_LS)
    methods = _csv_methods(p.get("methods")) or (COMPACT_METHODS if compact else STANDARD_METHODS)
    rows = []
    for r in compare_all(ls, p["omega"], methods):
        if r.report is None:
            rows.append({"method": r.method, "l": r.l})
            print(f"note: {r.method} l={r.l}: {r.error}", file=sys.stderr)
        else:
            row = r.report.csv_row()
            row["method"] = r.method
            rows.append(row)
    _emit(_csv(REPORT_FIELDS, rows), cfg.out)
    return EXIT_OK


def _csv_methods(text):
    return tuple(x.strip() for x in text.split(",") if x.strip()) if text else None


def _first_unique_seed(l: int, w: int, m: int, seed: int, tries: int = 50) -> tuple:
    for s in range(seed, seed + tries):
        inst = plant_instance(l, w, m, s)
        if len(brute_force_solve(inst)) == 1:
            return inst, s
    inst = plant_instance(l, w, m, seed)
    return inst, seed


def table1_row(s: int, w: int, seed: int = DEFAULT_SEED, quadratic: bool = True, compact: bool = True) -> dict:
    """Solving degrees of both modelings on one planted instance with a unique solution."""
    from .altmodel import alt_solve
    from .modeling import solve_plain

    l = 1 << s
    m = default_m(l, w)
    inst, used = _first_unique_seed(l, w, m, seed)
    row = {"s": s, "w": w, "l": l, "m": m, "seed": used}
    if quadratic:
        rep = solve_plain(inst)
        row.update(d_quadratic=rep.solving_degree or "", rows_quadratic=rep.max_rows,
                   cols_quadratic=rep.max_cols, elapsed_quadratic_s=f"{rep.elapsed:.2f}")
    if compact:
        rep = alt_solve(inst)
        row.update(d_alt=rep.solving_degree or "", rows_alt=rep.max_rows,
                   cols_alt=rep.max_cols, elapsed_alt_s=f"{rep.elapsed:.2f}")
    return row


def cmd_table1(cfg: RunConfig) -> int:
    p = cfg.params
    if p.get("rows"):
        rows = []
        for item in p["rows"]:
            s, w = (int(x) for x in item.split(","))
            rows.append((s, w))
    else:
        rows = sorted(set(TABLE1_QUADRATIC) | set(TABLE1_COMPACT))
    out = []
    for s, w in rows:
        q_ok, c_ok = (s, w) in TABLE1_QUADRATIC, (s, w) in TABLE1_COMPACT
        if not (q_ok or c_ok):
            if not p.get("force"):
                raise SizeError(f"row ({s},{w}) is outside the desk-scale list; pass --force to run it")
            print(f"warning: forcing row ({s},{w}); it may take very long", file=sys.stderr)
            q_ok = c_ok = True
        out.append(table1_row(s, w, cfg.seed, q_ok, c_ok))
    _emit(_csv(TABLE1_FIELDS, out), cfg.out)
    return EXIT_OK


# --- argument parsing ----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="rmq-lab", description="Regular MQ experiments.")
    ap.add_argument("--version", action="version", version=f"rmq-lab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
        sp.add_argument("--out", default=None, help="output path (default stdout)")

    g = sub.add_parser("gen", help="write a planted instance")
    g.add_argument("--l", type=int, required=True)
    g.add_argument("--w", type=int, required=True)
    g.add_argument("--m", type=int, default=None)
    common(g)

    s = sub.add_parser("solve", help="solve an instance file, print one CSV row")
    s.add_argument("file")
    s.add_argument("--method", choices=SOLVE_METHODS, default="xl")
    s.add_argument("--d-max", dest="d_max", type=int, default=None)
    s.add_argument("--gamma", type=float, default=None)
    s.add_argument("--l-prime", dest="l_prime", type=int, default=None)
    s.add_argument("--windows", default=None, help="per-block window lengths, comma separated")
    s.add_argument("--t", type=int, default=None, help="polymethod repetitions")
    s.add_argument("--s-prime", dest="s_prime", type=int, default=None)
    s.add_argument("--all", action="store_true", help="hybrid: try every guess")
    common(s)

    e = sub.add_parser("estimate", help="asymptotic exponent of one method")
    e.add_argument("--method", choices=ESTIMATE_METHODS, required=True)
    e.add_argument("--l", type=int, required=True)
    e.add_argument("--q", type=int, default=None)
    e.add_argument("--omega", type=float, default=2.0)
    e.add_argument("--split", type=int, default=None)
    common(e)

    c = sub.add_parser("compare", help="figure data for many l")
    c.add_argument("--l", dest="ls", default=None, help="comma separated window lengths")
    c.add_argument("--omega", type=float, default=2.0)
    c.add_argument("--sheet", choices=("standard", "alt"), default="standard")
    c.add_argument("--methods", default=None)
    common(c)

    t = sub.add_parser("table1", help="solving degrees of both modelings")
    t.add_argument("--row", dest="rows", action="append", default=None, metavar="S,W")
    t.add_argument("--force", action="store_true")
    common(t)
    return ap


COMMANDS = {"gen": cmd_gen, "solve": cmd_solve, "estimate": cmd_estimate,
            "compare": cmd_compare, "table1": cmd_table1}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    params = {k: v for k, v in vars(args).items() if k not in ("command", "seed", "out")}
    cfg = RunConfig(args.command, params, args.seed, args.out)
    try:
        _apply_thread_cap()
        return COMMANDS[cfg.command](cfg)
    except (UsageError, RmqError, ValueError, OSError) as exc:
        print(f"rmq-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
