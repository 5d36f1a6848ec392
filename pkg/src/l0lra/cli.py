"""Command line: ``l0lra gen | solve | reduce | bench``.

Exit codes: 0 success, 2 usage, 3 parse error, 4 parameter error,
5 the reduction identified a NO instance, 6 budget exhausted.
The environment variable L0LRA_BUDGET sets the global enumeration budget;
``--budget`` wins over it.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .additive import additive_alphabets, enumerate_supercores, hinted_supercores, run_additive
from .core import FactorPair, RationalMatrix, l0_error, parse, parse_pair, plant, serialize, serialize_pair
from .csp import DEFAULT_BUDGET
from .errors import (BudgetExhausted, CertificateError, DimensionError, IdentifiedNo, L0LRAError,
                     ParameterError, ParseError, ScaleError)
from .hardness import certify_yes, parse_set_cover, reduce
from .oracle import RANK1_MAX_ENTRIES, exact_finite_alphabet, exact_rank1
from .ptas import run_ptas
from .validation import check_fraction

log = logging.getLogger("l0lra")

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_PARAM, EXIT_NO, EXIT_BUDGET = 0, 2, 3, 4, 5, 6
SOLVER_NAMES = ("exact_rank1", "finite_alphabet", "additive", "ptas")
BENCH_COLUMNS = ("seed", "n_R", "n_C", "k", "planted_errors", "solver", "error", "time_ms", "flags")
BUDGET_ENV = "L0LRA_BUDGET"
SIDECAR_SUFFIX = ".planted.json"


# ---------------------------------------------------------------------------
# Config


@dataclass
class RunConfig:
    k: int
    solvers: tuple
    eps: Fraction = Fraction(1, 4)
    eps0: Fraction = Fraction(1, 2)
    seed: int = 0
    mode: str = "hinted"
    budget: int | None = None
    kappa1: int = 1
    max_entries: int | None = RANK1_MAX_ENTRIES

    def __post_init__(self):
        if self.k < 1:
            raise ParameterError("k must be at least 1")
        bad = [s for s in self.solvers if s not in SOLVER_NAMES]
        if bad:
            raise ParameterError(f"unknown solver(s) {bad}; choose from {SOLVER_NAMES} or 'all'")
        if self.mode not in ("hinted", "exhaustive"):
            raise ParameterError(f"unknown mode {self.mode!r}")
        if self.budget is not None and self.budget < 1:
            raise ParameterError("budget must be positive")


@dataclass
class SolverRun:
    solver: str
    status: str  # ok | skipped | failed
    error: int | None = None
    time_ms: float = 0.0
    flags: list = field(default_factory=list)
    pair: FactorPair | None = None
    message: str = ""


def _solvers(arg: str) -> tuple:
    names = tuple(s.strip() for s in arg.split(",") if s.strip())
    return SOLVER_NAMES if names == ("all",) else names


def global_budget(cli_value: int | None) -> int | None:
    if cli_value is not None:
        return cli_value
    raw = os.environ.get(BUDGET_ENV)
    if raw is None or raw == "":
        return None
    if not raw.isdigit() or int(raw) < 1:
        raise ParameterError(f"{BUDGET_ENV} must be a positive integer, got {raw!r}")
    return int(raw)


# ---------------------------------------------------------------------------
# Solvers


def _finite_alphabet(A, cfg: RunConfig, planted):
    if cfg.mode == "hinted":
        cores = hinted_supercores(A, planted)
    else:
        cores = enumerate_supercores(A.n_rows, A.n_cols, cfg.k, cfg.kappa1, "exhaustive")
    for _, built in additive_alphabets(A, cfg.k, cores):
        kw = {"budget": cfg.budget} if cfg.budget else {}
        assignment, _ = exact_finite_alphabet(A, built.alphabets, **kw)
        return assignment.to_pair(built.alphabets), []
    return None, ["no-feasible-supercore"]


def run_solver(name: str, A: RationalMatrix, cfg: RunConfig, planted: FactorPair | None) -> SolverRun:
    """Run one solver; scale and budget problems become flags rather than exceptions."""
    if cfg.mode == "hinted" and planted is None and name in ("additive", "ptas", "finite_alphabet"):
        return SolverRun(name, "skipped", flags=["needs-hints"], message="hinted mode without planted factors")
    start = time.perf_counter()
    flags = []
    try:
        if name == "exact_rank1":
            if cfg.k != 1:
                return SolverRun(name, "skipped", flags=["unsupported-k"], message="exact_rank1 needs k = 1")
            pair, _ = exact_rank1(A, max_entries=cfg.max_entries, budget=cfg.budget)
        elif name == "finite_alphabet":
            pair, flags = _finite_alphabet(A, cfg, planted)
            if pair is None:
                return SolverRun(name, "failed", flags=flags, time_ms=_ms(start))
        elif name == "additive":
            hints = hinted_supercores(A, planted) if cfg.mode == "hinted" else None
            sol = run_additive(A, cfg.k, cfg.eps, mode=cfg.mode, seed=cfg.seed, hints=hints,
                               kappa1=cfg.kappa1, budget=cfg.budget or DEFAULT_BUDGET)
            pair, flags = sol.pair, list(sol.flags)
        else:
            sol = run_ptas(A, cfg.k, cfg.eps0, mode=cfg.mode, planted=planted, seed=cfg.seed,
                           max_branches=cfg.budget)
            pair, flags = sol.pair, list(sol.flags)
    except ScaleError as exc:
        return SolverRun(name, "failed", flags=["scale"], time_ms=_ms(start), message=str(exc))
    except BudgetExhausted as exc:
        return SolverRun(name, "failed", flags=["budget-exhausted"], time_ms=_ms(start), message=str(exc))
    elapsed = _ms(start)
    # Count errors from a re-parsed copy of the witness, independent of the solver's own tally.
    witness = parse_pair(serialize_pair(pair))
    err = l0_error(A, witness.product())
    relaxed = sorted(f[len("param:"):] for f in flags if f.startswith("param:"))
    flags = [{"params-overridden": "constraint-overrides"}.get(f, f) for f in flags if not f.startswith("param:")]
    message = ""
    if relaxed:
        flags.append("degraded")
        message = "parameter constraints not met: " + ", ".join(relaxed)
    return SolverRun(name, "ok", err, elapsed, sorted(set(flags)), pair, message)


def _ms(start: float) -> float:
    return round((time.perf_counter() - start) * 1000, 3)


# ---------------------------------------------------------------------------
# Sidecar


def planted_sidecar(inst) -> dict:
    return {
        "format": "l0lra-planted/1",
        "seed": inst.seed,
        "shape": list(inst.A.shape),
        "k": inst.k,
        "errors": len(inst.corrupted),
        "U": [[str(x) for x in r] for r in inst.pair.U.rows],
        "W": [[str(x) for x in r] for r in inst.pair.W.rows],
        "corrupted": [list(c) for c in sorted(inst.corrupted)],
    }


def load_sidecar(path: Path) -> FactorPair:
    try:
        data = json.loads(path.read_text())
        k = int(data["k"])
        U = RationalMatrix([[Fraction(x) for x in r] for r in data["U"]], k)
        W = RationalMatrix([[Fraction(x) for x in r] for r in data["W"]], k)
        return FactorPair(U, W)
    except (ValueError, KeyError, TypeError, DimensionError) as exc:
        raise ParseError(f"bad sidecar {path}: {exc}") from exc


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# Subcommands


def cmd_gen(args) -> int:
    n_rows = args.n_rows or args.n
    n_cols = args.n_cols or args.n
    if not n_rows or not n_cols:
        raise ParameterError("give --n or both --n-rows and --n-cols")
    if args.errors < 0 or args.errors > n_rows * n_cols:
        raise ParameterError(f"cannot corrupt {args.errors} of {n_rows * n_cols} entries")
    if args.k < 1 or args.k > min(n_rows, n_cols):
        raise ParameterError("k must lie in [1, min(n_rows, n_cols)]")
    inst = plant(n_rows, n_cols, args.k, args.errors, args.seed)
    out = Path(args.out)
    out.write_text(serialize(inst.A))
    Path(str(out) + SIDECAR_SUFFIX).write_text(_dump_json(planted_sidecar(inst)))
    return EXIT_OK


def _read(path: str, parser):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParameterError(f"cannot read {path}: {exc}") from exc
    return parser(text)


def cmd_solve(args) -> int:
    A = _read(args.instance, parse)
    sidecar = Path(args.planted) if args.planted else Path(args.instance + SIDECAR_SUFFIX)
    mode = args.mode or ("hinted" if sidecar.exists() else "exhaustive")
    cfg = RunConfig(k=args.k, solvers=_solvers(args.solver), eps=check_fraction(args.eps, "eps"),
                    eps0=check_fraction(args.eps0, "eps0"), seed=args.seed, mode=mode,
                    budget=global_budget(args.budget), kappa1=args.kappa1,
                    max_entries=None if args.max_entries == 0 else args.max_entries)
    planted = load_sidecar(sidecar) if mode == "hinted" and sidecar.exists() else None
    if mode == "hinted" and planted is None:
        raise ParameterError(f"hinted mode needs planted factors; {sidecar} not found")
    out = Path(args.out)
    runs = []
    for name in cfg.solvers:
        run = run_solver(name, A, cfg, planted)
        record = {"solver": run.solver, "status": run.status, "error": run.error,
                  "time_ms": run.time_ms, "flags": run.flags, "witness": None, "message": run.message}
        if run.pair is not None:
            wpath = Path(f"{out}.{name}.witness")
            wpath.write_text(serialize_pair(run.pair))
            record["witness"] = str(wpath)
        runs.append(record)
    result = {
        "format": "l0lra-run/1",
        "instance": args.instance,
        "shape": list(A.shape),
        "k": cfg.k,
        "mode": cfg.mode,
        "seed": cfg.seed,
        "eps": str(cfg.eps),
        "eps0": str(cfg.eps0),
        "budget": cfg.budget,
        "solvers": runs,
    }
    out.write_text(_dump_json(result))
    if runs and all(r["status"] == "failed" and "budget-exhausted" in r["flags"] for r in runs):
        return EXIT_BUDGET
    return EXIT_OK


def _cover_arg(text: str) -> list:
    toks = text.replace(",", " ").split()
    if not toks or not all(t.isdigit() and int(t) >= 1 for t in toks):
        raise ParameterError(f"--cover takes 1-based set numbers, got {text!r}")
    return [int(t) - 1 for t in toks]


def cmd_reduce(args) -> int:
    inst = _read(args.setcover, parse_set_cover)
    out = reduce(inst)
    Path(args.out).write_text(serialize(out.M))
    summary = {"format": "l0lra-reduction/1", "universe_size": inst.universe_size,
               "n_sets": inst.n_sets, "k": out.k, "shape": list(out.M.shape),
               "w": [str(x) for x in out.w], "kernel_basis": [[str(x) for x in b] for b in out.kernel_basis]}
    if args.cover:
        cover = _cover_arg(args.cover)
        if any(t >= inst.n_sets for t in cover):
            raise ParameterError("cover index exceeds the number of sets")
        pair, err = certify_yes(out, cover)
        cert = Path(args.out + ".certificate")
        cert.write_text(serialize_pair(pair))
        summary.update({"cover": [t + 1 for t in cover], "certificate": str(cert),
                        "certificate_error": l0_error(out.M, parse_pair(cert.read_text()).product())})
    text = _dump_json(summary)
    if args.summary:
        Path(args.summary).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _int_list(text: str) -> list:
    out = []
    for part in text.replace(" ", "").split(","):
        if not part:
            continue
        if "-" in part[1:]:
            a, b = part.split("-", 1)
            out.extend(range(int(a), int(b) + 1))
        else:
            out.append(int(part))
    return out


def load_suite(args) -> dict:
    if args.suite:
        try:
            data = json.loads(Path(args.suite).read_text())
        except (OSError, ValueError) as exc:
            raise ParseError(f"bad suite file {args.suite}: {exc}") from exc
    else:
        data = {}
    suite = {
        "sizes": data.get("sizes", _int_list(args.sizes)),
        "ks": data.get("ks", _int_list(args.ks)),
        "errors": data.get("errors", _int_list(args.errors)),
        "seeds": data.get("seeds", _int_list(args.seeds)),
        "solvers": list(_solvers(",".join(data["solvers"]) if "solvers" in data else args.solver)),
        "eps": str(data.get("eps", args.eps)),
        "eps0": str(data.get("eps0", args.eps0)),
    }
    for key in ("sizes", "ks", "errors", "seeds"):
        if not all(isinstance(x, int) and x >= 0 for x in suite[key]):
            raise ParameterError(f"suite {key} must be nonnegative integers")
    RunConfig(k=1, solvers=tuple(suite["solvers"]))
    return suite


def _bench_case(case) -> list:
    n, k, e, seed, solvers, eps, eps0, budget = case
    rows = []
    base = {"seed": seed, "n_R": n, "n_C": n, "k": k, "planted_errors": e}
    try:
        if k > n or e > n * n:
            raise ParameterError("infeasible size")
        inst = plant(n, n, k, e, seed)
    except L0LRAError as exc:
        return [dict(base, solver=s, error="", time_ms="", flags=f"instance-error:{type(exc).__name__}")
                for s in solvers]
    cfg = RunConfig(k=k, solvers=tuple(solvers), eps=Fraction(eps), eps0=Fraction(eps0), seed=seed,
                    mode="hinted", budget=budget)
    for s in solvers:
        try:
            run = run_solver(s, inst.A, cfg, inst.pair)
            rows.append(dict(base, solver=s, error="" if run.error is None else run.error,
                             time_ms=run.time_ms, flags=";".join([run.status] + run.flags)))
        except L0LRAError as exc:
            rows.append(dict(base, solver=s, error="", time_ms="", flags=f"failed;{type(exc).__name__}"))
    return rows


def bench_rows(suite: dict, budget: int | None = None, jobs: int = 1) -> list:
    cases = [(n, k, e, seed, suite["solvers"], suite["eps"], suite["eps0"], budget)
             for n in suite["sizes"] for k in suite["ks"] for e in suite["errors"] for seed in suite["seeds"]]
    if jobs > 1 and len(cases) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_bench_case, cases))
    else:
        chunks = [_bench_case(c) for c in cases]
    return [r for chunk in chunks for r in chunk]


def cmd_bench(args) -> int:
    suite = load_suite(args)
    rows = bench_rows(suite, global_budget(args.budget), args.jobs)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=BENCH_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    if args.out:
        Path(args.out).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="l0lra", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a planted instance and its sidecar")
    g.add_argument("--n", type=int, help="square size")
    g.add_argument("--n-rows", type=int)
    g.add_argument("--n-cols", type=int)
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--errors", type=int, default=0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="run solvers on an instance and write JSON results")
    s.add_argument("instance")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--solver", default="all", help="comma list of " + ", ".join(SOLVER_NAMES) + " or 'all'")
    s.add_argument("--eps", default="1/4")
    s.add_argument("--eps0", default="1/2")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--mode", choices=("hinted", "exhaustive"))
    s.add_argument("--planted", help="sidecar path (default: INSTANCE.planted.json)")
    s.add_argument("--budget", type=int)
    s.add_argument("--kappa1", type=int, default=1)
    s.add_argument("--max-entries", type=int, default=RANK1_MAX_ENTRIES, help="0 lifts the guard")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_solve)

    r = sub.add_parser("reduce", help="Set Cover file to an instance matrix, optionally certified")
    r.add_argument("setcover")
    r.add_argument("--out", required=True)
    r.add_argument("--cover", help="1-based set numbers of an exact cover, e.g. '1,3'")
    r.add_argument("--summary", help="write the JSON summary here instead of stdout")
    r.set_defaults(func=cmd_reduce)

    b = sub.add_parser("bench", help="sweep planted instances and emit CSV")
    b.add_argument("--suite", help="JSON file with sizes, ks, errors, seeds, solvers")
    b.add_argument("--sizes", default="")
    b.add_argument("--ks", default="1")
    b.add_argument("--errors", default="0")
    b.add_argument("--seeds", default="")
    b.add_argument("--solver", default="all")
    b.add_argument("--eps", default="1/4")
    b.add_argument("--eps0", default="1/2")
    b.add_argument("--budget", type=int)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ParseError as exc:
        log.error("parse error: %s", exc)
        return EXIT_PARSE
    except IdentifiedNo as exc:
        log.error("identified NO instance: %s", exc)
        return EXIT_NO
    except BudgetExhausted as exc:
        log.error("budget exhausted: %s", exc)
        return EXIT_BUDGET
    except (ParameterError, DimensionError, CertificateError, ScaleError) as exc:
        log.error("%s", exc)
        return EXIT_PARAM
    except ValueError as exc:
        log.error("bad value: %s", exc)
        return EXIT_PARAM


if __name__ == "__main__":
    sys.exit(main())
