"""``fracroot`` command line: load a problem file, sweep the order, report roots."""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence, TextIO

from .errors import FracRootError, PreconditionError
from .expr import SystemF, parse
from .fracderiv import DEFAULT_N_TRUNC, DerivKind
from .linalg import norm2
from .solvers import RunRecord, SolverConfig, SolverKind, is_admissible_order, run
from .sweep import (DEFAULT_ALPHA_EXCL, DEFAULT_ALPHA_STEP, DEFAULT_EPS_DEDUP,
                    RootRegistry, make_grid, sweep)

__all__ = ["main", "ProblemFile", "load_problem", "format_complex", "EXIT_OK",
           "EXIT_USAGE", "EXIT_PROBLEM", "EXIT_NO_ROOTS"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PROBLEM = 2
EXIT_NO_ROOTS = 3

# keys accepted in a problem file's "defaults" block, with their types
_DEFAULT_KEYS: dict[str, type] = {
    "method": str, "deriv": str, "alpha_step": float, "alpha_excl": float,
    "alpha": float, "tol": float, "max_iter": int, "delta": float,
    "div_bound": float, "eps_shift": float, "eps_dedup": float, "n_trunc": int,
    "chord_slope": float, "jobs": int,
}

_BUILTIN = {
    "method": SolverKind.FRAC_NEWTON.value, "deriv": DerivKind.RIEMANN_LIOUVILLE.value,
    "alpha_step": DEFAULT_ALPHA_STEP, "alpha_excl": DEFAULT_ALPHA_EXCL, "alpha": None,
    "tol": 1e-4, "max_iter": 40, "delta": 0.5, "div_bound": 1e6, "eps_shift": 1e-3,
    "eps_dedup": DEFAULT_EPS_DEDUP, "n_trunc": DEFAULT_N_TRUNC, "chord_slope": None,
    "jobs": 1,
}


class ProblemError(Exception):
    """The problem file is missing, malformed, or inconsistent."""


@dataclass
class ProblemFile:
    name: str
    n: int
    equations: list[str]
    x0: list[float]
    defaults: dict[str, Any] = field(default_factory=dict)
    system: SystemF | None = None


def load_problem(path: str | Path) -> ProblemFile:
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ProblemError(f"cannot read problem file {path}: {exc.strerror or exc}") from exc
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ProblemError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ProblemError(f"{path}: top level must be an object")
    missing = [k for k in ("name", "n", "equations", "x0") if k not in data]
    if missing:
        raise ProblemError(f"{path}: missing key(s) {', '.join(missing)}")
    unknown = set(data) - {"name", "n", "equations", "x0", "defaults"}
    if unknown:
        raise ProblemError(f"{path}: unknown key(s) {', '.join(sorted(unknown))}")

    n = data["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ProblemError(f"{path}: n must be a positive integer")
    eqs = data["equations"]
    if not isinstance(eqs, list) or not all(isinstance(e, str) for e in eqs):
        raise ProblemError(f"{path}: equations must be a list of strings")
    if len(eqs) != n:
        raise ProblemError(f"{path}: {len(eqs)} equations for n={n}")
    x0 = data["x0"]
    if (not isinstance(x0, list) or len(x0) != n
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x0)):
        raise ProblemError(f"{path}: x0 must be a list of {n} numbers")

    defaults = data.get("defaults") or {}
    if not isinstance(defaults, dict):
        raise ProblemError(f"{path}: defaults must be an object")
    for key, value in defaults.items():
        if key not in _DEFAULT_KEYS:
            raise ProblemError(f"{path}: unknown default {key!r}")
        want = _DEFAULT_KEYS[key]
        ok = isinstance(value, str) if want is str else (
            isinstance(value, (int, float)) and not isinstance(value, bool))
        if want is int and ok and value != int(value):
            ok = False
        if not ok:
            raise ProblemError(f"{path}: default {key!r} has the wrong type")

    try:
        system = parse(eqs, n)
    except FracRootError as exc:
        raise ProblemError(f"{path}: {exc}") from exc
    return ProblemFile(str(data["name"]), n, list(eqs), [float(v) for v in x0],
                       dict(defaults), system)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fracroot", description="Fractional Newton-type root finding.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    s = sub.add_parser("solve", help="sweep the order and report the roots found")
    s.add_argument("--problem", required=True, help="problem JSON file")
    s.add_argument("--method", choices=[k.value for k in SolverKind])
    s.add_argument("--deriv", choices=[k.value for k in DerivKind])
    s.add_argument("--alpha-step", type=float)
    s.add_argument("--alpha-excl", type=float)
    s.add_argument("--alpha", type=float, help="run a single order instead of a grid")
    s.add_argument("--tol", type=float)
    s.add_argument("--max-iter", type=int)
    s.add_argument("--delta", type=float)
    s.add_argument("--div-bound", type=float)
    s.add_argument("--eps-shift", type=float)
    s.add_argument("--eps-dedup", type=float)
    s.add_argument("--n-trunc", type=int)
    s.add_argument("--chord-slope", type=float)
    s.add_argument("--out", choices=["table", "csv", "json"], default="table")
    s.add_argument("--trace", metavar="PATH", help="write iterate traces of the reported roots")
    s.add_argument("--jobs", type=int)
    return parser


def _settings(args: argparse.Namespace, problem: ProblemFile) -> dict[str, Any]:
    out = dict(_BUILTIN)
    out.update(problem.defaults)
    for key in _BUILTIN:
        value = getattr(args, key, None)
        if value is not None:
            out[key] = value
    return out


def format_complex(z: complex, digits: int = 8) -> str:
    re_s = f"{z.real:.{digits}f}"
    im = z.imag
    if f"{abs(im):.{digits}f}" == f"{0:.{digits}f}":
        return re_s
    sign = "-" if im < 0 else "+"
    return f"{re_s} {sign} {abs(im):.{digits}f}i"


@dataclass
class _Row:
    m: int
    record: RunRecord
    residual: float


def _rows(f: SystemF, registry: RootRegistry) -> list[_Row]:
    ordered = sorted(registry.entries, key=lambda e: e.alpha)
    rows = []
    for m, rec in enumerate(ordered, 1):
        try:
            res = norm2(f.eval(rec.final_x))
        except (FracRootError, ArithmeticError):
            res = math.inf
        rows.append(_Row(m, rec, res))
    return rows


def _write_table(out: TextIO, rows: list[_Row], n: int) -> None:
    header = ["m", "alpha_m"] + [f"xi_{j}" for j in range(1, n + 1)] + [
        "|xi_m - xi_m-1|_2", "|f(xi_m)|_2", "R_m"]
    body = []
    for r in rows:
        rec = r.record
        body.append([str(r.m), f"{rec.alpha:.8f}"] + [format_complex(c) for c in rec.final_x]
                    + [f"{rec.last_step:.5e}", f"{r.residual:.5e}", str(rec.iterations)])
    widths = [max(len(h), *(len(b[i]) for b in body)) if body else len(h)
              for i, h in enumerate(header)]
    out.write("  ".join(h.rjust(w) for h, w in zip(header, widths)) + "\n")
    out.write("  ".join("-" * w for w in widths) + "\n")
    for b in body:
        out.write("  ".join(c.rjust(w) for c, w in zip(b, widths)) + "\n")


def _write_csv(out: TextIO, rows: list[_Row], n: int) -> None:
    w = csv.writer(out, lineterminator="\n")
    comps = [f"{p}_x{j}" for j in range(1, n + 1) for p in ("re", "im")]
    w.writerow(["m", "alpha"] + comps + ["step_norm", "residual", "iterations"])
    for r in rows:
        rec = r.record
        parts = [repr(v) for c in rec.final_x for v in (c.real, c.imag)]
        w.writerow([r.m, repr(rec.alpha)] + parts
                   + [repr(rec.last_step), repr(r.residual), rec.iterations])


def _json_float(v: float):
    return v if math.isfinite(v) else str(v)


def _write_json(out: TextIO, rows: list[_Row], problem: ProblemFile, settings: dict,
                records: list[RunRecord]) -> None:
    counts = {"converged": 0, "diverged": 0, "exhausted": 0}
    for rec in records:
        counts[rec.outcome.value] += 1
    doc = {
        "problem": problem.name,
        "method": settings["method"],
        "deriv": settings["deriv"],
        "runs": counts,
        "roots": [{
            "m": r.m,
            "alpha": r.record.alpha,
            "xi": [[c.real, c.imag] for c in r.record.final_x],
            "step_norm": _json_float(r.record.last_step),
            "residual": _json_float(r.residual),
            "iterations": r.record.iterations,
        } for r in rows],
    }
    json.dump(doc, out, indent=2)
    out.write("\n")


def _write_trace(path: str, f: SystemF, kind: SolverKind, rows: list[_Row],
                 x0: Sequence[float], cfg: SolverConfig) -> None:
    # Runs are deterministic, so re-running the reported orders reproduces
    # their trajectories without holding every run's trace in memory.
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        comps = [f"{p}_x{j}" for j in range(1, f.n + 1) for p in ("re", "im")]
        w.writerow(["alpha", "iteration", "alpha_eff"] + comps + ["residual"])
        for r in rows:
            rec = run(f, kind, r.record.alpha, x0, cfg, trace=True)
            for t in rec.trace or []:
                w.writerow([repr(rec.alpha), t.iteration, repr(t.alpha_eff)]
                           + [repr(v) for c in t.x for v in (c.real, c.imag)]
                           + [repr(t.residual)])


def _solve(args: argparse.Namespace, stdout: TextIO, stderr: TextIO) -> int:
    try:
        problem = load_problem(args.problem)
    except ProblemError as exc:
        stderr.write(f"fracroot: {exc}\n")
        return EXIT_PROBLEM

    s = _settings(args, problem)
    try:
        kind = SolverKind(s["method"])
        deriv = DerivKind(s["deriv"])
        cfg = SolverConfig(tol=s["tol"], max_iter=s["max_iter"], delta=s["delta"],
                           div_bound=s["div_bound"], eps_shift=s["eps_shift"],
                           chord_slope=s["chord_slope"], deriv_kind=deriv,
                           n_trunc=s["n_trunc"])
        if s["jobs"] < 1:
            raise ValueError("jobs must be >= 1")
        if not s["eps_dedup"] > 0:
            raise ValueError("eps-dedup must be positive")
        if s["alpha"] is not None:
            if kind.fractional and not is_admissible_order(s["alpha"]):
                raise ValueError(f"order {s['alpha']} outside (-2, 2) minus {{-1, 0, 1}}")
            grid: Sequence[float] = [float(s["alpha"])]
        elif kind.fractional:
            grid = make_grid(s["alpha_step"], s["alpha_excl"]).values
        else:
            grid = [1.0]
    except (ValueError, FracRootError) as exc:
        stderr.write(f"fracroot: {exc}\n")
        return EXIT_USAGE

    if kind.fractional and not any(problem.x0):
        stderr.write(f"fracroot: {args.problem}: x0 must be nonzero for {kind.value}\n")
        return EXIT_PROBLEM
    try:
        registry, records = sweep(problem.system, kind, grid, problem.x0, cfg,
                                  eps_dedup=s["eps_dedup"], jobs=s["jobs"])
    except PreconditionError as exc:
        stderr.write(f"fracroot: {exc}\n")
        return EXIT_USAGE

    rows = _rows(problem.system, registry)
    if args.out == "table":
        _write_table(stdout, rows, problem.n)
    elif args.out == "csv":
        _write_csv(stdout, rows, problem.n)
    else:
        _write_json(stdout, rows, problem, s, records)
    if args.trace:
        try:
            _write_trace(args.trace, problem.system, kind, rows, problem.x0, cfg)
        except OSError as exc:
            stderr.write(f"fracroot: cannot write trace: {exc}\n")
            return EXIT_USAGE
    if not rows:
        stderr.write(f"fracroot: no root converged over {len(records)} run(s)\n")
        return EXIT_NO_ROOTS
    return EXIT_OK


def main(argv: Sequence[str] | None = None, stdout: TextIO | None = None,
         stderr: TextIO | None = None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else EXIT_USAGE
    if args.command == "solve":
        return _solve(args, stdout, stderr)
    return EXIT_USAGE  # pragma: no cover


if __name__ == "__main__":
    sys.exit(main())
