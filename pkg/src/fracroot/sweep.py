"""Order sweep: run one method for every order on a grid and collect roots.

Runs are independent, so they may execute in worker processes; results
are always folded into the registry in ascending order of ``alpha``, which
makes the registry independent of the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .errors import EmptyGridError
from .expr import SystemF
from .linalg import norm2
from .solvers import RunRecord, SolverConfig, SolverKind, run

__all__ = [
    "AlphaGrid", "RootRegistry", "make_grid", "offer", "sweep",
    "DEFAULT_ALPHA_STEP", "DEFAULT_ALPHA_EXCL", "DEFAULT_EPS_DEDUP",
]

DEFAULT_ALPHA_STEP = 1e-4
DEFAULT_ALPHA_EXCL = 0.02
DEFAULT_EPS_DEDUP = 1e-2

_EXCLUDED = (-1.0, 0.0, 1.0)


@dataclass(frozen=True)
class AlphaGrid:
    values: tuple[float, ...]

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("grid values must be strictly increasing")
        if any(not -2 < v < 2 for v in self.values):
            raise ValueError("grid values must lie in (-2, 2)")

    def __iter__(self) -> Iterator[float]:
        return iter(self.values)

    def __len__(self) -> int:
        return len(self.values)


def make_grid(step: float = DEFAULT_ALPHA_STEP, r_excl: float = DEFAULT_ALPHA_EXCL) -> AlphaGrid:
    """Uniform orders ``-2 + k*step`` strictly inside (-2, 2).

    Orders within ``r_excl`` of -1, 0 or 1 are dropped.
    """
    if not 0 < step <= 4:
        raise ValueError("step must be in (0, 4]")
    if not r_excl > 0:
        raise ValueError("r_excl must be positive")
    slack = 1e-12
    count = int(math.floor(4.0 / step + 1e-9))
    values = []
    for k in range(1, count + 1):
        v = round(-2.0 + k * step, 12)
        if v >= 2.0 - slack:
            break
        if min(abs(v - e) for e in _EXCLUDED) >= r_excl - slack:
            values.append(v)
    if not values:
        raise EmptyGridError(f"step={step} with exclusion radius {r_excl} leaves no orders")
    return AlphaGrid(tuple(values))


def _close(a: Sequence[complex], b: Sequence[complex], eps: float) -> bool:
    # Relative distance, symmetric so the pairwise invariant holds both ways.
    # A zero-norm root has no relative scale: use the absolute distance.
    d = norm2([p - q for p, q in zip(a, b)])
    scale = max(norm2(a), norm2(b))
    if norm2(a) == 0 or norm2(b) == 0:
        return d <= eps
    return d <= eps * scale


@dataclass
class RootRegistry:
    """Converged runs kept pairwise farther apart than ``eps_dedup``."""

    eps_dedup: float = DEFAULT_EPS_DEDUP
    entries: list[RunRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[RunRecord]:
        return iter(self.entries)

    @property
    def roots(self) -> list[tuple[complex, ...]]:
        return [e.final_x for e in self.entries]

    def offer(self, candidate: RunRecord) -> bool:
        """Merge ``candidate``; returns True if the registry changed.

        A candidate close to an existing entry replaces it only when it took
        no more iterations; otherwise a distinct root is appended.
        """
        if not candidate.converged:
            raise ValueError("only converged runs can be offered")
        root = candidate.final_x
        near = [i for i, e in enumerate(self.entries) if _close(e.final_x, root, self.eps_dedup)]
        if not near:
            self.entries.append(candidate)
            return True
        if len(near) == 1 and candidate.iterations <= self.entries[near[0]].iterations:
            self.entries[near[0]] = candidate
            return True
        return False


def offer(reg: RootRegistry, candidate: RunRecord) -> RootRegistry:
    reg.offer(candidate)
    return reg


def _run_one(args) -> RunRecord:
    f, kind, alpha, x0, cfg, trace = args
    return run(f, kind, alpha, x0, cfg, trace)


def sweep(f: SystemF, kind: SolverKind, grid: Iterable[float], x0: Sequence[complex],
          cfg: SolverConfig, eps_dedup: float = DEFAULT_EPS_DEDUP, jobs: int = 1,
          trace: bool = False) -> tuple[RootRegistry, list[RunRecord]]:
    """Run ``kind`` at every order of ``grid`` from the same ``x0``.

    Returns the deduplicated registry and every run record (ascending order).
    Per-run failures are recorded as diverged runs, never raised.
    """
    alphas = sorted(float(a) for a in grid)
    if not alphas:
        raise EmptyGridError("empty grid")
    x0 = tuple(complex(v) for v in x0)
    tasks = [(f, kind, a, x0, cfg, trace) for a in alphas]
    if jobs > 1 and len(tasks) > 1:
        chunk = max(1, len(tasks) // (jobs * 8))
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_one, tasks, chunksize=chunk))
    else:
        records = [_run_one(t) for t in tasks]

    registry = RootRegistry(eps_dedup)
    for rec in records:
        if rec.converged:
            registry.offer(rec)
    return registry, records
