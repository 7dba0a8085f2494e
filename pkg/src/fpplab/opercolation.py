"""Oriented bond percolation experiments on the northeast quadrant.

The model is discrete-time bond percolation: every East and North edge of
the lattice is open with probability p, independently, keyed by the same
(seed, site, direction) hashing that weight fields use.  Survival means an
open oriented path from the origin reaches anti-diagonal level ``depth``.

Because the per-edge uniforms do not depend on p, evaluating several p
values against one seed realizes the standard monotone coupling: the open
set at a smaller p is contained in the open set at a larger one, so scan
frequencies are nondecreasing in p exactly, not just statistically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import rng
from .dist import WeightDistribution
from .lattice import (
    EAST,
    NORTH,
    Box,
    make_field,
    oriented_event_A,
    oriented_event_A_prime,
)

ORIENTED_VARIANT = "discrete-time bond percolation on East/North edges"

DEFAULT_DEPTH = 200


@dataclass(frozen=True)
class SurvivalEstimate:
    p: float
    depth: int
    trials: int
    successes: int
    frequency: float
    stderr: float

    def as_dict(self) -> dict:
        return {
            "p": self.p,
            "depth": self.depth,
            "trials": self.trials,
            "successes": self.successes,
            "frequency": self.frequency,
            "stderr": self.stderr,
        }


def _validate_p(p: float):
    if not (0.0 <= p <= 1.0) or not math.isfinite(p):
        raise ValueError(f"p must lie in [0, 1], got {p}")


def _survival_counts(p_values: Sequence[float], depth: int, trials: int, seed: int) -> np.ndarray:
    """Surviving-trial counts for every p at once, off one set of uniforms."""
    ps = np.asarray(p_values, dtype=np.float64)
    trial_seeds = np.array(
        [rng.derive_seed(seed, r) for r in range(trials)], dtype=np.uint64
    ).reshape(-1, 1)
    reach = np.ones((ps.shape[0], trials, 1), dtype=bool)
    for k in range(depth):
        xs = np.arange(k + 1, dtype=np.int64)
        ys = np.int64(k) - xs
        u_east = rng.edge_uniforms(trial_seeds, xs, ys, EAST)
        u_north = rng.edge_uniforms(trial_seeds, xs, ys, NORTH)
        open_east = u_east[None, :, :] < ps[:, None, None]
        open_north = u_north[None, :, :] < ps[:, None, None]
        nxt = np.zeros((ps.shape[0], trials, k + 2), dtype=bool)
        nxt[:, :, 1:] = reach & open_east
        nxt[:, :, :-1] |= reach & open_north
        reach = nxt
        if not reach.any():
            break
    return reach.any(axis=2).sum(axis=1).astype(np.int64)


def _estimate(p: float, depth: int, trials: int, successes: int) -> SurvivalEstimate:
    frequency = successes / trials
    stderr = math.sqrt(frequency * (1.0 - frequency) / trials)
    return SurvivalEstimate(
        p=float(p),
        depth=depth,
        trials=trials,
        successes=successes,
        frequency=frequency,
        stderr=stderr,
    )


def survival_probability(p: float, depth: int, trials: int, seed: int) -> SurvivalEstimate:
    """Fraction of independent trials whose open cluster reaches ``depth``."""
    _validate_p(p)
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    successes = int(_survival_counts([p], depth, trials, seed)[0])
    return _estimate(p, depth, trials, successes)


def pc_scan(p_grid: Sequence[float], depth: int, trials: int, seed: int) -> list[SurvivalEstimate]:
    """One survival estimate per grid point, coupled through shared uniforms.

    The same trial seeds serve every p, so each row equals what
    :func:`survival_probability` would report for that p alone and the
    frequencies are nondecreasing along the (sorted) grid.
    """
    grid = [float(p) for p in p_grid]
    if not grid:
        raise ValueError("p_grid must not be empty")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise ValueError("p_grid must be sorted nondecreasing")
    for p in grid:
        _validate_p(p)
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    counts = _survival_counts(grid, depth, trials, seed)
    return [_estimate(p, depth, trials, int(c)) for p, c in zip(grid, counts)]


def crossing_estimate(table: Sequence[SurvivalEstimate], level: float = 0.5) -> Optional[float]:
    """p where the scan's frequency first crosses ``level``, interpolated.

    Linear interpolation between the bracketing grid points; the first
    grid p when the scan starts at or above the level already; None when
    the level is never reached.
    """
    if table and table[0].frequency >= level:
        return table[0].p
    for a, b in zip(table, table[1:]):
        if a.frequency < level <= b.frequency:
            return a.p + (level - a.frequency) * (b.p - a.p) / (b.frequency - a.frequency)
    return None


def depth_doubling_check(p: float, depth: int, trials: int, seed: int) -> dict:
    """Compare survival at ``depth`` and ``2 * depth`` on the same trials.

    Identical keying means the doubled run extends each trial's
    configuration, so its survivors are a subset and the frequency can only
    drop.  A drop within 3 combined standard errors counts as stable.
    """
    base = survival_probability(p, depth, trials, seed)
    doubled = survival_probability(p, 2 * depth, trials, seed)
    drop = base.frequency - doubled.frequency
    tol = 3.0 * math.sqrt(base.stderr**2 + doubled.stderr**2)
    return {
        "p": p,
        "depth": depth,
        "frequency": base.frequency,
        "doubled_depth": 2 * depth,
        "doubled_frequency": doubled.frequency,
        "drop": drop,
        "stable": drop <= tol,
    }


def flat_edge_probe(
    F: WeightDistribution, n: int, M_grid: Sequence[float], trials: int, seed: int
) -> dict:
    """Empirical occurrence of the oriented-route events across a slack grid.

    Each trial samples one field and runs both anti-diagonal DPs once; the
    resulting minima are then thresholded against n*t + M for every M in
    the grid, t being the upper tertile of F.  Rows report the frequencies
    of the NE event and of the joint NE/NW event per M, and the summary
    records the smallest grid M reaching frequency 3/4 (single event) and
    1/2 (joint), None when the grid never gets there.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    ms = np.asarray([float(m) for m in M_grid], dtype=np.float64)
    if ms.size == 0:
        raise ValueError("M_grid must not be empty")
    if np.any(np.diff(ms) < 0):
        raise ValueError("M_grid must be sorted nondecreasing")
    t = F.quantile(2.0 / 3.0)
    box = Box(0, n, 0, n)
    count_a = np.zeros(ms.size, dtype=np.int64)
    count_ap = np.zeros(ms.size, dtype=np.int64)
    count_both = np.zeros(ms.size, dtype=np.int64)
    for r in range(trials):
        field = make_field(box, F, rng.derive_seed(seed, r))
        min_a = oriented_event_A(field, n, 0.0, 0.0).min_weight
        min_ap = oriented_event_A_prime(field, n, 0.0, 0.0).min_weight
        # same float expression as the event evaluators: n*t + M, no slack
        occ_a = min_a <= n * t + ms
        occ_ap = min_ap <= n * t + ms
        count_a += occ_a
        count_ap += occ_ap
        count_both += occ_a & occ_ap
    rows = []
    for i, m in enumerate(ms):
        freq_a = count_a[i] / trials
        freq_ap = count_ap[i] / trials
        freq_both = count_both[i] / trials
        rows.append(
            {
                "M": float(m),
                "freq_A": freq_a,
                "freq_A_prime": freq_ap,
                "freq_AA": freq_both,
                "stderr_A": math.sqrt(freq_a * (1.0 - freq_a) / trials),
                "stderr_AA": math.sqrt(freq_both * (1.0 - freq_both) / trials),
            }
        )
    reached_a = [r["M"] for r in rows if r["freq_A"] >= 0.75]
    reached_both = [r["M"] for r in rows if r["freq_AA"] >= 0.5]
    return {
        "n": n,
        "trials": trials,
        "t": t,
        "variant": ORIENTED_VARIANT,
        "rows": rows,
        "smallest_M_for_A": reached_a[0] if reached_a else None,
        "smallest_M_for_joint": reached_both[0] if reached_both else None,
    }
