"""Self-avoiding-walk enumeration and the heavy-edge census bound chain.

The lower-bound argument runs through three computable objects: exact SAW
counts c_n, the census N_n of length-n walks seeing fewer than delta*n
heavy edges (weight >= the first tertile), and the probability chain

    P(N_n >= 1) <= E[N_n] <= c_n * P(Bin(n, p) < delta*n),

whose binomial factor is bounded by the Chernoff term
[(1/3)e^(beta*delta) + (2/3)e^(-beta(1-delta))]^n.  Enumeration is exact
and capped at desk scale; tails are exact in log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Optional

import numpy as np

from fpplab import lattice
from fpplab.lattice import Box, Field

COUNT_CAP = 20
CENSUS_CAP = 16

SAW_GROWTH_CONSTANT = 2.7  # asymptotic count bound; not certifiable at desk scale
ROUNDED_CHERNOFF_BASE = 0.36

__all__ = [
    "COUNT_CAP",
    "CENSUS_CAP",
    "SawCensus",
    "ResourceCapError",
    "count_saws",
    "census",
    "census_box",
    "chernoff_base",
    "chernoff_tail_bound",
    "exact_binomial_tail",
    "strict_count_cutoff",
    "expected_Nn_bound",
    "lower_bound_witness",
    "witness_box",
]


class ResourceCapError(ValueError):
    """Exact enumeration request beyond the configured cap."""


@dataclass(frozen=True)
class SawCensus:
    """Heavy-edge tally of every length-n SAW from the origin on one field."""

    n: int
    total_walks: int
    delta: float
    threshold_weight: float
    heavy_histogram: dict[int, int]
    N_n: int


# -- exact counting --------------------------------------------------------

_STEPS = ((1, 0), (-1, 0), (0, 1), (0, -1))


def _count_from(x: int, y: int, remaining: int, visited: set) -> int:
    if remaining == 0:
        return 1
    total = 0
    for dx, dy in _STEPS:
        nxt = (x + dx, y + dy)
        if nxt not in visited:
            visited.add(nxt)
            total += _count_from(x + dx, y + dy, remaining - 1, visited)
            visited.discard(nxt)
    return total


@lru_cache(maxsize=None)
def count_saws(n: int) -> int:
    """Exact number of length-n self-avoiding walks from the origin.

    Four-fold symmetry: walks opening East are exactly a quarter of all
    walks, so only those are enumerated.  Capped at n = 20 (c_20 is ~9e8;
    the cap run takes minutes, smaller n are fast).
    """
    if n < 1:
        raise ValueError(f"walk length must be >= 1, got {n}")
    if n > COUNT_CAP:
        raise ResourceCapError(
            f"count_saws capped at n = {COUNT_CAP} (requested {n}); "
            "exact enumeration beyond the cap is out of scope"
        )
    if n == 1:
        return 4
    return 4 * _count_from(1, 0, n - 1, {(0, 0), (1, 0)})


# -- census ----------------------------------------------------------------


def _edge_index(x: int, y: int, direction: int, n: int) -> int:
    side = 2 * n + 1
    return ((x + n) * side + (y + n)) * 2 + direction


def _walk_edge_chunks(n: int, chunk_rows: int = 1 << 19) -> Iterator[np.ndarray]:
    """Yield (rows, n) int32 matrices of edge indices, one row per SAW.

    Explicit-stack DFS; each stack frame is [x, y, next_step_index].  The
    chunk buffer is reused, so every yield hands out a copy.
    """
    buf = np.empty((chunk_rows, n), dtype=np.int32)
    row = 0
    cur = [0] * n
    visited = {(0, 0)}
    stack = [[0, 0, 0]]
    while stack:
        frame = stack[-1]
        x, y, si = frame
        if si == 4:
            stack.pop()
            if stack:
                visited.discard((x, y))
            continue
        frame[2] = si + 1
        dx, dy = _STEPS[si]
        nx, ny = x + dx, y + dy
        if (nx, ny) in visited:
            continue
        depth = len(stack) - 1
        if dx == 1:
            cur[depth] = _edge_index(x, y, lattice.EAST, n)
        elif dx == -1:
            cur[depth] = _edge_index(nx, ny, lattice.EAST, n)
        elif dy == 1:
            cur[depth] = _edge_index(x, y, lattice.NORTH, n)
        else:
            cur[depth] = _edge_index(nx, ny, lattice.NORTH, n)
        if depth + 1 == n:
            buf[row] = cur
            row += 1
            if row == chunk_rows:
                yield buf.copy()
                row = 0
        else:
            visited.add((nx, ny))
            stack.append([nx, ny, 0])
    if row:
        yield buf[:row].copy()


@lru_cache(maxsize=2)
def _walk_edge_matrix(n: int) -> np.ndarray:
    """All length-n SAWs as one edge-index matrix; cached for reuse across fields."""
    return np.concatenate(list(_walk_edge_chunks(n)), axis=0)


def census_box(n: int) -> Box:
    """Smallest field box for a census: the L-infinity ball of radius n."""
    return Box(-n, n, -n, n)


def _heavy_mask(field: Field, n: int, threshold: float) -> np.ndarray:
    side = 2 * n + 1
    heavy = np.zeros(side * side * 2, dtype=bool)
    xs = np.arange(-n, n, dtype=np.int64)
    ys = np.arange(-n, n + 1, dtype=np.int64)
    gx, gy = np.meshgrid(xs, ys)
    w = field.weights_vector(gx.ravel(), gy.ravel(), lattice.EAST)
    idx = ((gx.ravel() + n) * side + (gy.ravel() + n)) * 2 + lattice.EAST
    heavy[idx] = w >= threshold
    xs = np.arange(-n, n + 1, dtype=np.int64)
    ys = np.arange(-n, n, dtype=np.int64)
    gx, gy = np.meshgrid(xs, ys)
    w = field.weights_vector(gx.ravel(), gy.ravel(), lattice.NORTH)
    idx = ((gx.ravel() + n) * side + (gy.ravel() + n)) * 2 + lattice.NORTH
    heavy[idx] = w >= threshold
    return heavy


def strict_count_cutoff(n: int, delta: float) -> int:
    """Number of integers k with k < delta*n, robust to float fuzz.

    This is the census criterion "fewer than delta*n heavy edges": walks
    with heavy count in {0, ..., cutoff-1} are counted by N_n.
    """
    exact = delta * n
    nearest = round(exact)
    if abs(exact - nearest) <= 1e-9 * max(1.0, abs(exact)):
        return int(nearest)
    return math.ceil(exact)


def census(field: Field, n: int, delta: float, threshold: float) -> SawCensus:
    """Tally every length-n SAW's heavy-edge count against the field.

    Walk enumeration is shared across fields through a cached edge-index
    matrix for small n and streamed in chunks near the cap, so a census
    over many seeded fields costs one enumeration plus fast tallies.
    """
    if n < 1:
        raise ValueError(f"census length must be >= 1, got {n}")
    if n > CENSUS_CAP:
        raise ResourceCapError(
            f"census capped at n = {CENSUS_CAP} (requested {n}); "
            "use Monte Carlo over fields beyond the cap"
        )
    if not (0.0 < delta <= 1.0):
        raise ValueError(f"delta must be in (0, 1], got {delta}")
    need = census_box(n)
    if not field.box.contains_box(need):
        raise lattice.BoxTooSmallError(need, field.box)
    heavy = _heavy_mask(field, n, threshold)
    counts = np.zeros(n + 1, dtype=np.int64)
    if n <= 13:
        matrix = _walk_edge_matrix(n)
        per_walk = heavy[matrix].sum(axis=1)
        counts += np.bincount(per_walk, minlength=n + 1)
    else:
        for chunk in _walk_edge_chunks(n):
            per_walk = heavy[chunk].sum(axis=1)
            counts += np.bincount(per_walk, minlength=n + 1)
    total = int(counts.sum())
    cutoff = strict_count_cutoff(n, delta)
    n_small = int(counts[:cutoff].sum())
    hist = {k: int(c) for k, c in enumerate(counts) if c}
    return SawCensus(
        n=n,
        total_walks=total,
        delta=delta,
        threshold_weight=threshold,
        heavy_histogram=hist,
        N_n=n_small,
    )


# -- tail bounds -----------------------------------------------------------


def chernoff_base(beta: float, delta: float) -> float:
    """(1/3) e^(beta delta) + (2/3) e^(-beta (1-delta)); < 1 for good (beta, delta)."""
    if not (beta > 0.0 and math.isfinite(beta)):
        raise ValueError(f"beta must be finite and > 0, got {beta}")
    if not (0.0 < delta < 1.0):
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    return (1.0 / 3.0) * math.exp(beta * delta) + (2.0 / 3.0) * math.exp(-beta * (1.0 - delta))


def chernoff_tail_bound(n: int, beta: float, delta: float) -> float:
    """chernoff_base(beta, delta)^n, clamped into [0, 1]."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if n == 0:
        return 1.0
    return min(1.0, chernoff_base(beta, delta) ** n)


def exact_binomial_tail(n: int, p: float, k: int) -> float:
    """Exact P(Bin(n, p) < k) by log-space term summation."""
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"p must be a probability, got {p}")
    if not (0 <= k <= n + 1):
        raise ValueError(f"k must be in [0, n+1], got k={k}, n={n}")
    if k == 0:
        return 0.0
    if k == n + 1:
        return 1.0
    if p == 0.0:
        return 1.0
    if p == 1.0:
        return 0.0
    log_p = math.log(p)
    log_q = math.log1p(-p)
    lg_n = math.lgamma(n + 1)
    terms = [
        math.exp(lg_n - math.lgamma(j + 1) - math.lgamma(n - j + 1) + j * log_p + (n - j) * log_q)
        for j in range(k)
    ]
    return min(1.0, math.fsum(terms))


def expected_Nn_bound(
    n: int, p: float, delta: float, beta: float = 5.0
) -> dict:
    """Components of the E[N_n] chain at heavy-edge probability p >= 2/3.

    Reports the exact count c_n when within the enumeration cap alongside
    the asymptotic growth bound 2.7^n (not certifiable at small n, where
    c_n^(1/n) still exceeds 2.7), the exact binomial tails at p and at the
    dominating parameter 2/3, their products, and the Chernoff version of
    the chain with both the exact base and the rounded 0.36 the chain is
    usually quoted with.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if p < 2.0 / 3.0:
        raise ValueError(f"p must be >= 2/3 (monotonicity domain), got {p}")
    cutoff = strict_count_cutoff(n, delta)
    c_n: Optional[int] = count_saws(n) if n <= COUNT_CAP else None
    growth = SAW_GROWTH_CONSTANT**n
    tail_p = exact_binomial_tail(n, p, cutoff)
    tail_23 = exact_binomial_tail(n, 2.0 / 3.0, cutoff)
    base = chernoff_base(beta, delta)
    return {
        "n": n,
        "p": p,
        "delta": delta,
        "beta": beta,
        "cutoff": cutoff,
        "c_n": c_n,
        "c_n_root": None if c_n is None else c_n ** (1.0 / n),
        "saw_growth_bound": growth,
        "exact_tail_p": tail_p,
        "exact_tail_two_thirds": tail_23,
        "product_exact": (c_n if c_n is not None else growth) * tail_23,
        "product_growth": growth * tail_23,
        "chernoff_base": base,
        "chernoff_tail": chernoff_tail_bound(n, beta, delta),
        "chernoff_product": (SAW_GROWTH_CONSTANT * base) ** n,
        "rounded_base": ROUNDED_CHERNOFF_BASE,
        "rounded_chain": (SAW_GROWTH_CONSTANT * ROUNDED_CHERNOFF_BASE) ** n,
    }


# -- lower-bound witness ---------------------------------------------------


def witness_box(n: int) -> Box:
    """Field box covering both the census ball and the passage search box."""
    m = max(n, 10)
    return Box(-m, n + 10, -m, m)


def lower_bound_witness(field: Field, n: int, delta: float, threshold: float) -> dict:
    """Check T((0,0),(n,0)) >= delta*n*threshold on realizations with N_n = 0.

    The first n steps of any path from the origin to (n, 0) form a length-n
    SAW; when no such walk has fewer than delta*n heavy edges, every path
    pays at least delta*n edges of weight >= threshold.  Restricting the
    passage-time search to a box only raises its value, so the restricted
    value inherits the bound.
    """
    cens = census(field, n, delta, threshold)
    applicable = cens.N_n == 0
    if not applicable:
        return {
            "applicable": False,
            "holds": None,
            "census_N_n": cens.N_n,
            "bound": delta * n * threshold,
            "passage_value": None,
        }
    sample = lattice.passage_time(field, (0, 0), (n, 0))
    bound = delta * n * threshold
    holds = sample.value >= bound - 1e-9 * (1.0 + bound)
    return {
        "applicable": True,
        "holds": holds,
        "census_N_n": 0,
        "bound": bound,
        "passage_value": sample.value,
    }
