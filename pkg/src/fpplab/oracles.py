"""Brute-force reference implementations, deliberately naive.

Everything here recomputes a quantity the fast modules produce, using a
different algorithm with no shared passage-time or enumeration code: DFS
over all self-avoiding paths for shortest paths, recursion for walk counts,
bitmask sweeps for monotone path minima.  Slow on purpose; used by the test
suite and the self-test command on small instances only.
"""

from __future__ import annotations

import math

import numpy as np

from fpplab.lattice import EAST, NORTH, Box, EdgeId, Field

_STEPS = ((1, 0), (-1, 0), (0, 1), (0, -1))


def min_saw_path_weight(field: Field, box: Box, source, target) -> float:
    """Exhaustive minimum over self-avoiding paths inside the box.

    Branch-and-bound DFS; exponential, intended for boxes of a few dozen
    sites at most.
    """
    source = tuple(source)
    target = tuple(target)
    best = math.inf
    visited = {source}

    def edge_weight(x, y, nx, ny) -> float:
        if nx == x + 1:
            return field.weight(EdgeId((x, y), EAST))
        if nx == x - 1:
            return field.weight(EdgeId((nx, ny), EAST))
        if ny == y + 1:
            return field.weight(EdgeId((x, y), NORTH))
        return field.weight(EdgeId((nx, ny), NORTH))

    def rec(site, acc):
        nonlocal best
        if acc >= best:
            return
        if site == target:
            best = acc
            return
        x, y = site
        for dx, dy in _STEPS:
            nx, ny = x + dx, y + dy
            nxt = (nx, ny)
            if box.x0 <= nx <= box.x1 and box.y0 <= ny <= box.y1 and nxt not in visited:
                visited.add(nxt)
                rec(nxt, acc + edge_weight(x, y, nx, ny))
                visited.discard(nxt)

    rec(source, 0.0)
    return best


def naive_count_saws(n: int) -> int:
    """Count length-n self-avoiding walks from the origin by plain recursion."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    visited = {(0, 0)}

    def rec(site, remaining) -> int:
        if remaining == 0:
            return 1
        x, y = site
        total = 0
        for dx, dy in _STEPS:
            nxt = (x + dx, y + dy)
            if nxt not in visited:
                visited.add(nxt)
                total += rec(nxt, remaining - 1)
                visited.discard(nxt)
        return total

    return rec((0, 0), n)


def ne_path_minimum(field: Field, n: int) -> tuple[float, tuple[int, int]]:
    """Minimum over all 2^n monotone NE length-n paths from the origin,
    restricted to endpoints (x, n-x) with x >= ceil(n/2).

    Ties resolve to the largest endpoint x, matching the fast DP's rule.
    Returns (min_weight, best_endpoint).
    """
    best = math.inf
    best_endpoint = None
    x_min = math.ceil(n / 2)
    for mask in range(1 << n):
        x = y = 0
        total = 0.0
        for step in range(n):
            if (mask >> step) & 1:
                total += field.weight(EdgeId((x, y), NORTH))
                y += 1
            else:
                total += field.weight(EdgeId((x, y), EAST))
                x += 1
        if x < x_min:
            continue
        if total < best or (total == best and x > best_endpoint[0]):
            best = total
            best_endpoint = (x, y)
    return best, best_endpoint


def nw_path_minimum(field: Field, n: int) -> tuple[float, tuple[int, int]]:
    """Minimum over all monotone NW length-n paths from (n, 0) ending on the
    diagonal at (z, z) with z <= n/2; ties resolve to the smallest z."""
    best = math.inf
    best_endpoint = None
    z_max = n // 2
    for mask in range(1 << n):
        x, y = n, 0
        total = 0.0
        for step in range(n):
            if (mask >> step) & 1:
                total += field.weight(EdgeId((x, y), NORTH))
                y += 1
            else:
                x -= 1
                total += field.weight(EdgeId((x, y), EAST))
        if x != y or x > z_max:
            continue
        if total < best or (total == best and x < best_endpoint[0]):
            best = total
            best_endpoint = (x, y)
    return best, best_endpoint


def empirical_cdf_distance(samples: np.ndarray, cdf_values: np.ndarray) -> float:
    """Kolmogorov-style sup distance between sorted samples and their CDF values.

    ``cdf_values[i]`` must be F(samples_sorted[i]); returns the larger of
    the two one-sided step discrepancies.
    """
    m = samples.shape[0]
    grid_hi = np.arange(1, m + 1) / m
    grid_lo = np.arange(0, m) / m
    return float(np.maximum(np.abs(cdf_values - grid_hi), np.abs(cdf_values - grid_lo)).max())
