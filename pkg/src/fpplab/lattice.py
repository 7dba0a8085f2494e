"""Random edge-weight environments on boxes of Z^2 and their passage times.

A field assigns every lattice edge a weight drawn from a mixture law, keyed
by (seed, canonical edge id) so that overlapping boxes, repeated queries,
and parallel schedules all see bit-identical environments.  On top of the
field sit the point-to-point passage time (label-setting shortest path with
a deterministic geodesic) and the two oriented-path events used by the
upper-bound route argument: minimum-weight monotone paths of length n from
the origin to the far half of the diagonal x + y = n, and their mirror from
(n, 0) back to the main diagonal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from fpplab import rng
from fpplab.dist import WeightDistribution, parse_distribution, distribution_to_spec

EAST = 0
NORTH = 1

Site = tuple[int, int]

__all__ = [
    "EAST",
    "NORTH",
    "Site",
    "Box",
    "EdgeId",
    "BoxTooSmallError",
    "HashField",
    "ExplicitField",
    "Field",
    "PassageTimeSample",
    "OrientedEventResult",
    "make_field",
    "edge_between",
    "passage_time",
    "oriented_event_A",
    "oriented_event_A_prime",
    "coupling_check",
    "coupling_box",
    "margin_sensitivity",
    "field_to_descriptor",
    "field_from_descriptor",
]


@dataclass(frozen=True)
class Box:
    """Inclusive site ranges [x0, x1] x [y0, y1] with x0 < x1 and y0 < y1."""

    x0: int
    x1: int
    y0: int
    y1: int

    def __post_init__(self):
        if self.x0 >= self.x1 or self.y0 >= self.y1:
            raise ValueError(
                f"degenerate box: need x0 < x1 and y0 < y1, got ({self.x0},{self.x1},{self.y0},{self.y1})"
            )

    @property
    def width(self) -> int:
        return self.x1 - self.x0 + 1

    @property
    def height(self) -> int:
        return self.y1 - self.y0 + 1

    @property
    def site_count(self) -> int:
        return self.width * self.height

    def contains_site(self, site: Site) -> bool:
        x, y = site
        return self.x0 <= x <= self.x1 and self.y0 <= y <= self.y1

    def contains_box(self, other: "Box") -> bool:
        return (
            self.x0 <= other.x0
            and other.x1 <= self.x1
            and self.y0 <= other.y0
            and other.y1 <= self.y1
        )

    def as_list(self) -> list[int]:
        return [self.x0, self.x1, self.y0, self.y1]


@dataclass(frozen=True)
class EdgeId:
    """Canonical edge: base site plus direction (EAST to x+1, NORTH to y+1)."""

    base: Site
    direction: int

    def __post_init__(self):
        if self.direction not in (EAST, NORTH):
            raise ValueError(f"direction must be EAST (0) or NORTH (1), got {self.direction}")

    @property
    def other(self) -> Site:
        x, y = self.base
        return (x + 1, y) if self.direction == EAST else (x, y + 1)


def edge_between(a: Site, b: Site) -> EdgeId:
    """Canonical EdgeId for the nearest-neighbor pair {a, b}."""
    (ax, ay), (bx, by) = a, b
    if abs(ax - bx) + abs(ay - by) != 1:
        raise ValueError(f"sites {a} and {b} are not nearest neighbors")
    if ax > bx or ay > by:
        a, b = b, a
        ax, ay = a
    return EdgeId(base=(ax, ay), direction=EAST if abs(a[0] - b[0]) == 1 else NORTH)


class BoxTooSmallError(ValueError):
    """The field's box cannot hold the expanded search box."""

    def __init__(self, required: Box, available: Box):
        self.required = required
        self.available = available
        super().__init__(
            f"box too small: computation needs {required.as_list()}, field covers {available.as_list()}"
        )


@dataclass(frozen=True)
class HashField:
    """Lazy edge-weight environment: weight(e) = quantile(F, hash(seed, e)).

    Weights are pure functions of (seed, canonical edge), independent of the
    box extent and of query order, so any two fields sharing a seed agree on
    every common edge.
    """

    box: Box
    distribution: WeightDistribution
    seed: int

    def weight(self, edge: EdgeId) -> float:
        x, y = edge.base
        return self.distribution.sample(rng.edge_uniform(self.seed, x, y, edge.direction))

    def weights_vector(self, xs: np.ndarray, ys: np.ndarray, direction: int) -> np.ndarray:
        return self.distribution.sample_array(rng.edge_uniforms(self.seed, xs, ys, direction))


@dataclass(frozen=True)
class ExplicitField:
    """Array-backed environment over a box; the test double for HashField.

    ``east[iy, ix]`` is the weight of the edge based at (x0+ix, y0+iy)
    pointing East; ``north`` likewise pointing North.
    """

    box: Box
    east: np.ndarray
    north: np.ndarray

    def __post_init__(self):
        if self.east.shape != (self.box.height, self.box.width - 1):
            raise ValueError(f"east array shape {self.east.shape} does not match box {self.box.as_list()}")
        if self.north.shape != (self.box.height - 1, self.box.width):
            raise ValueError(f"north array shape {self.north.shape} does not match box {self.box.as_list()}")
        if (self.east < 0).any() or (self.north < 0).any():
            raise ValueError("edge weights must be nonnegative")

    @classmethod
    def from_field(cls, field: "Field", box: Optional[Box] = None) -> "ExplicitField":
        box = box or field.box
        if not field.box.contains_box(box):
            raise BoxTooSmallError(box, field.box)
        east = _east_weights(field, box)
        north = _north_weights(field, box)
        return cls(box=box, east=east, north=north)

    def _index(self, edge: EdgeId) -> tuple[np.ndarray, int, int]:
        x, y = edge.base
        ix, iy = x - self.box.x0, y - self.box.y0
        arr = self.east if edge.direction == EAST else self.north
        if not (0 <= iy < arr.shape[0] and 0 <= ix < arr.shape[1]):
            raise ValueError(f"edge {edge} outside field box {self.box.as_list()}")
        return arr, iy, ix

    def weight(self, edge: EdgeId) -> float:
        arr, iy, ix = self._index(edge)
        return float(arr[iy, ix])

    def weights_vector(self, xs: np.ndarray, ys: np.ndarray, direction: int) -> np.ndarray:
        arr = self.east if direction == EAST else self.north
        ix = np.asarray(xs, dtype=np.int64) - self.box.x0
        iy = np.asarray(ys, dtype=np.int64) - self.box.y0
        return arr[iy, ix].astype(np.float64)

    def with_weight(self, edge: EdgeId, value: float) -> "ExplicitField":
        """Copy of the field with one edge weight replaced."""
        if value < 0:
            raise ValueError("edge weights must be nonnegative")
        arr, iy, ix = self._index(edge)
        east, north = self.east, self.north
        if arr is self.east:
            east = east.copy()
            east[iy, ix] = value
        else:
            north = north.copy()
            north[iy, ix] = value
        return ExplicitField(box=self.box, east=east, north=north)


Field = Union[HashField, ExplicitField]


def make_field(box: Union[Box, tuple, list], distribution: WeightDistribution, seed: int) -> HashField:
    """Reproducible environment on a box; same seed means same weights anywhere."""
    if not isinstance(box, Box):
        box = Box(*box)
    return HashField(box=box, distribution=distribution, seed=seed)


def field_to_descriptor(field: HashField) -> dict:
    return {
        "box": field.box.as_list(),
        "seed": field.seed,
        "dist": distribution_to_spec(field.distribution),
    }


def field_from_descriptor(doc: dict) -> HashField:
    return make_field(tuple(doc["box"]), parse_distribution(doc["dist"]), int(doc["seed"]))


def _east_weights(field: Field, box: Box) -> np.ndarray:
    xs = np.arange(box.x0, box.x1, dtype=np.int64)
    ys = np.arange(box.y0, box.y1 + 1, dtype=np.int64)
    gx, gy = np.meshgrid(xs, ys)
    return field.weights_vector(gx.ravel(), gy.ravel(), EAST).reshape(box.height, box.width - 1)


def _north_weights(field: Field, box: Box) -> np.ndarray:
    xs = np.arange(box.x0, box.x1 + 1, dtype=np.int64)
    ys = np.arange(box.y0, box.y1, dtype=np.int64)
    gx, gy = np.meshgrid(xs, ys)
    return field.weights_vector(gx.ravel(), gy.ravel(), NORTH).reshape(box.height - 1, box.width)


# -- passage time ----------------------------------------------------------


@dataclass(frozen=True)
class PassageTimeSample:
    source: Site
    target: Site
    value: float
    geodesic: tuple[Site, ...]
    expanded_box: Box


def _expanded_box(source: Site, target: Site, margin_factor: float, margin_floor: int) -> Box:
    l1 = abs(source[0] - target[0]) + abs(source[1] - target[1])
    m = max(margin_floor, math.ceil(margin_factor * l1))
    x_lo, x_hi = min(source[0], target[0]), max(source[0], target[0])
    y_lo, y_hi = min(source[1], target[1]), max(source[1], target[1])
    if x_lo - m >= x_hi + m or y_lo - m >= y_hi + m:
        raise ValueError(
            "expanded box is degenerate; increase margin_floor or margin_factor"
        )
    return Box(x_lo - m, x_hi + m, y_lo - m, y_hi + m)


def _grid_graph(east: np.ndarray, north: np.ndarray) -> csr_matrix:
    h, w = north.shape[0] + 1, east.shape[1] + 1
    n_nodes = h * w
    node = np.arange(n_nodes, dtype=np.int64).reshape(h, w)
    rows = np.concatenate([node[:, :-1].ravel(), node[:-1, :].ravel()])
    cols = np.concatenate([node[:, 1:].ravel(), node[1:, :].ravel()])
    data = np.concatenate([east.ravel(), north.ravel()])
    # explicit zeros must survive: they are genuine zero-weight edges
    return csr_matrix((data, (rows, cols)), shape=(n_nodes, n_nodes))


def _lex_geodesic_dag(
    dist_map: np.ndarray,
    east: np.ndarray,
    north: np.ndarray,
    src: int,
    dst: int,
    w: int,
) -> Optional[list[int]]:
    """Lexicographically smallest optimal path when all weights are positive.

    Optimal paths use exactly the edges that are tight for the distance map,
    and with positive weights those edges form a DAG graded by distance, so
    a greedy walk that always takes the smallest usable neighbor is exact
    once we know which nodes can still reach the target through tight
    edges.  Reachability is a monotone fixpoint computed with whole-grid
    boolean sweeps.  Returns None when greedy progress stalls
    (float-tolerance miss); the caller then falls back to the label-setting
    predecessor tree.
    """
    h = dist_map.shape[0] // w
    D = dist_map.reshape(h, w)
    tol = 1e-12 * (1.0 + np.abs(D))

    # tight_r[iy, ix]: stepping East from (ix, iy) lies on some optimal path
    tight_r = np.zeros((h, w), dtype=bool)
    tight_r[:, :-1] = (D[:, :-1] < D[:, 1:]) & (D[:, :-1] + east <= D[:, 1:] + tol[:, 1:])
    tight_l = np.zeros((h, w), dtype=bool)
    tight_l[:, 1:] = (D[:, 1:] < D[:, :-1]) & (D[:, 1:] + east <= D[:, :-1] + tol[:, :-1])
    tight_u = np.zeros((h, w), dtype=bool)
    tight_u[:-1, :] = (D[:-1, :] < D[1:, :]) & (D[:-1, :] + north <= D[1:, :] + tol[1:, :])
    tight_d = np.zeros((h, w), dtype=bool)
    tight_d[1:, :] = (D[1:, :] < D[:-1, :]) & (D[1:, :] + north <= D[:-1, :] + tol[:-1, :])

    reach = np.zeros((h, w), dtype=bool)
    reach[dst // w, dst % w] = True
    for _ in range(h * w):
        nxt = reach.copy()
        nxt[:, :-1] |= tight_r[:, :-1] & reach[:, 1:]
        nxt[:, 1:] |= tight_l[:, 1:] & reach[:, :-1]
        nxt[:-1, :] |= tight_u[:-1, :] & reach[1:, :]
        nxt[1:, :] |= tight_d[1:, :] & reach[:-1, :]
        if (nxt == reach).all():
            break
        reach = nxt

    if not reach[src // w, src % w]:
        return None
    path = [src]
    cur = src
    while cur != dst:
        cy, cx = divmod(cur, w)
        best = None
        # candidate order never matters: the best is the lex-least site
        for ok, v, vx, vy in (
            (cx + 1 < w and tight_r[cy, cx], cur + 1, cx + 1, cy),
            (cx > 0 and tight_l[cy, cx], cur - 1, cx - 1, cy),
            (cy + 1 < h and tight_u[cy, cx], cur + w, cx, cy + 1),
            (cy > 0 and tight_d[cy, cx], cur - w, cx, cy - 1),
        ):
            if ok and reach[vy, vx]:
                key = (vx, vy)
                if best is None or key < best[0]:
                    best = (key, v)
        if best is None:
            return None
        cur = best[1]
        path.append(cur)
    return path


def _predecessor_path(pred: np.ndarray, src: int, dst: int) -> Optional[list[int]]:
    path = [dst]
    cur = dst
    while cur != src:
        cur = int(pred[cur])
        if cur < 0:
            return None
        path.append(cur)
    path.reverse()
    return path


def passage_time(
    field: Field,
    source: Site,
    target: Site,
    *,
    margin_factor: float = 0.25,
    margin_floor: int = 10,
    restrict_box: Optional[Box] = None,
) -> PassageTimeSample:
    """Shortest total weight over self-avoiding paths inside a padded box.

    The search region is the bounding box of the endpoints padded by
    m = max(margin_floor, ceil(margin_factor * L1 distance)) on every side,
    or exactly ``restrict_box`` when given.  The region must sit inside the
    field's box; otherwise :class:`BoxTooSmallError` reports what would be
    needed.  The geodesic tie-break is the lexicographically smallest site
    sequence whenever every weight in the region is positive; environments
    containing zero-weight edges fall back to the (deterministic)
    label-setting predecessor tree, since plateau ties are not gradeable.
    """
    source = (int(source[0]), int(source[1]))
    target = (int(target[0]), int(target[1]))
    for s in (source, target):
        if not field.box.contains_site(s):
            raise BoxTooSmallError(
                _expanded_box(source, target, margin_factor, margin_floor), field.box
            )
    if restrict_box is not None:
        box = restrict_box
        if not (box.contains_site(source) and box.contains_site(target)):
            raise ValueError("restrict_box must contain both endpoints")
    else:
        box = _expanded_box(source, target, margin_factor, margin_floor)
    if not field.box.contains_box(box):
        raise BoxTooSmallError(box, field.box)

    if source == target:
        return PassageTimeSample(source, target, 0.0, (source,), box)

    east = _east_weights(field, box)
    north = _north_weights(field, box)
    w = box.width
    src = (source[1] - box.y0) * w + (source[0] - box.x0)
    dst = (target[1] - box.y0) * w + (target[0] - box.x0)
    graph = _grid_graph(east, north)
    dist_map, pred = dijkstra(
        graph, directed=False, indices=src, return_predecessors=True
    )
    value = float(dist_map[dst])

    nodes = None
    if east.min() > 0.0 and north.min() > 0.0:
        nodes = _lex_geodesic_dag(dist_map, east, north, src, dst, w)
    if nodes is None:
        nodes = _predecessor_path(pred, src, dst)
    if nodes is None:
        raise RuntimeError("no path recovered; this should be impossible on a box")

    geodesic = tuple((n % w + box.x0, n // w + box.y0) for n in nodes)
    total = math.fsum(_path_weights(east, north, nodes, w))
    if abs(total - value) > 1e-9 * (1.0 + abs(value)):
        raise RuntimeError(
            f"geodesic weight sum {total} disagrees with shortest-path value {value}"
        )
    return PassageTimeSample(source, target, value, geodesic, box)


def _path_weights(east: np.ndarray, north: np.ndarray, nodes: list[int], w: int) -> list[float]:
    out = []
    for u, v in zip(nodes, nodes[1:]):
        a, b = (u, v) if u < v else (v, u)
        ay, ax = divmod(a, w)
        if b == a + 1:
            out.append(float(east[ay, ax]))
        else:
            out.append(float(north[ay, ax]))
    return out


def margin_sensitivity(
    field: Field,
    source: Site,
    target: Site,
    *,
    margin_factor: float = 0.25,
    margin_floor: int = 10,
) -> dict:
    """Compare passage values at the default and doubled margins.

    Growing the box can only reveal cheaper routes, so the doubled-margin
    value is at most the original; a drop beyond 1% is flagged as a sign
    the default margin is materially constraining geodesics.
    """
    base = passage_time(
        field, source, target, margin_factor=margin_factor, margin_floor=margin_floor
    )
    wide = passage_time(
        field,
        source,
        target,
        margin_factor=2.0 * margin_factor,
        margin_floor=2 * margin_floor,
    )
    drop = base.value - wide.value
    rel = drop / base.value if base.value > 0 else 0.0
    return {
        "value": base.value,
        "value_wide": wide.value,
        "drop": drop,
        "flagged": rel > 0.01,
    }


# -- oriented events -------------------------------------------------------


@dataclass(frozen=True)
class OrientedEventResult:
    n: int
    min_weight: float
    threshold: float
    occurred: bool
    best_endpoint: Site


def _require_triangle(box: Box, corners: list[Site]):
    for c in corners:
        if not box.contains_site(c):
            raise ValueError(
                f"field box {box.as_list()} does not cover required site {c}"
            )


def _ne_diagonal_minima(field: Field, n: int) -> np.ndarray:
    """Minimum weights of monotone NE length-n paths from the origin.

    Returns the vector W[x] over endpoints (x, n-x), x = 0..n, computed one
    anti-diagonal at a time.
    """
    cur = np.zeros(1)
    for k in range(1, n + 1):
        bx = np.arange(k, dtype=np.int64)
        by = np.int64(k - 1) - bx
        w_e = field.weights_vector(bx, by, EAST)
        w_n = field.weights_vector(bx, by, NORTH)
        nxt = np.full(k + 1, np.inf)
        nxt[1:] = cur + w_e
        np.minimum(nxt[:k], cur + w_n, out=nxt[:k])
        cur = nxt
    return cur


def oriented_event_A(field: Field, n: int, M: float, t: float) -> OrientedEventResult:
    """Cheapest monotone NE path of length n to {x + y = n, x >= n/2, y >= 0}.

    Every length-n lattice path from the origin ending on x + y = n is
    necessarily monotone, so the dynamic program over anti-diagonals is
    exact.  The event occurs when the minimum weight is at most n*t + M.
    Endpoint ties resolve to the largest x.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    _require_triangle(field.box, [(0, 0), (n, 0), (0, n)])
    diag = _ne_diagonal_minima(field, n)
    x_min = math.ceil(n / 2)
    window = diag[x_min:]
    min_weight = float(window.min())
    best_x = x_min + int(np.flatnonzero(window == window.min())[-1])
    threshold = n * t + M
    return OrientedEventResult(
        n=n,
        min_weight=min_weight,
        threshold=threshold,
        occurred=min_weight <= threshold,
        best_endpoint=(best_x, n - best_x),
    )


def _nw_diagonal_minima(field: Field, n: int) -> np.ndarray:
    """Minimum weights of monotone NW length-n paths from (n, 0).

    Returns the vector W[y] over diagonal endpoints (y, y), y = 0..n.
    """
    cur = np.zeros(1)
    for k in range(1, n + 1):
        ys = np.arange(k, dtype=np.int64)
        # west step into (n-k+y, y) crosses the East edge based there
        bx_w = np.int64(n - k) + ys
        w_w = field.weights_vector(bx_w, ys, EAST)
        # north step into (n-k+y, y) comes up from (n-k+y, y-1)
        bx_n = np.int64(n - k + 1) + ys
        w_n = field.weights_vector(bx_n, ys, NORTH)
        nxt = np.full(k + 1, np.inf)
        nxt[:k] = cur + w_w
        np.minimum(nxt[1:], cur + w_n, out=nxt[1:])
        cur = nxt
    return cur


def oriented_event_A_prime(field: Field, n: int, M: float, t: float) -> OrientedEventResult:
    """Mirror event: monotone NW length-n paths from (n, 0) to {(x, x), x <= n/2}.

    Exactly oriented_event_A on the environment reflected through x = n/2;
    endpoint ties resolve to the smallest x, the mirror of A's rule.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    _require_triangle(field.box, [(0, 0), (n, 0), (n, n)])
    diag = _nw_diagonal_minima(field, n)
    z_max = n // 2
    window = diag[: z_max + 1]
    min_weight = float(window.min())
    best_z = int(np.flatnonzero(window == window.min())[0])
    threshold = n * t + M
    return OrientedEventResult(
        n=n,
        min_weight=min_weight,
        threshold=threshold,
        occurred=min_weight <= threshold,
        best_endpoint=(best_z, best_z),
    )


def coupling_box(n: int) -> Box:
    """Smallest field box serving coupling_check at size n."""
    m = max(10, math.ceil(n / 2))
    return Box(-m, n + m, -m, n)


def coupling_check(
    field: Field, n: int, M: float, t: float
) -> tuple[OrientedEventResult, OrientedEventResult, PassageTimeSample, Optional[bool]]:
    """Route argument: on the intersection of both events, T((0,0),(n,0)) is small.

    The NE path (origin out) and the NW path ((n,0) back to the diagonal)
    must cross by planarity, and splicing them at the crossing shows
    T((0,0),(n,0)) <= 2*n*t + 2*M whenever both events occur.  Returns the
    two event results, the passage sample, and the inequality verdict
    (None when either event failed, so the bound is not applicable).

    The passage search uses margin_factor 0.5 so its box covers the strip
    [0, n] x [0, n/2] that contains both oriented routes.
    """
    a = oriented_event_A(field, n, M, t)
    a_prime = oriented_event_A_prime(field, n, M, t)
    passage = passage_time(field, (0, 0), (n, 0), margin_factor=0.5)
    if not (a.occurred and a_prime.occurred):
        return a, a_prime, passage, None
    bound = 2.0 * n * t + 2.0 * M
    holds = passage.value <= bound + 1e-9 * (1.0 + bound)
    return a, a_prime, passage, holds
