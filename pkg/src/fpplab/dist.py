"""Edge-weight distributions and their tertile machinery.

The weight law F is restricted to finite mixtures of point masses, uniform
intervals, and exponentials.  The algebra is closed under everything the
bounds need: exact CDF evaluation, the generalized inverse

    t_q = inf{t >= 0 : F(t) >= q},

inverse-CDF sampling (atoms receive exactly their mass), and the tail
integral E[Y] = integral of (1 - F(t))^4 dt for Y the minimum of four
independent draws.  All values are immutable; operations are pure functions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Union

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

__all__ = [
    "PointMass",
    "Uniform",
    "Exponential",
    "Component",
    "WeightDistribution",
    "BoundReport",
    "ORIENTED_PC_BY_DIMENSION",
    "cdf",
    "quantile",
    "sample",
    "expected_min4",
    "tertile_bounds",
    "dim_bound_formula",
    "is_alm_deijfen_counterexample",
    "parse_distribution",
    "distribution_to_spec",
]

_WEIGHT_SUM_TOL = 1e-12
_PARSE_WEIGHT_TOL = 1e-9
_TINY_Q = math.nextafter(0.0, 1.0)

# Oriented-percolation thresholds by dimension.  Literature values, shipped
# as a convenience default only; callers may pass their own.
ORIENTED_PC_BY_DIMENSION = {2: 0.6447, 3: 0.447}

# Mixture family refuting "mu >= E[Y]": at least 2/3 of the mass on [0, 1]
# and at least 1/6 of the mass on [HEAVY_LOCATION, infinity).
LIGHT_INTERVAL_RIGHT = 1.0
LIGHT_MASS_MIN = 2.0 / 3.0
HEAVY_LOCATION = 3888.0
HEAVY_MASS_MIN = 1.0 / 6.0


@dataclass(frozen=True)
class PointMass:
    """Unit mass at a single nonnegative location."""

    a: float

    def __post_init__(self):
        if not (self.a >= 0.0 and math.isfinite(self.a)):
            raise ValueError(f"point mass location must be finite and >= 0, got {self.a}")

    def cdf(self, t: float) -> float:
        return 1.0 if t >= self.a else 0.0


@dataclass(frozen=True)
class Uniform:
    """Uniform law on [a, b], 0 <= a < b."""

    a: float
    b: float

    def __post_init__(self):
        if not (0.0 <= self.a < self.b and math.isfinite(self.b)):
            raise ValueError(f"uniform endpoints must satisfy 0 <= a < b, got [{self.a}, {self.b}]")

    def cdf(self, t: float) -> float:
        if t <= self.a:
            return 0.0
        if t >= self.b:
            return 1.0
        return (t - self.a) / (self.b - self.a)


@dataclass(frozen=True)
class Exponential:
    """Exponential law with the given rate (mean 1/rate)."""

    rate: float

    def __post_init__(self):
        if not (self.rate > 0.0 and math.isfinite(self.rate)):
            raise ValueError(f"exponential rate must be finite and > 0, got {self.rate}")

    def cdf(self, t: float) -> float:
        if t <= 0.0:
            return 0.0
        return -math.expm1(-self.rate * t)


Component = Union[PointMass, Uniform, Exponential]


class _Piece:
    """One q-interval (q_lo, q_hi] of the quantile function."""

    __slots__ = ("q_lo", "q_hi", "kind", "t_lo", "value", "slope", "a_coef", "w_coef", "rate", "t_hi")

    def __init__(self, q_lo, q_hi, kind, t_lo=0.0, t_hi=0.0, value=0.0, slope=0.0,
                 a_coef=0.0, w_coef=0.0, rate=0.0):
        self.q_lo = q_lo
        self.q_hi = q_hi
        self.kind = kind  # "atom" | "linear" | "exp" | "numeric"
        self.t_lo = t_lo
        self.t_hi = t_hi  # +inf for the tail piece
        self.value = value
        self.slope = slope
        self.a_coef = a_coef  # exp kind: F(t) = a_coef - w_coef * exp(-rate t)
        self.w_coef = w_coef
        self.rate = rate


@dataclass(frozen=True)
class WeightDistribution:
    """Finite mixture of point masses, uniforms, and exponentials.

    ``components`` is a sequence of (weight, component) pairs; weights must
    lie in (0, 1] and sum to one within 1e-12.  ``parse_weight_defect``
    records how far the raw weights of a parsed document were from one
    before normalization (zero for directly constructed mixtures).
    """

    components: tuple[tuple[float, Component], ...]
    parse_weight_defect: float = field(default=0.0, compare=False)

    def __post_init__(self):
        comps = tuple((float(w), c) for w, c in self.components)
        object.__setattr__(self, "components", comps)
        if not comps:
            raise ValueError("mixture needs at least one component")
        for w, c in comps:
            if not (0.0 < w <= 1.0):
                raise ValueError(f"component weight must be in (0, 1], got {w}")
            if not isinstance(c, (PointMass, Uniform, Exponential)):
                raise ValueError(f"unsupported component type {type(c).__name__}")
        total = math.fsum(w for w, _ in comps)
        if abs(total - 1.0) > _WEIGHT_SUM_TOL:
            raise ValueError(f"component weights must sum to 1 within {_WEIGHT_SUM_TOL}, got {total!r}")

    # -- structure ---------------------------------------------------------

    @cached_property
    def _atoms(self) -> dict[float, float]:
        atoms: dict[float, float] = {}
        for w, c in self.components:
            if isinstance(c, PointMass):
                atoms[c.a] = atoms.get(c.a, 0.0) + w
        return atoms

    @cached_property
    def _exponentials(self) -> tuple[tuple[float, float], ...]:
        return tuple((w, c.rate) for w, c in self.components if isinstance(c, Exponential))

    @cached_property
    def _uniforms(self) -> tuple[tuple[float, float, float], ...]:
        return tuple((w, c.a, c.b) for w, c in self.components if isinstance(c, Uniform))

    @cached_property
    def _breakpoints(self) -> tuple[float, ...]:
        pts = {0.0}
        pts.update(self._atoms)
        for _, a, b in self._uniforms:
            pts.add(a)
            pts.add(b)
        return tuple(sorted(pts))

    @property
    def max_finite_support(self) -> float:
        """Right edge of the support, +inf when an exponential is present."""
        if self._exponentials:
            return math.inf
        return self._breakpoints[-1]

    # -- pointwise laws ----------------------------------------------------

    def cdf(self, t: float) -> float:
        """F(t), right-continuous, 0 for t < 0."""
        if t < 0.0:
            return 0.0
        return math.fsum(w * c.cdf(t) for w, c in self.components)

    def cdf_array(self, ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=np.float64)
        out = np.zeros_like(ts)
        for w, c in self.components:
            if isinstance(c, PointMass):
                out += w * (ts >= c.a)
            elif isinstance(c, Uniform):
                out += w * np.clip((ts - c.a) / (c.b - c.a), 0.0, 1.0)
            else:
                out += w * -np.expm1(-c.rate * np.maximum(ts, 0.0))
        out[ts < 0.0] = 0.0
        return out

    def atom_mass(self, t: float) -> float:
        return self._atoms.get(t, 0.0)

    def cdf_left(self, t: float) -> float:
        """Left limit F(t-)."""
        return self.cdf(t) - self.atom_mass(t)

    def mass_at_least(self, t: float) -> float:
        """P(X >= t) = 1 - F(t-)."""
        return 1.0 - self.cdf_left(t)

    # -- quantile table ----------------------------------------------------

    def _piece_slope(self, lo: float, hi: float) -> float:
        s = 0.0
        for w, a, b in self._uniforms:
            if a <= lo and hi <= b:
                s += w / (b - a)
        return s

    @cached_property
    def _pieces(self) -> tuple[_Piece, ...]:
        bps = self._breakpoints
        n_exp = len(self._exponentials)
        pieces: list[_Piece] = []
        for i, b in enumerate(bps):
            f_left = self.cdf_left(b)
            f_at = self.cdf(b)
            if i > 0:
                lo = bps[i - 1]
                q_lo = self.cdf(lo)
                if f_left > q_lo:
                    pieces.append(self._continuous_piece(lo, b, q_lo, f_left, n_exp))
            if f_at > f_left:
                pieces.append(_Piece(f_left, f_at, "atom", value=b))
        last = bps[-1]
        f_last = self.cdf(last)
        if n_exp:
            pieces.append(self._continuous_piece(last, math.inf, f_last, 1.0, n_exp))
        elif pieces:
            pieces[-1].q_hi = 1.0  # guard against rounding just below one
        return tuple(pieces)

    def _continuous_piece(self, lo, hi, q_lo, q_hi, n_exp) -> _Piece:
        # the tail piece (hi = inf) never meets a uniform, so its slope is 0
        slope = self._piece_slope(lo, hi) if math.isfinite(hi) else 0.0
        if n_exp == 0:
            return _Piece(q_lo, q_hi, "linear", t_lo=lo, t_hi=hi,
                          slope=slope, value=self.cdf(lo))
        if n_exp == 1 and slope == 0.0:
            w, rate = self._exponentials[0]
            # on the piece F(t) = a_coef - w * exp(-rate * t)
            a_coef = self.cdf(lo) + w * math.exp(-rate * lo)
            return _Piece(q_lo, q_hi, "exp", t_lo=lo, t_hi=hi,
                          a_coef=a_coef, w_coef=w, rate=rate)
        return _Piece(q_lo, q_hi, "numeric", t_lo=lo, t_hi=hi, value=self.cdf(lo))

    def _invert_numeric(self, piece: _Piece, q: float) -> float:
        hi = piece.t_hi
        if not math.isfinite(hi):
            hi = piece.t_lo + 1.0
            while self.cdf(hi) < q:
                hi = piece.t_lo + 2.0 * (hi - piece.t_lo)
        return brentq(lambda t: self.cdf(t) - q, piece.t_lo, hi, xtol=1e-14, rtol=8.9e-16)

    def quantile(self, q: float) -> float:
        """t_q = inf{t >= 0 : F(t) >= q} for q in (0, 1]."""
        if not (0.0 < q <= 1.0):
            raise ValueError(f"quantile level must be in (0, 1], got {q}")
        for piece in self._pieces:
            if q <= piece.q_hi:
                return self._invert_piece(piece, q)
        return self._invert_piece(self._pieces[-1], q)

    def _invert_piece(self, piece: _Piece, q: float) -> float:
        if piece.kind == "atom":
            return piece.value
        if piece.kind == "linear":
            return piece.t_lo + (q - piece.value) / piece.slope
        if piece.kind == "exp":
            arg = piece.a_coef - q
            if arg <= 0.0:
                return math.inf
            return -math.log(arg / piece.w_coef) / piece.rate
        return self._invert_numeric(piece, q)

    def quantile_array(self, qs: np.ndarray) -> np.ndarray:
        """Vectorized :meth:`quantile`; atoms receive exactly their mass."""
        qs = np.asarray(qs, dtype=np.float64)
        if qs.size and not ((qs > 0.0).all() and (qs <= 1.0).all()):
            raise ValueError("quantile levels must be in (0, 1]")
        pieces = self._pieces
        hi_edges = np.array([p.q_hi for p in pieces])
        idx = np.minimum(np.searchsorted(hi_edges, qs, side="left"), len(pieces) - 1)
        out = np.empty_like(qs)
        for k, piece in enumerate(pieces):
            mask = idx == k
            if not mask.any():
                continue
            qk = qs[mask]
            if piece.kind == "atom":
                out[mask] = piece.value
            elif piece.kind == "linear":
                out[mask] = piece.t_lo + (qk - piece.value) / piece.slope
            elif piece.kind == "exp":
                arg = piece.a_coef - qk
                with np.errstate(divide="ignore"):
                    vals = -np.log(np.maximum(arg, 0.0) / piece.w_coef) / piece.rate
                out[mask] = vals
            else:
                out[mask] = [self._invert_numeric(piece, float(q)) for q in qk]
        return out

    # -- sampling ----------------------------------------------------------

    def sample(self, u: float) -> float:
        """Inverse-CDF draw from a uniform u in [0, 1)."""
        if not (0.0 <= u < 1.0):
            raise ValueError(f"uniform driver must be in [0, 1), got {u}")
        return self.quantile(max(u, _TINY_Q))

    def sample_array(self, us: np.ndarray) -> np.ndarray:
        us = np.asarray(us, dtype=np.float64)
        return self.quantile_array(np.maximum(us, _TINY_Q))

    # -- tail integral -----------------------------------------------------

    def expected_min4(self) -> float:
        """E[Y] = integral over [0, inf) of (1 - F(t))^4 dt.

        Exact piecewise-polynomial integration when no exponential component
        is present; adaptive quadrature (relative tolerance well below 1e-9)
        otherwise.  Finite for every mixture in the algebra.
        """
        bps = self._breakpoints
        if not self._exponentials:
            total = 0.0
            for lo, hi in zip(bps, bps[1:]):
                s_lo = 1.0 - self.cdf(lo)
                s_hi = 1.0 - self.cdf_left(hi)
                if s_lo <= 0.0:
                    break
                # survival is affine on [lo, hi); the division-free quartic
                # mean (a^4 + a^3 b + ... + b^4)/5 stays exact when the two
                # endpoint values agree only up to roundoff
                a, b = s_lo, s_hi
                mean4 = (a**4 + a**3 * b + a * a * b * b + a * b**3 + b**4) / 5.0
                total += mean4 * (hi - lo)
            return total
        total = 0.0
        survival4 = lambda t: (1.0 - self.cdf(t)) ** 4
        for lo, hi in zip(bps, bps[1:]):
            val, _ = quad(survival4, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=200)
            total += val
        tail, _ = quad(survival4, bps[-1], np.inf, epsabs=1e-13, epsrel=1e-12, limit=200)
        return total + tail


@dataclass(frozen=True)
class BoundReport:
    """Tertile endpoints and the induced two-sided bound on the time constant."""

    t_one_third: float
    t_two_thirds: float
    lower_bound: float
    upper_bound: float
    expected_min4: float

    def __post_init__(self):
        if self.t_one_third > self.t_two_thirds:
            raise ValueError("first tertile exceeds second tertile")
        if self.lower_bound > self.upper_bound:
            raise ValueError("lower bound exceeds upper bound")

    def as_dict(self) -> dict:
        return {
            "t_one_third": self.t_one_third,
            "t_two_thirds": self.t_two_thirds,
            "lower_bound": self.lower_bound,
            "upper_bound": self.upper_bound,
            "expected_min4": self.expected_min4,
        }


# -- module-level operation wrappers --------------------------------------


def cdf(distribution: WeightDistribution, t: float) -> float:
    return distribution.cdf(t)


def quantile(distribution: WeightDistribution, q: float) -> float:
    return distribution.quantile(q)


def sample(distribution: WeightDistribution, u: float) -> float:
    return distribution.sample(u)


def expected_min4(distribution: WeightDistribution) -> float:
    return distribution.expected_min4()


def tertile_bounds(distribution: WeightDistribution) -> BoundReport:
    """Bound report: t_{1/3}/100 below, 2 t_{2/3} above, plus E[Y]."""
    t13 = distribution.quantile(1.0 / 3.0)
    t23 = distribution.quantile(2.0 / 3.0)
    return BoundReport(
        t_one_third=t13,
        t_two_thirds=t23,
        lower_bound=t13 / 100.0,
        upper_bound=2.0 * t23,
        expected_min4=distribution.expected_min4(),
    )


def dim_bound_formula(distribution: WeightDistribution, d: int, pc_d: float) -> tuple[float, float]:
    """d-dimensional analogue: (t_{1/2d}/4, d * t_{pc_d}).

    ``pc_d`` is the caller's oriented-percolation threshold for dimension d;
    see :data:`ORIENTED_PC_BY_DIMENSION` for shipped literature defaults.
    """
    if not isinstance(d, int) or d < 2:
        raise ValueError(f"dimension must be an integer >= 2, got {d}")
    if not (0.0 < pc_d < 1.0):
        raise ValueError(f"pc_d must be in (0, 1), got {pc_d}")
    return (
        0.25 * distribution.quantile(1.0 / (2.0 * d)),
        d * distribution.quantile(pc_d),
    )


def is_alm_deijfen_counterexample(distribution: WeightDistribution) -> bool:
    """True when F puts mass >= 2/3 on [0, 1] and >= 1/6 on [3888, inf).

    Such a mixture has time constant at most 2 while the expected minimum of
    four independent draws is at least 3.
    """
    tol = 1e-9
    light = distribution.cdf(LIGHT_INTERVAL_RIGHT)
    heavy = distribution.mass_at_least(HEAVY_LOCATION)
    return light >= LIGHT_MASS_MIN - tol and heavy >= HEAVY_MASS_MIN - tol


# -- JSON interchange ------------------------------------------------------


def parse_distribution(doc: Union[str, dict]) -> WeightDistribution:
    """Parse a mixture document like ``{"mix": [{"w": 0.5, "point": 1.0}, ...]}``.

    Component forms: ``{"w": w, "point": a}``, ``{"w": w, "uniform": [a, b]}``,
    ``{"w": w, "exp": rate}``.  Raw weights must sum to 1 within 1e-9; they
    are renormalized exactly and the defect is recorded on the result as
    ``parse_weight_defect``.
    """
    if isinstance(doc, str):
        doc = json.loads(doc)
    if not isinstance(doc, dict) or "mix" not in doc:
        raise ValueError('distribution document must be an object with a "mix" list')
    entries = doc["mix"]
    if not isinstance(entries, list) or not entries:
        raise ValueError('"mix" must be a non-empty list')
    raw: list[tuple[float, Component]] = []
    for entry in entries:
        if not isinstance(entry, dict) or "w" not in entry:
            raise ValueError(f'mixture entry needs a "w" weight: {entry!r}')
        w = float(entry["w"])
        kinds = [k for k in ("point", "uniform", "exp") if k in entry]
        if len(kinds) != 1:
            raise ValueError(f'mixture entry needs exactly one of "point", "uniform", "exp": {entry!r}')
        kind = kinds[0]
        if kind == "point":
            comp: Component = PointMass(float(entry["point"]))
        elif kind == "uniform":
            a, b = entry["uniform"]
            comp = Uniform(float(a), float(b))
        else:
            comp = Exponential(float(entry["exp"]))
        raw.append((w, comp))
    total = math.fsum(w for w, _ in raw)
    defect = total - 1.0
    if abs(defect) > _PARSE_WEIGHT_TOL:
        raise ValueError(f"mixture weights sum to {total!r}, outside 1 +/- {_PARSE_WEIGHT_TOL}")
    normalized = tuple((w / total, c) for w, c in raw)
    return WeightDistribution(normalized, parse_weight_defect=defect)


def distribution_to_spec(distribution: WeightDistribution) -> dict:
    """Inverse of :func:`parse_distribution` (up to weight normalization)."""
    mix = []
    for w, c in distribution.components:
        if isinstance(c, PointMass):
            mix.append({"w": w, "point": c.a})
        elif isinstance(c, Uniform):
            mix.append({"w": w, "uniform": [c.a, c.b]})
        else:
            mix.append({"w": w, "exp": c.rate})
    return {"mix": mix}
