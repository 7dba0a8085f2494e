"""Cross-module invariant suite behind the `selftest` subcommand.

Each check re-verifies one load-bearing property at reduced scale, fast
enough to run on every install.  A check passes by returning a detail
string and fails by raising AssertionError; the runner aggregates.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from . import oracles, opercolation, rng, saw
from .dist import Exponential, PointMass, Uniform, WeightDistribution, parse_distribution
from .estimate import ExperimentConfig, estimate_mu, verify_theorem
from .lattice import Box, coupling_box, coupling_check, make_field, oriented_event_A, passage_time

_EXP1 = WeightDistribution(((1.0, Exponential(1.0)),))
_UNIT = WeightDistribution(((1.0, PointMass(1.0)),))
_MIX = WeightDistribution(((0.5, PointMass(1.0)), (0.5, Uniform(0.0, 2.0))))
_CE = WeightDistribution(((2 / 3, PointMass(1.0)), (1 / 3, PointMass(3888.0))))


def _check_rng_scalar_vector_agree() -> str:
    xs = np.arange(-25, 25, dtype=np.int64)
    ys = (xs * 3 + 1) % 11
    for direction in (0, 1):
        vec = rng.edge_uniforms(12345, xs, ys, direction)
        for i in range(xs.size):
            assert vec[i] == rng.edge_uniform(12345, int(xs[i]), int(ys[i]), direction)
        assert float(vec.min()) >= 0.0 and float(vec.max()) < 1.0
    return "50 edges x 2 directions bit-identical"

def _check_dist_quantile_galois() -> str:
    for q in np.linspace(1e-6, 1.0 - 1e-6, 41):
        t = _MIX.quantile(float(q))
        assert _MIX.cdf(t) >= q - 1e-9
    assert _MIX.quantile(1.0 / 3.0) <= _MIX.quantile(2.0 / 3.0)
    return "41 quantile points satisfy F(Q(q)) >= q"


def _check_dist_min4_heavy_value() -> str:
    got = _CE.expected_min4()
    assert abs(got - (1.0 + 3887.0 / 81.0)) < 1e-9
    return f"expected min of 4 = {got:.6f}"


def _check_parse_round_trip() -> str:
    doc = '{"mix": [{"w": 0.25, "uniform": [0.0, 1.0]}, {"w": 0.75, "exp": 2.0}]}'
    dist = parse_distribution(doc)
    assert abs(dist.cdf(10.0) - (0.25 + 0.75 * (1 - math.exp(-20.0)))) < 1e-12
    return "mixture JSON parses and evaluates"


def _check_passage_against_enumeration() -> str:
    box = Box(0, 4, 0, 4)
    for seed in (0, 1, 2):
        field = make_field(box, _EXP1, seed=seed)
        got = passage_time(field, (0, 0), (4, 4), restrict_box=box).value
        expect = oracles.min_saw_path_weight(field, box, (0, 0), (4, 4))
        assert abs(got - expect) < 1e-9
    return "3 seeded 4x4 boxes match brute force"


def _check_passage_symmetry() -> str:
    field = make_field(Box(-15, 20, -15, 15), _EXP1, seed=4)
    fwd = passage_time(field, (0, 0), (7, 3)).value
    rev = passage_time(field, (7, 3), (0, 0)).value
    assert abs(fwd - rev) < 1e-9
    return f"T forward = T reverse = {fwd:.4f}"


def _check_oriented_dp_against_bitmask() -> str:
    field = make_field(Box(0, 5, 0, 5), _EXP1, seed=3)
    result = oriented_event_A(field, 5, M=0.0, t=1.0)
    expect_w, expect_end = oracles.ne_path_minimum(field, 5)
    assert abs(result.min_weight - expect_w) < 1e-12
    assert result.best_endpoint == expect_end
    return "n=5 DP equals 2^5 path sweep"


def _check_coupling_consistent() -> str:
    n = 16
    for seed in range(6):
        field = make_field(coupling_box(n), _CE, seed=seed)
        _, _, _, holds = coupling_check(field, n, M=10.0, t=1.0)
        assert holds is not False
    return "6 seeds, no route-splice violation"


def _check_saw_counts() -> str:
    known = (4, 12, 36, 100, 284, 780, 2172, 5916)
    for n, expect in enumerate(known, start=1):
        assert saw.count_saws(n) == expect
    for n in (1, 2, 3, 4, 5):
        assert saw.count_saws(n) == oracles.naive_count_saws(n)
    return "counts to n=8 match table, to n=5 match naive recursion"


def _check_census_extremes() -> str:
    n = 6
    field = make_field(saw.census_box(n), _CE, seed=0)
    all_heavy = saw.census(field, n, delta=0.5, threshold=0.5)
    assert all_heavy.heavy_histogram == {n: saw.count_saws(n)}
    none_heavy = saw.census(field, n, delta=0.5, threshold=1e6)
    assert none_heavy.N_n == saw.count_saws(n)
    return "all-heavy and none-heavy censuses concentrate correctly"


def _check_chernoff_chain() -> str:
    base = saw.chernoff_base(5.0, 0.01)
    assert abs(base - 0.3551459714113761) < 1e-12
    assert base < 0.36
    assert 2.7 * 0.36 == 0.972
    for n in (10, 100, 200):
        cutoff = saw.strict_count_cutoff(n, 0.01)
        assert saw.exact_binomial_tail(n, 2 / 3, cutoff) <= saw.chernoff_tail_bound(n, 5.0, 0.01)
    return f"base {base:.6f} < 0.36; exact tails dominated"


def _check_survival_extremes_and_coupling() -> str:
    assert opercolation.survival_probability(1.0, 30, 20, 0).frequency == 1.0
    assert opercolation.survival_probability(0.0, 30, 20, 0).frequency == 0.0
    table = opercolation.pc_scan([0.4, 0.6, 0.8], 40, 80, 1)
    freqs = [e.frequency for e in table]
    assert all(a <= b for a, b in zip(freqs, freqs[1:]))
    return "extremes exact; scan monotone by coupling"


def _check_probe_trivial() -> str:
    probe = opercolation.flat_edge_probe(_UNIT, 8, [0.0], 10, 0)
    assert probe["rows"][0]["freq_A"] == 1.0
    assert probe["rows"][0]["freq_AA"] == 1.0
    return "constant field occurs at zero slack"


def _check_estimates_deterministic() -> str:
    cfg = ExperimentConfig(n_grid=(40,), replicates=4, base_seed=9)
    a = estimate_mu(_EXP1, cfg)
    b = estimate_mu(_EXP1, cfg, threads=2)
    assert a == b
    unit = estimate_mu(_UNIT, cfg)[0]
    assert unit.values == (1.0,) * 4 and unit.stderr == 0.0
    verdict = verify_theorem(_UNIT, unit)
    assert verdict["ok"]
    return "serial equals threaded; unit field exact"


CHECKS: list[tuple[str, Callable[[], str]]] = [
    ("rng.scalar_vector_agree", _check_rng_scalar_vector_agree),
    ("dist.quantile_galois", _check_dist_quantile_galois),
    ("dist.min4_heavy_value", _check_dist_min4_heavy_value),
    ("dist.parse_round_trip", _check_parse_round_trip),
    ("lattice.passage_vs_enumeration", _check_passage_against_enumeration),
    ("lattice.passage_symmetry", _check_passage_symmetry),
    ("lattice.oriented_dp_vs_bitmask", _check_oriented_dp_against_bitmask),
    ("lattice.coupling_consistent", _check_coupling_consistent),
    ("saw.counts", _check_saw_counts),
    ("saw.census_extremes", _check_census_extremes),
    ("saw.chernoff_chain", _check_chernoff_chain),
    ("opercolation.survival", _check_survival_extremes_and_coupling),
    ("opercolation.probe_trivial", _check_probe_trivial),
    ("estimate.deterministic", _check_estimates_deterministic),
]


def run_selftest() -> dict:
    """Run every invariant check; ok is true only when all pass."""
    results = []
    for name, check in CHECKS:
        try:
            detail = check()
            results.append({"name": name, "ok": True, "detail": detail})
        except AssertionError as exc:
            results.append({"name": name, "ok": False, "detail": str(exc) or "assertion failed"})
        except Exception as exc:  # a crashed check is a failed check
            results.append({"name": name, "ok": False, "detail": f"{type(exc).__name__}: {exc}"})
    failed = [r for r in results if not r["ok"]]
    return {
        "checks": results,
        "passed": len(results) - len(failed),
        "failed": len(failed),
        "ok": not failed,
    }
