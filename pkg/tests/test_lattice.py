"""Passage times, geodesics, and oriented-path events on small boxes.

The heavy lifting here is cross-checking the production shortest-path and
anti-diagonal DP code against brute-force enumerations from fpplab.oracles
on boxes small enough to enumerate.
"""

import math

import numpy as np
import pytest

from fpplab import oracles
from fpplab.dist import Exponential, PointMass, Uniform, WeightDistribution
from fpplab.lattice import (
    EAST,
    NORTH,
    Box,
    BoxTooSmallError,
    EdgeId,
    ExplicitField,
    coupling_box,
    coupling_check,
    edge_between,
    field_from_descriptor,
    field_to_descriptor,
    make_field,
    margin_sensitivity,
    oriented_event_A,
    oriented_event_A_prime,
    passage_time,
)

EXP1 = WeightDistribution(((1.0, Exponential(1.0)),))
UNIT_UNIFORM = WeightDistribution(((1.0, Uniform(0.0, 1.0)),))
UNIT_POINT = WeightDistribution(((1.0, PointMass(1.0)),))
BERN_HALF = WeightDistribution(((0.5, PointMass(0.0)), (0.5, PointMass(1.0))))
COUNTEREXAMPLE = WeightDistribution(((2 / 3, PointMass(1.0)), (1 / 3, PointMass(3888.0))))


# -- Box / EdgeId basics ---------------------------------------------------


def test_box_validation():
    with pytest.raises(ValueError):
        Box(3, 3, 0, 1)
    with pytest.raises(ValueError):
        Box(0, 1, 5, 2)
    b = Box(-2, 3, 0, 4)
    assert b.width == 6 and b.height == 5 and b.site_count == 30
    assert b.contains_site((-2, 4)) and not b.contains_site((4, 0))
    assert b.contains_box(Box(-1, 2, 1, 3)) and not b.contains_box(Box(-3, 2, 1, 3))


def test_edge_between_canonicalizes():
    assert edge_between((2, 5), (3, 5)) == EdgeId((2, 5), EAST)
    assert edge_between((3, 5), (2, 5)) == EdgeId((2, 5), EAST)
    assert edge_between((0, 0), (0, 1)) == EdgeId((0, 0), NORTH)
    assert edge_between((0, 1), (0, 0)) == EdgeId((0, 0), NORTH)
    with pytest.raises(ValueError):
        edge_between((0, 0), (1, 1))
    with pytest.raises(ValueError):
        edge_between((0, 0), (0, 0))


def test_field_descriptor_round_trip():
    field = make_field(Box(-4, 9, -3, 6), COUNTEREXAMPLE, seed=77)
    doc = field_to_descriptor(field)
    clone = field_from_descriptor(doc)
    assert clone.box == field.box and clone.seed == field.seed
    edge = EdgeId((1, -2), NORTH)
    assert clone.weight(edge) == field.weight(edge)


def test_explicit_field_matches_hash_field():
    box = Box(-3, 5, -2, 4)
    field = make_field(box, EXP1, seed=5)
    frozen = ExplicitField.from_field(field)
    for edge in (EdgeId((0, 0), EAST), EdgeId((-3, 4), EAST), EdgeId((4, -2), NORTH)):
        assert frozen.weight(edge) == field.weight(edge)
    xs = np.arange(-3, 4)
    ys = np.full_like(xs, 1)
    np.testing.assert_array_equal(
        frozen.weights_vector(xs, ys, EAST), field.weights_vector(xs, ys, EAST)
    )


def test_with_weight_is_copy_on_write():
    field = ExplicitField.from_field(make_field(Box(0, 3, 0, 3), UNIT_UNIFORM, seed=1))
    edge = EdgeId((1, 1), EAST)
    bumped = field.with_weight(edge, 9.5)
    assert bumped.weight(edge) == 9.5
    assert field.weight(edge) != 9.5
    other = EdgeId((0, 2), NORTH)
    assert bumped.weight(other) == field.weight(other)


# -- passage_time ----------------------------------------------------------


def test_passage_zero_distance():
    field = make_field(Box(-12, 12, -12, 12), EXP1, seed=3)
    sample = passage_time(field, (1, 1), (1, 1))
    assert sample.value == 0.0
    assert sample.geodesic == ((1, 1),)


def test_passage_straight_line_on_constant_field():
    field = make_field(Box(-10, 18, -10, 10), UNIT_POINT, seed=0)
    sample = passage_time(field, (0, 0), (8, 0))
    assert sample.value == 8.0
    assert len(sample.geodesic) == 9
    assert sample.geodesic[0] == (0, 0) and sample.geodesic[-1] == (8, 0)


def test_passage_lex_tie_break_on_constant_field():
    # Every monotone staircase ties, so the reported geodesic must be the
    # lexicographically smallest site sequence: all the north steps first.
    field = make_field(Box(-10, 14, -10, 13), UNIT_POINT, seed=0)
    sample = passage_time(field, (0, 0), (3, 2))
    assert sample.value == 5.0
    assert sample.geodesic == ((0, 0), (0, 1), (0, 2), (1, 2), (2, 2), (3, 2))


def test_passage_geodesic_is_adjacent_self_avoiding_and_sums():
    field = make_field(Box(-15, 25, -15, 15), EXP1, seed=42)
    sample = passage_time(field, (0, 0), (11, 2))
    path = sample.geodesic
    assert path[0] == (0, 0) and path[-1] == (11, 2)
    assert len(set(path)) == len(path)
    total = 0.0
    for a, b in zip(path, path[1:]):
        assert abs(a[0] - b[0]) + abs(a[1] - b[1]) == 1
        total += field.weight(edge_between(a, b))
    assert total == pytest.approx(sample.value, rel=1e-12)


def test_passage_symmetry():
    field = make_field(Box(-15, 25, -15, 15), EXP1, seed=9)
    fwd = passage_time(field, (0, 0), (9, 4))
    rev = passage_time(field, (9, 4), (0, 0))
    assert fwd.value == pytest.approx(rev.value, rel=1e-12)


@pytest.mark.parametrize("dist", [EXP1, UNIT_UNIFORM, BERN_HALF], ids=["exp", "unif", "bern"])
def test_passage_matches_enumeration_oracle(dist):
    # 4x4 box is small enough to enumerate every self-avoiding path.
    box = Box(0, 4, 0, 4)
    for seed in range(30):
        field = make_field(box, dist, seed=seed)
        sample = passage_time(field, (0, 0), (4, 4), restrict_box=box)
        expect = oracles.min_saw_path_weight(field, box, (0, 0), (4, 4))
        assert sample.value == pytest.approx(expect, rel=1e-12, abs=1e-12), seed


def test_passage_zero_field_uses_fallback_and_is_exact():
    field = make_field(Box(-10, 15, -10, 13), WeightDistribution(((1.0, PointMass(0.0)),)), seed=2)
    sample = passage_time(field, (0, 0), (5, 3))
    assert sample.value == 0.0
    assert sample.geodesic[0] == (0, 0) and sample.geodesic[-1] == (5, 3)


def test_passage_box_too_small_reports_requirement():
    field = make_field(Box(0, 30, 0, 5), EXP1, seed=1)
    with pytest.raises(BoxTooSmallError, match="box too small") as info:
        passage_time(field, (0, 0), (30, 0))
    assert info.value.required == Box(-10, 40, -10, 10)
    assert info.value.available == Box(0, 30, 0, 5)


def test_passage_endpoint_outside_field_raises():
    field = make_field(Box(0, 10, 0, 10), EXP1, seed=1)
    with pytest.raises(BoxTooSmallError):
        passage_time(field, (0, 0), (11, 0))


def test_restrict_box_must_contain_endpoints():
    field = make_field(Box(-20, 20, -20, 20), EXP1, seed=1)
    with pytest.raises(ValueError, match="restrict_box"):
        passage_time(field, (0, 0), (6, 0), restrict_box=Box(0, 4, 0, 4))


def test_restrict_box_monotone_in_region():
    # A larger search region can only find cheaper or equal routes.
    field = make_field(Box(-30, 40, -30, 30), EXP1, seed=12)
    tight = passage_time(field, (0, 0), (10, 0), restrict_box=Box(0, 10, 0, 1))
    loose = passage_time(field, (0, 0), (10, 0), restrict_box=Box(-5, 15, -5, 5))
    default = passage_time(field, (0, 0), (10, 0))
    assert loose.value <= tight.value + 1e-12
    assert default.value <= loose.value + 1e-12


def test_passage_edge_perturbation_bounds():
    box = Box(-12, 20, -12, 12)
    base_field = ExplicitField.from_field(make_field(box, EXP1, seed=21))
    base = passage_time(base_field, (0, 0), (7, 1))
    mid = base.geodesic[len(base.geodesic) // 2]
    nxt = base.geodesic[len(base.geodesic) // 2 + 1]
    edge = edge_between(mid, nxt)
    w = base_field.weight(edge)

    raised = passage_time(base_field.with_weight(edge, w + 5.0), (0, 0), (7, 1))
    assert base.value - 1e-12 <= raised.value <= base.value + 5.0 + 1e-12

    lowered = passage_time(base_field.with_weight(edge, w * 0.5), (0, 0), (7, 1))
    assert base.value - w * 0.5 - 1e-12 <= lowered.value <= base.value + 1e-12


def test_triangle_inequality_shared_region():
    box = Box(-10, 22, -10, 14)
    region = Box(-6, 18, -6, 10)
    for seed in range(12):
        field = make_field(box, EXP1, seed=seed)
        ab = passage_time(field, (0, 0), (6, 3), restrict_box=region)
        bc = passage_time(field, (6, 3), (12, 0), restrict_box=region)
        ac = passage_time(field, (0, 0), (12, 0), restrict_box=region)
        assert ac.value <= ab.value + bc.value + 1e-9


def test_margin_sensitivity_stable_cases():
    field = make_field(Box(-60, 90, -60, 60), EXP1, seed=4)
    report = margin_sensitivity(field, (0, 0), (25, 0))
    assert report["value_wide"] <= report["value"] + 1e-12
    assert report["drop"] >= -1e-12
    assert report["flagged"] is False

    unit = make_field(Box(-60, 90, -60, 60), UNIT_POINT, seed=0)
    unit_report = margin_sensitivity(unit, (0, 0), (25, 0))
    assert unit_report["value"] == unit_report["value_wide"] == 25.0


def test_field_marginals_match_distribution():
    # Sampled edge weights follow the requested law (DKW band, m = 20000,
    # failure probability well under 1e-6 at this epsilon).
    m = 20_000
    xs = np.arange(m, dtype=np.int64) % 141 - 70
    ys = np.arange(m, dtype=np.int64) // 141 - 70
    eps = math.sqrt(math.log(2.0 / 1e-7) / (2.0 * m))
    box = Box(-80, 80, -80, 80)
    for dist in (EXP1, UNIT_UNIFORM):
        field = make_field(box, dist, seed=6)
        draws = field.weights_vector(xs, ys, EAST)
        samples = np.sort(draws)
        assert oracles.empirical_cdf_distance(samples, dist.cdf_array(samples)) < eps
    # The KS helper assumes a continuous law; check the atomic marginal by
    # its atom frequency instead.
    bern = make_field(box, BERN_HALF, seed=6).weights_vector(xs, ys, NORTH)
    assert set(np.unique(bern)) == {0.0, 1.0}
    assert abs(float(np.mean(bern)) - 0.5) < eps


# -- oriented events -------------------------------------------------------


@pytest.mark.parametrize("dist", [EXP1, BERN_HALF], ids=["exp", "bern"])
@pytest.mark.parametrize("n", [2, 3, 5, 8])
def test_oriented_A_matches_bitmask_oracle(dist, n):
    box = Box(0, n, 0, n)
    for seed in range(10):
        field = make_field(box, dist, seed=seed)
        result = oriented_event_A(field, n, M=1.0, t=0.6)
        expect_w, expect_end = oracles.ne_path_minimum(field, n)
        assert result.min_weight == pytest.approx(expect_w, rel=1e-12, abs=1e-12)
        assert result.best_endpoint == expect_end
        assert result.occurred == (result.min_weight <= n * 0.6 + 1.0)


@pytest.mark.parametrize("dist", [EXP1, BERN_HALF], ids=["exp", "bern"])
@pytest.mark.parametrize("n", [2, 3, 5, 8])
def test_oriented_A_prime_matches_bitmask_oracle(dist, n):
    box = Box(0, n, 0, n)
    for seed in range(10):
        field = make_field(box, dist, seed=seed)
        result = oriented_event_A_prime(field, n, M=1.0, t=0.6)
        expect_w, expect_end = oracles.nw_path_minimum(field, n)
        assert result.min_weight == pytest.approx(expect_w, rel=1e-12, abs=1e-12)
        assert result.best_endpoint == expect_end


def test_oriented_endpoint_constraints():
    for n in (2, 3, 7, 10):
        field = make_field(Box(0, n, 0, n), EXP1, seed=n)
        a = oriented_event_A(field, n, M=0.0, t=1.0)
        x, y = a.best_endpoint
        assert x + y == n and x >= math.ceil(n / 2) and y >= 0
        ap = oriented_event_A_prime(field, n, M=0.0, t=1.0)
        z, zz = ap.best_endpoint
        assert z == zz and 0 <= z <= n // 2


def test_oriented_A_prime_is_reflection_of_A():
    # Flipping the field through x -> n - x turns NW routes from (n, 0)
    # into NE routes from the origin, step for step, so the two DPs must
    # agree bit for bit.
    n = 9
    field = ExplicitField.from_field(make_field(Box(0, n, 0, n), EXP1, seed=13))
    reflected = ExplicitField(
        box=field.box,
        east=np.ascontiguousarray(field.east[:, ::-1]),
        north=np.ascontiguousarray(field.north[:, ::-1]),
    )
    prime = oriented_event_A_prime(field, n, M=2.0, t=0.5)
    mirrored = oriented_event_A(reflected, n, M=2.0, t=0.5)
    assert prime.min_weight == mirrored.min_weight
    assert prime.best_endpoint[0] == n - mirrored.best_endpoint[0]


def test_oriented_requires_triangle_coverage():
    field = make_field(Box(0, 4, 0, 3), EXP1, seed=0)
    with pytest.raises(ValueError, match="does not cover"):
        oriented_event_A(field, 4, M=1.0, t=1.0)
    with pytest.raises(ValueError):
        oriented_event_A(field, 1, M=1.0, t=1.0)


def test_oriented_monotone_in_threshold():
    field = make_field(Box(0, 12, 0, 12), EXP1, seed=8)
    loose = oriented_event_A(field, 12, M=50.0, t=2.0)
    tight = oriented_event_A(field, 12, M=0.0, t=0.001)
    assert loose.occurred is True
    assert tight.occurred is False
    assert loose.min_weight == tight.min_weight


# -- coupling --------------------------------------------------------------


def test_coupling_trivial_unit_field():
    n = 20
    field = make_field(coupling_box(n), UNIT_POINT, seed=0)
    a, ap, sample, holds = coupling_check(field, n, M=0.0, t=1.0)
    assert a.occurred and ap.occurred
    assert sample.value == float(n)
    assert holds is True


def test_coupling_not_applicable_when_event_fails():
    n = 12
    field = make_field(coupling_box(n), EXP1, seed=5)
    a, ap, sample, holds = coupling_check(field, n, M=0.0, t=1e-9)
    assert not a.occurred
    assert holds is None
    assert sample.value > 0.0


def test_coupling_counterexample_never_contradicts():
    # Whenever both oriented events occur, the spliced route must certify
    # the passage bound; across seeds we expect both verdicts to show up.
    n = 50
    outcomes = {True: 0, None: 0}
    box = coupling_box(n)
    for seed in range(60):
        field = make_field(box, COUNTEREXAMPLE, seed=seed)
        _, _, _, holds = coupling_check(field, n, M=20.0, t=1.0)
        assert holds is not False
        outcomes[holds] += 1
    assert outcomes[True] > 0
