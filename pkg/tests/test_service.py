import math

import pytest
from fastapi.testclient import TestClient

from fpplab import __version__, saw
from fpplab.opercolation import survival_probability
from fpplab.service import create_app

POINT_ONE = {"mix": [{"w": 1.0, "point": 1.0}]}
EXP_ONE = {"mix": [{"w": 1.0, "exp": 1.0}]}
CE_MIX = {"mix": [{"w": 2 / 3, "point": 1.0}, {"w": 1 / 3, "point": 3888.0}]}

ENVELOPE_KEYS = {"command", "parameters", "results", "seed", "version", "wall_time_seconds"}


@pytest.fixture(scope="module")
def client():
    with TestClient(create_app()) as c:
        yield c


def test_health(client):
    resp = client.get("/api/health")
    assert resp.status_code == 200
    assert resp.json() == {"status": "ok", "version": __version__}


def test_bounds_point_mass(client):
    resp = client.post("/api/bounds", json={"dist": POINT_ONE})
    assert resp.status_code == 200
    doc = resp.json()
    assert set(doc) == ENVELOPE_KEYS
    assert doc["command"] == "bounds"
    assert doc["version"] == __version__
    assert doc["wall_time_seconds"] >= 0.0
    results = doc["results"]
    assert results["lower_bound"] == 0.01
    assert results["upper_bound"] == 2.0
    assert results["expected_min4"] == 1.0
    assert results["is_counterexample_family"] is False


def test_bounds_accepts_json_string_dist(client):
    resp = client.post("/api/bounds", json={"dist": '{"mix": [{"w": 1.0, "point": 1.0}]}'})
    assert resp.status_code == 200
    assert resp.json()["results"]["upper_bound"] == 2.0


def test_bounds_flags_counterexample_family(client):
    resp = client.post("/api/bounds", json={"dist": CE_MIX})
    results = resp.json()["results"]
    assert results["is_counterexample_family"] is True
    assert results["expected_min4"] == pytest.approx(1.0 + 3887.0 / 81.0, abs=1e-9)
    assert results["t_one_third"] == 1.0
    assert results["t_two_thirds"] == 1.0


def test_bounds_dim_variant_uses_shipped_threshold(client):
    resp = client.post("/api/bounds", json={"dist": EXP_ONE, "d": 3})
    assert resp.status_code == 200
    dim = resp.json()["results"]["dim_bound"]
    assert dim["d"] == 3
    assert dim["pc_d"] == 0.447
    assert dim["lower_bound"] == pytest.approx(0.25 * -math.log(1.0 - 1.0 / 6.0), rel=1e-12)
    assert dim["upper_bound"] == pytest.approx(3.0 * -math.log(1.0 - 0.447), rel=1e-12)


def test_bounds_dim_without_threshold_rejected(client):
    resp = client.post("/api/bounds", json={"dist": EXP_ONE, "d": 7})
    assert resp.status_code == 422
    assert "pc_d" in resp.json()["detail"]


def test_malformed_distribution_is_422(client):
    resp = client.post("/api/bounds", json={"dist": "definitely not json"})
    assert resp.status_code == 422
    assert "distribution" in resp.json()["detail"]


def test_model_validation_is_422(client):
    resp = client.post("/api/estimate", json={"dist": EXP_ONE, "replicates": 0})
    assert resp.status_code == 422


def test_core_validation_is_422(client):
    resp = client.post(
        "/api/estimate", json={"dist": EXP_ONE, "n_grid": [40, 40], "replicates": 2}
    )
    assert resp.status_code == 422
    resp = client.post(
        "/api/opc/probe", json={"n": 20, "M_grid": [5.0, 0.0], "trials": 2, "seed": 0}
    )
    assert resp.status_code == 422


def test_estimate_report_shape_and_seed_echo(client):
    body = {"dist": EXP_ONE, "n_grid": [30], "replicates": 4, "seed": 17}
    doc = client.post("/api/estimate", json=body).json()
    assert set(doc) == ENVELOPE_KEYS
    assert doc["seed"] == 17
    assert "seed" not in doc["parameters"]
    assert "threads" not in doc["parameters"]
    assert doc["parameters"]["n_grid"] == [30]
    est = doc["results"]["estimates"][0]
    assert est["n"] == 30
    assert est["replicates"] == 4
    assert "values" not in est
    assert doc["results"]["ok"] is True


def test_estimate_verbose_includes_values(client):
    body = {"dist": POINT_ONE, "n_grid": [20], "replicates": 3, "seed": 0, "verbose": True}
    est = client.post("/api/estimate", json=body).json()["results"]["estimates"][0]
    assert est["values"] == [1.0, 1.0, 1.0]
    assert est["stderr"] == 0.0


def test_estimate_threads_do_not_change_results(client):
    body = {"dist": EXP_ONE, "n_grid": [25, 50], "replicates": 4, "seed": 5}
    serial = client.post("/api/estimate", json={**body, "threads": 1}).json()
    threaded = client.post("/api/estimate", json={**body, "threads": 4}).json()
    assert serial["results"] == threaded["results"]
    assert serial["parameters"] == threaded["parameters"]


def test_counterexample_defaults_to_canonical_mixture(client):
    doc = client.post("/api/counterexample", json={"n": 60, "replicates": 6, "seed": 1}).json()
    results = doc["results"]
    assert results["e_min4"] == pytest.approx(1.0 + 3887.0 / 81.0, abs=1e-9)
    assert results["upper_bound"] == 2.0
    assert results["ok"] == results["separated"]
    assert len(results["mu_estimate"]["values"]) == 6


def test_counterexample_rejects_plain_distribution(client):
    resp = client.post("/api/counterexample", json={"dist": EXP_ONE, "n": 20, "replicates": 2})
    assert resp.status_code == 422
    assert "counterexample" in resp.json()["detail"]


def test_median_suite_families(client):
    body = {"k_grid": [1, 3], "n": 40, "replicates": 4, "seed": 0}
    results = client.post("/api/median-suite", json=body).json()["results"]
    rows_a = results["family_A"]["rows"]
    rows_b = results["family_B"]["rows"]
    assert [r["k"] for r in rows_a] == [1, 3]
    assert rows_b[0]["mean"] == 1.0
    assert rows_b[0]["stderr"] == 0.0
    assert results["family_B"]["trend_only"] is True
    assert results["ok"] == (
        results["family_A"]["nonincreasing"] and results["family_A"]["last_below_half_of_first"]
    )


def test_saw_count_matches_table(client):
    doc = client.post("/api/saw/count", json={"n": 4}).json()
    assert doc["results"] == {"n": 4, "c_n": 100}
    assert doc["seed"] == 0


def test_saw_count_over_cap_is_422(client):
    resp = client.post("/api/saw/count", json={"n": saw.COUNT_CAP + 1})
    assert resp.status_code == 422


def test_saw_census_histogram_sums_to_count(client):
    body = {"dist": CE_MIX, "n": 6, "delta": 0.5, "threshold": 2.0, "seed": 3}
    results = client.post("/api/saw/census", json=body).json()["results"]
    assert results["total_walks"] == saw.count_saws(6)
    assert sum(results["heavy_histogram"].values()) == results["total_walks"]
    assert results["N_n"] == sum(
        v for k, v in results["heavy_histogram"].items() if int(k) < results["cutoff"]
    )


def test_saw_bound_chain_rounded_value(client):
    results = client.post("/api/saw/bound", json={"n": 100}).json()["results"]
    assert results["rounded_chain"] == 0.972**100
    assert results["chernoff_base"] == pytest.approx(0.355146, abs=1e-6)
    assert results["exact_tail_two_thirds"] <= results["chernoff_tail"]


def test_saw_witness_round_trip(client):
    import fpplab.lattice as lattice
    from fpplab.dist import parse_distribution

    doc = {"mix": [{"w": 1 / 3, "point": 0.5}, {"w": 2 / 3, "point": 2.0}]}
    body = {"dist": doc, "n": 10, "delta": 0.01, "threshold": 1.0, "seed": 11}
    got = client.post("/api/saw/witness", json=body).json()["results"]
    field = lattice.make_field(saw.witness_box(10), parse_distribution(doc), 11)
    expect = saw.lower_bound_witness(field, 10, 0.01, 1.0)
    assert got == expect


def test_opc_survival_extremes(client):
    up = client.post(
        "/api/opc/survival", json={"p": 1.0, "depth": 50, "trials": 30, "seed": 0}
    ).json()["results"]
    assert up["frequency"] == 1.0 and up["successes"] == 30
    down = client.post(
        "/api/opc/survival", json={"p": 0.0, "depth": 50, "trials": 30, "seed": 0}
    ).json()["results"]
    assert down["frequency"] == 0.0


def test_opc_scan_rows_match_single_calls(client):
    body = {"p_grid": [0.5, 0.7], "depth": 40, "trials": 60, "seed": 9}
    results = client.post("/api/opc/scan", json=body).json()["results"]
    for row in results["rows"]:
        single = survival_probability(row["p"], 40, 60, 9)
        assert row == single.as_dict()
    assert results["level"] == 0.5
    assert "variant" in results


def test_opc_probe_rows_and_rerun_identical(client):
    body = {"n": 30, "M_grid": [0.0, 100.0], "trials": 20, "seed": 2}
    first = client.post("/api/opc/probe", json=body).json()
    second = client.post("/api/opc/probe", json=body).json()
    assert first["results"] == second["results"]
    rows = first["results"]["rows"]
    assert [r["M"] for r in rows] == [0.0, 100.0]
    for row in rows:
        assert 0.0 <= row["freq_AA"] <= row["freq_A"] <= 1.0


def test_selftest_endpoint(client):
    results = client.post("/api/selftest").json()["results"]
    assert results["ok"] is True
    assert results["failed"] == 0
    assert results["passed"] == len(results["checks"])
