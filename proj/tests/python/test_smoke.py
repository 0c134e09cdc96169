import json
import math

import numpy as np
import pytest

import scaling_frontier as sf


def test_bounds_match_reference_values():
    r = sf.bound_corollary(100, 100, 10, 1e6)
    assert r["form"] == "Corollary1"
    assert r["epsilon"] is None
    assert r["misspecification_nats"] == 3.0
    assert r["estimation_nats"] == pytest.approx(0.008339899449883168637, rel=1e-12)
    t2 = sf.bound_theorem2(2, 2, 5, 100, 3.0)
    assert t2["total_nats"] == pytest.approx(138.0 + 0.01921812055672805699, rel=1e-14)
    assert sf.optimal_epsilon(1, 1, 1) == pytest.approx(0.2943525056288686727, rel=1e-14)
    assert sf.kl_bernoulli_sigmoid(2.0, 0.0) == pytest.approx(0.3278133254727377011, rel=1e-13)


def test_errors_are_python_exceptions():
    with pytest.raises(sf.DomainError):
        sf.entropy_bound(3, 2, 2, 0.0)
    with pytest.raises(sf.InfeasibleError):
        sf.bound_at_budget(1e3, 10, 100, 101)
    with pytest.raises(sf.Error):
        sf.frontier_sweep([1e12, 1e10], 10, 100)


def test_frontier_envelope_and_slope():
    budgets = np.logspace(10, 16, 7)
    pts = sf.frontier_sweep(budgets.tolist(), 10, 100)
    assert [p["n_star"] for p in pts] == sorted(p["n_star"] for p in pts)
    for p in pts:
        assert p["param_count"] <= math.sqrt(3 * p["C"]) + 10
    slope = sf.loglog_slope([p["C"] for p in pts], [p["param_count"] for p in pts])
    assert 0.45 <= slope <= 0.55


def test_ground_truth_is_seeded_and_normalized():
    a = sf.sample_ground_truth(4, 3, seed=7)
    b = sf.sample_ground_truth(4, 3, seed=7)
    assert np.array_equal(a["atoms"], b["atoms"])
    assert a["masses"].sum() == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(np.linalg.norm(a["atoms"], axis=1), 1.0)
    x = np.random.default_rng(0).standard_normal((5, 4))
    f = sf.eval_ground_truth(4, 3, 7, x)
    root = math.sqrt(4.0)
    expected = root * (np.maximum(x @ a["atoms"].T, 0.0) * (a["masses"] * a["signs"])).sum(axis=1)
    assert np.allclose(f, expected, rtol=1e-12, atol=1e-14)


def test_cli_in_process():
    code, out, err = sf.run_cli(["bound", "--n", "100", "--T", "1e6"])
    assert code == 0
    assert json.loads(out)["form"] == "Corollary1"
    code, _, err = sf.run_cli(["frontier", "--budgets", "1e12,1e12,1e12"])
    assert code == 2
    assert "error" in err
