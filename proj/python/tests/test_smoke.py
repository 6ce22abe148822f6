import math

import numpy as np
import pytest

import accsplit


def test_prox_l1_matches_numpy_soft_threshold():
    v = np.array([3.0, -0.5, 0.2, -2.0])
    expected = np.sign(v) * np.maximum(np.abs(v) - 0.5, 0.0)
    np.testing.assert_allclose(accsplit.prox_l1(v, 0.5), expected, atol=0)


def test_prox_nuclear_matches_numpy_svd():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((6, 4))
    U, s, Vt = np.linalg.svd(X, full_matrices=False)
    expected = U @ np.diag(np.maximum(s - 0.7, 0.0)) @ Vt
    np.testing.assert_allclose(accsplit.prox_nuclear(X, 0.7), expected, atol=1e-12)


def test_prox_least_squares_solves_normal_equations():
    rng = np.random.default_rng(1)
    A = rng.standard_normal((5, 8))
    b = rng.standard_normal(5)
    v = rng.standard_normal(8)
    x = accsplit.prox_least_squares(v, 0.3, A, b)
    expected = np.linalg.solve(np.eye(8) + 0.3 * A.T @ A, v + 0.3 * A.T @ b)
    np.testing.assert_allclose(x, expected, atol=1e-12)


def test_project_box_and_shape_errors():
    X = np.array([[-2.0, 0.5], [1.5, 0.1]])
    np.testing.assert_array_equal(accsplit.project_box(X, -1.0, 1.0), np.clip(X, -1.0, 1.0))
    with pytest.raises(ValueError):
        accsplit.prox_l1(np.zeros((2, 2, 2)), 1.0)


def test_gamma_schedules():
    assert accsplit.gamma(accsplit.DampingSchedule.decaying(3), 1, 0.1) == pytest.approx(0.25)
    assert accsplit.gamma(accsplit.DampingSchedule.constant(1.0), 5, 0.1) == pytest.approx(0.9)
    assert accsplit.gamma(accsplit.DampingSchedule.none(), 5, 0.1) == 0.0
    with pytest.raises(ValueError):
        accsplit.DampingSchedule.constant(-1.0)


def test_yosida_resolvent_at_zero_is_soft_threshold():
    x = np.array([1.0, -0.2, 0.7])
    np.testing.assert_array_equal(
        accsplit.resolvent_of_yosida_l1(x, 1.0, 0.5, 0.0), accsplit.prox_l1(x, 0.5)
    )


def test_solve_lasso_reaches_a_prox_gradient_fixed_point():
    inst = accsplit.gen_lasso(20, 40, 0.8, 1e-3, 5)
    out = accsplit.solve_lasso(inst, "dy", 0.1, accsplit.DampingSchedule.constant(0.5), 1e-11)
    assert out["status"] == "converged"
    x = out["x"]
    A, b, alpha = inst.A, inst.b, inst.alpha
    step = 1.0 / np.linalg.norm(A, 2) ** 2
    t = x - step * A.T @ (A @ x - b)
    pg = np.sign(t) * np.maximum(np.abs(t) - step * alpha, 0.0)
    assert np.linalg.norm(pg - x) <= 1e-8
    assert out["objective"][-1] == pytest.approx(inst.objective(x), rel=1e-12)


def test_order_check_slope():
    slope, h, err = accsplit.order_check("dy", accsplit.DampingSchedule.decaying(3))
    assert 1.8 <= slope <= 2.2
    assert len(h) == len(err) == 8


def test_rate_checks_pass():
    rows = accsplit.rate_checks()
    assert all(r["pass"] for r in rows)


def test_lasso_suite_single_seed():
    runs, summary = accsplit.lasso_suite(seeds=[1], variants=["fb", "fb-constant"])
    assert [s["variant"] for s in summary] == ["fb", "fb-constant"]
    assert all(r["status"] == "converged" for r in runs)
    assert summary[1]["mean_iters"] < summary[0]["mean_iters"]


def test_cli_round_trip(tmp_path):
    code, out, err = accsplit.run_cli(["rates", "--output-dir", str(tmp_path)])
    assert code == 0, err
    assert (tmp_path / "rates.csv").exists()
    code, _, err = accsplit.run_cli(["solve", "--method", "dy"])
    assert code == 1
    assert "lambda" in err
