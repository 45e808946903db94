import json

import numpy as np
import pytest

from atomqke import ValidationError, accuracy, predict, rbf_kernel, train
from atomqke.svm import SvmModel, decision_values, gamma_scale


def qp_oracle(kernel, y, c):
    """Brute-force dual solution via an interior-point QP solver."""
    from cvxopt import matrix, solvers

    m = len(y)
    yf = y.astype(float)
    P = matrix(np.outer(yf, yf) * kernel)
    q = matrix(-np.ones(m))
    G = matrix(np.vstack([-np.eye(m), np.eye(m)]))
    h = matrix(np.hstack([np.zeros(m), c * np.ones(m)]))
    A = matrix(yf, (1, m))
    b = matrix(0.0)
    solvers.options["show_progress"] = False
    solution = solvers.qp(P, q, G, h, A, b)
    alphas = np.clip(np.array(solution["x"]).ravel(), 0.0, c)
    decision = kernel @ (alphas * yf)
    free = (alphas > 1e-6) & (alphas < c - 1e-6)
    if free.any():
        bias = float(np.mean(yf[free] - decision[free]))
    else:
        bias = float(np.median(yf - decision))
    return alphas, bias


def dual_objective(kernel, y, alphas):
    coef = alphas * y
    return 0.5 * coef @ kernel @ coef - alphas.sum()


def random_psd_problem(m, seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(m, 3))
    kernel = rbf_kernel(x, x, gamma=0.5)
    y = np.where(rng.random(m) < 0.5, 1, -1)
    if len(np.unique(y)) < 2:
        y[0] = -y[1]
    return kernel, y


class TestTrainBasics:
    def test_two_sample_identity_kernel(self):
        # dual by hand: alpha1 = alpha2 = min(1, C); b = 0 by symmetry
        model = train(np.eye(2), np.array([1, -1]), c=1.0)
        assert model.alphas == pytest.approx([1.0, 1.0], abs=1e-9)
        assert model.bias == pytest.approx(0.0, abs=1e-9)
        assert model.support == (0, 1)
        assert np.array_equal(predict(model, np.eye(2)), [1, -1])

    def test_hinge_report_on_toy(self):
        model = train(np.eye(2), np.array([1, -1]), c=1.0)
        report = model.hinge_report
        assert report.lam == pytest.approx(1 / 4)
        assert report.regularizer == pytest.approx(2.0)
        assert report.mean_hinge_loss == pytest.approx(0.0, abs=1e-9)
        assert report.objective == pytest.approx(0.5, abs=1e-9)

    def test_duplicate_rows_share_coefficients(self):
        kernel = np.array(
            [
                [1.0, 1.0, 0.0, 0.0],
                [1.0, 1.0, 0.0, 0.0],
                [0.0, 0.0, 1.0, 1.0],
                [0.0, 0.0, 1.0, 1.0],
            ]
        )
        y = np.array([1, 1, -1, -1])
        model = train(kernel, y, c=1.0)
        assert model.alphas[0] == pytest.approx(model.alphas[1], abs=1e-12)
        assert model.alphas[2] == pytest.approx(model.alphas[3], abs=1e-12)

    def test_determinism(self):
        kernel, y = random_psd_problem(12, seed=0)
        a = train(kernel, y)
        b = train(kernel, y)
        assert np.array_equal(a.dual_coef, b.dual_coef)
        assert a.bias == b.bias

    def test_input_validation(self):
        with pytest.raises(ValidationError):
            train(np.eye(3), np.array([1, 1, 1]))  # single class
        with pytest.raises(ValidationError):
            train(np.full((2, 2), np.nan), np.array([1, -1]))
        with pytest.raises(ValidationError):
            train(np.array([[1.0, 0.5], [0.0, 1.0]]), np.array([1, -1]))  # asym
        with pytest.raises(ValidationError):
            train(np.eye(2), np.array([1, -1]), c=0.0)


class TestAgainstQpOracle:
    @pytest.mark.parametrize(
        "m,seed", [(2, 1), (2, 2), (3, 3), (3, 4), (6, 5), (6, 6), (6, 7)]
    )
    def test_dual_objective_and_predictions(self, m, seed):
        kernel, y = random_psd_problem(m, seed)
        model = train(kernel, y, c=1.0, tol=1e-5)
        alphas_ref, bias_ref = qp_oracle(kernel, y, 1.0)
        ours = dual_objective(kernel, y, model.alphas)
        ref = dual_objective(kernel, y, alphas_ref)
        assert abs(ours - ref) <= 1e-4
        reference = SvmModel(
            dual_coef=alphas_ref * y, bias=bias_ref, support=(), c=1.0, labels=y
        )
        assert np.array_equal(predict(model, kernel), predict(reference, kernel))

    @pytest.mark.parametrize("c", [0.1, 1.0, 10.0])
    def test_various_costs(self, c):
        kernel, y = random_psd_problem(6, seed=8)
        model = train(kernel, y, c=c, tol=1e-5)
        alphas_ref, _ = qp_oracle(kernel, y, c)
        assert abs(
            dual_objective(kernel, y, model.alphas)
            - dual_objective(kernel, y, alphas_ref)
        ) <= 1e-4


class TestKkt:
    @pytest.mark.parametrize("seed", range(5))
    def test_kkt_conditions_hold(self, seed):
        kernel, y = random_psd_problem(14, seed=seed)
        model = train(kernel, y, c=1.0)
        tol = 1e-2
        margins = y * decision_values(model, kernel)
        for i, alpha in enumerate(model.alphas):
            if alpha <= 1e-8:
                assert margins[i] >= 1 - tol
            elif alpha >= 1.0 - 1e-8:
                assert margins[i] <= 1 + tol
            else:
                assert abs(margins[i] - 1.0) <= tol

    def test_dual_feasibility(self):
        kernel, y = random_psd_problem(10, seed=42)
        model = train(kernel, y)
        assert abs(np.sum(model.alphas * y)) <= 1e-8
        assert np.all(model.alphas >= -1e-12)
        assert np.all(model.alphas <= 1.0 + 1e-12)


class TestPredict:
    def test_zero_decision_maps_to_plus_one(self):
        model = SvmModel(
            dual_coef=np.array([0.0]), bias=0.0, support=(), c=1.0,
            labels=np.array([1]),
        )
        assert predict(model, np.array([[0.0]]))[0] == 1

    def test_sign_invariant_under_positive_scaling(self):
        kernel, y = random_psd_problem(8, seed=9)
        model = train(kernel, y)
        scaled = SvmModel(
            dual_coef=3.7 * model.dual_coef, bias=3.7 * model.bias,
            support=model.support, c=model.c, labels=model.labels,
        )
        assert np.array_equal(predict(model, kernel), predict(scaled, kernel))


class TestAccuracy:
    def test_trivial_values(self):
        assert accuracy([1, -1], [1, -1]) == 1.0
        assert accuracy([1, -1], [-1, 1]) == 0.0
        assert accuracy([1, 1], [1, -1]) == 0.5

    def test_mismatched_lengths(self):
        with pytest.raises(ValidationError):
            accuracy([1], [1, -1])


class TestRbfKernel:
    def test_diagonal_is_one(self):
        x = np.array([[1.0, 2.0, 3.0], [0.1, 0.2, 0.3]])
        kernel = rbf_kernel(x, x, gamma=0.7)
        assert np.allclose(np.diag(kernel), 1.0)

    def test_distance_kills_the_kernel(self):
        a = np.array([[0.0, 0.0, 0.0]])
        b = np.array([[100.0, 100.0, 100.0]])
        assert rbf_kernel(a, b, gamma=1.0)[0, 0] <= 1e-300

    def test_gamma_zero_gives_all_ones(self):
        x = np.random.default_rng(0).normal(size=(4, 3))
        assert np.allclose(rbf_kernel(x, x, gamma=0.0), 1.0)

    def test_scale_heuristic(self):
        x = np.random.default_rng(1).normal(size=(20, 3))
        expected = 1.0 / (3 * x.var())
        assert gamma_scale(x) == pytest.approx(expected)
        k_default = rbf_kernel(x, x)
        k_explicit = rbf_kernel(x, x, gamma=expected)
        assert np.allclose(k_default, k_explicit)


class TestModelSerialization:
    def test_json_schema_and_round_trip(self):
        kernel, y = random_psd_problem(6, seed=10)
        model = train(kernel, y)
        data = json.loads(model.dumps())
        assert set(data) == {"alpha_y", "b", "support", "C"}
        back = SvmModel.from_json(data)
        assert np.allclose(back.dual_coef, model.dual_coef)
        assert back.bias == model.bias
        assert back.support == model.support
        assert np.array_equal(predict(back, kernel), predict(model, kernel))
