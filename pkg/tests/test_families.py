import math

import numpy as np
import pytest
from scipy.optimize import minimize

from bestsubset.data import Continuous, Dataset, Survival, standardize
from bestsubset.families import (
    CoefficientModel,
    ModelFamily,
    dual_sacrifice,
    fit_active,
    grad_hess,
    log_likelihood,
    loss,
    predict,
)
from conftest import random_standardized

GAUSSIAN = ModelFamily("gaussian")
BINOMIAL = ModelFamily("binomial")
COX = ModelFamily("cox")
FAMILY = {"gaussian": GAUSSIAN, "binomial": BINOMIAL, "cox": COX}


def dense_model(beta, intercept=0.0):
    """Coefficient model over the full index set (for derivative checks)."""
    beta = np.asarray(beta, dtype=float)
    return CoefficientModel(beta, intercept, tuple(range(beta.shape[0])))


def coordinate_loss(family, sd, beta, intercept, j):
    def f(t):
        b = beta.copy()
        b[j] = t
        return loss(family, sd, dense_model(b, intercept))

    return f


class TestLossValues:
    def test_gaussian_zero_model(self, rng):
        sd = random_standardized("gaussian", 30, 4, seed=5)
        y = sd.dataset.response.y
        value = loss(GAUSSIAN, sd, dense_model(np.zeros(4)))
        assert value == pytest.approx(y @ y / (2 * 30), rel=1e-12)

    def test_binomial_zero_model_is_n_log2(self):
        sd = random_standardized("binomial", 40, 3, seed=6)
        value = loss(BINOMIAL, sd, dense_model(np.zeros(3)))
        assert value == pytest.approx(40 * math.log(2), rel=1e-12)

    def test_cox_zero_model_counts_risk_sets(self):
        # distinct times: at beta=0 each event contributes log |risk set|
        X = np.arange(10.0).reshape(5, 2)
        times = np.array([3.0, 1.0, 4.0, 2.0, 5.0])
        status = np.array([1.0, 0.0, 1.0, 1.0, 0.0])
        sd = standardize(Dataset(X, Survival(times, status)))
        expected = sum(
            math.log(int((times >= times[i]).sum()))
            for i in range(5)
            if status[i] == 1.0
        )
        value = loss(COX, sd, dense_model(np.zeros(2)))
        assert value == pytest.approx(expected, rel=1e-12)

    def test_cox_tied_times_use_full_tie_group(self):
        X = np.arange(8.0).reshape(4, 2)
        times = np.array([2.0, 2.0, 1.0, 3.0])
        status = np.array([1.0, 1.0, 1.0, 0.0])
        sd = standardize(Dataset(X, Survival(times, status)))
        # risk sets: t=2 events see {1,2,4th obs? times >= 2} = 3 members each,
        # t=1 event sees all 4
        expected = math.log(3) + math.log(3) + math.log(4)
        value = loss(COX, sd, dense_model(np.zeros(2)))
        assert value == pytest.approx(expected, rel=1e-12)


class TestGradHess:
    def test_gaussian_curvature_is_one(self, rng):
        sd = random_standardized("gaussian", 25, 6, seed=7)
        for _ in range(5):
            beta = rng.standard_normal(6)
            _, h = grad_hess(GAUSSIAN, sd, dense_model(beta))
            np.testing.assert_array_equal(h, 1.0)

    def test_binomial_values_at_zero(self):
        sd = random_standardized("binomial", 50, 4, seed=8)
        X = sd.dataset.X
        y = sd.dataset.response.y
        g, h = grad_hess(BINOMIAL, sd, dense_model(np.zeros(4)))
        np.testing.assert_allclose(g, -X.T @ (y - 0.5), rtol=1e-12)
        # columns have sqrt(n) norm, so h_j(0) = n/4
        np.testing.assert_allclose(h, 50 / 4.0, rtol=1e-12)

    @pytest.mark.parametrize("family", ["gaussian", "binomial", "cox"])
    def test_gradient_matches_finite_differences(self, family):
        fam = FAMILY[family]
        checked = 0
        for trial in range(20):
            n, p = 40, 5
            sd = random_standardized(family, n, p, seed=1000 + trial, censor_rate=0.2)
            rng = np.random.default_rng(2000 + trial)
            beta = rng.standard_normal(p) * 0.5
            intercept = float(rng.standard_normal()) * 0.3 if family == "binomial" else 0.0
            g, _ = grad_hess(fam, sd, dense_model(beta, intercept))
            for j in range(p):
                f = coordinate_loss(fam, sd, beta, intercept, j)
                step = 1e-5 * max(1.0, abs(beta[j]))
                fd = (f(beta[j] + step) - f(beta[j] - step)) / (2 * step)
                assert abs(g[j] - fd) <= 1e-5 * max(1.0, abs(fd)), (family, trial, j)
                checked += 1
        assert checked == 20 * 5

    @pytest.mark.parametrize("family", ["binomial", "cox"])
    def test_curvature_matches_finite_differences(self, family):
        fam = FAMILY[family]
        for trial in range(20):
            n, p = 40, 5
            sd = random_standardized(family, n, p, seed=3000 + trial, censor_rate=0.2)
            rng = np.random.default_rng(4000 + trial)
            beta = rng.standard_normal(p) * 0.5
            intercept = float(rng.standard_normal()) * 0.3 if family == "binomial" else 0.0
            _, h = grad_hess(fam, sd, dense_model(beta, intercept))
            for j in range(p):
                f = coordinate_loss(fam, sd, beta, intercept, j)
                step = 5e-4 * max(1.0, abs(beta[j]))
                fd = (f(beta[j] + step) - 2 * f(beta[j]) + f(beta[j] - step)) / step**2
                assert abs(h[j] - fd) <= 1e-4 * max(1.0, abs(fd)), (family, trial, j)


class TestDualSacrifice:
    def test_gaussian_orthogonal_inactive_coordinate(self):
        # column 2 orthogonal to the residual => zero dual and sacrifice
        X = np.array(
            [[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 1.0, 1.0], [0.0, -1.0, 1.0],
             [0.0, 0.0, -1.0], [0.0, 0.0, -1.0]]
        )
        rng = np.random.default_rng(0)
        X = X + 0.0
        y = X[:, 0] * 2.0  # exactly spanned by column 0
        sd = standardize(Dataset(X, Continuous(y)))
        model = fit_active(GAUSSIAN, sd, (0,))
        gamma, delta = dual_sacrifice(GAUSSIAN, sd, model)
        e = sd.dataset.response.y - sd.dataset.X @ model.beta
        for j in (1, 2):
            if abs(e @ sd.dataset.X[:, j]) < 1e-10:
                assert abs(gamma[j]) < 1e-12
                assert abs(delta[j]) < 1e-24

    def test_complementary_supports_exact(self):
        for family in ("gaussian", "binomial", "cox"):
            sd = random_standardized(family, 60, 8, seed=11, censor_rate=0.1)
            model = fit_active(FAMILY[family], sd, (1, 4, 6))
            gamma, delta = dual_sacrifice(FAMILY[family], sd, model)
            for j in (1, 4, 6):
                assert gamma[j] == 0.0
            inactive = [j for j in range(8) if j not in (1, 4, 6)]
            assert all(model.beta[j] == 0.0 for j in inactive)

    def test_cox_event_weights_sum_to_one(self):
        # brute-force weights per event against the vectorized risk sums
        rng = np.random.default_rng(13)
        n, p = 15, 3
        X = rng.standard_normal((n, p))
        times = rng.uniform(0.5, 3.0, n)
        times[3] = times[7]  # force a tie
        status = (rng.uniform(size=n) < 0.7).astype(float)
        status[0] = 1.0
        sd = standardize(Dataset(X, Survival(times, status)))
        beta = rng.standard_normal(p) * 0.4
        eta = sd.dataset.X @ beta
        t = sd.dataset.response.time
        for i in range(n):
            if sd.dataset.response.status[i] != 1.0:
                continue
            risk = t >= t[i]
            weights = np.exp(eta[risk]) / np.exp(eta[risk]).sum()
            assert weights.sum() == pytest.approx(1.0, abs=1e-12)

    def test_active_sacrifice_formula(self):
        sd = random_standardized("gaussian", 30, 5, seed=17)
        model = fit_active(GAUSSIAN, sd, (0, 2))
        _, delta = dual_sacrifice(GAUSSIAN, sd, model)
        # gaussian h == 1: active sacrifice is beta^2 / 2
        assert delta[0] == pytest.approx(0.5 * model.beta[0] ** 2, rel=1e-12)
        assert delta[2] == pytest.approx(0.5 * model.beta[2] ** 2, rel=1e-12)


class TestFitActive:
    def test_gaussian_empty_set(self):
        sd = random_standardized("gaussian", 20, 4, seed=19)
        model = fit_active(GAUSSIAN, sd, ())
        np.testing.assert_array_equal(model.beta, 0.0)
        y = sd.dataset.response.y
        assert loss(GAUSSIAN, sd, model) == pytest.approx(y @ y / 40.0)

    def test_gaussian_univariate_closed_form(self, rng):
        # orthonormal columns scaled to sqrt(n) norm
        n = 16
        Q, _ = np.linalg.qr(rng.standard_normal((n, 4)))
        X = Q * math.sqrt(n)
        y = rng.standard_normal(n)
        y -= y.mean()
        X -= X.mean(axis=0)
        X *= math.sqrt(n) / np.linalg.norm(X, axis=0)
        sd = standardize(Dataset(X, Continuous(y)))
        for j in range(4):
            model = fit_active(GAUSSIAN, sd, (j,))
            expected = sd.dataset.X[:, j] @ sd.dataset.response.y / n
            assert model.beta[j] == pytest.approx(expected, rel=1e-8)

    def test_binomial_against_generic_minimizer(self):
        # independent oracle: derivative-free/numeric-gradient minimizer on
        # the 4-parameter restricted likelihood
        sd = random_standardized("binomial", 50, 6, seed=23)
        active = (1, 3, 4)
        model = fit_active(BINOMIAL, sd, active)
        X = sd.dataset.X[:, list(active)]
        y = sd.dataset.response.y

        def nll(params):
            eta = params[0] + X @ params[1:]
            return float(np.sum(np.logaddexp(0.0, eta) - y * eta))

        ref = minimize(nll, np.zeros(4), method="BFGS", options={"gtol": 1e-12})
        fitted = np.concatenate([[model.intercept], model.beta[list(active)]])
        np.testing.assert_allclose(fitted, ref.x, atol=1e-6)

    def test_cox_against_generic_minimizer(self):
        sd = random_standardized("cox", 60, 5, seed=29, censor_rate=0.2)
        active = (0, 2)
        model = fit_active(COX, sd, active)
        X = sd.dataset.X[:, list(active)]
        t = sd.dataset.response.time
        delta = sd.dataset.response.status

        def npl(params):
            eta = X @ params
            total = 0.0
            for i in range(len(t)):
                if delta[i] == 1.0:
                    total -= eta[i] - math.log(np.exp(eta[t >= t[i]]).sum())
            return total

        ref = minimize(npl, np.zeros(2), method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-12})
        np.testing.assert_allclose(model.beta[list(active)], ref.x, atol=1e-5)

    def test_gaussian_k_exceeding_n_rejected(self, rng):
        X = rng.standard_normal((4, 6))
        sd = standardize(Dataset(X, Continuous(rng.standard_normal(4))))
        with pytest.raises(ValueError, match="exceeds n"):
            fit_active(GAUSSIAN, sd, (0, 1, 2, 3, 4))

    def test_duplicate_indices_rejected(self):
        sd = random_standardized("gaussian", 10, 3, seed=31)
        with pytest.raises(ValueError, match="duplicate"):
            fit_active(GAUSSIAN, sd, (1, 1))

    def test_singular_gram_warns_not_raises(self, rng):
        X = rng.standard_normal((10, 2))
        y = rng.standard_normal(10)
        d = Dataset(np.column_stack([X[:, 0], X[:, 1], X[:, 1]]), Continuous(y))
        sd = standardize(d)
        with pytest.warns(RuntimeWarning, match="ridge"):
            model = fit_active(GAUSSIAN, sd, (1, 2))
        assert np.all(np.isfinite(model.beta))

    @pytest.mark.parametrize("family", ["gaussian", "binomial", "cox"])
    def test_stationarity_on_active_set(self, family):
        sd = random_standardized(family, 80, 6, seed=37, censor_rate=0.1)
        fam = FAMILY[family]
        active = (0, 2, 5)
        model = fit_active(fam, sd, active)
        assert model.solver_converged
        g, _ = grad_hess(fam, sd, model)
        for j in active:
            assert abs(g[j]) < 10 * fam.solver_tol
        if family == "binomial":
            prob = predict(fam, model, np.asarray(sd.dataset.X), _identity_meta(sd))
            score = float(np.sum(prob - sd.dataset.response.y))
            assert abs(score) < 10 * fam.solver_tol

    @pytest.mark.parametrize("family", ["gaussian", "binomial", "cox"])
    def test_fit_improves_on_zero_model(self, family):
        sd = random_standardized(family, 50, 5, seed=41, censor_rate=0.1)
        fam = FAMILY[family]
        active = (1, 3)
        fitted = loss(fam, sd, fit_active(fam, sd, active))
        zero = loss(fam, sd, CoefficientModel(np.zeros(5), 0.0, active))
        assert fitted <= zero + 1e-12

    def test_cox_diagonal_hessian_matches_full(self):
        sd = random_standardized(
            "cox", 70, 5, seed=43, beta=np.array([0.8, 0, -0.6, 0, 0.4]),
            censor_rate=0.15,
        )
        full = fit_active(ModelFamily("cox"), sd, (0, 2, 4))
        diag = fit_active(
            ModelFamily("cox", diagonal_hessian=True, newton_max_iter=500), sd, (0, 2, 4)
        )
        assert diag.solver_converged
        np.testing.assert_allclose(diag.beta, full.beta, atol=1e-5)


def _identity_meta(sd):
    """Meta whose de-standardization is the identity (X already standardized)."""
    from bestsubset.data import StandardizedDataset

    p = sd.dataset.p
    return StandardizedDataset(sd.dataset, np.zeros(p), np.ones(p), 0.0)


class TestPredict:
    def test_zero_coefficients(self, rng):
        n, p = 12, 3
        Xnew = rng.standard_normal((6, p))
        for family, expected in (("gaussian", None), ("binomial", 0.5), ("cox", 1.0)):
            sd = random_standardized(family, n, p, seed=47)
            model = CoefficientModel(np.zeros(p), 0.0, ())
            got = predict(FAMILY[family], model, Xnew, sd)
            if family == "gaussian":
                np.testing.assert_allclose(got, sd.response_center)
            else:
                np.testing.assert_allclose(got, expected)

    def test_column_mismatch(self):
        sd = random_standardized("gaussian", 10, 3, seed=53)
        model = CoefficientModel(np.zeros(3), 0.0, ())
        with pytest.raises(ValueError, match="columns"):
            predict(GAUSSIAN, model, np.zeros((4, 2)), sd)

    def test_binomial_probabilities_in_unit_interval(self, rng):
        sd = random_standardized("binomial", 30, 4, seed=59)
        model = fit_active(BINOMIAL, sd, (0, 1))
        prob = predict(BINOMIAL, model, rng.standard_normal((20, 4)) * 50, sd)
        assert np.all(prob > 0) and np.all(prob < 1)


class TestLogLikelihood:
    def test_gaussian_profile_form(self):
        sd = random_standardized("gaussian", 30, 4, seed=61)
        model = fit_active(GAUSSIAN, sd, (0, 1))
        rss = 2 * 30 * loss(GAUSSIAN, sd, model)
        assert log_likelihood(GAUSSIAN, sd, model) == pytest.approx(
            -15 * math.log(rss / 30)
        )

    def test_binomial_is_negated_loss(self):
        sd = random_standardized("binomial", 30, 4, seed=67)
        model = fit_active(BINOMIAL, sd, (0,))
        assert log_likelihood(BINOMIAL, sd, model) == -loss(BINOMIAL, sd, model)
