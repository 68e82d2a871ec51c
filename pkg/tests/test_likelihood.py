import numpy as np
import pytest

from blockem import FiniteStateModel, GaussianLaw, LinearGaussianModel
from blockem.exact import block_statistic
from blockem.kalman import kalman_filter
from blockem.likelihood import (
    IncrementRecord,
    decaying_envelope_sum,
    gradient_envelope,
    loglik,
    loglik_increment,
    normalized_loglik_trace,
    per_term_smoothed_gradients,
    row_centered_transition_score,
    score,
)
from conftest import SIX_STATE_MATRIX, random_finite_theta
from oracles import enum_loglik


def finite_setup(d, n, seed, means_scale=3.0):
    rng = np.random.default_rng(seed)
    model = FiniteStateModel(d)
    theta = random_finite_theta(model, rng, mean_scale=means_scale)
    chi = rng.dirichlet(np.ones(d))
    _, ys = model.simulate(theta, n, rng)
    return model, theta, chi, ys, rng


class TestLoglik:
    def test_single_observation_definition(self):
        model, theta, chi, ys, _ = finite_setup(3, 1, seed=1)
        trans, means, v = model.unpack(theta)
        pred = chi @ trans
        g = np.exp(-((ys[0] - means) ** 2) / (2 * v)) / np.sqrt(2 * np.pi * v)
        assert loglik(model, theta, chi, ys) == pytest.approx(np.log(pred @ g), abs=1e-12)

    def test_matches_kalman_value(self):
        model = LinearGaussianModel()
        theta = np.array([0.9, 0.6, 1.0])
        chi = GaussianLaw(0.0, 1.0)
        rng = np.random.default_rng(2)
        _, ys = model.simulate(theta, 100, rng)
        assert loglik(model, theta, chi, ys) == kalman_filter(theta, chi, ys)[4]

    def test_matches_path_enumeration(self):
        model, theta, chi, ys, _ = finite_setup(2, 6, seed=3)
        want = enum_loglik(
            model.transition_matrix(theta), model.emission_likelihoods(theta, ys), chi
        )
        assert loglik(model, theta, chi, ys) == pytest.approx(want, abs=1e-10)

    def test_telescopes_into_increments(self):
        model, theta, chi, ys, _ = finite_setup(3, 25, seed=4)
        total = sum(
            loglik_increment(model, theta, chi, 0, s, np.concatenate([[0.0], ys])).delta
            for s in range(len(ys))
        )
        assert total == pytest.approx(loglik(model, theta, chi, ys), abs=1e-9)


class TestIncrementBound:
    def test_uniform_chain_collapses_to_emission(self):
        d = 4
        model = FiniteStateModel(d)
        theta = model.pack(np.full((d, d), 1.0 / d), np.zeros(d), 1.0)
        chi = np.full(d, 1.0 / d)
        ys = np.array([0.0, 0.4, -0.2, 1.1])
        rec = loglik_increment(model, theta, chi, 0, 2, ys)
        g = float(np.exp(-(ys[3] ** 2) / 2.0) / np.sqrt(2 * np.pi))
        assert rec.delta == pytest.approx(np.log(g), abs=1e-12)
        # sigma_+- = 1/d cancel the d-fold state sum: bound = 2 |log g|
        assert rec.bound == pytest.approx(2 * abs(np.log(g)), abs=1e-12)
        assert isinstance(rec, IncrementRecord) and rec.s == 2

    def test_six_state_random_draws(self, six_state_model, six_state_theta):
        rng = np.random.default_rng(5)
        _, ys = six_state_model.simulate(six_state_theta, 400, rng)
        ys = np.concatenate([[0.0], ys])
        for _ in range(300):
            r = int(rng.integers(0, 350))
            s = int(rng.integers(r, min(r + 30, len(ys) - 1)))
            chi = rng.dirichlet(np.ones(6))
            rec = loglik_increment(six_state_model, six_state_theta, chi, r, s, ys)
            assert abs(rec.delta) <= rec.bound + 1e-12

    def test_certified_bound_wider(self, six_state_model, six_state_theta):
        rng = np.random.default_rng(6)
        _, ys = six_state_model.simulate(six_state_theta, 5, rng)
        ys = np.concatenate([[0.0], ys])
        chi = np.full(6, 1.0 / 6.0)
        plain = loglik_increment(six_state_model, six_state_theta, chi, 0, 3, ys)
        hard = loglik_increment(six_state_model, six_state_theta, chi, 0, 3, ys, certify=True)
        assert hard.bound >= plain.bound
        assert abs(hard.delta) <= hard.bound

    def test_increment_forgetting(self):
        # |delta^{chi,s-r} - delta^{chi',s-r-l}| <= 2 rho^r / (1 - rho)
        rng = np.random.default_rng(7)
        for _ in range(60):
            d = int(rng.integers(2, 5))
            model = FiniteStateModel(d)
            theta = random_finite_theta(model, rng)
            rho = model.transition_bounds(theta).rho
            _, ys = model.simulate(theta, 40, rng)
            ys = np.concatenate([[0.0], ys])
            s = int(rng.integers(10, 30))
            r = int(rng.integers(1, 8))
            ell = int(rng.integers(1, s - r))
            chi = rng.dirichlet(np.ones(d))
            chi2 = rng.dirichlet(np.ones(d))
            a = loglik_increment(model, theta, chi, s - r, s, ys).delta
            b = loglik_increment(model, theta, chi2, s - r - ell, s, ys).delta
            assert abs(a - b) <= 2.0 * rho**r / (1.0 - rho) + 1e-12


class TestTrace:
    def test_identifiability_and_cesaro(self):
        model, theta, chi, ys, _ = finite_setup(3, 20_000, seed=8)
        cps = [2500, 5000, 10_000, 20_000]
        at_truth = normalized_loglik_trace(model, theta, chi, ys, cps)
        wrong = theta.copy()
        wrong[-1] *= 1.8
        at_wrong = normalized_loglik_trace(model, wrong, chi, ys, cps)
        assert at_truth[-1, 1] > at_wrong[-1, 1]
        diffs = np.abs(np.diff(at_truth[:, 1]))
        assert diffs[-1] < diffs[0]

    def test_initial_law_forgotten_at_rate_one_over_t(self):
        model, theta, _, ys, rng = finite_setup(3, 10_000, seed=9)
        chi_a = np.array([1.0 - 2e-9, 1e-9, 1e-9])
        chi_b = np.array([1e-9, 1e-9, 1.0 - 2e-9])
        cps = [100, 1000, 10_000]
        tr_a = normalized_loglik_trace(model, theta, chi_a, ys, cps)
        tr_b = normalized_loglik_trace(model, theta, chi_b, ys, cps)
        gaps = np.abs(tr_a[:, 1] - tr_b[:, 1])
        scaled = gaps * np.array(cps)  # T * O(1/T) stays bounded
        assert scaled[-1] <= 2.0 * scaled[0] + 1.0

    def test_lgssm_trace_matches_full_loglik(self):
        model = LinearGaussianModel()
        theta = np.array([0.8, 0.5, 1.0])
        chi = GaussianLaw(0.0, 1.0)
        rng = np.random.default_rng(10)
        _, ys = model.simulate(theta, 500, rng)
        tr = normalized_loglik_trace(model, theta, chi, ys, [250, 500])
        assert tr[1, 1] * 500 == pytest.approx(loglik(model, theta, chi, ys), abs=1e-9)


def fd_gradient(fun, theta, rel_step=1e-5):
    theta = np.asarray(theta, dtype=float)
    grad = np.empty_like(theta)
    for i in range(len(theta)):
        h = rel_step * max(1.0, abs(theta[i]))
        up, dn = theta.copy(), theta.copy()
        up[i] += h
        dn[i] -= h
        grad[i] = (fun(up) - fun(dn)) / (2.0 * h)
    return grad


class TestScore:
    def test_finite_matches_finite_differences(self):
        rng = np.random.default_rng(11)
        for seed in range(5):
            model, theta, chi, ys, _ = finite_setup(3, 200, seed=100 + seed)
            got = score(model, theta, chi, ys)
            want = fd_gradient(lambda th: loglik(model, th, chi, ys), theta)
            assert np.linalg.norm(got - want) <= 1e-4 * np.linalg.norm(want)

    def test_lgssm_matches_finite_differences(self):
        model = LinearGaussianModel()
        rng = np.random.default_rng(12)
        for _ in range(5):
            theta = np.array(
                [rng.uniform(-0.9, 0.9), rng.uniform(0.3, 1.5), rng.uniform(0.3, 1.5)]
            )
            chi = GaussianLaw(0.0, 1.0)
            _, ys = model.simulate(theta, 200, rng)
            got = score(model, theta, chi, ys)
            want = fd_gradient(lambda th: loglik(model, th, chi, ys), theta)
            assert np.linalg.norm(got - want) <= 1e-3 * np.linalg.norm(want)

    def test_zero_at_em_fixed_point(self):
        model, theta, chi, ys, _ = finite_setup(3, 400, seed=13)
        for _ in range(200):
            stat, _ = block_statistic(model, theta, chi, ys)
            new = model.m_step(stat)
            if np.max(np.abs(new - theta)) < 1e-14:
                theta = new
                break
            theta = new
        grad = row_centered_transition_score(model, score(model, theta, chi, ys))
        assert np.max(np.abs(grad)) <= 1e-6 * len(ys)

    def test_single_observation_hand_gradient(self):
        # T=1, d=2: l = log sum_j (chi m)_j g_j(y)
        model, theta, chi, ys, _ = finite_setup(2, 1, seed=14)
        trans, means, v = model.unpack(theta)
        y = ys[0]
        g = np.exp(-((y - means) ** 2) / (2 * v)) / np.sqrt(2 * np.pi * v)
        pred = chi @ trans
        z = pred @ g
        d_m = (chi[:, None] * g[None, :]) / z
        d_means = pred * g * (y - means) / v / z
        d_v = np.sum(pred * g * (-0.5 / v + (y - means) ** 2 / (2 * v**2))) / z
        want = np.concatenate([d_m.ravel(), d_means, [d_v]])
        np.testing.assert_allclose(score(model, theta, chi, ys), want, atol=1e-12)

    def test_boundary_theta_rejected(self):
        model = LinearGaussianModel()
        chi = GaussianLaw(0.0, 1.0)
        with pytest.raises(ValueError):
            score(model, np.array([0.999, 1.0, 1.0]), chi, [0.1])

    def test_normalized_score_stabilizes(self):
        model, theta, chi, ys, _ = finite_setup(2, 40_000, seed=15)
        halves = []
        for n in (10_000, 20_000, 40_000):
            halves.append(score(model, theta, chi, ys[:n]) / n)
        assert np.max(np.abs(halves[2] - halves[1])) <= 1e-2


class TestEnvelopes:
    def test_per_term_gradients_dominated(self):
        model, theta, chi, ys, _ = finite_setup(3, 50, seed=16)
        per_term = per_term_smoothed_gradients(model, theta, chi, ys)
        for t, y in enumerate(ys):
            assert np.linalg.norm(per_term[t]) <= gradient_envelope(model, theta, y) + 1e-12
        np.testing.assert_allclose(
            per_term.sum(axis=0), score(model, theta, chi, ys), atol=1e-9
        )

    def test_decaying_sum_has_small_tail(self):
        model, theta, _, ys, _ = finite_setup(3, 60, seed=17)
        value, tail = decaying_envelope_sum(model, theta, ys, center=30, rho=0.5)
        assert value > 0.0
        assert tail <= 1e-3 * value
