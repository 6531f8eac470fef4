import math

import numpy as np
import pytest

from oldroyd_lab import (
    ModeState,
    ModelParams,
    ZeroFrequency,
    eigenvalues,
    g_kernels,
    g_kernels_arrays,
    ode_oracle,
    propagate_usigma,
    propagate_utau,
    propagate_zero_mode,
    tau_to_sigma,
)
from oldroyd_lab.symbols import (
    _DEGENERATE_X,
    discriminant,
    matrix_to_sym6,
    sym6_to_matrix,
)

INVISCID = ModelParams(epsilon=0.0, mu=0.5, kappa=1.0, beta=1.0, alpha=1.0)


def random_mode(rng, r_lo=0.05, r_hi=3.0, div_free=False):
    xi = rng.standard_normal(3)
    xi *= rng.uniform(r_lo, r_hi) / np.linalg.norm(xi)
    u = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    if div_free:
        u -= xi * (xi @ u) / (xi @ xi)
    tau = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    return ModeState(xi, u, tau)


class TestEigenvalues:
    def test_zero_frequency_roots(self, params):
        e = eigenvalues(0.0, params)
        assert e.lambda_plus == pytest.approx(0.0, abs=1e-14)
        assert e.lambda_minus == pytest.approx(-params.beta, rel=1e-12)

    def test_root_resubstitution(self, params):
        # Sum and product of the roots reproduce the quadratic
        # coefficients to near machine precision.
        for r in np.geomspace(1e-4, 5.0, 40):
            e = eigenvalues(r, params)
            s = (params.mu + params.epsilon) * r**2 + params.beta
            p = r**2 * (params.epsilon * (params.mu * r**2 + params.beta)
                        + 0.5 * params.alpha * params.kappa)
            assert e.lambda_plus + e.lambda_minus == pytest.approx(-s, rel=1e-12)
            assert e.lambda_plus * e.lambda_minus == pytest.approx(
                p, rel=1e-12, abs=1e-300)

    def test_small_radius_roots_frozen(self):
        # epsilon=0, mu=0.5, alpha=kappa=beta=1 at r=0.1: the quadratic is
        # lambda^2 + 1.005 lambda + 0.005 = 0; cross-checked against the
        # companion-matrix root finder.
        lam = np.roots([1.0, 1.005, 0.005])
        e = eigenvalues(0.1, ModelParams(0.0, 0.5, 1.0, 1.0, 1.0))
        assert e.lambda_plus == pytest.approx(max(lam), rel=1e-10)
        assert e.lambda_minus == pytest.approx(min(lam), rel=1e-10)
        # The discriminant is the perfect square 0.995^2, so the roots
        # are exactly -0.005 and -1.
        assert e.lambda_plus == pytest.approx(-0.005, rel=1e-12)
        assert e.lambda_minus == pytest.approx(-1.0, rel=1e-12)

    def test_dissipativity(self, params):
        for r in np.geomspace(1e-3, 30.0, 60):
            e = eigenvalues(r, params)
            assert e.lambda_plus.real <= 1e-15
            assert e.lambda_minus.real <= 1e-15

    def test_oscillatory_regime(self):
        # alpha*kappa = 2, beta = 1, epsilon = mu -> 0 limit not allowed;
        # use a tiny mu so the discriminant at r = 10 stays deeply negative.
        p = ModelParams(0.0, 1e-6, 2.0, 1.0, 1.0)
        e = eigenvalues(10.0, p)
        assert e.regime == "oscillatory"
        assert e.discriminant < 0.0
        assert e.lambda_minus == pytest.approx(np.conj(e.lambda_plus))

    def test_regime_labels(self, params):
        assert eigenvalues(0.01, params).regime == "distinct-real"


class TestKernels:
    def test_initial_values(self, params):
        for r in (0.0, 0.3, 2.0):
            g = g_kernels(r, 0.0, params)
            assert g.g1 == 0.0
            assert g.g2 == pytest.approx(1.0, rel=1e-14)
            assert g.g3 == pytest.approx(1.0, rel=1e-14)

    def test_symmetric_function_identities(self, params):
        # g2 + g3 = exp(l+ t) + exp(l- t) and g2 - g3 = (l+ + l-) g1.
        for r in np.geomspace(1e-3, 5.0, 25):
            e = eigenvalues(r, params)
            for t in (0.1, 1.0, 7.0):
                g = g_kernels(r, t, params)
                lhs = g.g2 + g.g3
                rhs = (np.exp(e.lambda_plus * t)
                       + np.exp(e.lambda_minus * t)).real
                assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-280)
                assert g.g2 - g.g3 == pytest.approx(
                    ((e.lambda_plus + e.lambda_minus) * g.g1).real,
                    rel=1e-10, abs=1e-280)

    def test_degenerate_closed_form(self):
        # epsilon=0, mu=0.5, kappa=beta=alpha=1 has an exact double root
        # at r^2 = 2: D = (r^2/2 + 1)^2 - 2 r^2 = 0 with lambda = -1, so
        # g1 = t e^{-t}, g2 = (1 - t) e^{-t}, g3 = (1 + t) e^{-t}.
        r = math.sqrt(2.0)
        assert discriminant(r, INVISCID) == pytest.approx(0.0, abs=1e-14)
        for t in (0.01, 0.5, 3.0):
            g = g_kernels(r, t, INVISCID)
            assert g.g1 == pytest.approx(t * math.exp(-t), rel=1e-12)
            assert g.g2 == pytest.approx((1.0 - t) * math.exp(-t), rel=1e-12)
            assert g.g3 == pytest.approx((1.0 + t) * math.exp(-t), rel=1e-12)

    def test_branch_continuity(self, params):
        # The series and direct branches agree across the switching
        # surface |delta| t / 2 = threshold.
        for r in np.geomspace(1e-3, 1.0, 10):
            e = eigenvalues(r, params)
            delta = abs(e.lambda_plus - e.lambda_minus)
            if delta == 0.0:
                continue
            t_star = 2.0 * _DEGENERATE_X / delta
            if t_star <= 0.0 or t_star > 1e6:
                continue
            below = g_kernels(r, t_star * (1.0 - 1e-11), params)
            above = g_kernels(r, t_star * (1.0 + 1e-11), params)
            for name in ("g1", "g2", "g3"):
                a, b = getattr(below, name), getattr(above, name)
                assert a == pytest.approx(b, rel=1e-9, abs=1e-12)

    def test_oscillatory_trig_form(self):
        # In the oscillatory regime the kernels reduce to the explicit
        # exp(a t) (cos, sin) combination with lambda = a +- i w.
        p = ModelParams(0.0, 1e-6, 2.0, 1.0, 1.0)
        r, t = 10.0, 0.7
        e = eigenvalues(r, p)
        a, w = e.lambda_plus.real, e.lambda_plus.imag
        g = g_kernels(r, t, p)
        assert g.g1 == pytest.approx(
            math.exp(a * t) * math.sin(w * t) / w, rel=1e-10)
        assert g.g2 == pytest.approx(
            math.exp(a * t) * (math.cos(w * t) + a / w * math.sin(w * t)),
            rel=1e-10, abs=1e-12)
        assert g.g3 == pytest.approx(
            math.exp(a * t) * (math.cos(w * t) - a / w * math.sin(w * t)),
            rel=1e-10, abs=1e-12)

    def test_array_broadcast(self, params):
        r = np.geomspace(1e-3, 3.0, 7)[:, None]
        t = np.geomspace(1e-2, 10.0, 5)[None, :]
        g1, g2, g3 = g_kernels_arrays(r, t, params)
        assert g1.shape == g2.shape == g3.shape == (7, 5)
        g = g_kernels(float(r[3, 0]), float(t[0, 2]), params)
        assert g1[3, 2] == pytest.approx(g.g1, rel=1e-14)


class TestPropagators:
    def test_usigma_identity_at_zero_time(self, params):
        rng = np.random.default_rng(1)
        xi = np.array([0.2, -0.1, 0.3])
        u0 = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        s0 = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        u, s = propagate_usigma(xi, 0.0, u0, s0, params)
        np.testing.assert_allclose(u, u0, rtol=1e-14)
        np.testing.assert_allclose(s, s0, rtol=1e-14)

    def test_usigma_pure_velocity_inviscid(self):
        xi = np.array([0.3, 0.0, 0.0])
        u0 = np.array([0.0, 1.0, 0.0], dtype=complex)
        t = 1.3
        u, s = propagate_usigma(xi, t, u0, np.zeros(3, complex), INVISCID)
        g = g_kernels(0.3, t, INVISCID)
        np.testing.assert_allclose(u, g.g3 * u0, rtol=1e-13)
        np.testing.assert_allclose(s, -0.5 * 0.3 * g.g1 * u0, rtol=1e-13)

    def test_utau_axis_aligned(self):
        # xi = (1,0,0), u0 = e2, tau0 = 0, epsilon = 0: velocity scales by
        # g3; stress picks up only the symmetric (1,2) dyad entry.
        xi = np.array([1.0, 0.0, 0.0])
        mode = ModeState(xi, np.array([0, 1, 0], dtype=complex),
                         np.zeros(6, complex))
        t = 0.8
        out = propagate_utau(mode, t, INVISCID)
        g = g_kernels(1.0, t, INVISCID)
        np.testing.assert_allclose(out.u_hat,
                                   [0.0, g.g3, 0.0], rtol=1e-12, atol=1e-15)
        m = out.tau_matrix()
        expected = np.zeros((3, 3), complex)
        expected[0, 1] = expected[1, 0] = 0.5j * g.g1  # (alpha/2) g1
        np.testing.assert_allclose(m, expected, rtol=1e-12, atol=1e-15)

    def test_utau_decoupled_stress(self, params):
        # With u0 = 0 and xi.tau0 = 0 both coupling terms vanish and the
        # stress just damps.
        xi = np.array([0.0, 0.0, 0.7])
        tau = np.zeros(6, complex)
        tau[0], tau[3] = 1.0 + 0.5j, -1.0 - 0.5j  # xx, yy: xi.tau = 0
        mode = ModeState(xi, np.zeros(3, complex), tau)
        t = 2.0
        out = propagate_utau(mode, t, params)
        decay = math.exp(-(params.beta + params.mu * 0.49) * t)
        np.testing.assert_allclose(out.u_hat, 0.0, atol=1e-15)
        np.testing.assert_allclose(out.tau_hat, tau * decay, rtol=1e-12)

    def test_utau_rejects_zero_frequency(self, params):
        mode = ModeState(np.zeros(3), np.ones(3, complex),
                         np.ones(6, complex))
        with pytest.raises(ZeroFrequency):
            propagate_utau(mode, 1.0, params)

    def test_zero_mode_rule(self, params):
        u0 = np.array([1.0, 2.0, 3.0], complex)
        tau0 = np.arange(6.0).astype(complex)
        u, tau = propagate_zero_mode(u0, tau0, 0.0, params)
        np.testing.assert_array_equal(u, u0)
        np.testing.assert_array_equal(tau, tau0)
        t_half = math.log(2.0) / params.beta
        _, tau = propagate_zero_mode(u0, tau0, t_half, params)
        np.testing.assert_allclose(tau, 0.5 * tau0, rtol=1e-12)

    def test_oracle_matches_closed_form(self, params):
        rng = np.random.default_rng(7)
        for _ in range(5):
            mode = random_mode(rng, div_free=True)
            t = rng.uniform(0.1, 5.0)
            exact = propagate_utau(mode, t, params)
            approx = ode_oracle(mode, t, params)
            np.testing.assert_allclose(approx.u_hat, exact.u_hat,
                                       rtol=1e-10, atol=1e-12)
            np.testing.assert_allclose(approx.tau_hat, exact.tau_hat,
                                       rtol=1e-10, atol=1e-12)

    def test_oracle_fourth_order(self):
        # Halving the oracle step divides its error against the closed
        # form by roughly 16.
        rng = np.random.default_rng(3)
        mode = random_mode(rng, div_free=True)
        t = 2.0
        exact = propagate_utau(mode, t, INVISCID)

        def err(steps):
            o = ode_oracle(mode, t, INVISCID, step_count=steps)
            return np.linalg.norm(np.concatenate([
                o.u_hat - exact.u_hat, o.tau_hat - exact.tau_hat]))

        ratio = err(20) / err(40)
        assert 12.0 < ratio < 20.0

    def test_semigroup(self, params):
        rng = np.random.default_rng(11)
        for _ in range(5):
            mode = random_mode(rng, div_free=True)
            s, t = rng.uniform(0.0, 10.0, 2)
            two = propagate_utau(propagate_utau(mode, t, params), s, params)
            one = propagate_utau(mode, s + t, params)
            scale = max(np.max(np.abs(one.u_hat)), np.max(np.abs(one.tau_hat)),
                        1e-30)
            assert np.max(np.abs(two.u_hat - one.u_hat)) <= 1e-9 * scale
            assert np.max(np.abs(two.tau_hat - one.tau_hat)) <= 1e-9 * scale

    def test_divergence_preserved(self, params):
        rng = np.random.default_rng(13)
        for _ in range(5):
            mode = random_mode(rng, div_free=True)
            out = propagate_utau(mode, rng.uniform(0.1, 10.0), params)
            r = np.linalg.norm(mode.xi)
            unorm = np.linalg.norm(out.u_hat)
            assert abs(mode.xi @ out.u_hat) <= 1e-12 * max(r * unorm, 1e-30)

    def test_commuting_diagram(self, params):
        # Evolving tau then projecting to sigma equals projecting first
        # and evolving with the scalar u-sigma block.
        rng = np.random.default_rng(17)
        for _ in range(5):
            mode = random_mode(rng, div_free=True)
            t = rng.uniform(0.1, 8.0)
            sigma0 = tau_to_sigma(mode)
            _, sigma_direct = propagate_usigma(mode.xi, t, mode.u_hat,
                                               sigma0, params)
            sigma_via_tau = tau_to_sigma(propagate_utau(mode, t, params))
            scale = max(np.max(np.abs(sigma_direct)), 1e-30)
            assert np.max(np.abs(sigma_direct - sigma_via_tau)) <= 1e-9 * scale


class TestTauToSigma:
    def test_axis_aligned(self):
        xi = np.array([0.5, 0.0, 0.0])
        tau = np.zeros(6, complex)
        tau[1], tau[2] = 2.0, 3.0    # xy, xz
        mode = ModeState(xi, np.zeros(3, complex), tau)
        sigma = tau_to_sigma(mode)
        np.testing.assert_allclose(sigma, [0.0, 2.0j, 3.0j], atol=1e-15)

    def test_isotropic_annihilated(self, params):
        rng = np.random.default_rng(23)
        xi = rng.standard_normal(3)
        tau = matrix_to_sym6(np.eye(3)).astype(complex) * (2.0 + 1.0j)
        sigma = tau_to_sigma(ModeState(xi, np.zeros(3, complex), tau))
        np.testing.assert_allclose(sigma, 0.0, atol=1e-14)

    def test_output_orthogonal(self):
        rng = np.random.default_rng(29)
        for _ in range(10):
            mode = random_mode(rng)
            sigma = tau_to_sigma(mode)
            assert abs(mode.xi @ sigma) <= 1e-12 * max(
                np.linalg.norm(mode.xi) * np.linalg.norm(sigma), 1e-30)


def test_sym6_round_trip():
    rng = np.random.default_rng(31)
    m = rng.standard_normal((4, 3, 3))
    m = m + np.swapaxes(m, -1, -2)
    np.testing.assert_array_equal(sym6_to_matrix(matrix_to_sym6(m)), m)


def test_discriminant_sign_matches_regime(params):
    for r in np.geomspace(1e-3, 20.0, 50):
        e = eigenvalues(r, params)
        d = discriminant(r, params)
        assert (d < 0.0) == (e.regime == "oscillatory")
