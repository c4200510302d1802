"""Tests for the evaluation grid, the ECF, and the model characteristic
function (closed form and quadrature routes)."""

import numpy as np
import pytest
import scipy.special as sp

from spheredeconv.bessel import bessel_j, bessel_j_int
from spheredeconv.charfn import (
    CirclePsiEvaluator,
    EcfCache,
    EvalGrid,
    ecf,
    psi_model,
    psi_model_marginals,
)
from spheredeconv.geometry import (
    CallableDensity,
    FourierDensity,
    sphere_map,
    uniform_density,
    vonmises_like,
)
from spheredeconv.simulate import generate, scenario


def random_density(rng, k_cut=4, scale=0.08):
    half = scale * (rng.normal(size=k_cut) + 1j * rng.normal(size=k_cut)) / np.arange(1, k_cut + 1)
    return FourierDensity.from_half(half)


class TestEvalGrid:
    def test_weights_sum_to_box_volume(self):
        for dim in (2, 3):
            g = EvalGrid.build(dim=dim, nu_est=0.5, nodes_per_axis=17)
            vol = np.sum(g.axis1_weights) * np.sum(g.axis2_weights)
            assert vol == pytest.approx((2 * 0.5) ** dim, rel=1e-12)

    def test_nodes_symmetric_and_centered(self):
        g = EvalGrid.build(dim=2, nu_est=1.0, nodes_per_axis=33)
        assert np.allclose(g.axis1_nodes, -g.axis1_nodes[::-1], atol=1e-15)
        assert g.axis1_nodes[g.m1 // 2] == 0.0  # odd count includes the origin

    def test_full_points_ordering(self):
        g = EvalGrid.build(dim=2, nu_est=1.0, nodes_per_axis=5)
        pts = g.full_points()
        assert pts.shape == (25, 2)
        # row i * m2 + j pairs axis1 node i with axis2 node j
        assert pts[7, 0] == g.axis1_nodes[1]
        assert pts[7, 1] == g.axis2_nodes[2, 0]

    def test_dim3_block_shapes(self):
        g = EvalGrid.build(dim=3, nu_est=1.0, nodes_per_axis=7)
        assert g.axis2_nodes.shape == (49, 2)
        assert g.full_points().shape == (7 * 49, 3)

    def test_validation(self):
        with pytest.raises(ValueError):
            EvalGrid.build(dim=1)
        with pytest.raises(ValueError):
            EvalGrid.build(nu_est=0.0)
        with pytest.raises(ValueError):
            EvalGrid.build(nodes_per_axis=1)


class TestEcf:
    def test_single_observation_exact(self):
        g = EvalGrid.build(nodes_per_axis=9)
        y = np.array([[0.7, -1.3]])
        cache = ecf(y, g)
        t = g.full_points()
        want = np.exp(1j * (t @ y[0])).reshape(9, 9)
        assert np.max(np.abs(cache.full - want)) < 1e-14

    def test_unit_value_at_origin_and_modulus_bound(self):
        g = EvalGrid.build(nodes_per_axis=33)
        cache = ecf(generate(scenario(1), 500, 21).data, g)
        mid = g.m1 // 2
        assert abs(cache.marg1[mid] - 1.0) < 1e-12
        assert abs(cache.marg2[mid] - 1.0) < 1e-12
        assert abs(cache.full[mid, mid] - 1.0) < 1e-12
        for arr in (cache.full, cache.marg1, cache.marg2):
            assert np.max(np.abs(arr)) <= 1.0 + 1e-12

    def test_conjugate_symmetry(self):
        g = EvalGrid.build(nodes_per_axis=9)
        cache = ecf(generate(scenario(2), 300, 4).data, g)
        assert np.allclose(cache.full, np.conj(cache.full[::-1, ::-1]), atol=1e-13)
        assert np.allclose(cache.marg1, np.conj(cache.marg1[::-1]), atol=1e-13)

    def test_chunking_consistent(self):
        g = EvalGrid.build(nodes_per_axis=9)
        data = generate(scenario(1), 1000, 2).data
        a = ecf(data, g)
        b = ecf(data, g, chunk=127)
        assert np.max(np.abs(a.full - b.full)) < 1e-12
        c = ecf(data, g)
        assert np.array_equal(a.full, c.full)  # fixed chunking is bitwise stable

    def test_concentration_around_product_form(self):
        # psi-tilde should concentrate around Psi * Phi_eps: checked on 20 seeds
        n = 10_000
        g = EvalGrid.build(nodes_per_axis=17, nu_est=1.0)
        scn = scenario(1)
        t = g.full_points()
        product = bessel_j(0, scn.r_star * np.linalg.norm(t, axis=1)) * scn.noise.char_fn(t)
        bound = 5.0 / np.sqrt(n) * (1.0 + np.sqrt(2.0) * g.nu_est)
        for seed in range(20):
            cache = ecf(generate(scn, n, seed).data, g)
            gap = np.max(np.abs(cache.full.ravel() - product))
            assert gap <= bound, (seed, gap, bound)

    def test_errors(self):
        g = EvalGrid.build(nodes_per_axis=5)
        with pytest.raises(ValueError):
            ecf(np.zeros((0, 2)), g)
        with pytest.raises(ValueError):
            ecf(np.zeros((5, 3)), g)
        bad = np.zeros((4, 2))
        bad[1, 0] = np.inf
        with pytest.raises(ValueError):
            ecf(bad, g)


class TestPsiModel:
    def test_uniform_density_is_bessel_j0(self):
        g = EvalGrid.build(nodes_per_axis=17, nu_est=1.0)
        t = g.full_points()
        vals = psi_model(uniform_density(1), 3.0, t)
        want = bessel_j(0, 3.0 * np.linalg.norm(t, axis=1))
        assert np.max(np.abs(vals - want)) < 1e-12
        assert np.max(np.abs(vals - sp.j0(3.0 * np.linalg.norm(t, axis=1)))) < 1e-10

    def test_value_one_at_zero_frequency(self):
        rng = np.random.default_rng(0)
        f = random_density(rng)
        for method in ("closed", "quadrature"):
            assert psi_model(f, 2.5, np.zeros(2), method=method) == pytest.approx(1.0, abs=1e-12)

    def test_closed_and_quadrature_routes_agree(self):
        rng = np.random.default_rng(42)
        worst = 0.0
        for _ in range(50):
            f = random_density(rng, k_cut=int(rng.integers(1, 7)))
            radius = float(rng.uniform(0.5, 8.0))
            t = rng.uniform(-1.5, 1.5, size=2)
            a = psi_model(f, radius, t, method="closed")
            b = psi_model(f, radius, t, method="quadrature")
            worst = max(worst, abs(a - b))
        assert worst < 1e-8

    def test_polar_bessel_expansion_signs(self):
        # Psi for f = 1 + 2 Re(c_1 e^{-2 i pi u}) at t = r e_1:
        # theta = 0, so Psi = J_0(rR) + 2 i c_1.real J_1(rR) ... with the
        # imaginary part entering through i^1; verified against quadrature
        f = FourierDensity.from_half([0.3 + 0.2j])
        radius, r = 2.0, 0.8
        got = psi_model(f, radius, np.array([r, 0.0]), method="closed")
        want = bessel_j(0, r * radius) + 1j * bessel_j(1, r * radius) * 2.0 * 0.3
        assert got == pytest.approx(want, abs=1e-13)
        quad = psi_model(f, radius, np.array([r, 0.0]), method="quadrature")
        assert got == pytest.approx(quad, abs=1e-10)

    def test_case4_density_against_midpoint_oracle(self):
        # independent oracle: 1e6-point midpoint average of exp(i R <t, S(u)>) f(u)
        f = vonmises_like()
        t = np.array([0.2, 0.1])
        radius = 3.0
        u = (np.arange(1_000_000) + 0.5) / 1_000_000
        fvals = f.fn(u[:, None])
        phases = np.exp(1j * radius * (sphere_map(u[:, None]) @ t))
        oracle = np.mean(phases * fvals)
        got = psi_model(f, radius, t)
        assert abs(got - oracle) < 1e-6

    def test_parseval_on_circles(self):
        # (1/L) sum_theta |Psi(r, theta)|^2 == sum_p |c_p J_p(rR)|^2
        rng = np.random.default_rng(5)
        f = random_density(rng, k_cut=4)
        radius = 2.7
        L = 1024
        thetas = np.arange(L) / L
        for r in (0.5, 2.0):
            t = r * np.column_stack([np.cos(2 * np.pi * thetas), np.sin(2 * np.pi * thetas)])
            vals = psi_model(f, radius, t)
            lhs = np.mean(np.abs(vals) ** 2)
            ks = np.arange(-f.cutoff, f.cutoff + 1)
            rhs = sum(
                abs(f.coeffs[k + f.cutoff] * bessel_j_int(k, r * radius)) ** 2 for k in ks
            )
            assert lhs == pytest.approx(rhs, abs=1e-8)

    def test_dim3_quadrature_against_midpoint_oracle(self):
        f = uniform_density(2)
        t = np.array([0.4, -0.2, 0.3])
        radius = 2.0
        m = 600
        axis = (np.arange(m) + 0.5) / m
        u1, u2 = np.meshgrid(axis, axis, indexing="ij")
        pts = np.column_stack([u1.ravel(), u2.ravel()])
        oracle = np.mean(np.exp(1j * radius * (sphere_map(pts) @ t)))
        got = psi_model(f, radius, t)
        assert abs(got - oracle) < 1e-8

    def test_marginals_bitwise_match_pointwise_calls(self):
        g = EvalGrid.build(nodes_per_axis=9)
        f = random_density(np.random.default_rng(9))
        vals1, vals2, full = psi_model_marginals(f, 3.3, g)
        assert vals1[3] == psi_model(f, 3.3, g.axis1_points()[3])
        assert vals2[5] == psi_model(f, 3.3, g.axis2_points()[5])
        assert full[2, 7] == psi_model(f, 3.3, g.full_points()[2 * g.m2 + 7])

    def test_cached_evaluator_matches_marginals(self):
        g = EvalGrid.build(nodes_per_axis=17)
        f = random_density(np.random.default_rng(13))
        ev = CirclePsiEvaluator(g)
        for radius in (0.7, 3.0, 6.2):
            a1, a2, afull = ev.marginals(f.coeffs, radius)
            b1, b2, bfull = psi_model_marginals(f, radius, g)
            assert np.array_equal(a1, b1)
            assert np.array_equal(a2, b2)
            assert np.array_equal(afull, bfull)

    def test_errors(self):
        f = uniform_density(1)
        with pytest.raises(ValueError):
            psi_model(f, 0.0, np.zeros(2))
        with pytest.raises(ValueError):
            psi_model(f, 1.0, np.zeros(3))
        with pytest.raises(ValueError):
            psi_model(f, 1.0, np.zeros(2), method="mc")
        with pytest.raises(ValueError):
            psi_model(uniform_density(2), 1.0, np.zeros(3), method="closed")
