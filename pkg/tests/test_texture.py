import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from jcstark.errors import ModelDomainError
from jcstark.hermite import hermite_eval, hermite_roots
from jcstark.model import ModelParams, eigenstate
from jcstark.texture import (SampledTexture, analytic_texture, asymptotic_ratio, c_omega_eta,
                             find_nodes, sampling_grid, subsymmetry_check, wave_components)
from jcstark.winding import winding_direction

omegas = st.floats(0.1, 1.0)
g_ratios = st.floats(0.2, 3.0)
chis = st.floats(-0.9, 0.9)
ns = st.integers(1, 25)
etas = st.sampled_from([-1, 1])
FIG1 = ModelParams.from_ratios(0.5, 1.5, 0.0)


def state_from(w, g, chi, n, eta):
    return eigenstate(ModelParams.from_ratios(w, g, chi), n, eta)


def dense_sign_changes(values):
    s = np.sign(values)
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))


def test_vacuum_texture():
    t = analytic_texture(eigenstate(FIG1, 0))
    sz, sx = t.evaluate(np.array([0.0, 1.0]))
    assert np.allclose(sz, 0.0)
    assert sx[0] == pytest.approx(-1 / math.sqrt(math.pi))
    assert sx[1] == pytest.approx(-math.exp(-1) / math.sqrt(math.pi))
    assert t.is_flat
    assert np.all(t.sy(np.linspace(-3, 3, 7)) == 0.0)


@given(omegas, g_ratios, chis, ns, etas, st.floats(-6, 6))
def test_texture_from_wave_components(w, g, chi, n, eta, x):
    s = state_from(w, g, chi, n, eta)
    a, b = wave_components(s, "sigma_x").evaluate(x)
    sz, sx = analytic_texture(s).evaluate(x)
    assert sz == pytest.approx(2 * a * b, abs=1e-12)
    assert sx == pytest.approx(a * a - b * b, abs=1e-12)


@pytest.mark.parametrize("n,eta", [(1, -1), (3, 1), (8, -1), (15, 1)])
def test_texture_matches_raw_formula(n, eta):
    p = ModelParams.from_ratios(0.6, 1.7, 0.3)
    s = eigenstate(p, n, eta)
    C = c_omega_eta(s)
    omega_n = p.Omega - p.omega + (2 * n - 1) * p.chi * p.omega
    n_sigma = math.sqrt(math.pi) * math.factorial(n - 1) * (4 * p.g**2 * n + C * omega_n)
    x = np.linspace(-4, 4, 41)
    hp, hn = hermite_eval(n - 1, x), hermite_eval(n, x)
    sz_raw = np.exp(-x**2) * p.g * C * hp * hn / (2 ** (n - 1.5) * n_sigma)
    sx_raw = np.exp(-x**2) * (C**2 * hp**2 - 2 * p.g**2 * hn**2) / (2**n * n_sigma)
    sz, sx = analytic_texture(s).evaluate(x)
    assert np.allclose(sz, sz_raw, rtol=1e-10, atol=1e-14)
    assert np.allclose(sx, sx_raw, rtol=1e-10, atol=1e-14)


@given(omegas, g_ratios, chis, ns, etas)
def test_wave_component_invariants(w, g, chi, n, eta):
    s = state_from(w, g, chi, n, eta)
    # outer sigma_z zeros can lie far out when one coefficient is small
    half = max(math.sqrt(2 * n + 1) + 4, np.max(np.abs(find_nodes(analytic_texture(s)).sx_nodes)) + 1)
    x = np.linspace(-half, half, 20001)
    a, b = wave_components(s, "sigma_x").evaluate(x)
    assert dense_sign_changes(a) == n - 1 and dense_sign_changes(b) == n
    zp, zm = wave_components(s, "sigma_z").evaluate(x)
    assert dense_sign_changes(zp) == n and dense_sign_changes(zm) == n
    zp_neg, zm_neg = wave_components(s, "sigma_z").evaluate(-x)
    assert np.allclose(zp, (-1) ** (n - 1) * zm_neg, atol=1e-12)


@given(omegas, g_ratios, chis, ns, etas)
def test_symmetry_and_density(w, g, chi, n, eta):
    s = state_from(w, g, chi, n, eta)
    t = analytic_texture(s)
    x = np.random.default_rng(n).uniform(-8, 8, 10_000)
    sz, sx = t.evaluate(x)
    sz_m, sx_m = t.evaluate(-x)
    assert np.allclose(sz_m, -sz, atol=1e-11) and np.allclose(sx_m, sx, atol=1e-11)
    a, b = wave_components(s, "sigma_z").evaluate(x)
    assert np.allclose(np.hypot(sz, sx), a * a + b * b, atol=1e-11)


@pytest.mark.parametrize("n,eta", [(1, -1), (4, 1), (12, -1)])
def test_integrals(n, eta):
    s = eigenstate(ModelParams.from_ratios(0.4, 2.2, -0.3), n, eta)
    t = analytic_texture(s)
    x = np.linspace(-t.x_max - 4, t.x_max + 4, 40001)
    sz, sx = t.evaluate(x)
    assert np.trapezoid(t.density(x), x) == pytest.approx(1.0, abs=1e-8)
    assert np.trapezoid(sx, x) == pytest.approx(s.sigma_x, abs=1e-8)
    assert abs(np.trapezoid(sz, x)) < 1e-8


def test_node_counts_n1():
    nodes = find_nodes(analytic_texture(eigenstate(FIG1, 1, -1)))
    assert nodes.M_z == 1 and nodes.M_x == 2
    assert nodes.sz_nodes[0] == 0.0


def test_node_counts_fig1_geometry():
    t = analytic_texture(eigenstate(FIG1, 6, -1))
    nodes = find_nodes(t)
    assert (nodes.M_z, nodes.M_x) == (11, 12)
    # dense-grid oracle
    x = np.linspace(-t.x_max, t.x_max, 200_001)
    sz, sx, _ = t.scaled(x)
    assert dense_sign_changes(sz) == 11 and dense_sign_changes(sx) == 12
    axes = [axis for _, axis, _ in nodes.merged()]
    assert axes == ["sz", "sx"] * 11 + ["sz"]


@given(omegas, g_ratios, chis, ns, etas)
def test_node_set_invariants(w, g, chi, n, eta):
    s = state_from(w, g, chi, n, eta)
    t = analytic_texture(s)
    nodes = find_nodes(t)
    assert nodes.M_z == 2 * n - 1 and nodes.M_x == 2 * n
    union = np.sort(np.concatenate([hermite_roots(n - 1).roots if n > 1 else [],
                                    hermite_roots(n).roots]))
    assert np.allclose(nodes.sz_nodes, union, atol=1e-9)
    # alternation and full winding
    axes = [axis for _, axis, _ in nodes.merged()]
    assert all(a != b for a, b in zip(axes[:-1], axes[1:]))
    assert np.all(nodes.sz_signs[1:] * nodes.sz_signs[:-1] < 0)
    code = np.array(nodes.quadrant_code())
    steps = (np.diff(code) % 4)
    assert np.all(steps == steps[0]) and steps[0] in (1, 3)
    # each located node is a genuine sign change of its component
    for xs, comp in ((nodes.sz_nodes, 0), (nodes.sx_nodes, 1)):
        delta = 1e-9 * np.maximum(1.0, np.abs(xs))
        left, right = t.scaled(xs - delta)[comp], t.scaled(xs + delta)[comp]
        assert np.all(left * right < 0)


@given(ns)
def test_node_correspondence(n):
    s = state_from(0.7, 1.9, 0.2, n, -1)
    nodes = find_nodes(analytic_texture(s))
    zp, zm = wave_components(s, "sigma_z").evaluate(nodes.sx_nodes)
    # each sx node is a zero of one sigma_z component
    dens = np.hypot(zp, zm)
    assert np.all(np.minimum(np.abs(zp), np.abs(zm)) < 1e-9 * np.max(dens))
    a, b = wave_components(s, "sigma_x").evaluate(nodes.sz_nodes)
    assert np.all(np.minimum(np.abs(a), np.abs(b)) < 1e-9)


def test_sz_nodes_parameter_independent():
    rng = np.random.default_rng(11)
    n = 9
    sets = [find_nodes(analytic_texture(state_from(0.5, g, chi, n, -1))).sz_nodes
            for g, chi in zip(rng.uniform(0.2, 3, 20), rng.uniform(-0.9, 0.9, 20))]
    spread = np.max(np.ptp(np.array(sets), axis=0))
    assert spread < 1e-12


def test_asymptotic_ratio_fig3():
    s = eigenstate(FIG1, 6, -1)
    t = analytic_texture(s)
    for x, tol in ((20.0, 0.05), (100.0, 0.005)):
        s_z, s_x, _ = t.scaled(x)
        exact = s_z / s_x
        assert abs(exact / asymptotic_ratio(s, x) - 1) < tol
    assert abs(asymptotic_ratio(s, 1e8)) < 1e-6


@given(omegas, g_ratios, chis, ns, etas)
def test_asymptote_sign_is_winding_direction(w, g, chi, n, eta):
    s = state_from(w, g, chi, n, eta)
    assert np.sign(asymptotic_ratio(s, -1e6)) == winding_direction(s).s_w


def test_asymptote_needs_coupling():
    with pytest.raises(ModelDomainError):
        asymptotic_ratio(eigenstate(FIG1, 0), 10.0)


def test_sampled_texture_reproduces_analytic():
    s = eigenstate(FIG1, 5, 1)
    v = s.fock_vector(12)
    t = SampledTexture.from_sigma_x_vector(v)
    ref = analytic_texture(s)
    x = np.linspace(-8, 8, 301)
    assert np.allclose(t.evaluate(x), ref.evaluate(x), atol=1e-13)
    assert find_nodes(t).M_x == 10 and find_nodes(t).M_z == 9


def test_sampling_grid_reaches_limit():
    t = analytic_texture(eigenstate(FIG1, 6, -1))
    x, L = sampling_grid(t)
    assert x[0] == pytest.approx(-L) and x[-1] == pytest.approx(L) and np.all(np.diff(x) > 0)
    assert abs(t.angle(L) - t.limit_angle(1)) < 1e-3


def test_subsymmetry_vacuum():
    r = subsymmetry_check(eigenstate(FIG1, 0))
    assert r.parity == -1 and r.px_symmetric and r.psigma_symmetric
    assert r.px_eigenvalue == 1 and r.psigma_eigenvalue == -1


def test_subsymmetry_broken_and_restored():
    p = ModelParams.from_ratios(0.6, 2.0, 0.5)
    r = subsymmetry_check(eigenstate(p, 1, -1))
    assert r.parity == 1 and not r.px_symmetric and not r.psigma_symmetric
    r0 = subsymmetry_check(eigenstate(p.with_(g=0.0), 3, -1))
    assert r0.px_symmetric and r0.psigma_symmetric and r0.parity == 1


def test_subsymmetry_rejects_mixed_parity():
    v = np.zeros(8)
    v[0] = v[1] = 1.0
    with pytest.raises(ModelDomainError):
        subsymmetry_check(v)
