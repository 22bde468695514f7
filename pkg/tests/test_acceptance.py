"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` (the summary lines are also
written when output capture is on).
"""
import math
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq, minimize_scalar

from jcstark.ed import (build_hamiltonian, commutator_norm, diagonalize, find_crossings,
                        minimum_gap, perturbative_d, track_level)
from jcstark.hermite import check_identities, hermite_eval, hermite_roots, turan_value
from jcstark.model import ModelParams, eigenenergy, eigenstate, ground_state, spectrum
from jcstark.phases import (UNDEFINED, AxisSpec, boundary_g01, boundary_gn,
                            boundary_increments, scan_diagram)
from jcstark.texture import (SampledTexture, analytic_texture, asymptotic_ratio, find_nodes,
                             sampling_grid, subsymmetry_check)
from jcstark.vari import stationary_weights, transition_diagnostic, variational_energy
from jcstark.winding import winding_all_methods, winding_integral

GRID = [(g, w, chi)
        for g in np.linspace(0.2, 3.0, 5)
        for w in np.linspace(0.1, 1.0, 5)
        for chi in np.linspace(-0.9, 0.9, 5)]
N_MAX_WINDING = 30
FIG5 = ModelParams.from_ratios(0.3, 1.0, 0.5)


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail):
        line = f"criterion {number:2d} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
        with capsys.disabled():
            print("\n" + line)
        assert ok, line
    return emit


def _roots_union(n):
    prev = hermite_roots(n - 1).roots if n > 1 else np.array([])
    return np.sort(np.concatenate([prev, hermite_roots(n).roots]))


def test_criterion_01_winding_theorem(report):
    t0 = time.perf_counter()
    failures, worst = [], 0.0
    for g, w, chi in GRID:
        p = ModelParams.from_ratios(w, g, chi)
        for n in range(1, N_MAX_WINDING + 1):
            for eta in (-1, 1):
                results = winding_all_methods(eigenstate(p, n, eta), check=False)
                values = {r.n_w for r in results.values()}
                r = results["integral"]
                dev = abs(r.total_angle / (2 * math.pi) - r.n_w)
                worst = max(worst, dev)
                if values != {-eta * n} or dev >= 1e-3:
                    failures.append((g, w, chi, n, eta, values))
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed < 120.0
    report(1, "n_w = -eta n, four methods", ok,
           f"{len(GRID) * N_MAX_WINDING * 2} states, {len(failures)} failures, "
           f"max |angle/2pi - n_w| = {worst:.1e}, {elapsed:.1f} s (< 120 s)")


def test_criterion_02_node_counting(report):
    t0 = time.perf_counter()
    count_fail, worst = 0, 0.0
    unions = {n: _roots_union(n) for n in range(1, N_MAX_WINDING + 1)}
    for g, w, chi in GRID:
        p = ModelParams.from_ratios(w, g, chi)
        for n in range(1, N_MAX_WINDING + 1):
            for eta in (-1, 1):
                nodes = find_nodes(analytic_texture(eigenstate(p, n, eta)))
                if nodes.M_z != 2 * n - 1 or nodes.M_x != 2 * n:
                    count_fail += 1
                    continue
                worst = max(worst, float(np.max(np.abs(nodes.sz_nodes - unions[n]))))
    rng = np.random.default_rng(2024)
    spread = 0.0
    for n in (1, 4, 9, 17, 30):
        sets = np.array([find_nodes(analytic_texture(eigenstate(
            ModelParams.from_ratios(w, g, chi), n, eta))).sz_nodes
            for w, g, chi, eta in zip(rng.uniform(0.1, 1.0, 20), rng.uniform(0.2, 3.0, 20),
                                      rng.uniform(-0.9, 0.9, 20), rng.choice([-1, 1], 20))])
        spread = max(spread, float(np.max(np.ptp(sets, axis=0))))
    elapsed = time.perf_counter() - t0
    ok = count_fail == 0 and worst < 1e-9 and spread < 1e-12 and elapsed < 60.0
    report(2, "M_z = 2n-1, M_x = 2n, sz nodes = Hermite roots", ok,
           f"{count_fail} count failures, max |node - root| = {worst:.1e} (< 1e-9), "
           f"parameter spread = {spread:.1e} (< 1e-12), {elapsed:.1f} s (< 60 s)")


def test_criterion_03_hermite_identities(report):
    t0 = time.perf_counter()
    bad = []
    for n in range(1, 101):
        half = math.sqrt(2 * n + 1) + 2.0
        r = check_identities(n, np.linspace(-half, half, 401), rel_tol=1e-6)
        # interlacing of consecutive root sets
        if n > 1:
            lo, hi = hermite_roots(n - 1).roots, hermite_roots(n).roots
            interlaced = np.all(hi[:-1] < lo) and np.all(lo < hi[1:])
        else:
            interlaced = True
        # sign alternation of H_n on the roots of H_{n-1}
        if n > 1:
            s = np.sign(hermite_eval(n, hermite_roots(n - 1).roots))
            alternates = bool(np.all(s[:-1] * s[1:] < 0))
        else:
            alternates = True
        turan = bool(np.all(turan_value(n, np.linspace(-half, half, 101)) > 0))
        if not (r.all_ok and interlaced and alternates and turan):
            bad.append(n)
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 30.0
    report(3, "Hermite interlacing, Turan, H' = 2n H_{n-1}, alternation", ok,
           f"n = 1..100, failures at {bad or 'none'}, {elapsed:.1f} s (< 30 s)")


def test_criterion_04_asymptotic_angle(report):
    t0 = time.perf_counter()
    p = ModelParams.from_ratios(0.5, 1.5, 0.0)
    errors, edges = [], []
    for n in range(1, 13):
        for eta in (-1, 1):
            s = eigenstate(p, n, eta)
            t = analytic_texture(s)
            row = []
            for x in (20.0, 100.0):
                s_z, s_x, _ = t.scaled(x)
                row.append(abs((s_z / s_x) / asymptotic_ratio(s, x) - 1.0))
            errors.append(row)
            _, L = sampling_grid(t)
            edges.append(max(abs(float(t.external_angle(L))), abs(float(t.external_angle(-L))),
                             winding_integral(t).details["edge_angle"]))
    errors = np.array(errors)
    elapsed = time.perf_counter() - t0
    ok = (errors[:, 0].max() < 0.05 and errors[:, 1].max() < 0.005
          and max(edges) < 1e-3 and elapsed < 10.0)
    report(4, "sz/sx asymptote and edge angle", ok,
           f"max rel err {errors[:, 0].max():.2e} at x=20 (< 5%), {errors[:, 1].max():.2e} "
           f"at x=100 (< 0.5%), edge angle {max(edges):.1e} rad (< 1e-3), {elapsed:.1f} s (< 10 s)")


def _lower_block_energy(w, chi, n, g):
    """Lower eigenvalue of the 2x2 block built from its bare diagonal (Omega = 1)."""
    if n == 0:
        return np.full_like(g, -0.5)
    up = (1.0 + chi) * w * (n - 1) + 0.5
    dn = up - (((2 * n - 1) * chi - 1.0) * w + 1.0)
    return 0.5 * (up + dn) - np.sqrt(0.25 * (up - dn) ** 2 + n * g * g)


def _bisected_boundaries(w, chi, n):
    g_s = 0.5 * math.sqrt(w)
    gs = np.linspace(0.0, 40.0 * g_s, 4001)
    f = lambda g: _lower_block_energy(w, chi, n, g) - _lower_block_energy(w, chi, n + 1, g)
    d = f(gs)
    roots = list(gs[d == 0.0])  # a boundary can land exactly on a scan sample
    roots += [brentq(lambda g: float(f(np.array(g))), gs[i], gs[i + 1], xtol=1e-15, rtol=1e-15)
              for i in np.flatnonzero(np.sign(d[:-1]) * np.sign(d[1:]) < 0)]
    return roots


def test_criterion_05_phase_boundaries(report):
    t0 = time.perf_counter()
    worst, missing = 0.0, 0
    for chi in np.linspace(-0.95, 0.95, 20):
        for w in np.linspace(0.1, 1.0, 20):
            p = ModelParams.from_ratios(w, 0.0, chi)
            for n in range(0, 7):
                closed = boundary_g01(p) if n == 0 else boundary_gn(p, n)
                roots = _bisected_boundaries(w, chi, n)
                if not roots:
                    missing += 1
                    continue
                worst = max(worst, min(abs(r - closed) for r in roots) / p.g_s)
    figs = {
        "4a": (AxisSpec("omega", 0.05, 1.0, 40), AxisSpec("g", 0.0, 6.0, 40), {"chi": 0.5}),
        "4b": (AxisSpec("omega", 0.05, 1.0, 40), AxisSpec("chi", -1.0, 1.0, 40), {"g": 2.5}),
        "4c": (AxisSpec("omega", 0.05, 1.0, 40), AxisSpec("chi", -1.0, 1.0, 40), {"g": 3.0}),
        "4d": (AxisSpec("chi", -1.0, 1.0, 40), AxisSpec("g", 0.0, 6.0, 40), {"omega": 0.3}),
    }
    increments = {}
    for name, (xa, ya, fixed) in figs.items():
        grid = scan_diagram(xa, ya, fixed)
        assert np.any(grid.n_w != UNDEFINED)
        increments[name] = sorted(set(abs(i) for i in boundary_increments(grid)))
    elapsed = time.perf_counter() - t0
    ok = (missing == 0 and worst < 1e-8 and all(v == [1] for v in increments.values())
          and elapsed < 60.0)
    report(5, "closed-form boundaries vs bisection; Fig. 4 increments", ok,
           f"max |g_c - bisection| = {worst:.1e} g_s (< 1e-8), {missing} missing, "
           f"|dn_w| across boundaries {increments}, {elapsed:.1f} s (< 60 s)")


def test_criterion_06_ed_consistency(report):
    p = FIG5
    h = build_hamiltonian(p, 80)
    spec = diagonalize(h, 30)
    exact = np.array([lv.energy for lv in spectrum(p, 30)])
    rel = float(np.max(np.abs(spec.energies - exact) / np.maximum(np.abs(exact), 1e-300)))
    comm = commutator_norm(build_hamiltonian(p.with_(lam=0.7), 80))
    comm0 = commutator_norm(h)
    ok = rel < 1e-10 and comm < 1e-12 and comm0 < 1e-12
    report(6, "ED at lambda = 0 vs closed form; [H, P]", ok,
           f"30 levels, max rel err {rel:.1e} (< 1e-10), |[H,P]|/|H| = {max(comm, comm0):.1e} (< 1e-12)")


def test_criterion_07_perturbative_gap(report):
    t0 = time.perf_counter()
    lam_params = FIG5.with_(lam=0.01)
    crossings = find_crossings(FIG5, 0.2 * FIG5.g_s, 4.0 * FIG5.g_s, levels=3)
    same = [c for c in crossings if c.same_parity][:2]
    different = [c for c in crossings if not c.same_parity]
    rel_errors, closed_gaps = [], []
    for c in same:
        (n, eta), (m, eta2) = c.below, c.above
        d = perturbative_d(lam_params.with_(g=c.g), n, eta if n else -1, m, eta2 if m else -1)
        half = 40.0 * abs(d)
        gap = minimum_gap(lam_params, c.index, c.g - half, c.g + half, 80).gap
        rel_errors.append(abs(gap - 2.0 * abs(d)) / (2.0 * abs(d)))
    for c in different:
        half = 1e-3 * c.g
        closed_gaps.append(minimum_gap(lam_params, c.index, c.g - half, c.g + half, 80).gap)
    elapsed = time.perf_counter() - t0
    ok = (len(same) == 2 and max(rel_errors) < 0.05 and closed_gaps
          and max(closed_gaps) < 1e-8 and elapsed < 120.0)
    report(7, "ED minimum gap vs 2|d|", ok,
           f"same-parity rel err {[f'{e:.2e}' for e in rel_errors]} (< 5%), different-parity "
           f"gaps {[f'{g:.1e}' for g in closed_gaps]} (< 1e-8), {elapsed:.1f} s (< 120 s)")


def _texture_winding(vector):
    return winding_integral(SampledTexture.from_sigma_x_vector(vector)).n_w


_C8 = {"lines": []}


@settings(max_examples=6, deadline=None, derandomize=True)
@given(st.integers(0, 1), st.floats(0.005, 0.01), st.floats(0.02, 0.04))
def _tpt_property(which, lam, half_width):
    crossings = [c for c in find_crossings(FIG5, 0.2 * FIG5.g_s, 4.0 * FIG5.g_s, levels=3)
                 if c.same_parity]
    c = crossings[which]
    params = FIG5.with_(lam=lam)
    window = half_width * FIG5.g_s
    gs = np.linspace(c.g - window, c.g + window, 9)
    track = track_level(params, gs, c.index, 80)
    before, after = _texture_winding(track.vectors[0]), _texture_winding(track.vectors[-1])
    k = abs(c.below[0] - c.above[0])
    gap = minimum_gap(params, c.index, gs[0], gs[-1], 80).gap
    h = build_hamiltonian(params.with_(g=c.g), 80)
    spec = diagonalize(h, c.index + 2)
    resolution = max(float(np.max(spec.residuals)),
                     np.finfo(float).eps * float(np.linalg.norm(h.matrix, 2)))
    _C8["lines"].append((which, lam, before, after, gap, resolution))
    assert abs(after - before) == k == 2
    assert np.all(track.parity == track.parity[0])
    assert gap > 10.0 * resolution


def test_criterion_08_unconventional_transition(report):
    _C8["lines"].clear()
    try:
        _tpt_property()
        ok, note = True, ""
    except AssertionError as exc:
        ok, note = False, f" ({exc})"
    lines = _C8["lines"]
    detail = ", ".join(f"crossing {w + 1} lam={lam:.4f}: n_w {a}->{b}, gap {g:.2e} vs 10x{r:.1e}"
                       for w, lam, a, b, g, r in lines[:4])
    report(8, "winding changes with the gap open", ok and bool(lines),
           f"{len(lines)} sweeps; {detail}{note}")


def _variational_extremum(p, n, sign):
    """Extremum of eps over the ansatz by dense scan + Brent polish in the angle ``w = sin t``."""
    def f(t):
        t = np.asarray(t, dtype=float)
        w = np.where(np.cos(t) >= 0.0, np.sin(t), -np.sin(t))
        return sign * variational_energy(p, n, np.clip(w, -1.0, 1.0))
    ts = np.linspace(-0.5, math.pi + 0.5, 4001)
    i = int(np.argmin(f(ts)))
    res = minimize_scalar(f, bounds=(ts[max(i - 1, 0)], ts[min(i + 1, len(ts) - 1)]),
                          method="bounded", options={"xatol": 1e-12})
    return sign * min(float(res.fun), float(f(ts[i])))


def test_criterion_09_variational_closure(report):
    rng = np.random.default_rng(7)
    worst_closed = worst_scan = 0.0
    for _ in range(200):
        w, g, chi, n = rng.uniform(0.1, 1.0), rng.uniform(0.0, 3.0), rng.uniform(-0.9, 0.9), rng.integers(1, 21)
        p = ModelParams.from_ratios(w, g, chi)
        lower, upper = eigenenergy(p, n, -1), eigenenergy(p, n, 1)
        w_plus, w_minus = stationary_weights(p, n)
        worst_closed = max(worst_closed, abs(variational_energy(p, n, w_minus) - lower),
                           abs(variational_energy(p, n, w_plus) - upper))
        worst_scan = max(worst_scan, abs(_variational_extremum(p, n, 1.0) - lower),
                         abs(_variational_extremum(p, n, -1.0) - upper))
    cross_err, jumps = 0.0, []
    for chi in (-0.5, 0.0, 0.5):
        p = ModelParams.from_ratios(0.5, 0.0, chi)
        r = transition_diagnostic(p, window=1e-6)
        cross_err = max(cross_err, abs(r.g_cross - boundary_g01(p)))
        jumps.append(abs(r.sigma_x_jump))
    ok = worst_closed < 1e-10 and worst_scan < 1e-10 and cross_err < 1e-9 and min(jumps) > 0.01
    report(9, "variational extrema, g_cross, first-order jump", ok,
           f"200 points: stationary-weight err {worst_closed:.1e}, scanned err {worst_scan:.1e} "
           f"(< 1e-10); |g_cross - g_c01| = {cross_err:.1e} (< 1e-9); "
           f"|d<sigma_x>| over 1e-6 = {min(jumps):.3f} (> 0.01)")


def test_criterion_10_subsymmetry(report):
    fig6 = ModelParams.from_ratios(0.6, 2.0, 0.5)
    vacuum = subsymmetry_check(ground_state(fig6.with_(g=0.8 * fig6.g_s)))
    s = ground_state(fig6)
    n_w = winding_integral(analytic_texture(s)).n_w
    broken = subsymmetry_check(s)
    ok = (vacuum.px_symmetric and vacuum.psigma_symmetric and n_w == 1
          and not broken.px_symmetric and not broken.psigma_symmetric
          and broken.parity in (-1, 1))
    report(10, "psi_0 keeps P_x, P_sigma; n_w = 1 ground state breaks both", ok,
           f"psi_0: P_x {vacuum.px_symmetric}, P_sigma {vacuum.psigma_symmetric}; "
           f"n_w = {n_w} state: P_x {broken.px_symmetric}, P_sigma {broken.psigma_symmetric}, "
           f"P = {broken.parity:+d}")
