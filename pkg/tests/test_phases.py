import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from jcstark.errors import BoundaryAbsent, ParameterError
from jcstark.model import ModelParams, eigenenergy, ground_state
from jcstark.phases import (UNDEFINED, AxisSpec, boundary_g01, boundary_gn, boundary_increments,
                            boundary_ratio, boundary_ratio_raw, cell_params, grid_to_csv,
                            grid_to_json, ground_winding, scan_diagram)
from jcstark.texture import analytic_texture
from jcstark.winding import winding_integral

from oracles import energy_crossings


def test_principal_boundary_examples():
    p = ModelParams(omega=0.49, Omega=1.0)
    assert boundary_g01(p) == pytest.approx(math.sqrt(0.49))
    q = ModelParams.from_ratios(0.6, 0.0, 0.5)
    g_c = boundary_g01(q)
    assert g_c == pytest.approx(math.sqrt(2) * q.g_s)
    at = q.with_(g=g_c)
    assert eigenenergy(at, 0) == pytest.approx(eigenenergy(at, 1, -1), abs=1e-10)
    assert boundary_g01(q.with_(chi=1.0)) == 0.0


def test_gn_chi0_matches_root_find():
    p = ModelParams.from_ratios(0.4, 0.0, 0.0)
    roots = energy_crossings(p, 1)
    assert len(roots) == 1
    assert boundary_gn(p, 1) == pytest.approx(roots[0], abs=1e-10)


def test_gn_ordering_fig4a():
    p = ModelParams.from_ratios(0.3, 0.0, 0.5)
    values = [boundary_g01(p)] + [boundary_gn(p, n) for n in range(1, 8)]
    assert np.all(np.diff(values) > 0)
    at = p.with_(g=boundary_gn(p, 3))
    assert eigenenergy(at, 3, -1) == pytest.approx(eigenenergy(at, 4, -1), abs=1e-9)


def test_absent_boundary_outside_physical_range():
    # within |chi| <= 1 every radicand is non-negative; chi > 1 exposes the absent case
    with pytest.raises(BoundaryAbsent):
        boundary_ratio_raw(0.3, 1.5, 0)
    with pytest.raises(BoundaryAbsent):
        boundary_ratio_raw(0.9, 3.0, 2)
    with pytest.raises(ParameterError):
        boundary_ratio(0.3, -1.2, 1)


@given(st.floats(0.02, 2.0), st.floats(-1.0, 1.0), st.integers(0, 30))
def test_radicand_non_negative_in_physical_range(w, chi, n):
    assert boundary_ratio(w, chi, n) >= 0.0


@pytest.mark.parametrize("chi", [-0.8, 0.0, 0.45, 0.9])
@pytest.mark.parametrize("w", [0.1, 0.55, 1.0])
def test_boundaries_match_energy_crossings(chi, w):
    p = ModelParams.from_ratios(w, 0.0, chi)
    for n in range(0, 5):
        closed = boundary_g01(p) if n == 0 else boundary_gn(p, n)
        roots = energy_crossings(p, n)
        assert min(abs(r - closed) for r in roots) < 1e-8 * p.g_s


@given(st.floats(0.05, 1.0), st.floats(0.0, 6.0), st.floats(-0.95, 0.95))
def test_cell_matches_winding_integral(w, g, chi):
    values = {"omega": w, "g": g, "chi": chi}
    n_w, _ = ground_winding(values)
    s = ground_state(cell_params(values))
    assert n_w == -s.eta * s.n if s.n else n_w == 0
    assert winding_integral(analytic_texture(s)).n_w == n_w


def test_undefined_cells():
    assert ground_winding({"omega": 0.3, "g": 1.0, "chi": 1.0})[0] == UNDEFINED
    assert ground_winding({"omega": 0.3, "g": 0.0, "chi": 1.0})[0] == 0


def test_on_boundary_cell_takes_lower_phase():
    y = AxisSpec("g", math.sqrt(2), math.sqrt(2), 1)
    x = AxisSpec("omega", 0.6, 0.6, 1)
    grid = scan_diagram(x, y, {"chi": 0.5}, boundaries=False)
    assert grid.n_w[0, 0] == 0 and grid.on_boundary[0, 0]


def test_axis_validation():
    with pytest.raises(ParameterError):
        AxisSpec("lambda", 0, 1, 3)
    with pytest.raises(ParameterError):
        AxisSpec("g", 0, 1, 2001)
    with pytest.raises(ParameterError):
        scan_diagram(AxisSpec("g", 0, 1, 3), AxisSpec("g", 0, 1, 3), {"chi": 0.0})
    with pytest.raises(ParameterError):
        scan_diagram(AxisSpec("g", 0, 1, 3), AxisSpec("omega", 0.1, 1, 3), {})


def test_fig4a_staircase_and_increments():
    grid = scan_diagram(AxisSpec("omega", 0.05, 1.0, 30), AxisSpec("g", 0.0, 6.0, 30), {"chi": 0.5})
    # n_w grows with g in every column
    assert np.all(np.diff(grid.n_w, axis=0) >= 0)
    assert grid.n_w[0].max() == 0 and grid.n_w.max() >= 3
    inc = boundary_increments(grid)
    assert inc and set(inc) == {1}
    assert grid.boundaries[0].lower == 0


def test_fig4d_principal_boundary_finite_chi_range():
    grid = scan_diagram(AxisSpec("chi", -1.0, 1.0, 41), AxisSpec("g", 0.0, 3.0, 31), {"omega": 0.3})
    principal = [line for line in grid.boundaries if line.lower == 0]
    chis = [x for x, _ in principal[0].points]
    assert min(chis) > -1.0 and max(chis) < 1.0
    assert set(boundary_increments(grid)) == {1}


def test_fig4c_no_vacuum_phase_above_threshold():
    g = 3.0
    assert g > boundary_ratio(0.5, -1.0, 0)  # above 2 sqrt(2) = g_c at chi = -1
    grid = scan_diagram(AxisSpec("omega", 0.05, 1.0, 20), AxisSpec("chi", -0.99, 0.99, 20), {"g": g})
    assert not np.any(grid.n_w == 0)


def test_parallel_scan_identical():
    axes = (AxisSpec("omega", 0.05, 1.0, 12), AxisSpec("g", 0.0, 5.0, 9), {"chi": 0.2})
    serial = scan_diagram(*axes)
    parallel = scan_diagram(*axes, workers=2)
    assert grid_to_csv(serial) == grid_to_csv(parallel)
    assert grid_to_json(serial) == grid_to_json(parallel)


def test_csv_and_json_layout():
    grid = scan_diagram(AxisSpec("omega", 0.1, 1.0, 3), AxisSpec("g", 0.0, 4.0, 2), {"chi": 0.5})
    lines = grid_to_csv(grid).splitlines()
    assert lines[0].startswith("# x_axis=omega") and lines[1] == "x_value,y_value,n_w"
    assert len(lines) == 2 + 6
    data = json.loads(grid_to_json(grid))
    assert np.array(data["n_w"]).shape == (2, 3)
    assert "boundaries" in data
