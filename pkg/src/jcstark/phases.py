"""Ground-state winding phase diagrams and their closed-form boundaries.

Axes are dimensionless: ``g`` in units of ``g_s = sqrt(omega Omega)/2``,
``omega`` in units of ``Omega`` and ``chi`` as is.  Boundaries between the
``n_w = n`` and ``n_w = n + 1`` ground-state phases depend on
``(omega / Omega, chi)`` only once expressed as ``g / g_s``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import BoundaryAbsent, ModelDomainError, ParameterError
from .model import ModelParams, ground_state
from .winding import winding_direction

__all__ = [
    "AXIS_NAMES",
    "UNDEFINED",
    "AxisSpec",
    "Polyline",
    "PhaseDiagramGrid",
    "boundary_g01",
    "boundary_gn",
    "boundary_ratio",
    "boundary_ratio_raw",
    "cell_params",
    "ground_winding",
    "scan_diagram",
    "boundary_polylines",
    "boundary_increments",
    "grid_to_csv",
    "grid_to_json",
]

AXIS_NAMES = ("g", "omega", "chi")
# cells without a ground state (|chi| = 1 with g > 0)
UNDEFINED = -1
MAX_STEPS = 2000


def boundary_ratio_raw(omega_ratio: float, chi: float, n: int) -> float:
    """``g_c^(n,n+1) / g_s`` with no range checks on ``chi``.

    Raises :class:`BoundaryAbsent` when a radicand is negative; this only
    happens outside the physical range ``|chi| <= 1``.
    """
    if n == 0:
        if chi > 1.0:
            raise BoundaryAbsent(f"1 - chi < 0 at chi = {chi}")
        return 2.0 * math.sqrt(1.0 - chi)
    cp, cm, w = 1.0 + chi, 1.0 - chi, omega_ratio
    inner = (1.0 - cp * w) ** 2 + 4.0 * n * (n + 1) * cp * cm * w * w
    if inner < 0.0:
        raise BoundaryAbsent(f"S_r radicand {inner:.3g} < 0 (n = {n}, chi = {chi})")
    outer = (cp + 2.0 * n * cp * cm) * w - chi + math.sqrt(inner)
    if outer < 0.0:
        raise BoundaryAbsent(f"boundary radicand {outer:.3g} < 0 (n = {n}, chi = {chi})")
    return 2.0 * math.sqrt(outer)


def boundary_ratio(omega_ratio: float, chi: float, n: int) -> float:
    """``g_c^(n,n+1) / g_s`` for ``0 < omega/Omega`` and ``|chi| <= 1``."""
    if n < 0 or int(n) != n:
        raise ValueError(f"phase index must be a non-negative integer, got {n!r}")
    if not -1.0 <= chi <= 1.0 or omega_ratio <= 0.0:
        raise ParameterError("need omega/Omega > 0 and chi in [-1, 1]")
    return boundary_ratio_raw(omega_ratio, chi, int(n))


def boundary_g01(params: ModelParams) -> float:
    """Principal boundary ``2 g_s sqrt(1 - chi)`` (the ``g`` of ``params`` is ignored)."""
    return params.g_s * boundary_ratio(params.omega / params.Omega, params.chi, 0)


def boundary_gn(params: ModelParams, n: int) -> float:
    """Coupling at which ``E^(n,-) = E^(n+1,-)``, for ``n >= 1``."""
    if n < 1:
        raise ValueError("use boundary_g01 for n = 0")
    return params.g_s * boundary_ratio(params.omega / params.Omega, params.chi, n)


@dataclass(frozen=True)
class AxisSpec:
    name: str
    min: float
    max: float
    steps: int

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise ParameterError(f"axis must be one of {AXIS_NAMES}, got {self.name!r}")
        if not 1 <= self.steps <= MAX_STEPS:
            raise ParameterError(f"axis steps must lie in [1, {MAX_STEPS}]")
        if not self.max >= self.min:
            raise ParameterError("axis max must be >= min")

    def values(self) -> np.ndarray:
        return np.linspace(self.min, self.max, self.steps)

    def as_dict(self) -> dict:
        return {"name": self.name, "min": self.min, "max": self.max, "steps": self.steps}


@dataclass
class Polyline:
    """Boundary between phases ``n`` and ``n + 1`` as ``(x, y)`` points."""

    lower: int
    points: list[tuple[float, float]] = field(default_factory=list)


@dataclass
class PhaseDiagramGrid:
    """``n_w[j, i]`` is the ground-state winding at ``(x[i], y[j])``."""

    x_axis: AxisSpec
    y_axis: AxisSpec
    fixed: dict
    n_w: np.ndarray
    on_boundary: np.ndarray
    boundaries: list[Polyline] = field(default_factory=list)

    @property
    def x(self) -> np.ndarray:
        return self.x_axis.values()

    @property
    def y(self) -> np.ndarray:
        return self.y_axis.values()


def cell_params(values: dict, Omega: float = 1.0, lam: float = 0.0) -> ModelParams:
    """Model parameters from ``{"g": g/g_s, "omega": omega/Omega, "chi": chi}``."""
    return ModelParams.from_ratios(values["omega"], values["g"], values["chi"], lam=lam, Omega=Omega)


def ground_winding(values: dict) -> tuple[int, bool]:
    """Ground-state ``n_w`` and a flag for cells sitting on a level tie."""
    try:
        state = ground_state(cell_params(values))
    except ModelDomainError:
        return UNDEFINED, False
    return winding_direction(state).n_w, state.degenerate


def _check_plane(x_axis: AxisSpec, y_axis: AxisSpec, fixed: dict) -> None:
    if x_axis.name == y_axis.name:
        raise ParameterError("the two axes must differ")
    missing = set(AXIS_NAMES) - {x_axis.name, y_axis.name} - set(fixed)
    if missing:
        raise ParameterError(f"fixed value required for {sorted(missing)}")


def _scan_row(args):
    x_axis, y_axis, fixed, y = args
    row = np.empty(x_axis.steps, dtype=int)
    flags = np.zeros(x_axis.steps, dtype=bool)
    for i, x in enumerate(x_axis.values()):
        values = dict(fixed)
        values[x_axis.name] = float(x)
        values[y_axis.name] = float(y)
        row[i], flags[i] = ground_winding(values)
    return row, flags


def scan_diagram(x_axis: AxisSpec, y_axis: AxisSpec, fixed: dict, workers: int = 1,
                 boundaries: bool = True) -> PhaseDiagramGrid:
    """Ground-state winding number on a 2-D grid of ``(x, y)`` values.

    Rows are independent and may run in a process pool; the output layout
    does not depend on ``workers``.  Cells on an exact level tie take the
    lower phase and are flagged in ``on_boundary``.
    """
    _check_plane(x_axis, y_axis, fixed)
    fixed = {k: float(v) for k, v in fixed.items() if k in AXIS_NAMES}
    jobs = [(x_axis, y_axis, fixed, float(y)) for y in y_axis.values()]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_scan_row, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        rows = [_scan_row(job) for job in jobs]
    grid = PhaseDiagramGrid(x_axis, y_axis, fixed,
                            np.array([r[0] for r in rows]), np.array([r[1] for r in rows]))
    if boundaries:
        grid.boundaries = boundary_polylines(grid)
    return grid


def _boundary_ratio_array(omega_ratio, chi, n: int) -> np.ndarray:
    """Vectorized :func:`boundary_ratio_raw`; ``nan`` where the boundary is absent."""
    w = np.asarray(omega_ratio, dtype=float)
    chi = np.asarray(chi, dtype=float)
    with np.errstate(invalid="ignore"):
        if n == 0:
            return 2.0 * np.sqrt(1.0 - chi)
        cp, cm = 1.0 + chi, 1.0 - chi
        inner = (1.0 - cp * w) ** 2 + 4.0 * n * (n + 1) * cp * cm * w * w
        return 2.0 * np.sqrt((cp + 2.0 * n * cp * cm) * w - chi + np.sqrt(inner))


def _crossing_step(values: dict, n: int) -> float:
    """A ``g/g_s`` step that crosses boundary ``n`` but neither neighbour."""
    here = boundary_ratio(values["omega"], values["chi"], n)
    gaps = [1e-6 * max(here, 1e-300)]
    for m in (n - 1, n + 1):
        if m >= 0:
            try:
                gaps.append(0.25 * abs(boundary_ratio(values["omega"], values["chi"], m) - here))
            except BoundaryAbsent:
                pass
    return min(g for g in gaps if g > 0.0)


def _straddle(values: dict, n: int) -> tuple[int, int]:
    """Ground-state ``n_w`` just below and just above boundary ``n``."""
    step = _crossing_step(values, n)
    lo, hi = dict(values), dict(values)
    lo["g"], hi["g"] = values["g"] - step, values["g"] + step
    return ground_winding(lo)[0], ground_winding(hi)[0]


def _plane_values(grid: PhaseDiagramGrid, x, y) -> dict:
    values = {k: v for k, v in grid.fixed.items()}
    values[grid.x_axis.name] = x
    values[grid.y_axis.name] = y
    return values


def _roots_along(grid: PhaseDiagramGrid, n: int, line_axis: str, line_value: float,
                 ts: np.ndarray) -> list[tuple[float, float]]:
    """Boundary-``n`` points on the grid line ``line_axis = line_value``.

    ``ts`` samples the other plane axis; sign changes of
    ``g/g_s - g_c^(n,n+1)/g_s`` are polished with Brent's method and kept
    only where the ground state really switches from ``n`` to ``n + 1``.
    """
    def plane(t):
        if line_axis == grid.y_axis.name:
            return _plane_values(grid, t, line_value)
        return _plane_values(grid, line_value, t)

    def gap(t):
        v = plane(t)
        return np.broadcast_to(v["g"], np.shape(t)) - _boundary_ratio_array(v["omega"], v["chi"], n)

    values_t = gap(ts)
    points = []
    for i in np.flatnonzero(np.sign(values_t[:-1]) * np.sign(values_t[1:]) <= 0):
        if values_t[i] == 0.0 and i > 0:
            continue  # already seen as the right end of the previous pair
        if values_t[i] == 0.0:
            root = ts[i]
        elif values_t[i + 1] == 0.0:
            root = ts[i + 1]
        else:
            root = brentq(lambda t: float(gap(t)), ts[i], ts[i + 1], xtol=1e-14, rtol=1e-15)
        values = plane(float(root))
        if values["g"] <= 0.0 or abs(values["chi"]) >= 1.0 or values["omega"] <= 0.0:
            continue
        if _straddle(values, n) == (n, n + 1):
            points.append((float(values[grid.x_axis.name]), float(values[grid.y_axis.name])))
    return points


def boundary_polylines(grid: PhaseDiagramGrid, samples: int | None = None,
                       max_lower: int | None = None) -> list[Polyline]:
    """Closed-form boundary curves inside the plotted window.

    Every grid row is searched along ``x`` and every grid column along
    ``y`` (so curves parallel to either axis are caught); only points where
    the ground state really switches from ``n`` to ``n + 1`` are kept, which
    drops the parts of a level crossing hidden under a lower third level.
    Boundaries up to the largest phase present in the grid (or
    ``max_lower``) are drawn; points are sorted by ``(x, y)``.
    """
    defined = grid.n_w[grid.n_w != UNDEFINED]
    top = int(defined.max()) if defined.size else 0
    if max_lower is not None:
        top = min(top, max_lower)
    xs = np.linspace(grid.x_axis.min, grid.x_axis.max, samples or max(grid.x_axis.steps, 200))
    ys = np.linspace(grid.y_axis.min, grid.y_axis.max, samples or max(grid.y_axis.steps, 200))
    lines = []
    for n in range(0, top):
        points = set()
        if grid.x_axis.max > grid.x_axis.min:
            for y in grid.y:
                points.update(_roots_along(grid, n, grid.y_axis.name, float(y), xs))
        if grid.y_axis.max > grid.y_axis.min:
            for x in grid.x:
                points.update(_roots_along(grid, n, grid.x_axis.name, float(x), ys))
        if points:
            lines.append(Polyline(n, sorted(points)))
    return lines


def boundary_increments(grid: PhaseDiagramGrid) -> list[int]:
    """``n_w`` change across each boundary point of ``grid.boundaries``.

    ``g`` is stepped to either side by a quarter of the distance to the
    neighbouring boundaries, so exactly one closed-form curve is crossed.
    """
    out = []
    for line in grid.boundaries:
        for x, y in line.points:
            below, above = _straddle(_plane_values(grid, x, y), line.lower)
            out.append(above - below)
    return out


def _header(grid: PhaseDiagramGrid) -> str:
    fixed = " ".join(f"{k}={v:g}" for k, v in sorted(grid.fixed.items()))
    return (f"# x_axis={grid.x_axis.name} min={grid.x_axis.min:g} max={grid.x_axis.max:g} "
            f"steps={grid.x_axis.steps}; y_axis={grid.y_axis.name} min={grid.y_axis.min:g} "
            f"max={grid.y_axis.max:g} steps={grid.y_axis.steps}; fixed {fixed}; "
            f"units g/g_s omega/Omega chi; n_w={UNDEFINED} marks cells without a ground state\n")


def grid_to_csv(grid: PhaseDiagramGrid) -> str:
    buf = io.StringIO()
    buf.write(_header(grid))
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["x_value", "y_value", "n_w"])
    for j, y in enumerate(grid.y):
        for i, x in enumerate(grid.x):
            writer.writerow([repr(float(x)), repr(float(y)), int(grid.n_w[j, i])])
    return buf.getvalue()


def grid_to_json(grid: PhaseDiagramGrid) -> str:
    return json.dumps({
        "x_axis": grid.x_axis.as_dict(),
        "y_axis": grid.y_axis.as_dict(),
        "fixed": grid.fixed,
        "x_values": grid.x.tolist(),
        "y_values": grid.y.tolist(),
        "n_w": grid.n_w.tolist(),
        "on_boundary": grid.on_boundary.tolist(),
        "boundaries": [{"lower": line.lower, "upper": line.lower + 1, "points": line.points}
                       for line in grid.boundaries],
    }, indent=1)
