"""Spin textures <sigma_z(x)>, <sigma_x(x)> and their nodes.

Two texture sources share one interface:

* :class:`AnalyticTexture` built from a closed-form :class:`EigenState`;
* :class:`SampledTexture` built from Fock amplitudes (numerical eigenvectors).

Both evaluate through normalized Hermite recurrences with a separate log
scale, so the *direction* of the texture vector stays available far out in
the tails where the texture itself underflows.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import hermite
from .errors import BracketError, ModelDomainError, NumericalError
from .model import EigenState, stark_detuning

__all__ = [
    "SpinTexture",
    "AnalyticTexture",
    "SampledTexture",
    "WaveComponents",
    "NodeSet",
    "SubsymmetryReport",
    "wave_components",
    "analytic_texture",
    "sampling_grid",
    "scan_sign_changes",
    "find_nodes",
    "c_omega_eta",
    "asymptotic_ratio",
    "subsymmetry_check",
]

_HALF_LOG_PI = 0.5 * math.log(math.pi)
_LN2 = math.log(2.0)
EDGE_TOL = 1e-4
GRID_GROWTH = 1.02
L_CAP = 1e15


def _wrap(angle):
    return (np.asarray(angle) + np.pi) % (2.0 * np.pi) - np.pi


class SpinTexture:
    """Planar spin field along x; ``<sigma_y> = 0`` identically."""

    source = "abstract"

    def scaled(self, x):
        """``(sz, sx, log_factor)`` with the true texture ``= (sz, sx) * exp(log_factor)``."""
        raise NotImplementedError

    @property
    def x_max(self) -> float:
        raise NotImplementedError

    @property
    def is_flat(self) -> bool:
        """True when ``<sigma_z(x)>`` vanishes identically."""
        raise NotImplementedError

    def limit_direction(self, side: int) -> tuple[float, float]:
        """Unit vector ``(sz, sx)`` approached as ``x -> side * inf``."""
        raise NotImplementedError

    def spinor(self, x):
        """Scaled sigma_z-basis components ``(p, q, half_log)``.

        ``sz = p^2 - q^2`` and ``sx = 2 p q`` (times ``exp(2 half_log)``), so
        the texture angle is twice the spinor angle ``atan2(q, p)``.
        """
        raise NotImplementedError

    def half_angle(self, x):
        """Spinor angle ``atan2(q, p)``; the texture angle is twice this."""
        p, q, _ = self.spinor(x)
        return np.arctan2(q, p)

    def evaluate(self, x):
        sz, sx, log_factor = self.scaled(x)
        with np.errstate(under="ignore"):
            factor = np.exp(log_factor)
        return sz * factor, sx * factor

    def sz(self, x):
        return self.evaluate(x)[0]

    def sx(self, x):
        return self.evaluate(x)[1]

    def sy(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def density(self, x):
        """Total probability density ``psi_+^2 + psi_-^2``."""
        sz, sx = self.evaluate(x)
        return np.hypot(sz, sx)

    def direction(self, x):
        """Normalized texture ``(sz, sx) / |(sz, sx)|``."""
        sz, sx, _ = self.scaled(x)
        r = np.hypot(sz, sx)
        with np.errstate(invalid="ignore", divide="ignore"):
            return sz / r, sx / r

    def angle(self, x):
        """Planar angle ``atan2(sx, sz)`` in the sz-sx plane."""
        sz, sx, _ = self.scaled(x)
        return np.arctan2(sx, sz)

    def external_angle(self, x):
        """``arctan(sz / sx)``, the angle measured from the sx axis."""
        sz, sx, _ = self.scaled(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.arctan(sz / sx)

    def limit_angle(self, side: int) -> float:
        bz, bx = self.limit_direction(side)
        return math.atan2(bx, bz)


class AnalyticTexture(SpinTexture):
    """Closed-form texture of ``psi_n^(eta)`` (or ``psi_0``)."""

    source = "analytic"

    def __init__(self, state: EigenState):
        self.state = state

    @property
    def n(self) -> int:
        return self.state.n

    @property
    def x_max(self) -> float:
        return math.sqrt(2 * self.state.n + 1) + 6.0

    @property
    def is_flat(self) -> bool:
        return self.state.c_up == 0.0 or self.state.c_dn == 0.0

    def _pair(self, x):
        x = np.asarray(x, dtype=float)
        u, v, e = hermite.hermite_pair(self.state.n, x)
        log_factor = 2.0 * e * _LN2 - x**2 - _HALF_LOG_PI
        return u, v, log_factor

    def spinor(self, x):
        s = self.state
        u, v, log_factor = self._pair(x)
        a = s.c_up * u
        b = s.c_dn * v
        scale = math.sqrt(2.0 * s.norm)
        return (a + b) / scale, (a - b) / scale, 0.5 * log_factor

    def scaled(self, x):
        s = self.state
        u, v, log_factor = self._pair(x)
        sz = 2.0 * s.c_up * s.c_dn * u * v / s.norm
        sx = (s.c_up**2 * u**2 - s.c_dn**2 * v**2) / s.norm
        return sz, sx, log_factor

    def limit_direction(self, side: int) -> tuple[float, float]:
        # the H_n^2 term dominates sx whenever it is present
        return (0.0, -1.0) if self.state.c_dn != 0.0 else (0.0, 1.0)


class SampledTexture(SpinTexture):
    """Texture of a real spinor given by Fock amplitudes in the sigma_z basis.

    ``up[k]`` and ``dn[k]`` multiply ``phi_k(x)`` in the spin-up and
    spin-down components.  Amplitudes below ``cutoff * max|amplitude|`` are
    dropped so that round-off noise does not dictate the far tails.
    """

    source = "sampled"

    def __init__(self, up, dn, cutoff: float = 1e-10, truncation: int | None = None):
        up = np.array(up, dtype=float)
        dn = np.array(dn, dtype=float)
        if up.shape != dn.shape or up.ndim != 1:
            raise ValueError("up and dn must be 1-D arrays of equal length")
        peak = max(np.max(np.abs(up)), np.max(np.abs(dn)))
        if peak == 0.0:
            raise ValueError("zero spinor")
        up[np.abs(up) < cutoff * peak] = 0.0
        dn[np.abs(dn) < cutoff * peak] = 0.0
        support = np.flatnonzero((up != 0.0) | (dn != 0.0))
        self.top = int(support[-1])
        self.up = up[: self.top + 1]
        self.dn = dn[: self.top + 1]
        self.truncation = truncation

    @classmethod
    def from_sigma_x_vector(cls, vector, cutoff: float = 1e-10) -> "SampledTexture":
        """From amplitudes in the interleaved basis ``|k,UP>, |k,DN>`` (sigma_x)."""
        v = np.asarray(vector, dtype=float)
        c_up, c_dn = v[0::2], v[1::2]
        return cls((c_up + c_dn) / math.sqrt(2.0), (c_up - c_dn) / math.sqrt(2.0),
                   cutoff=cutoff, truncation=len(c_up) - 1)

    @property
    def x_max(self) -> float:
        return math.sqrt(2 * self.top + 1) + 6.0

    @property
    def is_flat(self) -> bool:
        # sz = psi_up^2 - psi_dn^2 vanishes identically iff up = +-dn
        return bool(np.allclose(self.up, self.dn, rtol=0.0, atol=1e-14)
                    or np.allclose(self.up, -self.dn, rtol=0.0, atol=1e-14))

    def components(self, x):
        """Scaled ``(psi_up, psi_dn, log_factor)``; true = scaled * exp(log_factor)."""
        x = np.asarray(x, dtype=float)
        table, e = hermite.hermite_table(self.top, x)
        psi_up = np.tensordot(self.up, table, axes=1)
        psi_dn = np.tensordot(self.dn, table, axes=1)
        return psi_up, psi_dn, e * _LN2 - 0.5 * x**2 - 0.5 * _HALF_LOG_PI

    def spinor(self, x):
        return self.components(x)

    def scaled(self, x):
        psi_up, psi_dn, half_log = self.components(x)
        return psi_up**2 - psi_dn**2, 2.0 * psi_up * psi_dn, 2.0 * half_log

    def limit_direction(self, side: int) -> tuple[float, float]:
        a, b = self.up[-1], self.dn[-1]
        r = a * a + b * b
        return (a * a - b * b) / r, 2.0 * a * b / r


def analytic_texture(state: EigenState) -> AnalyticTexture:
    """Closed-form spin texture of an exact eigenstate."""
    return AnalyticTexture(state)


@dataclass
class WaveComponents:
    """Position-space spinor components in the sigma_x or sigma_z basis."""

    state: EigenState
    basis: str

    def __post_init__(self):
        if self.basis not in ("sigma_x", "sigma_z"):
            raise ValueError("basis must be 'sigma_x' or 'sigma_z'")

    def _phis(self, x):
        x = np.asarray(x, dtype=float)
        u, v, e = hermite.hermite_pair(self.state.n, x)
        with np.errstate(under="ignore"):
            factor = np.exp(e * _LN2 - 0.5 * x**2 - 0.5 * _HALF_LOG_PI)
        return u * factor, v * factor

    def evaluate(self, x):
        s = self.state
        phi_prev, phi_n = self._phis(x)
        a = s.c_up * phi_prev / math.sqrt(s.norm)
        b = s.c_dn * phi_n / math.sqrt(s.norm)
        if self.basis == "sigma_x":
            return a, b
        return (a + b) / math.sqrt(2.0), (a - b) / math.sqrt(2.0)

    def plus(self, x):
        return self.evaluate(x)[0]

    def minus(self, x):
        return self.evaluate(x)[1]


def wave_components(state: EigenState, basis: str = "sigma_z") -> WaveComponents:
    return WaveComponents(state, basis)


def c_omega_eta(state: EigenState) -> float:
    """``Omega_n + eta sqrt(Omega_n^2 + 4 g^2 n)`` for a state with ``n >= 1``."""
    p = state.params
    det = float(stark_detuning(p, state.n))
    root = math.hypot(det, 2.0 * p.g * math.sqrt(state.n))
    if det == 0.0 or (det > 0) == (state.eta > 0):
        return det + state.eta * root
    return -4.0 * p.g**2 * state.n / (det - state.eta * root)


def asymptotic_ratio(state: EigenState, x):
    """Large-|x| limit of ``sz / sx``: ``-C / (sqrt(2) g x)``."""
    if state.n == 0 or state.params.g == 0.0:
        raise ModelDomainError("asymptotic ratio needs n >= 1 and g > 0")
    return -c_omega_eta(state) / (math.sqrt(2.0) * state.params.g * np.asarray(x, dtype=float))


def _edge_deviation(texture: SpinTexture, L: float) -> float:
    dev = 0.0
    for side in (-1, 1):
        theta = float(texture.angle(side * L))
        dev = max(dev, abs(float(_wrap(theta - texture.limit_angle(side)))))
    return dev


def sampling_grid(texture: SpinTexture, edge_tol: float = EDGE_TOL, core_step: float | None = None):
    """Symmetric sample points covering every feature of the texture.

    Uniform spacing inside ``[-x_max, x_max]`` and geometric spacing outside,
    extended until the texture direction at both ends is within ``edge_tol``
    radians of its limit at infinity.  Returns ``(x, L)``.
    """
    x_max = texture.x_max
    if core_step is None:
        core_step = min(0.02, 0.25 / math.sqrt(2.0 * (x_max - 6.0) ** 2 + 1.0))
    L = x_max
    while _edge_deviation(texture, L) > edge_tol:
        L *= 2.0
        if L > L_CAP:
            raise NumericalError("texture does not settle to its limit direction")
    count = int(math.ceil(x_max / core_step))
    core = np.linspace(-x_max, x_max, 2 * count + 1)
    if L > x_max:
        steps = int(math.ceil(math.log(L / x_max) / math.log(GRID_GROWTH)))
        outer = x_max * np.exp(np.linspace(0.0, math.log(L / x_max), steps + 1)[1:])
        return np.concatenate([-outer[::-1], core, outer]), L
    return core, L


def scan_sign_changes(values: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Brackets ``(x_i, x_{i+1})`` where ``values`` changes sign (dense-grid oracle)."""
    s = np.sign(values)
    idx = np.flatnonzero(s[:-1] * s[1:] < 0)
    exact = np.flatnonzero(s == 0)
    brackets = [(x[i], x[i + 1]) for i in idx] + [(x[i], x[i]) for i in exact]
    return np.array(sorted(brackets)).reshape(-1, 2)


@dataclass
class NodeSet:
    """Ordered texture nodes with axis labels.

    ``sz_signs[i]`` is the sign of sx at ``sz_nodes[i]`` and ``sx_signs[i]``
    the sign of sz at ``sx_nodes[i]``.  ``sx_section_signs`` holds the sign of
    sx on each of the ``M_x + 1`` sections cut by the sx nodes (outer sections
    included) and ``sz_section_signs`` likewise for sz.  ``limit_left`` and
    ``limit_right`` are the unit texture vectors ``(sz, sx)`` at -inf / +inf.
    """

    sz_nodes: np.ndarray
    sz_signs: np.ndarray
    sx_nodes: np.ndarray
    sx_signs: np.ndarray
    sx_section_signs: np.ndarray
    sz_section_signs: np.ndarray
    limit_left: tuple[float, float] = (0.0, -1.0)
    limit_right: tuple[float, float] = (0.0, -1.0)
    flat: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def M_z(self) -> int:
        return len(self.sz_nodes)

    @property
    def M_x(self) -> int:
        return len(self.sx_nodes)

    def merged(self) -> list[tuple[float, str, int]]:
        """All nodes sorted by position as ``(x, axis, sign)``.

        ``axis`` names the component that does *not* vanish, i.e. the axis of
        the plane the texture vector points along: an sz node lies on the sx
        axis.
        """
        items = [(float(x), "sx", int(s)) for x, s in zip(self.sz_nodes, self.sz_signs)]
        items += [(float(x), "sz", int(s)) for x, s in zip(self.sx_nodes, self.sx_signs)]
        return sorted(items)

    def quadrant_code(self) -> list[int]:
        """Nodes as the 1-2-3-4 code: +sz, +sx, -sz, -sx axis."""
        code = {("sz", 1): 1, ("sx", 1): 2, ("sz", -1): 3, ("sx", -1): 4}
        return [code[(axis, sign)] for _, axis, sign in self.merged()]


def _section_signs(cut_nodes, other_nodes, other_signs, texture, component, limits):
    """Sign of ``component`` on each section between consecutive ``cut_nodes``."""
    edges = np.concatenate([[-np.inf], cut_nodes, [np.inf]])
    signs = np.empty(len(edges) - 1, dtype=int)
    for i in range(len(edges) - 1):
        lo, hi = edges[i], edges[i + 1]
        inside = np.flatnonzero((other_nodes > lo) & (other_nodes < hi))
        if len(inside):
            signs[i] = int(other_signs[inside[0]])
            continue
        limit = limits[0] if i == 0 else (limits[1] if i == len(edges) - 2 else None)
        if limit is not None and limit[component] != 0.0:
            signs[i] = int(np.sign(limit[component]))
            continue
        if np.isinf(lo) and np.isinf(hi):
            probe = 0.0
        elif np.isinf(lo):
            probe = hi - max(1.0, abs(hi))
        elif np.isinf(hi):
            probe = lo + max(1.0, abs(lo))
        else:
            probe = 0.5 * (lo + hi)
        values = texture.scaled(probe)
        signs[i] = int(np.sign(values[component]))
    return signs


def _bisect(func, a, b, fa, tol_abs: float = 1e-12, max_iter: int = 200):
    """Vectorized bisection on brackets ``[a, b]`` with ``sign f(a) = fa``."""
    a = np.array(a, dtype=float)
    b = np.array(b, dtype=float)
    for _ in range(max_iter):
        width = b - a
        tol = np.maximum(tol_abs, 4.0 * np.spacing(np.maximum(np.abs(a), np.abs(b))))
        if np.all(width <= tol):
            break
        mid = 0.5 * (a + b)
        fm = np.sign(func(mid))
        left = fm == fa
        a = np.where(left, mid, a)
        b = np.where(left, b, mid)
    else:
        raise NumericalError("bisection did not converge")
    return a, b


def _analytic_sx_poly(state: EigenState):
    """Scaled sx and its derivative as functions of x (Newton polishing)."""
    n, cu, cd, N = state.n, state.c_up, state.c_dn, state.norm

    def value(x):
        u, v, _ = hermite.hermite_pair(n, x)
        return (cu * cu * u * u - cd * cd * v * v) / N

    def value_and_slope(x):
        u, v, _ = hermite.hermite_pair(n, x)
        if n >= 2:
            w = (math.sqrt(2.0 / n) * x * u - v) / math.sqrt((n - 1) / n)
            du = math.sqrt(2.0 * (n - 1)) * w
        else:
            du = np.zeros_like(u)
        dv = math.sqrt(2.0 * n) * u
        f = (cu * cu * u * u - cd * cd * v * v) / N
        df = 2.0 * (cu * cu * u * du - cd * cd * v * dv) / N
        return f, df

    return value, value_and_slope


def _find_nodes_analytic(texture: AnalyticTexture) -> NodeSet:
    state = texture.state
    n = state.n
    limits = (texture.limit_direction(-1), texture.limit_direction(1))
    meta = {"n": n, "eta": state.eta, "source": "analytic"}
    empty = np.array([])
    if n == 0:
        return NodeSet(empty, empty.astype(int), empty, empty.astype(int),
                       np.array([-1]), np.array([0]), *limits, flat=True, meta=meta)
    if texture.is_flat:
        # bare basis state: sz vanishes identically, sx only touches zero
        k = n if state.c_up == 0.0 else n - 1
        roots = hermite.hermite_roots(k).roots if k >= 1 else empty
        sign = -1 if state.c_up == 0.0 else 1
        return NodeSet(empty, empty.astype(int), roots.copy(), np.zeros(len(roots), dtype=int),
                       np.full(len(roots) + 1, sign), np.array([0]), *limits, flat=True, meta=meta)

    lower = hermite.hermite_roots(n - 1).roots if n >= 2 else empty
    upper = hermite.hermite_roots(n).roots
    sz_nodes = np.sort(np.concatenate([lower, upper]))
    _, sx_at_sz, _ = texture.scaled(sz_nodes)
    sz_signs = np.sign(sx_at_sz).astype(int)
    if np.any(sz_signs == 0):
        raise BracketError("sx vanishes at an sz node; Hermite roots coincide")

    value, value_and_slope = _analytic_sx_poly(state)
    far_sign = int(np.sign(texture.limit_direction(1)[1]))
    X = max(texture.x_max, 2.0 * abs(sz_nodes[-1]) + 1.0)
    while np.sign(value(X)) != far_sign:
        X *= 2.0
        if X > L_CAP:
            raise BracketError("outer sx node not bracketed")
    lo = np.concatenate([[-X], sz_nodes])
    hi = np.concatenate([sz_nodes, [X]])
    f_lo = np.sign(value(lo))
    f_hi = np.sign(value(hi))
    if np.any(f_lo * f_hi >= 0):
        raise BracketError("expected one sx node between consecutive sz nodes")
    a, b = _bisect(value, lo, hi, f_lo)
    roots = 0.5 * (a + b)
    f, df = value_and_slope(roots)
    with np.errstate(divide="ignore", invalid="ignore"):
        newton = roots - f / df
    ok = np.isfinite(newton) & (newton >= a) & (newton <= b)
    sx_nodes = np.where(ok, newton, roots)
    sz_at_sx, _, _ = texture.scaled(sx_nodes)
    sx_signs = np.sign(sz_at_sx).astype(int)

    return NodeSet(
        sz_nodes=sz_nodes,
        sz_signs=sz_signs,
        sx_nodes=sx_nodes,
        sx_signs=sx_signs,
        sx_section_signs=_section_signs(sx_nodes, sz_nodes, sz_signs, texture, 1, limits),
        sz_section_signs=_section_signs(sz_nodes, sx_nodes, sx_signs, texture, 0, limits),
        limit_left=limits[0],
        limit_right=limits[1],
        meta=meta,
    )


def _find_nodes_sampled(texture: SpinTexture, edge_tol: float = EDGE_TOL) -> NodeSet:
    x, _ = sampling_grid(texture, edge_tol)
    sz, sx, _ = texture.scaled(x)
    limits = (texture.limit_direction(-1), texture.limit_direction(1))

    def refine(component, brackets):
        if len(brackets) == 0:
            return np.array([])
        a, b = brackets[:, 0], brackets[:, 1]
        fa = np.sign(texture.scaled(a)[component])
        moving = a != b
        ra, rb = a.copy(), b.copy()
        if np.any(moving):
            ra[moving], rb[moving] = _bisect(lambda t: texture.scaled(t)[component],
                                             a[moving], b[moving], fa[moving])
        return 0.5 * (ra + rb)

    if texture.is_flat:
        empty = np.array([])
        return NodeSet(empty, empty.astype(int), empty, empty.astype(int),
                       np.array([int(np.sign(limits[0][1]))]), np.array([0]),
                       *limits, flat=True, meta={"source": texture.source})
    sz_nodes = refine(0, scan_sign_changes(sz, x))
    sx_nodes = refine(1, scan_sign_changes(sx, x))
    sz_signs = np.sign(texture.scaled(sz_nodes)[1]).astype(int) if len(sz_nodes) else np.array([], int)
    sx_signs = np.sign(texture.scaled(sx_nodes)[0]).astype(int) if len(sx_nodes) else np.array([], int)
    return NodeSet(
        sz_nodes=sz_nodes,
        sz_signs=sz_signs,
        sx_nodes=sx_nodes,
        sx_signs=sx_signs,
        sx_section_signs=_section_signs(sx_nodes, sz_nodes, sz_signs, texture, 1, limits),
        sz_section_signs=_section_signs(sz_nodes, sx_nodes, sx_signs, texture, 0, limits),
        limit_left=limits[0],
        limit_right=limits[1],
        meta={"source": texture.source},
    )


def find_nodes(texture: SpinTexture) -> NodeSet:
    """Locate and label all sz and sx nodes of a texture.

    For closed-form textures the sz nodes are the merged roots of
    ``H_{n-1}`` and ``H_n`` and each sx node is bisected inside the unique
    bracket between consecutive sz nodes (plus one outer bracket per side).
    Sampled textures fall back to a sign-change scan on the adaptive grid.
    """
    if isinstance(texture, AnalyticTexture):
        return _find_nodes_analytic(texture)
    return _find_nodes_sampled(texture)


@dataclass
class SubsymmetryReport:
    parity: int
    px_symmetric: bool
    psigma_symmetric: bool
    px_eigenvalue: int | None
    psigma_eigenvalue: int | None


def _diag_operators(dim: int):
    k = np.arange(dim) // 2
    photon = np.where(k % 2 == 0, 1.0, -1.0)
    spin = np.where(np.arange(dim) % 2 == 0, 1.0, -1.0)
    return photon, spin


def subsymmetry_check(state, tol: float = 1e-10) -> SubsymmetryReport:
    """Parity ``P = sigma_x (-1)^n`` and its factors ``P_x``, ``P_sigma``.

    ``state`` is an :class:`EigenState` or a real vector in the interleaved
    sigma_x Fock basis.  A factor counts as a symmetry when the state is its
    eigenvector to within ``tol``.
    """
    if isinstance(state, EigenState):
        v = state.fock_vector(state.n + 1)
    else:
        v = np.asarray(state, dtype=float)
    v = v / np.linalg.norm(v)
    photon, spin = _diag_operators(len(v))

    def expectation(op):
        return float(v @ (op * v))

    parity_value = expectation(photon * spin)
    if abs(abs(parity_value) - 1.0) > 1e-8:
        raise ModelDomainError(f"state is not a parity eigenstate (<P> = {parity_value})")
    px = expectation(photon)
    ps = expectation(spin)
    px_sym = abs(abs(px) - 1.0) < tol
    ps_sym = abs(abs(ps) - 1.0) < tol
    return SubsymmetryReport(
        parity=int(round(parity_value)),
        px_symmetric=px_sym,
        psigma_symmetric=ps_sym,
        px_eigenvalue=int(round(px)) if px_sym else None,
        psigma_eigenvalue=int(round(ps)) if ps_sym else None,
    )
