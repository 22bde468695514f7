"""Spin winding numbers by independent routes.

* ``integral``     unwrapped planar angle of the texture over the real line;
* ``node_arcsin``  arcsin sums over texture nodes (sx-node and sz-node forms);
* ``node_sign``    the same sums with arcsin replaced by signs;
* ``closed_form``  ``n_w = -eta n`` for exact eigenstates.

Orientation: the angle is ``atan2(sx, sz)`` in the plane with sz on the
horizontal axis, and ``n_w`` counts its net change in units of ``2 pi``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InconsistencyError, ModelDomainError, NumericalError, RefinementError
from .model import EigenState
from .texture import (EDGE_TOL, NodeSet, SpinTexture, analytic_texture,
                      c_omega_eta, find_nodes, sampling_grid)

__all__ = [
    "WindingResult",
    "WindingDirection",
    "winding_integral",
    "winding_from_nodes",
    "winding_sign_formula",
    "winding_direction",
    "winding_all_methods",
]

TWO_PI = 2.0 * math.pi
MAX_DEPTH = 40
STEP_LIMIT = math.pi / 4
INTEGER_TOL = 1e-3


@dataclass
class WindingResult:
    n_w: int
    s_w: int
    method: str
    total_angle: float
    max_step: float = 0.0
    details: dict = field(default_factory=dict)


@dataclass
class WindingDirection:
    """Winding direction ``s_w`` and the closed-form winding number."""

    s_w: int
    n_w: int
    counter_clockwise: bool


def _wrap(angle):
    return (np.asarray(angle) + np.pi) % TWO_PI - np.pi


def _sign(value) -> int:
    return int(np.sign(value))


def winding_integral(texture: SpinTexture, edge_tol: float = EDGE_TOL) -> WindingResult:
    """Winding number from the accumulated angle of ``(sz, sx)`` over the line.

    The texture is sampled on :func:`~jcstark.texture.sampling_grid` (its
    direction evaluated through the Gaussian-free scaled form) and every
    step whose wrapped angle increment exceeds ``pi/4`` is bisected until
    none does.  The remaining angle between the outermost samples and the
    exact limit directions at infinity is added as a tail correction.
    """
    if texture.is_flat:
        return WindingResult(0, 0, "integral", 0.0, details={"flat": True})
    x, L = sampling_grid(texture, edge_tol)
    # Steps are controlled on the spinor half-angle: a full texture turn
    # between two samples is only a half turn of the spinor, which cannot
    # hide inside the wrapped increment the way a 2 pi texture step can.
    beta = np.asarray(texture.half_angle(x), dtype=float)
    depth = 0
    while True:
        half_steps = _wrap(np.diff(beta))
        bad = np.flatnonzero(np.abs(half_steps) > 0.5 * STEP_LIMIT)
        if len(bad) == 0:
            break
        depth += 1
        if depth > MAX_DEPTH:
            raise RefinementError(
                f"angle steps still exceed pi/4 after {MAX_DEPTH} refinements near x = {x[bad[0]]:.6g}")
        mids = 0.5 * (x[bad] + x[bad + 1])
        x = np.insert(x, bad + 1, mids)
        beta = np.insert(beta, bad + 1, np.asarray(texture.half_angle(mids), dtype=float))
    steps = 2.0 * half_steps
    theta = np.array([2.0 * beta[0], 2.0 * beta[-1]])
    left_tail = float(_wrap(theta[0] - texture.limit_angle(-1)))
    right_tail = float(_wrap(texture.limit_angle(1) - theta[-1]))
    total = float(np.sum(steps)) + left_tail + right_tail
    turns = total / TWO_PI
    n_w = int(round(turns))
    if abs(turns - n_w) > INTEGER_TOL:
        raise NumericalError(f"accumulated angle {turns:.6f} turns is not an integer")
    max_step = float(np.max(np.abs(steps))) if len(steps) else 0.0
    return WindingResult(n_w, -_sign(n_w), "integral", total, max_step,
                         {"samples": len(x), "L": L, "depth": depth,
                          "edge_angle": max(abs(left_tail), abs(right_tail))})


def _end_values(nodes: NodeSet, component: int):
    return nodes.limit_left[component], nodes.limit_right[component]


def _sx_node_sum(nodes: NodeSet, transform) -> float:
    """Turns from sections cut by sx nodes: ``-sum d f(sz_bar) / (2 pi eta_x)``."""
    left, right = _end_values(nodes, 0)
    values = np.concatenate([[transform(left)], transform(nodes.sx_signs.astype(float)),
                             [transform(right)]])
    return float(-np.sum(np.diff(values) / nodes.sx_section_signs) / TWO_PI)


def _sz_node_sum(nodes: NodeSet, transform) -> float:
    """Turns from sections cut by sz nodes: ``sum eta_z d f(sx_bar) / (2 pi)``."""
    left, right = _end_values(nodes, 1)
    values = np.concatenate([[transform(left)], transform(nodes.sz_signs.astype(float)),
                             [transform(right)]])
    return float(np.sum(nodes.sz_section_signs * np.diff(values)) / TWO_PI)


def _integer(turns: float, label: str) -> int:
    n = int(round(turns))
    if abs(turns - n) > 1e-9:
        raise InconsistencyError(f"{label} node sum gives non-integer {turns}")
    return n


def _arcsin(values):
    return np.arcsin(np.clip(values, -1.0, 1.0))


def _half_pi_sign(values):
    # sgn at interior nodes; 2 arcsin / pi at the infinity ends, scaled back by pi/2
    values = np.asarray(values, dtype=float)
    interior = np.sign(values)
    ends = 2.0 * _arcsin(values) / math.pi
    return 0.5 * math.pi * np.where(np.abs(values) == 1.0, interior, ends)


def _from_node_sums(nodes: NodeSet, transform, method: str) -> WindingResult:
    if nodes.flat:
        return WindingResult(0, 0, method, 0.0, details={"flat": True})
    have_x = len(nodes.sx_section_signs) == nodes.M_x + 1 and np.all(nodes.sx_section_signs != 0)
    have_z = len(nodes.sz_section_signs) == nodes.M_z + 1 and np.all(nodes.sz_section_signs != 0)
    if not (have_x or have_z):
        raise NumericalError("node set carries no usable section signs")
    results = {}
    if have_x:
        results["sx_nodes"] = _integer(_sx_node_sum(nodes, transform), method + "/sx")
    if have_z:
        results["sz_nodes"] = _integer(_sz_node_sum(nodes, transform), method + "/sz")
    values = set(results.values())
    if len(values) != 1:
        raise InconsistencyError(f"{method}: node forms disagree {results}")
    n_w = values.pop()
    return WindingResult(n_w, -_sign(n_w), method, TWO_PI * n_w, details=results)


def winding_from_nodes(nodes: NodeSet, texture: SpinTexture | None = None) -> WindingResult:
    """Arcsin node sums over the sx-node sections and over the sz-node sections.

    At an sx node the normalized sz is ``+-1`` and vice versa; at the two
    infinity ends the normalized components come from the limit directions
    stored on ``nodes``.  Both sums must yield the same integer.
    """
    if texture is not None and texture.is_flat:
        return WindingResult(0, 0, "node_arcsin", 0.0, details={"flat": True})
    return _from_node_sums(nodes, _arcsin, "node_arcsin")


def winding_sign_formula(nodes: NodeSet) -> WindingResult:
    """Sign-difference node sums: neighbours with equal labels contribute nothing.

    The infinity ends use ``sgn = 2 arcsin(sigma_bar) / pi``.
    """
    return _from_node_sums(nodes, _half_pi_sign, "node_sign")


def winding_direction(state: EigenState) -> WindingDirection:
    """``s_w = sign(Omega_n + eta sqrt(Omega_n^2 + 4 g^2 n))`` and ``n_w = -eta n``.

    Counter-clockwise winding (``n_w > 0``) goes with ``s_w < 0``.  Flat
    states (``n = 0`` or a bare basis state at ``g = 0``) give zeros.
    """
    if state.params.lam != 0.0:
        raise ModelDomainError("winding direction is defined for lambda = 0 eigenstates")
    if state.n == 0 or state.c_up == 0.0 or state.c_dn == 0.0:
        return WindingDirection(0, 0, False)
    s_w = _sign(c_omega_eta(state))
    n_w = -state.eta * state.n
    return WindingDirection(s_w, n_w, n_w > 0)


def winding_all_methods(state: EigenState, check: bool = True) -> dict[str, WindingResult]:
    """All four routes for one exact eigenstate; raises if ``check`` and they differ."""
    texture = analytic_texture(state)
    nodes = find_nodes(texture)
    direction = winding_direction(state)
    results = {
        "integral": winding_integral(texture),
        "node_arcsin": winding_from_nodes(nodes, texture),
        "node_sign": winding_sign_formula(nodes),
        "closed_form": WindingResult(direction.n_w, direction.s_w, "closed_form",
                                     TWO_PI * direction.n_w),
    }
    if check:
        values = {name: r.n_w for name, r in results.items()}
        if len(set(values.values())) != 1:
            raise InconsistencyError(f"winding methods disagree: {values}")
    return results
