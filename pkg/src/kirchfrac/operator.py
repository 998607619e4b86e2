"""The variable-order fractional p(x,y)-Laplacian: pointwise diagnostic and weak forms."""
from __future__ import annotations

from dataclasses import dataclass
import math
import warnings

import numpy as np
from scipy.integrate import quad

from .errors import PreconditionError, SingularKirchhoffError, SingularKirchhoffWarning
from .quadrature import QuadratureOptions, gagliardo_rule, gauss01, tensor_rule


def _phi(t, p):
    return np.sign(t) * np.abs(t) ** (p - 1.0)


@dataclass
class WeakFormAssembly:
    """Pairings A(u)[i] of u against every free basis function."""

    values: np.ndarray
    n_entries: int
    options: QuadratureOptions

    def dot(self, u):
        return float(np.dot(self.values, u.free))


def weak_form_assembly(u, fields, dom=None, rule=None) -> WeakFormAssembly:
    rule = rule or gagliardo_rule(dom or u.domain, fields)
    return WeakFormAssembly(rule.operator(u.free), rule.n_entries, rule.options)


def weak_pairing(u, phi, fields, dom=None, rule=None) -> float:
    """Double integral of |u(x)-u(y)|^(p-2) (u(x)-u(y)) (phi(x)-phi(y)) / |x-y|^(N+ps)."""
    rule = rule or gagliardo_rule(dom or u.domain, fields)
    return float(rule.pairing(u.free, phi.free))


# ------------------------------------------------------------- residual / gradient

def _kirchhoff_coefficient(M, delta, origin):
    if delta > 0:
        return M(delta), False
    with np.errstate(divide="ignore", invalid="ignore"):
        at_zero = np.asarray(M(np.float64(0.0)), dtype=float)
    if np.isfinite(at_zero):
        return at_zero, False
    if origin == "raise":
        raise SingularKirchhoffError(
            "Kirchhoff coefficient is singular at delta = 0; start from a perturbed field")
    # the pairing vector vanishes identically at u = 0: use 0 * inf := 0
    return 0.0, True


def residual_vectors(u_free, v_free, problem, origin="limit"):
    """Nodal residual/gradient vectors on free nodes (array-level core).

    ``origin`` selects the behavior when delta(u) or delta(v) is 0 and the
    Kirchhoff coefficient is singular there: ``"raise"`` or ``"limit"``.
    Returns ``(r_u, r_v, singular_flag)``.
    """
    rule = problem.rule
    leb = problem.lebesgue
    out = []
    flagged = False
    du = rule.differences(u_free)
    dv = rule.differences(v_free)
    uq = leb.phi_free @ u_free
    vq = leb.phi_free @ v_free
    pot = problem.potential
    loads = (pot.f(uq, vq) + problem.a_values, pot.g(uq, vq) + problem.b_values)
    for which, d, load in ((1, du, loads[0]), (2, dv, loads[1])):
        delta = (rule.terms(d) / rule.p).sum()
        coef, flag = _kirchhoff_coefficient(problem.kirchhoff.M(which), delta, origin)
        flagged |= flag
        out.append(coef * (rule.AT @ rule.flux(d)) - leb.load_vector(load))
    return out[0], out[1], flagged


def assemble_weak_residual(u, v, problem):
    """Weak-form residuals (r_u, r_v) against all free basis functions.

    r_u[i] = M1(delta(u)) <A(u), phi_i> - int (f(u, v) + a) phi_i, and likewise
    for v.  At a singular Kirchhoff origin the residual is assembled with the
    limit convention and a :class:`SingularKirchhoffWarning` is issued.
    """
    r_u, r_v, flagged = residual_vectors(u.free, v.free, problem, origin="limit")
    if flagged:
        warnings.warn("residual assembled at a singular Kirchhoff origin (0 * inf := 0)",
                      SingularKirchhoffWarning)
    return r_u, r_v


# ------------------------------------------------------------- pointwise diagnostic

def apply_pointwise(u, x, pv_radius, fields, order=8):
    """Principal value of the fractional p(x,y)-Laplacian of u at a grid node x.

    The ball of radius ``pv_radius`` around x is excluded from the numerical
    integral; when p(1-s) > 1 at x the excluded part is added back from the
    one-sided slopes of u at x (it converges there), otherwise it is dropped
    with a warning because the principal value of a kinked P1 field diverges.
    Diagnostic only; solvers use the weak form.
    """
    dom = u.domain
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if pv_radius < float(np.max(dom.h)) * (1 - 1e-12):
        raise PreconditionError("pv_radius must be at least the grid resolution")
    rel = (x - dom.box_lower) / dom.h
    if np.any(np.abs(rel - np.rint(rel)) > 1e-9):
        raise PreconditionError("x must be a grid node")
    xi = x[None]
    p0 = float(fields.p(xi, xi)[0])
    s0 = float(fields.s(xi, xi)[0])
    ux = float((dom.interpolation_matrix(xi) @ u.flat)[0])
    if dom.dim == 1:
        outer = _outer_1d(u, x, pv_radius, fields, order, ux)
        tail = _tail_1d(x, fields, ux, dom)
        slopes = _one_sided_slopes(u, x)
        inner_coeff = _phi(slopes[0], p0) - _phi(slopes[1], p0)
        inner_zero = abs(slopes[0] - slopes[1]) <= 1e-14 * max(1.0, abs(slopes[0]))
    else:
        outer = _outer_2d(u, x, pv_radius, fields, order, ux)
        tail = _tail_2d(x, fields, ux, dom)
        inner_coeff, inner_zero = _inner_angular_2d(u, x, p0)
    beta = p0 * (1.0 - s0) - 1.0
    if inner_zero:
        inner = 0.0
    elif beta > 0:
        inner = inner_coeff * pv_radius ** beta / beta
    else:
        warnings.warn("principal value diverges at a kink for p(1-s) <= 1; inner ball dropped")
        inner = 0.0
    return outer + tail + inner


def _outer_1d(u, x, rho, fields, order, ux):
    dom = u.domain
    g, w = gauss01(order)
    lo_all = dom.cell_corners[:, 0]
    h = dom.h[0]
    pieces = []
    for lo in lo_all:
        hi = lo + h
        for a, b in ((lo, min(hi, x[0] - rho)), (max(lo, x[0] + rho), hi)):
            if b - a > 1e-15:
                pieces.append((a, b))
    a = np.array([q[0] for q in pieces])
    b = np.array([q[1] for q in pieces])
    y = (a[:, None] + (b - a)[:, None] * g[None]).reshape(-1, 1)
    wy = ((b - a)[:, None] * w[None]).ravel()
    uy = dom.interpolation_matrix(y) @ u.flat
    xs = np.broadcast_to(x, y.shape)
    p = fields.p(xs, y)
    s = fields.s(xs, y)
    r = np.abs(y[:, 0] - x[0])
    return float(np.sum(wy * _phi(ux - uy, p) * r ** (-(1.0 + p * s))))


def _tail_1d(x, fields, ux, dom):
    if ux == 0.0:
        return 0.0

    def integrand(yv):
        yy = np.array([[yv]])
        xx = x[None]
        p = float(fields.p(xx, yy)[0])
        s = float(fields.s(xx, yy)[0])
        return _phi(ux, p) * abs(yv - x[0]) ** (-(1.0 + p * s))

    left = quad(integrand, -np.inf, dom.box_lower[0], limit=200)[0]
    right = quad(integrand, dom.box_upper[0], np.inf, limit=200)[0]
    return left + right


def _one_sided_slopes(u, x):
    dom = u.domain
    h = dom.h[0]
    pts = np.array([[x[0] - h], [x[0]], [x[0] + h]])
    vals = dom.interpolation_matrix(pts) @ u.flat
    return (vals[1] - vals[0]) / h, (vals[2] - vals[1]) / h


def _outer_2d(u, x, rho, fields, order, ux, sub=4):
    dom = u.domain
    t, w = tensor_rule(order, 2)
    hs = dom.h / sub
    corners = dom.cell_corners
    offs = np.stack(np.meshgrid(np.arange(sub), np.arange(sub), indexing="ij"), -1).reshape(-1, 2) * hs
    sub_corners = (corners[:, None, :] + offs[None]).reshape(-1, 2)
    y = (sub_corners[:, None, :] + hs * t[None]).reshape(-1, 2)
    wy = np.tile(w * np.prod(hs), sub_corners.shape[0])
    r = np.linalg.norm(y - x, axis=-1)
    keep = r >= rho
    y, wy, r = y[keep], wy[keep], r[keep]
    uy = dom.interpolation_matrix(y) @ u.flat
    xs = np.broadcast_to(x, y.shape)
    p = fields.p(xs, y)
    s = fields.s(xs, y)
    return float(np.sum(wy * _phi(ux - uy, p) * r ** (-(2.0 + p * s))))


def _tail_2d(x, fields, ux, dom, n_theta=720):
    if ux == 0.0:
        return 0.0
    theta = (np.arange(n_theta) + 0.5) * 2.0 * np.pi / n_theta
    e = np.stack([np.cos(theta), np.sin(theta)], -1)
    with np.errstate(divide="ignore"):
        t_hi = np.where(e > 0, (dom.box_upper - x) / e, np.where(e < 0, (dom.box_lower - x) / e, np.inf))
    R = np.min(t_hi, axis=-1)
    exit_pt = x + R[:, None] * e
    xs = np.broadcast_to(x, exit_pt.shape)
    p = fields.p(xs, exit_pt)
    s = fields.s(xs, exit_pt)
    # p, s frozen at the exit point along each ray
    return float(np.sum(_phi(ux, p) * R ** (-p * s) / (p * s)) * 2.0 * np.pi / n_theta)


def _inner_angular_2d(u, x, p0, n=16):
    dom = u.domain
    h = dom.h
    g, w = gauss01(n)
    total = 0.0
    grads = []
    for sx in (1.0, -1.0):
        for sy in (1.0, -1.0):
            pts = np.array([x, x + [sx * h[0], 0.0], x + [0.0, sy * h[1]]])
            vals = dom.interpolation_matrix(pts) @ u.flat
            grad = np.array([(vals[1] - vals[0]) / (sx * h[0]), (vals[2] - vals[0]) / (sy * h[1])])
            grads.append(grad)
            theta0 = {(1.0, 1.0): 0.0, (-1.0, 1.0): 0.5 * math.pi,
                      (-1.0, -1.0): math.pi, (1.0, -1.0): 1.5 * math.pi}[(sx, sy)]
            theta = theta0 + 0.5 * math.pi * g
            e = np.stack([np.cos(theta), np.sin(theta)], -1)
            total += 0.5 * math.pi * float(np.sum(w * _phi(-(e @ grad), p0)))
    zero = max(np.max(np.abs(gr - grads[0])) for gr in grads) <= 1e-14 and abs(total) <= 1e-14
    return total, zero
