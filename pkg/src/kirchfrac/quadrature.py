"""Quadrature rules for single integrals over Omega and Gagliardo double integrals over B x B.

Both rules are fixed point sets, independent of the field being integrated.
A Gagliardo rule is a list of point pairs (x_k, y_k) with measure weights w_k;
the double integral of any two-point integrand G is approximated by
``sum_k w_k G(x_k, y_k)``.  Because ``u(x_k) - u(y_k)`` is linear in the nodal
values, every Gagliardo quantity becomes ``sum_k K_k |(A U)_k|^{p_k}`` for a
sparse difference matrix A, which makes modulars, weak pairings and exact
discrete gradients share one code path.

Cell pairs are split into three classes:

* well separated pairs: tensor Gauss-Legendre on I x J;
* pairs one cell apart: the same with a higher order;
* touching pairs (identical, sharing an edge or a vertex): the integral is
  rewritten in the difference variable z = x - y, the z-box is split into
  sub-boxes at the kinks of the overlap length, and sub-boxes having z = 0 as
  a corner get a Duffy map with a geometrically graded radial rule whose
  innermost level is Gauss-Jacobi with the exact leading singular power.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
import itertools

import numpy as np
import scipy.sparse as sp
from scipy.special import logsumexp, roots_jacobi, roots_legendre

from .errors import EvaluationError


@dataclass(frozen=True)
class QuadratureOptions:
    regular_order: int = 4
    near_order: int = 6
    radial_order: int = 6
    angular_order: int = 4
    overlap_order: int = 5
    levels: int = 4

    @classmethod
    def default(cls, dim):
        if dim == 1:
            return cls()
        return cls(regular_order=2, near_order=3, radial_order=4, angular_order=3,
                   overlap_order=2, levels=3)

    def coarser(self):
        return QuadratureOptions(*(max(1, v - 1) for v in
                                   (self.regular_order, self.near_order, self.radial_order,
                                    self.angular_order, self.overlap_order, self.levels)))


@lru_cache(maxsize=None)
def gauss01(n):
    x, w = roots_legendre(n)
    return (x + 1.0) / 2.0, w / 2.0


@lru_cache(maxsize=256)
def _jacobi01(n, alpha):
    # weight t**alpha on [0, 1]
    x, w = roots_jacobi(n, 0.0, alpha)
    return (x + 1.0) / 2.0, w / 2.0 ** (alpha + 1.0)


def radial_rule(alpha, order, levels):
    """Nodes/weights on (0, 1] for integrands behaving like xi**alpha near 0 (alpha > -1)."""
    a = 2.0 ** -(levels - 1)
    t, wt = _jacobi01(order, round(float(alpha), 14))
    nodes = [a * t]
    weights = [a * wt * t ** (-alpha)]
    g, wg = gauss01(order)
    lo = a
    for _ in range(levels - 1):
        nodes.append(lo + lo * g)
        weights.append(lo * wg)
        lo *= 2.0
    return np.concatenate(nodes), np.concatenate(weights)


def tensor_rule(order, dim):
    g, w = gauss01(order)
    pts = np.stack([m.ravel() for m in np.meshgrid(*([g] * dim), indexing="ij")], axis=-1)
    wts = np.prod(np.stack([m.ravel() for m in np.meshgrid(*([w] * dim), indexing="ij")], axis=-1), axis=-1)
    return pts, wts


def evaluate_one_point(p, points):
    """Evaluate a one-point exponent/coefficient (callable, array or number) at points."""
    if callable(p):
        vals = np.asarray(p(points), dtype=float)
    else:
        vals = np.asarray(p, dtype=float)
    vals = np.broadcast_to(vals, points.shape[:-1]).astype(float)
    if not np.all(np.isfinite(vals)):
        raise EvaluationError("exponent is not finite at some quadrature point")
    return vals


class LebesgueRule:
    """Tensor Gauss-Legendre rule on the cells of Omega."""

    def __init__(self, dom, order=5):
        self.domain = dom
        self.order = order
        t, w = tensor_rule(order, dom.dim)
        corners = dom.cell_corners[dom.cell_in_omega.ravel()]
        self.points = (corners[:, None, :] + dom.h * t[None]).reshape(-1, dom.dim)
        self.weights = np.tile(w * np.prod(dom.h), corners.shape[0])
        self.phi = dom.interpolation_matrix(self.points)
        self.phi_free = dom.interpolation_matrix(self.points, free_only=True)
        self.phi_free_t = self.phi_free.T.tocsr()

    def values(self, u):
        """Field values at the quadrature points."""
        return self.phi @ u.flat

    def integrate(self, values):
        return np.dot(self.weights, values)

    def load_vector(self, values):
        """Vector (int values * phi_i dx)_i over the free basis functions."""
        return self.phi_free_t @ (self.weights * values)


@lru_cache(maxsize=16)
def lebesgue_rule(dom, order=5):
    return LebesgueRule(dom, order)


def _touching_points(cI, cJ, h, alpha0, opts):
    dim = h.size
    o = np.rint((cI - cJ) / h).astype(int)
    zs, ws = [], []
    for choice in itertools.product((0, 1), repeat=dim):
        lo = o - 1 + np.array(choice)
        hi = lo + 1
        if np.all((lo == 0) | (hi == 0)):
            a = np.where(hi == 0, -1.0, 1.0) * h
            xi, wxi = radial_rule(alpha0, opts.radial_order, opts.levels)
            if dim == 1:
                zs.append(a * xi[:, None])
                ws.append(abs(a[0]) * wxi)
            else:
                eta, weta = gauss01(opts.angular_order)
                X, E = np.meshgrid(xi, eta, indexing="ij")
                WX, WE = np.meshgrid(wxi, weta, indexing="ij")
                X, E, W = X.ravel(), E.ravel(), (WX * WE * X).ravel() * abs(a[0] * a[1])
                for u1, u2 in ((X, X * E), (X * E, X)):
                    zs.append(np.stack([a[0] * u1, a[1] * u2], axis=-1))
                    ws.append(W)
        else:
            t, w = tensor_rule(opts.near_order, dim)
            zs.append(h * (lo + t))
            ws.append(w * np.prod(h))
    z = np.concatenate(zs)
    wz = np.concatenate(ws)
    ylo = np.maximum(cJ, cI - z)
    yhi = np.minimum(cJ + h, cI + h - z)
    length = np.clip(yhi - ylo, 0.0, None)
    t, w = tensor_rule(opts.overlap_order, dim)
    y = ylo[:, None, :] + length[:, None, :] * t[None]
    weight = wz[:, None] * np.prod(length, axis=-1)[:, None] * w[None]
    x = y + z[:, None, :]
    return x.reshape(-1, dim), y.reshape(-1, dim), weight.ravel()


def touching_pair_rule(dom, fields, cI, cJ, opts):
    """Points and weights for one touching cell pair (I, J), covering I x J only."""
    h = dom.h
    lo = np.maximum(cI, cJ)
    hi = np.minimum(cI + h, cJ + h)
    c = ((lo + hi) / 2.0)[None]
    alpha0 = float(fields.p(c, c)[0] * (1.0 - fields.s(c, c)[0]) - 1.0)
    return _touching_points(np.asarray(cI, float), np.asarray(cJ, float), h, alpha0, opts)


def _tensor_pairs(corners, I, J, h, order):
    dim = h.size
    t, w = tensor_rule(order, dim)
    m = t.shape[0]
    X = corners[I][:, None, :] + h * t[None]
    Y = corners[J][:, None, :] + h * t[None]
    x = np.broadcast_to(X[:, :, None, :], (I.size, m, m, dim)).reshape(-1, dim)
    y = np.broadcast_to(Y[:, None, :, :], (I.size, m, m, dim)).reshape(-1, dim)
    vol = np.prod(h)
    sym = np.where(I == J, 1.0, 2.0)
    weight = (sym[:, None, None] * (vol * vol) * w[None, :, None] * w[None, None, :]).ravel()
    return x, y, weight


class GagliardoRule:
    """Fixed quadrature for double integrals of X_0 fields over B x B.

    Only cell pairs with at least one cell in Omega are kept (X_0 fields vanish
    identically on the others).  Pairs are taken once and doubled, which
    relies on the symmetry of p and s.
    """

    def __init__(self, dom, fields, options=None):
        self.domain = dom
        self.fields = fields
        self.options = options or QuadratureOptions.default(dom.dim)
        opts = self.options
        idx = dom.cell_index
        corners = dom.cell_corners
        inside = dom.cell_in_omega.ravel()
        I, J = np.triu_indices(idx.shape[0])
        keep = inside[I] | inside[J]
        I, J = I[keep], J[keep]
        dist = np.max(np.abs(idx[I] - idx[J]), axis=-1)

        parts = []
        far = dist >= 3
        near = dist == 2
        parts.append(_tensor_pairs(corners, I[far], J[far], dom.h, opts.regular_order))
        parts.append(_tensor_pairs(corners, I[near], J[near], dom.h, opts.near_order))
        for i, j in zip(I[dist <= 1], J[dist <= 1]):
            x, y, w = touching_pair_rule(dom, fields, corners[i], corners[j], opts)
            parts.append((x, y, w * (1.0 if i == j else 2.0)))

        self.x = np.concatenate([q[0] for q in parts])
        self.y = np.concatenate([q[1] for q in parts])
        self.weight = np.concatenate([q[2] for q in parts])
        self.r = np.linalg.norm(self.x - self.y, axis=-1)
        p = np.asarray(fields.p(self.x, self.y), dtype=float)
        s = np.asarray(fields.s(self.x, self.y), dtype=float)
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(s))):
            raise EvaluationError("exponent field is not finite at some quadrature pair")
        self.p = p
        self.s = s
        self.kernel = self.weight * self.r ** (-(dom.dim + p * s))

        nx, wx = dom.locate(self.x)
        ny, wy = dom.locate(self.y)
        n = self.x.shape[0]
        k = nx.shape[1]
        rows = np.concatenate([np.repeat(np.arange(n), k)] * 2)
        cols = np.concatenate([nx.ravel(), ny.ravel()])
        data = np.concatenate([wx.ravel(), -wy.ravel()])
        cols, rows, data = dom._restrict_to_free(cols, rows, data)
        self.A = sp.csr_matrix((data, (rows, cols)), shape=(n, dom.n_free))
        self.AT = self.A.T.tocsr()

    @property
    def n_entries(self):
        return self.weight.size

    @property
    def p_min(self):
        return float(self.p.min())

    @property
    def p_max(self):
        return float(self.p.max())

    def differences(self, u_free):
        return self.A @ u_free

    def terms(self, d):
        return self.kernel * np.abs(d) ** self.p

    def modular(self, u_free):
        return self.terms(self.differences(u_free)).sum()

    def delta(self, u_free):
        return (self.terms(self.differences(u_free)) / self.p).sum()

    def flux(self, d):
        return self.kernel * np.sign(d) * np.abs(d) ** (self.p - 1.0)

    def operator(self, u_free):
        """Vector of weak pairings of u against every free basis function."""
        return self.AT @ self.flux(self.differences(u_free))

    def pairing(self, u_free, phi_free):
        return np.dot(self.flux(self.differences(u_free)), self.differences(phi_free))

    def norm(self, u_free):
        terms = self.terms(self.differences(u_free))
        if not np.any(terms > 0):
            return 0.0
        return luxemburg_root(terms, self.p)

    def integrate(self, g):
        """Apply the rule to a two-point integrand ``g(x, y)``."""
        return float(np.dot(self.weight, g(self.x, self.y)))


@lru_cache(maxsize=8)
def gagliardo_rule(dom, fields, options=None):
    return GagliardoRule(dom, fields, options)


def luxemburg_root(coeffs, exponents):
    """Solve ``sum_k c_k lam**(-p_k) = 1`` for lam > 0 (c_k >= 0, not all zero).

    With rho = sum c_k the root lies between rho**(1/p_max) and rho**(1/p_min),
    so the bracket is explicit; Brent's method on log(lam) then converges to
    machine precision.
    """
    from scipy.optimize import brentq

    coeffs = np.asarray(coeffs, dtype=float)
    exponents = np.broadcast_to(np.asarray(exponents, dtype=float), coeffs.shape)
    pos = coeffs > 0
    if not np.any(pos):
        return 0.0
    logc = np.log(coeffs[pos])
    p = exponents[pos]
    log_rho = logsumexp(logc)
    a, b = sorted((log_rho / p.max(), log_rho / p.min()))

    def phi(t):
        return logsumexp(logc - p * t)

    if b - a <= 1e-15 * max(1.0, abs(a)):
        return float(np.exp(a))
    fa, fb = phi(a), phi(b)
    if fa <= 0:
        return float(np.exp(a))
    if fb >= 0:
        return float(np.exp(b))
    t = brentq(phi, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    return float(np.exp(t))
