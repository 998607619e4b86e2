"""Shared builders and independent oracles for the test suite."""
import numpy as np
from scipy.integrate import quad

from kirchfrac import (DiscreteField, EnergyProblem, SourceSpec, kirchhoff_preset,
                       potential_preset)
from kirchfrac.energy import energy_arrays

# one pass/fail line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def make_problem(dom, fields, kirch="constant", pot="zero", a=0.0, b=0.0, **kw):
    kparams = kw.pop("kparams", {})
    pparams = kw.pop("pparams", {})
    return EnergyProblem(dom, fields, kirchhoff_preset(kirch, **kparams),
                         potential_preset(pot, **pparams), SourceSpec(a, b), **kw)


def hat(center, half_width, height=1.0):
    def f(x):
        return height * np.maximum(0.0, 1.0 - np.abs(np.asarray(x) - center) / half_width)
    return f


def hat_field(dom, center=0.5, half_width=0.25, height=1.0):
    f = hat(center, half_width, height)
    return DiscreteField.from_function(dom, lambda pts: f(pts[:, 0]))


def nested_quad_modular(func, kinks, box, p, s, weight=None):
    """Independent 1D oracle for the double integral over box x box of
    |f(x) - f(y)|^p / |x - y|^(1 + p s) (times weight(x, y) if given),
    by adaptive nested quadrature with breakpoints at the kinks and the diagonal."""
    a, b = box
    kinks = sorted(k for k in kinks if a < k < b)

    def inner(x):
        pts = sorted(set(kinks + [x]))
        edges = [a] + pts + [b]
        total = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            if hi - lo <= 0:
                continue

            def g(y):
                r = abs(x - y)
                if r == 0.0:
                    return 0.0
                val = abs(func(x) - func(y)) ** p / r ** (1.0 + p * s)
                return val * (weight(x, y) if weight else 1.0)
            total += quad(g, lo, hi, limit=200, epsabs=1e-13, epsrel=1e-11)[0]
        return total

    edges = [a] + kinks + [b]
    return sum(quad(inner, lo, hi, limit=200, epsabs=1e-12, epsrel=1e-10)[0]
               for lo, hi in zip(edges[:-1], edges[1:]))


def fd_errors(problem, U, V, epsilons, which="all"):
    """Per-component |central difference - gradient| for each epsilon (longdouble energy)."""
    from kirchfrac.operator import residual_vectors

    # gradient in extended precision too, so tiny truncation errors stay measurable
    X = np.concatenate([U, V]).astype(np.longdouble)
    gu, gv, _ = residual_vectors(X[:U.size], X[U.size:], problem, origin="raise")
    g = np.concatenate([gu, gv])
    n = U.size
    errs = np.empty((len(epsilons), X.size))
    for k, eps in enumerate(epsilons):
        for i in range(X.size):
            e = np.zeros(X.size, dtype=np.longdouble)
            e[i] = eps
            xp, xm = X + e, X - e
            fd = (energy_arrays(xp[:n], xp[n:], problem) - energy_arrays(xm[:n], xm[n:], problem)) / (2 * eps)
            errs[k, i] = float(abs(fd - g[i]))
    return errs, g


def _log_kernel_primitive(t):
    # second antiderivative of log|t|
    t = abs(t)
    return 0.0 if t == 0 else t * t * np.log(t) / 2 - 0.75 * t * t


def seminorm_p2_half_closed_form(nodes, vals, box=(-0.5, 1.5)):
    """Double integral over box x box of (f(x) - f(y))^2 / (x - y)^2 for a 1D
    piecewise-linear f vanishing outside [nodes[0], nodes[-1]].

    On the whole line the kernel is d/dx d/dy log|x - y|, so integrating by parts
    twice gives -2 sum_ij f'_i f'_j times closed-form log integrals over cell
    rectangles.  Pairs with one point outside the box are then removed using the
    exact inner integral 1/(x - lo) + 1/(hi - x).
    """
    nodes = np.asarray(nodes, float)
    vals = np.asarray(vals, float)
    slopes = np.diff(vals) / np.diff(nodes)
    P = _log_kernel_primitive
    full = 0.0
    for i, (a, b) in enumerate(zip(nodes[:-1], nodes[1:])):
        for j, (c, d) in enumerate(zip(nodes[:-1], nodes[1:])):
            full -= 2 * slopes[i] * slopes[j] * (P(b - c) - P(a - c) - P(b - d) + P(a - d))
    lo, hi = box

    def f(x):
        return np.interp(x, nodes, vals)

    outside = 2 * sum(quad(lambda x: f(x) ** 2 * (1 / (x - lo) + 1 / (hi - x)), a, b,
                           epsabs=1e-15, epsrel=1e-13)[0]
                      for a, b in zip(nodes[:-1], nodes[1:]))
    return full - outside


def p1_l2_closed_form(nodes, vals):
    """Exact squared L2 norm of a 1D piecewise-linear function."""
    a, b = np.asarray(vals[:-1], float), np.asarray(vals[1:], float)
    return float(np.sum(np.diff(nodes) / 3 * (a * a + a * b + b * b)))
