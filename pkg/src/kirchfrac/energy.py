"""The energy functional, its Gateaux derivative and the coercivity lower bound."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .operator import residual_vectors
from .problem import kirchhoff_antiderivative
from .spaces import gagliardo_norm


def energy_arrays(u_free, v_free, problem):
    """Energy from free-node vectors; keeps the input dtype (longdouble works)."""
    rule = problem.rule
    leb = problem.lebesgue
    total = 0.0
    for which, vec in ((1, u_free), (2, v_free)):
        d = rule.differences(vec)
        delta = (rule.terms(d) / rule.p).sum()
        total = total + kirchhoff_antiderivative(problem.kirchhoff, which, delta)
    uq = leb.phi_free @ u_free
    vq = leb.phi_free @ v_free
    integrand = problem.potential.H(uq, vq) + problem.a_values * uq + problem.b_values * vq
    return total - leb.integrate(integrand)


def energy(u, v, problem) -> float:
    """I(u, v) = M~1(delta(u)) + M~2(delta(v)) - int H(u, v) - int a u - int b v."""
    val = energy_arrays(u.free, v.free, problem)
    return val if np.asarray(val).dtype == np.longdouble else float(val)


def gateaux_gradient(u, v, problem):
    """Nodal derivative (g_u, g_v); raises SingularKirchhoffError at a singular origin.

    Shares its code path with :func:`assemble_weak_residual`.
    """
    g_u, g_v, _ = residual_vectors(u.free, v.free, problem, origin="raise")
    return g_u, g_v


# ------------------------------------------------------------------ coercivity

@dataclass(frozen=True)
class CoercivityConstants:
    """phi(r) = A min(r^lo, r^hi) - c r per component, minus c2 overall."""

    A: float
    lo: float
    hi: float
    c2: float
    c3: float
    c4: float

    def phi(self, r, c):
        r = np.asarray(r, dtype=float)
        return self.A * np.minimum(r ** self.lo, r ** self.hi) - c * r

    def bound(self, norm_u, norm_v):
        return float(self.phi(norm_u, self.c3) + self.phi(norm_v, self.c4) - self.c2)

    def argmin_phi(self, c):
        """Closed-form minimizer over r >= 0 of phi(r) (lo > 1 since gamma p- > 1)."""
        cands = [0.0, 1.0]
        for e in (self.hi, self.lo):
            if c > 0 and e > 1:
                cands.append((c / (self.A * e)) ** (1.0 / (e - 1.0)))
        # r**hi rules on [0, 1] and r**lo on [1, inf); phi takes the min, so
        # every stationary point of either branch is a valid candidate
        return min(cands, key=lambda r: float(self.phi(r, c)))

    def min_phi(self, c):
        return float(self.phi(self.argmin_phi(c), c))

    def lower_estimate(self):
        """Global minimum of the bound: a lower estimate of inf I."""
        return self.min_phi(self.c3) + self.min_phi(self.c4) - self.c2

    def radius(self, c, level, other_min):
        """Largest r with phi(r, c) + other_min - c2 <= level."""
        def f(r):
            return float(self.phi(r, c)) + other_min - self.c2 - level

        lo = self.argmin_phi(c)
        if f(lo) > 0:
            return 0.0
        hi = max(2.0 * lo, 1.0)
        while f(hi) <= 0:
            hi *= 2.0
        return brentq(f, lo, hi, xtol=1e-12, rtol=1e-12)

    def radii(self, level):
        """Norm radii (R_u, R_v) that bound any (u, v) with I(u, v) <= level."""
        return (self.radius(self.c3, level, self.min_phi(self.c4)),
                self.radius(self.c4, level, self.min_phi(self.c3)))

    def to_dict(self):
        return dict(vars(self))


def coercivity_constants(problem, C_hat, c1) -> CoercivityConstants:
    spec = problem.kirchhoff
    p_lo, p_hi = problem.p_min, problem.p_max
    g = spec.gamma
    return CoercivityConstants(
        A=spec.m / (g * p_hi ** g),
        lo=g * p_lo,
        hi=g * p_hi,
        c2=c1 * problem.domain.omega_measure,
        c3=2.0 * C_hat * problem.source_norm("a"),
        c4=2.0 * C_hat * problem.source_norm("b"),
    )


def coercivity_lower_bound(u, v, problem, C_hat, c1):
    """(energy, bound) with energy >= bound by the coercivity chain.

    bound = m / (gamma p+^gamma) (min(|u|^(gamma p-), |u|^(gamma p+)) + same for v)
            - c3 |u| - c4 |v| - c2, norms in X_0.
    """
    const = coercivity_constants(problem, C_hat, c1)
    nu = gagliardo_norm(u, problem.fields, rule=problem.rule)
    nv = gagliardo_norm(v, problem.fields, rule=problem.rule)
    return energy(u, v, problem), const.bound(nu, nv)


def kirchhoff_power_bound(u, v, problem):
    """(m / (gamma p+^gamma)) (rho(u)^gamma + rho(v)^gamma): middle line of the chain."""
    spec = problem.kirchhoff
    rule = problem.rule
    A = spec.m / (spec.gamma * problem.p_max ** spec.gamma)
    return A * (float(rule.modular(u.free)) ** spec.gamma + float(rule.modular(v.free)) ** spec.gamma)


__all__ = ["energy", "energy_arrays", "gateaux_gradient", "CoercivityConstants",
           "coercivity_constants", "coercivity_lower_bound", "kirchhoff_power_bound"]
