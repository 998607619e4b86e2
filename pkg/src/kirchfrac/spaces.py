"""Variable-exponent Lebesgue and fractional Sobolev quantities of discrete fields.

All Gagliardo quantities are evaluated with a shared :class:`GagliardoRule`
for the pair (domain, exponent field); pass ``rule=`` to reuse one explicitly.
"""
from __future__ import annotations

from dataclasses import dataclass, asdict
from typing import NamedTuple
import math
import warnings

import numpy as np

from .errors import AccuracyWarning, PreconditionError
from .exponents import critical_exponent_values
from .quadrature import (GagliardoRule, evaluate_one_point, gagliardo_rule, lebesgue_rule,
                         luxemburg_root)


def _lebesgue_terms(u, p, order=5):
    rule = lebesgue_rule(u.domain, order)
    vals = rule.values(u)
    expo = evaluate_one_point(p, rule.points)
    return rule.weights * np.abs(vals) ** expo, expo


def lebesgue_modular(u, p, order=5) -> float:
    """Integral over Omega of |u(x)|**p(x)."""
    terms, _ = _lebesgue_terms(u, p, order)
    return float(terms.sum())


def luxemburg_norm(u, p, order=5) -> float:
    """inf{lam > 0 : int |u / lam|**p(x) dx <= 1}; exactly 0 for the zero field."""
    if u.is_zero():
        return 0.0
    terms, expo = _lebesgue_terms(u, p, order)
    return luxemburg_root(terms, expo)


class HolderCheck(NamedTuple):
    lhs: float
    rhs: float
    rhs_sharp: float

    @property
    def holds(self):
        return self.lhs <= self.rhs


def holder_pairing(u, v, p, q, order=5, tol=1e-9) -> HolderCheck:
    """|int u v| against 2 ||u||_p ||v||_q and the sharper (1/p- + 1/q-) ||u|| ||v||."""
    rule = lebesgue_rule(u.domain, order)
    pv = evaluate_one_point(p, rule.points)
    qv = evaluate_one_point(q, rule.points)
    if np.max(np.abs(1.0 / pv + 1.0 / qv - 1.0)) > tol:
        raise PreconditionError("p and q are not conjugate exponents")
    lhs = abs(float(rule.integrate(rule.values(u) * rule.values(v))))
    nu = luxemburg_norm(u, p, order)
    nv = luxemburg_norm(v, q, order)
    return HolderCheck(lhs, 2.0 * nu * nv, (1.0 / pv.min() + 1.0 / qv.min()) * nu * nv)


def _rule(u, fields, dom, rule):
    if rule is not None:
        return rule
    return gagliardo_rule(dom if dom is not None else u.domain, fields)


def fractional_modular(u, fields, dom=None, rule=None) -> float:
    """Double integral of |u(x) - u(y)|**p / |x - y|**(N + p s) over B x B."""
    if u.is_zero():
        return 0.0
    return float(_rule(u, fields, dom, rule).modular(u.free))


def weighted_modular_delta(u, fields, dom=None, rule=None) -> float:
    """The same double integral weighted by 1/p(x, y)."""
    if u.is_zero():
        return 0.0
    return float(_rule(u, fields, dom, rule).delta(u.free))


def gagliardo_norm(u, fields, dom=None, rule=None) -> float:
    """Luxemburg norm of X_0: inf{lam > 0 : modular(u / lam) < 1}."""
    if u.is_zero():
        return 0.0
    return _rule(u, fields, dom, rule).norm(u.free)


def x_norm(u, fields, dom=None, rule=None, order=5) -> float:
    """||u||_{pbar} + [u]_X, with the Lebesgue part taken with pbar(x) = p(x, x)."""
    return luxemburg_norm(u, fields.pbar, order) + gagliardo_norm(u, fields, dom, rule)


def check_subcritical(q, fields, dom, order=5):
    rule_l = lebesgue_rule(dom, order)
    qv = evaluate_one_point(q, rule_l.points)
    if np.any(qv >= critical_exponent_values(fields, rule_l.points)):
        raise PreconditionError("q must stay below the critical exponent on Omega")


def embedding_ratio(u, q, fields, dom=None, rule=None, order=5, check=True) -> float:
    """||u||_{q(.)} / ||u||_{X_0} for a subcritical exponent q."""
    if check:
        check_subcritical(q, fields, u.domain, order)
    denom = gagliardo_norm(u, fields, dom, rule)
    if not denom > 0:
        raise PreconditionError("embedding ratio needs a nonzero field")
    return luxemburg_norm(u, q, order) / denom


def estimate_embedding_constant(dom, fields, q=None, n_samples=500, rng=None, safety=1.0,
                                rule=None, scales=(0.05, 50.0)):
    """Empirical sup of the embedding ratio over random hat combinations.

    Each sample is rescaled by a log-uniform factor in ``scales`` (the ratio is
    not scale invariant when p varies).  The tent over Omega is always included.
    Returns ``safety * max``.
    """
    from .grid import DiscreteField, random_field

    rng = rng if rng is not None else np.random.default_rng(0)
    q = q if q is not None else fields.pbar
    rule = rule or gagliardo_rule(dom, fields)
    lo, hi = np.array(dom.lower), np.array(dom.upper)

    def tent(pts):
        return np.prod(np.clip(1.0 - np.abs(2.0 * (pts - lo) / (hi - lo) - 1.0), 0.0, None), axis=-1)

    check_subcritical(q, fields, dom)
    best = 0.0
    fields_list = [DiscreteField.from_function(dom, tent)]
    for _ in range(n_samples):
        fields_list.append(random_field(dom, rng, n_hats=int(rng.integers(1, 4))))
    for u in fields_list:
        c = math.exp(rng.uniform(math.log(scales[0]), math.log(scales[1])))
        best = max(best, embedding_ratio(u * c, q, fields, rule=rule, check=False))
    return safety * best


def tail_bound(u, fields, dom=None, rule=None, order=5) -> float:
    """Upper bound for the part of the modular outside B x B.

    With u = 0 off Omega, the neglected region is {x in Omega, y outside B}
    and its mirror, where |x - y| >= dist(Omega, boundary of B) = d.
    """
    dom = dom or u.domain
    rule = _rule(u, fields, dom, rule)
    p_lo, p_hi = rule.p_min, rule.p_max
    sig_lo = p_lo * float(rule.s.min())
    sig_hi = p_hi * float(rule.s.max())
    d = dom.truncation_gap
    sphere = 2.0 if dom.dim == 1 else 2.0 * math.pi
    if d >= 1.0:
        radial = d ** (-sig_lo) / sig_lo
    else:
        radial = (d ** (-sig_hi) - 1.0) / sig_hi + 1.0 / sig_lo
    lrule = lebesgue_rule(dom, order)
    vals = np.abs(lrule.values(u))
    mass = float(lrule.integrate(np.maximum(vals ** p_lo, vals ** p_hi)))
    return 2.0 * sphere * radial * mass


@dataclass
class ModularReport:
    quantity: str
    modular: float
    norm: float
    regime: str
    quad_error_estimate: float
    grid_h: float
    tail_bound: float = 0.0

    def to_record(self):
        return {"quantity": self.quantity, "value": self.norm, "modular": self.modular,
                "regime": self.regime, "grid_h": self.grid_h,
                "quad_error_estimate": self.quad_error_estimate, "tail_bound": self.tail_bound}


def _regime(value, tol=0.0):
    if abs(value - 1.0) <= tol:
        return "=1"
    return "<1" if value < 1.0 else ">1"


def modular_report(u, fields, dom=None, rule=None, tol=None) -> ModularReport:
    """Modular, Gagliardo norm, regime and a quadrature error estimate.

    The error estimate is the difference to the same quantity computed with
    the next coarser quadrature options; an :class:`AccuracyWarning` is issued
    when it exceeds ``tol``.
    """
    dom = dom or u.domain
    rule = _rule(u, fields, dom, rule)
    mod = fractional_modular(u, fields, rule=rule)
    nrm = gagliardo_norm(u, fields, rule=rule)
    coarse = gagliardo_rule(dom, fields, rule.options.coarser())
    err = abs(mod - fractional_modular(u, fields, rule=coarse))
    if tol is not None and err > tol:
        warnings.warn(f"quadrature error estimate {err:.3g} exceeds {tol:.3g}", AccuracyWarning)
    return ModularReport("fractional_modular", mod, nrm, _regime(mod), err,
                         float(np.max(dom.h)), tail_bound(u, fields, dom, rule))
