"""Problem data for the Kirchhoff system: M1, M2, the potential H, sources a, b.

Presets cover the cases exercised by the solver and the experiment scripts.
``EnergyProblem`` bundles everything and owns the quadrature rules.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
import math

import numpy as np
from scipy.integrate import quad

from .errors import DomainError, PreconditionError
from .exponents import ExponentField, conjugate_exponent, critical_exponent_values, validate_exponents
from .grid import DiscreteField, DomainSpec
from .quadrature import (QuadratureOptions, evaluate_one_point, gagliardo_rule, lebesgue_rule,
                         luxemburg_root)


# ---------------------------------------------------------------- Kirchhoff

@dataclass(frozen=True)
class ConstantM:
    c: float

    def __call__(self, t):
        return self.c + 0.0 * np.asarray(t)

    def antiderivative(self, t):
        return self.c * t


@dataclass(frozen=True)
class PowerM:
    """M(t) = coef * t**(gamma - 1); singular at 0 when gamma < 1."""

    coef: float
    gamma: float

    def __call__(self, t):
        return self.coef * t ** (self.gamma - 1.0)

    def antiderivative(self, t):
        return self.coef / self.gamma * t ** self.gamma


@dataclass(frozen=True)
class AffineM:
    """M(t) = a + b * t."""

    a: float
    b: float

    def __call__(self, t):
        return self.a + self.b * t

    def antiderivative(self, t):
        return self.a * t + 0.5 * self.b * t * t


@dataclass(frozen=True)
class SumM:
    """M(t) = a + coef * t**(gamma - 1), e.g. 1 + t**(gamma - 1)."""

    a: float
    coef: float
    gamma: float

    def __call__(self, t):
        return self.a + self.coef * t ** (self.gamma - 1.0)

    def antiderivative(self, t):
        return self.a * t + self.coef / self.gamma * t ** self.gamma


@dataclass(frozen=True)
class TabulatedM:
    """Piecewise-linear interpolation of (t_i, M_i), constant beyond the table."""

    t: tuple
    values: tuple

    def __call__(self, t):
        return np.interp(t, self.t, self.values)


@dataclass(frozen=True)
class KirchhoffSpec:
    M1: object
    M2: object
    m: float
    gamma: float
    label: str = ""

    def M(self, which):
        return self.M1 if which == 1 else self.M2

    @property
    def singular(self) -> bool:
        return self.gamma < 1.0 and any(
            isinstance(M, (PowerM, SumM)) and M.gamma < 1.0 for M in (self.M1, self.M2))


def kirchhoff_preset(name, **params) -> KirchhoffSpec:
    """``constant`` (M = c), ``power`` (coef t^(gamma-1)), ``affine`` (a + b t),
    ``full`` (a + coef t^(gamma-1)), ``tabulated`` (t, values).

    The lower-bound constant m defaults to half the largest value for which
    M > m t^(gamma - 1) holds strictly.
    """
    if name == "constant":
        c = params.get("c", 1.0)
        M = ConstantM(c)
        return KirchhoffSpec(M, M, params.get("m", 0.5 * c), 1.0, name)
    if name == "power":
        coef, gamma = params.get("coef", 1.0), params.get("gamma", 0.8)
        M = PowerM(coef, gamma)
        return KirchhoffSpec(M, M, params.get("m", 0.5 * coef), gamma, name)
    if name == "affine":
        a, b = params.get("a", 1.0), params.get("b", 1.0)
        M = AffineM(a, b)
        return KirchhoffSpec(M, M, params.get("m", 0.5 * a), 1.0, name)
    if name == "full":
        a, coef, gamma = params.get("a", 1.0), params.get("coef", 1.0), params.get("gamma", 0.8)
        M = SumM(a, coef, gamma)
        return KirchhoffSpec(M, M, params.get("m", coef), gamma, name)
    if name == "tabulated":
        M = TabulatedM(tuple(params["t"]), tuple(params["values"]))
        return KirchhoffSpec(M, M, params["m"], params.get("gamma", 1.0), name)
    raise KeyError(f"unknown Kirchhoff preset {name!r}")


def _graded_integral(M, t, rtol=1e-12, max_pieces=200):
    # integral of M over (0, t] as a sum over [t 2^-(k+1), t 2^-k]
    total = 0.0
    prev = None
    hi = t
    for _ in range(max_pieces):
        lo = hi / 2.0
        piece, _ = quad(M, lo, hi, epsabs=0.0, epsrel=1e-13, limit=200)
        total += piece
        if abs(piece) <= rtol * abs(total):
            return total
        if prev is not None and abs(piece) >= 0.999 * abs(prev):
            raise DomainError("Kirchhoff function is not integrable at t = 0")
        prev = piece
        hi = lo
    raise DomainError("Kirchhoff function is not integrable at t = 0")


def kirchhoff_antiderivative(spec: KirchhoffSpec, which, t):
    """Integral of M_which over (0, t]; 0 at t = 0.

    Uses the preset's closed form when available, otherwise adaptive quadrature
    on geometrically graded pieces toward 0.  Divergence near 0 raises
    ``DomainError``.
    """
    M = spec.M(which)
    if t < 0:
        raise PreconditionError("t must be nonnegative")
    if t == 0:
        return 0.0 * t
    if hasattr(M, "antiderivative"):
        return M.antiderivative(t)
    return _graded_integral(M, float(t))


@dataclass
class MConditionReport:
    passed: bool
    min_margin: float
    min_ratio: float
    worst_t: float
    worst_which: int


def check_M_condition(spec: KirchhoffSpec, t_samples) -> MConditionReport:
    """Strict inequality M_i(t) > m t^(gamma - 1) on the samples.

    ``min_margin`` is the smallest M_i(t) - m t^(gamma-1); ``min_ratio`` the
    smallest M_i(t) / (m t^(gamma-1)).
    """
    t = np.asarray(t_samples, dtype=float)
    if np.any(t <= 0):
        raise PreconditionError("t samples must be positive")
    lower = spec.m * t ** (spec.gamma - 1.0)
    best = (math.inf, math.inf, None, None)
    for which in (1, 2):
        vals = np.asarray(spec.M(which)(t), dtype=float)
        margin = vals - lower
        k = int(np.argmin(margin))
        if margin[k] < best[0]:
            best = (float(margin[k]), float(np.min(vals / lower)), float(t[k]), which)
    return MConditionReport(best[0] > 0, *best)


# ---------------------------------------------------------------- potential

@dataclass(frozen=True)
class PeriodicPotential:
    """H(u, v) = alpha sin(2 pi u / K) cos(2 pi v / K) + const."""

    alpha: float
    K: float = 1.0
    const: float = 0.0

    def H(self, u, v):
        w = 2.0 * np.pi / self.K
        return self.alpha * np.sin(w * u) * np.cos(w * v) + self.const

    def f(self, u, v):
        w = 2.0 * np.pi / self.K
        return self.alpha * w * np.cos(w * u) * np.cos(w * v)

    def g(self, u, v):
        w = 2.0 * np.pi / self.K
        return -self.alpha * w * np.sin(w * u) * np.sin(w * v)


@dataclass(frozen=True)
class PotentialSpec:
    H: object
    f: object
    g: object
    K: float
    label: str = ""

    def sup_bound(self, samples=401) -> float:
        """c1 = max |H| over a grid of the period cell [0, K]^2."""
        t = np.linspace(0.0, self.K, samples)
        U, V = np.meshgrid(t, t, indexing="ij")
        return float(np.max(np.abs(self.H(U, V))))

    def check_periodicity(self, rng, n=1000, scale=10.0) -> float:
        u = rng.uniform(-scale, scale, n)
        v = rng.uniform(-scale, scale, n)
        return float(np.max(np.abs(self.H(u, v) - self.H(u + self.K, v + self.K))))

    def check_derivatives(self, rng, n=200, eps=1e-5, scale=3.0) -> float:
        u = rng.uniform(-scale, scale, n)
        v = rng.uniform(-scale, scale, n)
        fu = (self.H(u + eps, v) - self.H(u - eps, v)) / (2 * eps)
        gv = (self.H(u, v + eps) - self.H(u, v - eps)) / (2 * eps)
        return float(max(np.max(np.abs(fu - self.f(u, v))), np.max(np.abs(gv - self.g(u, v)))))


def potential_preset(name, **params) -> PotentialSpec:
    """``zero``, ``constant`` (c) or ``periodic`` (alpha, K, const)."""
    if name == "zero":
        P = PeriodicPotential(0.0, params.get("K", 1.0))
    elif name == "constant":
        P = PeriodicPotential(0.0, params.get("K", 1.0), params.get("c", 1.0))
    elif name == "periodic":
        P = PeriodicPotential(params.get("alpha", 0.1), params.get("K", 1.0), params.get("const", 0.0))
    else:
        raise KeyError(f"unknown potential preset {name!r}")
    return PotentialSpec(P.H, P.f, P.g, P.K, name)


# ---------------------------------------------------------------- sources

@dataclass(frozen=True)
class Indicator:
    lower: tuple
    upper: tuple
    value: float = 1.0

    def __call__(self, x):
        x = np.asarray(x)
        inside = np.all((x >= np.asarray(self.lower)) & (x <= np.asarray(self.upper)), axis=-1)
        return self.value * inside


@dataclass(frozen=True)
class SineSource:
    amplitude: float = 1.0
    frequency: float = 1.0

    def __call__(self, x):
        return self.amplitude * np.prod(np.sin(np.pi * self.frequency * np.asarray(x)), axis=-1)


def source_preset(name, **params):
    """``zero``, ``constant`` (value), ``indicator`` (lower, upper, value), ``sine``."""
    if name == "zero":
        return 0.0
    if name == "constant":
        return float(params.get("value", 1.0))
    if name == "indicator":
        return Indicator(tuple(params["lower"]), tuple(params["upper"]), params.get("value", 1.0))
    if name == "sine":
        return SineSource(params.get("amplitude", 1.0), params.get("frequency", 1.0))
    raise KeyError(f"unknown source preset {name!r}")


@dataclass(frozen=True)
class SourceSpec:
    """Sources a, b as callables, numbers, or non-X_0 ``DiscreteField`` nodal data.

    The Lebesgue exponent q defaults to the conjugate of pbar.
    """

    a: object = 0.0
    b: object = 0.0
    q: object = None

    def values_at(self, which, rule):
        src = self.a if which == "a" else self.b
        if isinstance(src, DiscreteField):
            return rule.phi @ src.flat
        return evaluate_one_point(src, rule.points)


# ---------------------------------------------------------------- bundle

@dataclass(frozen=True, eq=False)
class EnergyProblem:
    domain: DomainSpec
    fields: ExponentField
    kirchhoff: KirchhoffSpec
    potential: PotentialSpec
    sources: SourceSpec = field(default_factory=SourceSpec)
    quadrature: QuadratureOptions | None = None
    lebesgue_order: int = 5
    validate: bool = True

    def __post_init__(self):
        if self.validate:
            report = validate_exponents(self.fields, self.domain)
            if not report.passed:
                raise PreconditionError(f"exponent validation failed: {report.failures()}")
            if not self.kirchhoff.gamma > 1.0 / report.bounds.p_min:
                raise PreconditionError("the Kirchhoff growth bound needs gamma > 1/p-")

    @cached_property
    def rule(self):
        opts = self.quadrature or QuadratureOptions.default(self.domain.dim)
        return gagliardo_rule(self.domain, self.fields, opts)

    @cached_property
    def lebesgue(self):
        return lebesgue_rule(self.domain, self.lebesgue_order)

    @cached_property
    def q(self):
        return self.sources.q if self.sources.q is not None else conjugate_exponent(self.fields.pbar)

    @cached_property
    def a_values(self):
        return self.sources.values_at("a", self.lebesgue)

    @cached_property
    def b_values(self):
        return self.sources.values_at("b", self.lebesgue)

    def source_norm(self, which):
        """Luxemburg q-norm of a or b from the same point values used in the energy."""
        vals = self.a_values if which == "a" else self.b_values
        qv = evaluate_one_point(self.q, self.lebesgue.points)
        terms = self.lebesgue.weights * np.abs(vals) ** qv
        return luxemburg_root(terms, qv) if np.any(terms > 0) else 0.0

    @property
    def p_min(self):
        return self.rule.p_min

    @property
    def p_max(self):
        return self.rule.p_max

    def check_sources(self):
        """Source admissibility: q conjugate of pbar and 1 < q < critical exponent on Omega.

        Returns a dict of named booleans; the conjugate check is exact by
        construction when q is left at its default.
        """
        pts = self.lebesgue.points
        qv = evaluate_one_point(self.q, pts)
        pb = evaluate_one_point(self.fields.pbar, pts)
        crit = critical_exponent_values(self.fields, pts)
        return {
            "conjugate": bool(np.max(np.abs(1.0 / pb + 1.0 / qv - 1.0)) < 1e-9),
            "q_above_one": bool(np.all(qv > 1.0)),
            "q_subcritical": bool(np.all(qv < crit)),
            "finite": bool(np.all(np.isfinite(self.a_values)) and np.all(np.isfinite(self.b_values))),
        }

