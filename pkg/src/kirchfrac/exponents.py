"""Variable exponent p(x, y), variable order s(x, y) and derived exponents.

Two-point maps take coordinate arrays ``x`` and ``y`` of shape (..., N) and
return arrays of shape (...).  One-point maps (p-bar, q, Lebesgue exponents)
take a single array of shape (..., N).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, EvaluationError


@dataclass(frozen=True)
class Constant:
    value: float

    def __call__(self, x, y=None):
        x = np.asarray(x)
        shape = x.shape[:-1] if y is None else np.broadcast_shapes(x.shape[:-1], np.shape(y)[:-1])
        return np.full(shape, float(self.value))


@dataclass(frozen=True)
class Sinusoidal:
    """``base + amplitude * sin(frequency * sum_d (x_d + y_d))``; symmetric by construction."""

    base: float
    amplitude: float
    frequency: float = 1.0

    def __call__(self, x, y=None):
        arg = np.sum(x, axis=-1)
        if y is not None:
            arg = arg + np.sum(y, axis=-1)
        return self.base + self.amplitude * np.sin(self.frequency * arg)


@dataclass(frozen=True)
class Affine:
    """``base + cx . x + cy . y``; symmetric only when cx == cy."""

    base: float
    cx: tuple = (0.0,)
    cy: tuple = (0.0,)

    def __call__(self, x, y=None):
        x = np.asarray(x)
        out = self.base + x @ np.resize(np.asarray(self.cx, float), x.shape[-1])
        if y is not None:
            y = np.asarray(y)
            out = out + y @ np.resize(np.asarray(self.cy, float), y.shape[-1])
        return out


@dataclass(frozen=True)
class Diagonal:
    """One-point restriction x -> f(x, x) of a two-point map."""

    two_point: object

    def __call__(self, x):
        return self.two_point(x, x)


@dataclass(frozen=True)
class Conjugate:
    """x -> p(x) / (p(x) - 1)."""

    p: object

    def __call__(self, x):
        return _conjugate_values(self.p(x))


@dataclass(frozen=True)
class ExponentField:
    p: object
    s: object
    label: str = ""

    @property
    def pbar(self):
        return Diagonal(self.p)

    @property
    def sbar(self):
        return Diagonal(self.s)


def exponent_preset(name, **params) -> ExponentField:
    """Named exponent presets: ``constant``, ``sinusoidal``, ``affine``.

    constant:   p, s
    sinusoidal: p, p_amplitude, s, s_amplitude, frequency
    affine:     p, p_cx, p_cy, s, s_cx, s_cy
    """
    if name == "constant":
        return ExponentField(Constant(params.get("p", 2.0)), Constant(params.get("s", 0.4)), name)
    if name == "sinusoidal":
        freq = params.get("frequency", 1.0)
        p = Sinusoidal(params.get("p", 1.5), params.get("p_amplitude", 0.1), freq)
        s = Sinusoidal(params.get("s", 0.4), params.get("s_amplitude", 0.0), freq)
        return ExponentField(p, s, name)
    if name == "affine":
        p = Affine(params.get("p", 2.0), tuple(params.get("p_cx", (0.0,))), tuple(params.get("p_cy", (0.0,))))
        s = Affine(params.get("s", 0.4), tuple(params.get("s_cx", (0.0,))), tuple(params.get("s_cy", (0.0,))))
        return ExponentField(p, s, name)
    raise KeyError(f"unknown exponent preset {name!r}")


@dataclass(frozen=True)
class ExponentBounds:
    p_min: float
    p_max: float
    s_min: float
    s_max: float

    def widen(self, other: "ExponentBounds") -> "ExponentBounds":
        return ExponentBounds(min(self.p_min, other.p_min), max(self.p_max, other.p_max),
                              min(self.s_min, other.s_min), max(self.s_max, other.s_max))


@dataclass
class Check:
    name: str
    passed: bool
    worst_value: float
    worst_point: tuple | None = None


@dataclass
class ValidationReport:
    checks: list
    bounds: ExponentBounds
    samples: int

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self):
        return [c.name for c in self.checks if not c.passed]

    def to_dict(self):
        return {
            "passed": self.passed,
            "samples": self.samples,
            "bounds": vars(self.bounds),
            "checks": [
                {"name": c.name, "passed": bool(c.passed), "worst_value": float(c.worst_value),
                 "worst_point": None if c.worst_point is None else [list(map(float, q)) for q in c.worst_point]}
                for c in self.checks
            ],
        }


def _sample_points(lo, hi, samples):
    axes = [np.linspace(a, b, samples) for a, b in zip(lo, hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _pairs(points):
    n = points.shape[0]
    x = np.repeat(points, n, axis=0)
    y = np.tile(points, (n, 1))
    return x, y


def _evaluate(func, x, y, what):
    vals = np.asarray(func(x, y), dtype=float)
    bad = ~np.isfinite(vals)
    if np.any(bad):
        k = int(np.flatnonzero(bad)[0])
        raise EvaluationError(f"{what} is not finite at x={tuple(x[k])}, y={tuple(y[k])}")
    return vals


def exponent_bounds(fields: ExponentField, dom, samples=None) -> ExponentBounds:
    samples = samples or _default_samples(dom.dim)
    x, y = _pairs(_sample_points(dom.box_lower, dom.box_upper, samples))
    p = _evaluate(fields.p, x, y, "p")
    s = _evaluate(fields.s, x, y, "s")
    return ExponentBounds(float(p.min()), float(p.max()), float(s.min()), float(s.max()))


def _default_samples(dim):
    return 81 if dim == 1 else 15


def validate_exponents(fields: ExponentField, dom, samples=None, sym_tol=1e-12) -> ValidationReport:
    """Check the standing assumptions on (p, s) on a sample grid.

    Symmetry and 0 < s- <= s+ < 1 < p- are checked over B x B (bounds are
    taken there); N > p s is checked over the closure of Omega squared.
    """
    samples = samples or _default_samples(dom.dim)
    x, y = _pairs(_sample_points(dom.box_lower, dom.box_upper, samples))
    p = _evaluate(fields.p, x, y, "p")
    s = _evaluate(fields.s, x, y, "s")
    p_t = _evaluate(fields.p, y, x, "p")
    s_t = _evaluate(fields.s, y, x, "s")
    checks = []

    def worst(values, k):
        return Check("", False, float(values[k]), (tuple(x[k]), tuple(y[k])))

    asym = np.maximum(np.abs(p - p_t), np.abs(s - s_t))
    k = int(np.argmax(asym))
    checks.append(Check("symmetry", bool(asym[k] <= sym_tol), float(asym[k]), (tuple(x[k]), tuple(y[k]))))

    for name, vals, ok, pick in [
        ("s_min_positive", s, lambda v: v > 0, np.argmin),
        ("s_max_below_one", s, lambda v: v < 1, np.argmax),
        ("p_min_above_one", p, lambda v: v > 1, np.argmin),
        ("p_max_finite", p, lambda v: v < np.inf, np.argmax),
    ]:
        k = int(pick(vals))
        c = worst(vals, k)
        c.name, c.passed = name, bool(ok(vals[k]))
        checks.append(c)

    xo, yo = _pairs(_sample_points(dom.lower, dom.upper, samples))
    ps = _evaluate(fields.p, xo, yo, "p") * _evaluate(fields.s, xo, yo, "s")
    k = int(np.argmax(ps))
    checks.append(Check("subcritical_ps", bool(dom.dim > ps[k]), float(ps[k]), (tuple(xo[k]), tuple(yo[k]))))

    bounds = ExponentBounds(float(p.min()), float(p.max()), float(s.min()), float(s.max()))
    return ValidationReport(checks, bounds, samples)


def _conjugate_values(p):
    p = np.asarray(p, dtype=float)
    if np.any(~(p > 1)):
        raise DomainError("conjugate exponent requires p(x) > 1 everywhere")
    return p / (p - 1.0)


def conjugate_exponent(p):
    """Conjugate exponent q with 1/p + 1/q = 1.

    Numbers and arrays give arrays; a callable gives a callable whose
    evaluation raises ``DomainError`` where p <= 1.
    """
    if callable(p):
        if isinstance(p, Conjugate):
            return p.p
        return Conjugate(p)
    return _conjugate_values(p)


def critical_exponent(fields: ExponentField, x) -> float:
    """Fractional Sobolev critical exponent N pbar / (N - sbar pbar) at the point x."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = x.shape[-1]
    pb = float(fields.p(x, x))
    sb = float(fields.s(x, x))
    denom = n - sb * pb
    if not denom > 0:
        raise DomainError(f"supercritical configuration at x={tuple(x)}: N - s p = {denom:g}")
    return n * pb / denom


def critical_exponent_values(fields: ExponentField, points) -> np.ndarray:
    """Vectorized critical exponent at an array of points (n, N)."""
    points = np.asarray(points, dtype=float)
    n = points.shape[-1]
    pb = np.asarray(fields.p(points, points), dtype=float)
    sb = np.asarray(fields.s(points, points), dtype=float)
    denom = n - sb * pb
    if np.any(~(denom > 0)):
        k = int(np.flatnonzero(~(denom > 0))[0])
        raise DomainError(f"supercritical configuration at x={tuple(points[k])}")
    return n * pb / denom
