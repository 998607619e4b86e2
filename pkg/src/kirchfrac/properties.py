"""Randomized invariant suite over function-space and energy properties.

Every property is reported as a margin that is nonnegative when the property
holds (up to the listed tolerance).  Field properties depend only on the pair
(u, v), so a failing pair can be serialized and replayed to reproduce the
exact margins.
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .energy import coercivity_constants, energy, kirchhoff_power_bound
from .errors import PreconditionError
from .exponents import conjugate_exponent
from .grid import random_field
from .minimizer import problem_constants
from .problem import check_M_condition, kirchhoff_antiderivative
from .spaces import (embedding_ratio, fractional_modular, gagliardo_norm, holder_pairing,
                     weighted_modular_delta)

# property -> absolute tolerance on the margin
TOLERANCES = {
    "regime_agreement": 0.0,
    "sandwich": 1e-6,
    "delta_sandwich": 1e-12,
    "holder": 0.0,
    "holder_sharp": 0.0,
    "vanishing_sequence": 0.0,
    "pairing_identity": 1e-12,
    "operator_odd": 1e-12,
    "coercivity_chain": 1e-9,
    "kirchhoff_power_chain": 1e-9,
    "embedding_held_out": 0.0,
    "M_condition": 0.0,
    "antiderivative_monotone": 0.0,
    "H_periodic": 1e-10,
    "H_bounded": 1e-12,
}

FIELD_PROPERTIES = ("regime_agreement", "sandwich", "delta_sandwich", "holder", "holder_sharp",
                    "vanishing_sequence", "pairing_identity", "operator_odd", "coercivity_chain",
                    "kirchhoff_power_chain", "embedding_held_out")


@dataclass(frozen=True)
class PropertyContext:
    """Constants shared by all trials: embedding constant and sup |H|."""

    C_hat: float
    c1: float

    @classmethod
    def for_problem(cls, problem, seed=0, embedding_samples=200):
        from .minimizer import MinimizerConfig

        cfg = MinimizerConfig(seed=seed, embedding_samples=embedding_samples)
        _, C_hat, c1 = problem_constants(problem, cfg)
        return cls(float(C_hat), float(c1))


def field_margins(problem, u, v, ctx: PropertyContext) -> dict:
    """Margins of every field property for the pair (u, v); u, v must be nonzero."""
    rule = problem.rule
    fields = problem.fields
    p_lo, p_hi = rule.p_min, rule.p_max
    out = {}

    rho = fractional_modular(u, fields, rule=rule)
    nrm = gagliardo_norm(u, fields, rule=rule)
    agree = np.sign(rho - 1.0) == np.sign(nrm - 1.0)
    out["regime_agreement"] = abs(rho - 1.0) if agree else -abs(rho - 1.0)

    lo, hi = (nrm ** p_hi, nrm ** p_lo) if nrm < 1 else (nrm ** p_lo, nrm ** p_hi)
    out["sandwich"] = min(rho - lo, hi - rho)

    delta = weighted_modular_delta(u, fields, rule=rule)
    out["delta_sandwich"] = min(delta - rho / p_hi, rho / p_lo - delta)

    pbar = fields.pbar
    hc = holder_pairing(u, v, pbar, conjugate_exponent(pbar))
    out["holder"] = hc.rhs - hc.lhs
    out["holder_sharp"] = hc.rhs_sharp - hc.lhs

    prev_n, prev_r, worst = math.inf, math.inf, math.inf
    for j in range(1, 21):
        uj = u / j
        n_j = gagliardo_norm(uj, fields, rule=rule)
        r_j = fractional_modular(uj, fields, rule=rule)
        worst = min(worst, prev_n - n_j, prev_r - r_j)
        prev_n, prev_r = n_j, r_j
    out["vanishing_sequence"] = worst

    Au = rule.operator(u.free)
    out["pairing_identity"] = -abs(float(Au @ u.free) - rho) / rho
    out["operator_odd"] = -float(np.max(np.abs(rule.operator(-u.free) + Au))) / float(np.max(np.abs(Au)))

    const = coercivity_constants(problem, ctx.C_hat, ctx.c1)
    E = energy(u, v, problem)
    bound = const.bound(nrm, gagliardo_norm(v, fields, rule=rule))
    out["coercivity_chain"] = (E - bound) / max(1.0, abs(E))
    kin = (kirchhoff_antiderivative(problem.kirchhoff, 1, weighted_modular_delta(u, fields, rule=rule))
           + kirchhoff_antiderivative(problem.kirchhoff, 2, weighted_modular_delta(v, fields, rule=rule)))
    out["kirchhoff_power_chain"] = (kin - kirchhoff_power_bound(u, v, problem)) / max(1.0, abs(kin))

    ratio = embedding_ratio(u, pbar, fields, rule=rule, check=False)
    out["embedding_held_out"] = ctx.C_hat - ratio
    return {k: float(v) for k, v in out.items()}


def scalar_margins(problem, rng, ctx: PropertyContext, n=100) -> dict:
    """Margins for the Kirchhoff and potential invariants on random scalar samples."""
    spec = problem.kirchhoff
    t = np.sort(np.exp(rng.uniform(math.log(1e-4), math.log(1e2), n)))
    out = {"M_condition": check_M_condition(spec, t).min_margin}
    worst = math.inf
    for which in (1, 2):
        vals = [kirchhoff_antiderivative(spec, which, float(x)) for x in t]
        worst = min(worst, float(np.min(np.diff(vals))))
    out["antiderivative_monotone"] = worst
    pot = problem.potential
    out["H_periodic"] = -pot.check_periodicity(rng, n=n)
    us = rng.uniform(-10 * pot.K, 10 * pot.K, n)
    vs = rng.uniform(-10 * pot.K, 10 * pot.K, n)
    out["H_bounded"] = ctx.c1 - float(np.max(np.abs(pot.H(us, vs))))
    return {k: float(v) for k, v in out.items()}


def _random_pair(problem, rng):
    """Random nonzero pair; u is rescaled to a norm log-uniform in [0.3, 3]."""
    dom = problem.domain
    u = random_field(dom, rng, n_hats=int(rng.integers(1, 4)))
    v = random_field(dom, rng, n_hats=int(rng.integers(1, 4)))
    target = math.exp(rng.uniform(math.log(0.3), math.log(3.0)))
    u = u * (target / gagliardo_norm(u, problem.fields, rule=problem.rule))
    return u, v


def report_properties(problem, seed=0, trials=100, ctx=None, embedding_samples=200) -> dict:
    """Run the invariant suite on ``trials`` random pairs; see ``TOLERANCES``.

    The report lists, per property, the number of trials, failures and the
    worst margin.  Failing pairs are returned under ``failures`` with the
    trial index; the caller serializes them for replay.
    """
    if trials < 1:
        raise PreconditionError("trials must be at least 1")
    rng = np.random.default_rng(seed)
    ctx = ctx or PropertyContext.for_problem(problem, seed, embedding_samples)
    stats = {k: {"trials": 0, "failures": 0, "worst_margin": math.inf, "tolerance": tol}
             for k, tol in TOLERANCES.items()}
    failures = []

    def record(margins, trial, pair=None):
        bad = []
        for k, m in margins.items():
            s = stats[k]
            s["trials"] += 1
            s["worst_margin"] = min(s["worst_margin"], m)
            if not m >= -TOLERANCES[k]:
                s["failures"] += 1
                bad.append(k)
        if bad:
            failures.append({"trial": trial, "properties": bad, "pair": pair, "margins": margins})

    for trial in range(trials):
        u, v = _random_pair(problem, rng)
        record(field_margins(problem, u, v, ctx), trial, (u, v))
        record(scalar_margins(problem, rng, ctx), trial)

    n_fail = sum(s["failures"] for s in stats.values())
    return {
        "seed": seed,
        "trials": trials,
        "passed": n_fail == 0,
        "total_failures": n_fail,
        "constants": {"C_hat": ctx.C_hat, "c1": ctx.c1},
        "properties": stats,
        "failures": failures,
    }


def replay(problem, u, v, ctx: PropertyContext) -> dict:
    """Margins of the field properties for a serialized pair."""
    return field_margins(problem, u, v, ctx)
