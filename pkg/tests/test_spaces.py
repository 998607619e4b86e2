import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad
from scipy.optimize import bisect

from kirchfrac import (AccuracyWarning, DiscreteField, DomainSpec, PreconditionError,
                       embedding_ratio, estimate_embedding_constant, exponent_preset,
                       fractional_modular, gagliardo_norm, holder_pairing, lebesgue_modular,
                       luxemburg_norm, modular_report, random_field, weighted_modular_delta,
                       x_norm)
from kirchfrac.exponents import conjugate_exponent
from kirchfrac.quadrature import gagliardo_rule
from kirchfrac.spaces import tail_bound

from helpers import hat_field


def closure_field(dom, f):
    return DiscreteField.from_function(dom, f, extended_by_zero=False)


def p_lin(x):
    return 2.0 + x[..., 0]


# ------------------------------------------------------------------ Lebesgue

def test_lebesgue_trivial(dom1):
    assert lebesgue_modular(DiscreteField.zeros(dom1), 2.0) == 0.0
    assert lebesgue_modular(closure_field(dom1, lambda x: np.ones(len(x))), 2.0) == pytest.approx(1.0)


def test_lebesgue_variable_exponent_oracle(dom1):
    u = closure_field(dom1, lambda x: x[:, 0])
    oracle = quad(lambda t: t ** (2 + t), 0, 1, epsabs=1e-14, epsrel=1e-13)[0]
    assert lebesgue_modular(u, p_lin) == pytest.approx(oracle, rel=1e-6)


def test_luxemburg_zero_and_constant(dom1, rng):
    assert luxemburg_norm(DiscreteField.zeros(dom1), p_lin) == 0.0
    u = random_field(dom1, rng)
    assert luxemburg_norm(u, 2.5) == pytest.approx(lebesgue_modular(u, 2.5) ** (1 / 2.5), rel=1e-10)


def test_luxemburg_variable_exponent_bisection_oracle(dom1):
    u = closure_field(dom1, lambda x: 1.0 + x[:, 0])

    def modular(lam):
        return quad(lambda t: ((1 + t) / lam) ** (2 + t), 0, 1, epsabs=1e-14, epsrel=1e-13)[0] - 1.0

    oracle = bisect(modular, 0.5, 5.0, xtol=1e-14)
    assert luxemburg_norm(u, p_lin) == pytest.approx(oracle, rel=1e-6)


@given(st.floats(0.05, 20.0))
def test_luxemburg_is_homogeneous(c):
    dom = DomainSpec.interval(0, 1, 8)
    u = hat_field(dom, 0.4, 0.3)
    assert luxemburg_norm(u * c, p_lin) == pytest.approx(c * luxemburg_norm(u, p_lin), rel=1e-9)


# ------------------------------------------------------------------ Hölder

def test_holder_examples(dom1):
    z = DiscreteField.zeros(dom1)
    one = closure_field(dom1, lambda x: np.ones(len(x)))
    hc = holder_pairing(z, one, 2.0, 2.0)
    assert (hc.lhs, hc.rhs) == (0.0, 0.0)
    hc = holder_pairing(one, one, 2.0, 2.0)
    assert hc.lhs == pytest.approx(1.0) and hc.rhs == pytest.approx(2.0) and hc.holds


def test_holder_rejects_non_conjugate(dom1, rng):
    u = random_field(dom1, rng)
    with pytest.raises(PreconditionError):
        holder_pairing(u, u, 2.0, 3.0)


@given(seed=st.integers(0, 2 ** 31))
def test_holder_random(seed):
    dom = DomainSpec.interval(0, 1, 16)
    rng = np.random.default_rng(seed)

    def p(x):
        return 2.0 + np.sin(np.pi * x[..., 0])

    u = random_field(dom, rng, kind="nodal") * math.exp(rng.normal())
    v = random_field(dom, rng) * math.exp(rng.normal())
    hc = holder_pairing(u, v, p, conjugate_exponent(p))
    assert hc.lhs <= hc.rhs_sharp <= hc.rhs


# ------------------------------------------------------------------ Gagliardo

def test_zero_field_quantities(dom1, var_fields):
    z = DiscreteField.zeros(dom1)
    assert fractional_modular(z, var_fields) == 0.0
    assert weighted_modular_delta(z, var_fields) == 0.0
    assert gagliardo_norm(z, var_fields) == 0.0
    assert x_norm(z, var_fields) == 0.0


@given(c=st.floats(-30.0, 30.0).filter(lambda c: abs(c) > 1e-3))
def test_modular_homogeneity_constant_p(c):
    dom = DomainSpec.interval(0, 1, 16)
    fields = exponent_preset("constant", p=1.7, s=0.4)
    u = hat_field(dom, 0.45, 0.3)
    assert fractional_modular(u * c, fields) == pytest.approx(abs(c) ** 1.7 * fractional_modular(u, fields),
                                                              rel=1e-10)


def test_delta_constant_and_sandwich(dom1, const_fields, var_fields, rng):
    u = random_field(dom1, rng)
    assert weighted_modular_delta(u, const_fields) == pytest.approx(fractional_modular(u, const_fields) / 2.0,
                                                                    rel=1e-14)
    rule = gagliardo_rule(dom1, var_fields)
    for _ in range(20):
        u = random_field(dom1, rng) * math.exp(rng.normal())
        rho = fractional_modular(u, var_fields)
        d = weighted_modular_delta(u, var_fields)
        assert rule.p_min * d <= rho * (1 + 1e-14)
        assert rho <= rule.p_max * d * (1 + 1e-14)


def test_norm_constant_exponent(dom1, const_fields, rng):
    u = random_field(dom1, rng)
    assert gagliardo_norm(u, const_fields) == pytest.approx(fractional_modular(u, const_fields) ** 0.5, rel=1e-8)


def test_norm_2d_constant_exponent(dom2, rng):
    fields = exponent_preset("constant", p=2.0, s=0.5)
    u = random_field(dom2, rng)
    assert gagliardo_norm(u, fields) == pytest.approx(fractional_modular(u, fields) ** 0.5, rel=1e-8)


def test_modular_positive_for_nonzero(dom1, var_fields, rng):
    for _ in range(5):
        assert fractional_modular(random_field(dom1, rng, kind="nodal"), var_fields) > 0


@pytest.mark.parametrize("dom_name", ["dom1", "dom2"])
def test_regime_and_sandwich(dom_name, request, rng):
    dom = request.getfixturevalue(dom_name)
    fields = exponent_preset("sinusoidal", p=1.7, p_amplitude=0.15, s=0.4, s_amplitude=0.05)
    rule = gagliardo_rule(dom, fields)
    for target in (0.4, 0.9, 0.999, 1.001, 1.2, 3.0):
        u = random_field(dom, rng)
        u = u * (target / gagliardo_norm(u, fields))
        n = gagliardo_norm(u, fields)
        rho = fractional_modular(u, fields)
        assert np.sign(n - 1) == np.sign(rho - 1)
        lo, hi = sorted((n ** rule.p_min, n ** rule.p_max))
        assert lo - 1e-6 <= rho <= hi + 1e-6


def test_unit_norm_has_unit_modular(dom1, var_fields, rng):
    u = random_field(dom1, rng)
    u = u / gagliardo_norm(u, var_fields)
    assert fractional_modular(u, var_fields) == pytest.approx(1.0, abs=1e-12)


def test_vanishing_sequence(dom1, var_fields, rng):
    u = random_field(dom1, rng) * 5.0
    norms = [gagliardo_norm(u / j, var_fields) for j in range(1, 21)]
    mods = [fractional_modular(u / j, var_fields) for j in range(1, 21)]
    assert all(b < a for a, b in zip(norms, norms[1:]))
    assert all(b < a for a, b in zip(mods, mods[1:]))
    assert norms[-1] < norms[0] / 15


def test_x_norm_adds_lebesgue_part(dom1, var_fields, rng):
    u = random_field(dom1, rng)
    assert x_norm(u, var_fields) == pytest.approx(
        luxemburg_norm(u, var_fields.pbar) + gagliardo_norm(u, var_fields))


# ------------------------------------------------------------------ embedding

def test_embedding_ratio_scale_invariant_constant_p(dom1, const_fields, rng):
    u = random_field(dom1, rng)
    r = embedding_ratio(u, 2.0, const_fields)
    for c in (0.01, 3.0, 250.0):
        assert embedding_ratio(u * c, 2.0, const_fields) == pytest.approx(r, rel=1e-9)


def test_embedding_ratio_preconditions(dom1, const_fields, rng):
    with pytest.raises(PreconditionError):
        embedding_ratio(DiscreteField.zeros(dom1), 2.0, const_fields)
    with pytest.raises(PreconditionError):
        # critical exponent is 2 / (1 - 0.8) = 10
        embedding_ratio(random_field(dom1, rng), 12.0, const_fields)


def test_embedding_constant_held_out(dom1, var_fields):
    C = estimate_embedding_constant(dom1, var_fields, n_samples=500, rng=np.random.default_rng(1))
    rng = np.random.default_rng(2)
    for _ in range(200):
        u = random_field(dom1, rng, n_hats=int(rng.integers(1, 4)))
        u = u * math.exp(rng.uniform(math.log(0.05), math.log(50)))
        assert embedding_ratio(u, var_fields.pbar, var_fields, check=False) <= 1.05 * C


# ------------------------------------------------------------------ reports

def test_modular_report_record_and_warning(dom1, var_fields, rng):
    u = random_field(dom1, rng)
    rep = modular_report(u, var_fields)
    rec = rep.to_record()
    assert {"quantity", "value", "grid_h", "quad_error_estimate"} <= set(rec)
    assert rec["grid_h"] == pytest.approx(1 / 16)
    assert rep.quad_error_estimate < 1e-2 * rep.modular
    assert rep.regime == ("<1" if rep.modular < 1 else ">1")
    with pytest.warns(AccuracyWarning):
        modular_report(u, var_fields, tol=1e-16)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        modular_report(u, var_fields, tol=1.0)


def test_tail_bound_dominates_true_tail():
    dom = DomainSpec.interval(0, 1, 16)
    p, s = 2.0, 0.4
    fields = exponent_preset("constant", p=p, s=s)
    u = hat_field(dom, 0.5, 0.5)

    def f(x):
        return max(0.0, 1 - abs(x - 0.5) / 0.5)

    # x in Omega, y outside B = [-0.5, 1.5], both orderings
    def inner(x):
        k = lambda y: abs(x - y) ** (-(1 + p * s))
        return f(x) ** p * (quad(k, -np.inf, -0.5)[0] + quad(k, 1.5, np.inf)[0])

    true_tail = 2 * quad(inner, 0, 1, points=[0.5])[0]
    bound = tail_bound(u, fields)
    assert true_tail <= bound <= 20 * true_tail
    wide = DomainSpec.interval(0, 1, 16, dilation=4.0)
    assert tail_bound(hat_field(wide, 0.5, 0.5), fields) < bound
