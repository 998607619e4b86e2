import numpy as np
import pytest

from kirchfrac import (DiscreteField, MinimizerConfig, PreconditionError, StallError,
                       assemble_weak_residual, coercivity_ray_scan, ekeland_certificate,
                       exponent_preset, gateaux_gradient, minimize)
import kirchfrac.minimizer as mz
from kirchfrac.problem import Indicator

from helpers import hat_field, make_problem


@pytest.fixture(scope="module")
def convex_result(convex_problem):
    return minimize(convex_problem, cfg=MinimizerConfig(grad_tol=1e-7), C_hat=1.0)


def test_convex_converges_to_zero(convex_result):
    r = convex_result
    assert r.converged and r.iterations <= 500
    assert r.energy <= 1e-8
    assert max(r.u.sup_norm(), r.v.sup_norm()) <= 1e-4
    assert r.residual_norm <= 1e-4
    assert r.bounded


def test_trace_energy_nonincreasing(convex_result):
    energies = [row.energy for row in convex_result.trace]
    assert all(b <= a for a, b in zip(energies, energies[1:]))


def test_certificate_dominates_gradient(convex_result):
    for row in convex_result.trace:
        assert row.certificate >= row.grad_norm
    assert convex_result.trace[0].certificate >= convex_result.trace[-1].certificate


def test_gradient_equals_residual_at_result(full_problem):
    r = minimize(full_problem, cfg=MinimizerConfig(max_iter=5), C_hat=1.0)
    gu, gv = gateaux_gradient(r.u, r.v, full_problem)
    ru, rv = assemble_weak_residual(r.u, r.v, full_problem)
    np.testing.assert_array_equal(gu, ru)
    np.testing.assert_array_equal(gv, rv)
    assert r.fd_check < 1e-4


def test_certificate_values():
    assert ekeland_certificate({"energy": 0.0, "lower_estimate": 0.0, "grad_norm": 0.0}) == 0.0
    assert ekeland_certificate({"energy": 1.0, "lower_estimate": -0.5, "grad_norm": 0.2}) == 1.5

    class S:
        energy, lower_estimate, grad_norm = 0.0, 0.0, 3.0

    assert ekeland_certificate(S()) == 3.0


def test_zero_state_of_convex_problem_is_certified(convex_problem, dom1):
    z = DiscreteField.zeros(dom1)
    r = minimize(convex_problem, init=(z, z), C_hat=1.0)
    assert r.converged and r.iterations == 0
    assert r.certificate == 0.0


def test_loaded_problem_decreases_and_stays_bounded(dom1, const_fields):
    prob = make_problem(dom1, const_fields, "full", "periodic", Indicator((0.25,), (0.75,), 1.0), 0.5,
                        kparams={"gamma": 0.9}, pparams={"alpha": 0.2})
    r = minimize(prob, cfg=MinimizerConfig(max_iter=300, grad_tol=1e-5), C_hat=1.0)
    assert r.status in ("converged", "energy_stall")
    assert r.grad_norm <= 1e-5
    assert r.energy < r.trace[0].energy
    assert r.bounded
    assert r.energy >= r.lower_estimate


def test_stall_raises_with_state(convex_problem, monkeypatch):
    real = mz.energy_arrays
    calls = {"n": 0}

    def spoiled(U, V, problem):
        calls["n"] += 1
        return real(U, V, problem) + (0.0 if calls["n"] == 1 else 1.0)

    monkeypatch.setattr(mz, "energy_arrays", spoiled)
    with pytest.raises(StallError) as info:
        minimize(convex_problem, cfg=MinimizerConfig(max_backtracks=5), C_hat=1.0)
    assert info.value.state["iteration"] == 0
    assert calls["n"] == 6


@pytest.mark.parametrize("kw", [{"max_iter": 0}, {"grad_tol": 0.0}, {"beta": 1.0}, {"sigma": 0.0},
                                {"initial_step": -1.0}])
def test_config_validation(kw):
    with pytest.raises(PreconditionError):
        MinimizerConfig(**kw)


def test_callback_sees_every_row(convex_problem):
    rows = []
    r = minimize(convex_problem, cfg=MinimizerConfig(max_iter=3), C_hat=1.0, callback=rows.append)
    assert rows == r.trace[:len(rows)] and len(rows) == 4


# ------------------------------------------------------------------ ray scan

def test_ray_scan_preconditions(convex_problem, dom1):
    z = DiscreteField.zeros(dom1)
    with pytest.raises(PreconditionError):
        coercivity_ray_scan(convex_problem, (z, z), [1, 2], C_hat=1.0)
    u = hat_field(dom1)
    with pytest.raises(PreconditionError):
        coercivity_ray_scan(convex_problem, (u, u), [1, 1, 2], C_hat=1.0)


def test_ray_scan_quadratic_at_p2(convex_problem, dom1):
    u = hat_field(dom1)
    rows = coercivity_ray_scan(convex_problem, (u, z := DiscreteField.zeros(dom1)), [1, 2, 4, 8], C_hat=1.0)
    base = rows[0]["energy"]
    for row in rows:
        assert row["energy"] == pytest.approx(row["t"] ** 2 * base, rel=1e-12)
        assert row["energy"] >= row["bound"]
    assert z.is_zero()


def test_ray_scan_bound_outgrows_first_value(dom1):
    fields = exponent_preset("sinusoidal", p=1.8, p_amplitude=0.1, s=0.4)
    prob = make_problem(dom1, fields, "affine", "periodic", 1.0, pparams={"alpha": 0.3})
    u = hat_field(dom1)
    rows = coercivity_ray_scan(prob, (u, u), [1, 2, 4, 8, 16], C_hat=1.0)
    assert all(r["energy"] >= r["bound"] for r in rows)
    assert rows[-1]["bound"] > 10 * abs(rows[0]["bound"])
