"""Steepest descent with Armijo backtracking and Ekeland-style certificates."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .energy import coercivity_constants, energy_arrays
from .errors import PreconditionError, StallError
from .grid import DiscreteField
from .operator import residual_vectors
from .spaces import estimate_embedding_constant, gagliardo_norm


@dataclass(frozen=True)
class MinimizerConfig:
    max_iter: int = 500
    grad_tol: float = 1e-6
    stall_tol: float = 1e-15
    initial_step: float = 1.0
    beta: float = 0.5
    sigma: float = 1e-4
    max_backtracks: int = 60
    origin_perturbation: float = 0.1
    seed: int = 0
    norm_every: int = 1
    embedding_samples: int = 100
    embedding_safety: float = 1.05
    fd_directions: int = 3

    def __post_init__(self):
        if self.max_iter < 1:
            raise PreconditionError("max_iter must be positive")
        for name in ("grad_tol", "stall_tol", "initial_step", "origin_perturbation"):
            if not getattr(self, name) > 0:
                raise PreconditionError(f"{name} must be positive")
        for name in ("beta", "sigma"):
            if not 0 < getattr(self, name) < 1:
                raise PreconditionError(f"{name} must lie in (0, 1)")


@dataclass
class TraceRow:
    iteration: int
    energy: float
    grad_norm: float
    step: float
    certificate: float
    norm_u: float = float("nan")
    norm_v: float = float("nan")


@dataclass
class MinimizerResult:
    u: DiscreteField
    v: DiscreteField
    energy: float
    grad_norm: float
    certificate: float
    residual_norm: float
    lower_estimate: float
    iterations: int
    status: str
    trace: list = field(default_factory=list)
    radii: tuple = (float("inf"), float("inf"))
    bounded: bool = True
    fd_check: float = float("nan")
    constants: dict = field(default_factory=dict)

    @property
    def converged(self):
        return self.status == "converged"

    def summary(self):
        return {
            "status": self.status,
            "iterations": self.iterations,
            "energy": self.energy,
            "grad_norm": self.grad_norm,
            "certificate": self.certificate,
            "residual_norm": self.residual_norm,
            "lower_estimate": self.lower_estimate,
            "radii": list(self.radii),
            "bounded": self.bounded,
            "max_norm_u": max((r.norm_u for r in self.trace if r.norm_u == r.norm_u), default=0.0),
            "max_norm_v": max((r.norm_v for r in self.trace if r.norm_v == r.norm_v), default=0.0),
            "fd_check": self.fd_check,
            "field_sup_norm": max(self.u.sup_norm(), self.v.sup_norm()),
            "constants": self.constants,
        }


def ekeland_certificate(state) -> float:
    """max(energy - lower estimate, gradient sup-norm) for anything carrying those three values."""
    get = state.get if isinstance(state, dict) else (lambda k: getattr(state, k))
    return float(max(get("energy") - get("lower_estimate"), get("grad_norm"), 0.0))


@lru_cache(maxsize=16)
def _embedding_constant(problem, n_samples, safety, seed):
    return estimate_embedding_constant(problem.domain, problem.fields, q=problem.fields.pbar,
                                       n_samples=n_samples, rng=np.random.default_rng(seed),
                                       safety=safety, rule=problem.rule)


def problem_constants(problem, cfg=None, C_hat=None, c1=None):
    cfg = cfg or MinimizerConfig()
    if C_hat is None:
        C_hat = _embedding_constant(problem, cfg.embedding_samples, cfg.embedding_safety, cfg.seed)
    if c1 is None:
        c1 = problem.potential.sup_bound()
    return coercivity_constants(problem, C_hat, c1), C_hat, c1


def _perturb_if_singular(x, problem, cfg, rng):
    """Move components off delta = 0 when the Kirchhoff coefficient blows up there."""
    rule = problem.rule
    out = []
    for which, vec in ((1, x[0]), (2, x[1])):
        with np.errstate(divide="ignore", invalid="ignore"):
            singular = not np.isfinite(np.asarray(problem.kirchhoff.M(which)(np.float64(0.0)), float))
        if singular and not np.any(rule.differences(vec)):
            vec = rng.uniform(-cfg.origin_perturbation, cfg.origin_perturbation, vec.size)
        out.append(vec)
    return out


def _fd_consistency(U, V, gu, gv, problem, rng, n_dirs, eps=1e-5):
    """Largest mismatch of directional central differences vs g.d, relative to |g| |d|."""
    worst = 0.0
    Ul, Vl = U.astype(np.longdouble), V.astype(np.longdouble)
    for _ in range(n_dirs):
        du = rng.standard_normal(U.size)
        dv = rng.standard_normal(V.size)
        exact = float(gu @ du + gv @ dv)
        e_plus = energy_arrays(Ul + eps * du, Vl + eps * dv, problem)
        e_minus = energy_arrays(Ul - eps * du, Vl - eps * dv, problem)
        fd = float((e_plus - e_minus) / (2 * eps))
        scale = max(np.sqrt(gu @ gu + gv @ gv) * np.sqrt(du @ du + dv @ dv), 1e-12)
        worst = max(worst, abs(fd - exact) / scale)
    return worst


def minimize(problem, init=None, cfg=None, C_hat=None, c1=None, callback=None) -> MinimizerResult:
    """Minimize the energy over free nodal values of (u, v).

    Steepest descent; the trial step is Barzilai-Borwein (after the first
    iteration) and is backtracked until the Armijo condition
    I(x - t g) <= I(x) - sigma t |g|^2 holds.  Raises :class:`StallError`
    after ``max_backtracks`` failed reductions.
    """
    cfg = cfg or MinimizerConfig()
    rng = np.random.default_rng(cfg.seed)
    dom = problem.domain
    if init is None:
        init = tuple(DiscreteField.from_free(dom, rng.uniform(-0.1, 0.1, dom.n_free)) for _ in range(2))
    U, V = _perturb_if_singular([init[0].free.astype(float), init[1].free.astype(float)], problem, cfg, rng)
    const, C_hat, c1 = problem_constants(problem, cfg, C_hat, c1)
    lower = const.lower_estimate()

    def evaluate(U, V):
        gu, gv, _ = residual_vectors(U, V, problem, origin="limit")
        return gu, gv

    E = float(energy_arrays(U, V, problem))
    gu, gv = evaluate(U, V)
    E0 = E
    radii = const.radii(E0)
    trace = []
    step = cfg.initial_step
    prev = None
    status = "max_iter"
    it = 0
    while True:
        gnorm = float(max(np.max(np.abs(gu), initial=0.0), np.max(np.abs(gv), initial=0.0)))
        cert = ekeland_certificate({"energy": E, "lower_estimate": lower, "grad_norm": gnorm})
        row = TraceRow(it, E, gnorm, step if it else 0.0, cert)
        if it % cfg.norm_every == 0:
            row.norm_u = gagliardo_norm(DiscreteField.from_free(dom, U), problem.fields, rule=problem.rule)
            row.norm_v = gagliardo_norm(DiscreteField.from_free(dom, V), problem.fields, rule=problem.rule)
        trace.append(row)
        if callback is not None:
            callback(row)
        if gnorm <= cfg.grad_tol:
            status = "converged"
            break
        if it >= cfg.max_iter:
            break
        g = np.concatenate([gu, gv])
        x = np.concatenate([U, V])
        gg = float(g @ g)
        if prev is not None:
            sx, sg = x - prev[0], g - prev[1]
            curv = float(sx @ sg)
            if curv > 0:
                step = float(sx @ sx) / curv
            else:
                step = cfg.initial_step
        t = step
        for _ in range(cfg.max_backtracks):
            Xn = x - t * g
            Un, Vn = Xn[:U.size], Xn[U.size:]
            En = float(energy_arrays(Un, Vn, problem))
            if En <= E - cfg.sigma * t * gg:
                break
            t *= cfg.beta
        else:
            raise StallError("line search failed to decrease the energy",
                             state={"iteration": it, "energy": E, "grad_norm": gnorm, "last_step": t})
        assert En <= E - cfg.sigma * t * gg
        prev = (x, g)
        dE = E - En
        U, V, E, step = Un, Vn, En, t
        gu, gv = evaluate(U, V)
        it += 1
        if dE <= cfg.stall_tol * max(1.0, abs(E)):
            gnorm = float(max(np.max(np.abs(gu), initial=0.0), np.max(np.abs(gv), initial=0.0)))
            if gnorm > cfg.grad_tol:
                trace.append(TraceRow(it, E, gnorm, t, ekeland_certificate(
                    {"energy": E, "lower_estimate": lower, "grad_norm": gnorm})))
                status = "energy_stall"
                break

    u = DiscreteField.from_free(dom, U)
    v = DiscreteField.from_free(dom, V)
    ru, rv, _ = residual_vectors(U, V, problem, origin="limit")
    res = float(max(np.max(np.abs(ru), initial=0.0), np.max(np.abs(rv), initial=0.0)))
    last = trace[-1]
    nus = [r.norm_u for r in trace if r.norm_u == r.norm_u]
    nvs = [r.norm_v for r in trace if r.norm_v == r.norm_v]
    bounded = all(n <= radii[0] * (1 + 1e-9) for n in nus) and all(n <= radii[1] * (1 + 1e-9) for n in nvs)
    fd = _fd_consistency(U, V, gu, gv, problem, np.random.default_rng(cfg.seed + 1), cfg.fd_directions)
    consts = const.to_dict()
    consts.update(C_hat=float(C_hat), c1=float(c1))
    return MinimizerResult(u, v, E, last.grad_norm, last.certificate, res, lower, it, status,
                           trace, radii, bounded, fd, consts)


def coercivity_ray_scan(problem, direction, scales, C_hat=None, c1=None, cfg=None):
    """Rows (t, I(t u, t v), bound(t u, t v)) along a ray."""
    u_hat, v_hat = direction
    scales = [float(t) for t in scales]
    if u_hat.is_zero() and v_hat.is_zero():
        raise PreconditionError("ray direction must be nonzero")
    if any(b <= a for a, b in zip(scales, scales[1:])):
        raise PreconditionError("scales must be increasing")
    const, C_hat, c1 = problem_constants(problem, cfg, C_hat, c1)
    rule = problem.rule
    nu = gagliardo_norm(u_hat, problem.fields, rule=rule)
    nv = gagliardo_norm(v_hat, problem.fields, rule=rule)
    rows = []
    for t in scales:
        E = float(energy_arrays(t * u_hat.free, t * v_hat.free, problem))
        # the Luxemburg norm is absolutely homogeneous
        rows.append({"t": t, "energy": E, "bound": const.bound(t * nu, t * nv)})
    return rows
