"""Experiment runner: ``kirchfrac --config run.toml [--task T] [--seed N] [--threads N] [--out DIR]``.

Exit codes: 0 success, 2 configuration error, 3 validation or property
failure, 4 solver stall, 1 anything else.  Every exit prints one JSON record
with status, task and wall time on stdout.  Artifacts in ``--out`` never
contain timings, so reruns with the same inputs are byte-identical.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import io
from .config import ConfigError, RunConfig, build_problem, load_config
from .errors import DomainError, EvaluationError, PreconditionError, StallError
from .exponents import validate_exponents
from .grid import DiscreteField, random_field
from .minimizer import coercivity_ray_scan, minimize, problem_constants
from .operator import assemble_weak_residual
from .problem import check_M_condition
from .properties import report_properties
from .spaces import modular_report

EXIT_OK, EXIT_ERROR, EXIT_CONFIG, EXIT_VALIDATION, EXIT_STALL = 0, 1, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser():
    ap = _Parser(prog="kirchfrac", description=__doc__.splitlines()[0])
    ap.add_argument("--config", required=True, help="TOML run configuration")
    ap.add_argument("--task", choices=("validate", "norms", "properties", "solve", "coercivity-scan"))
    ap.add_argument("--seed", type=int)
    ap.add_argument("--threads", type=int)
    ap.add_argument("--out", help="output directory")
    return ap


class TaskFailure(Exception):
    def __init__(self, code, message, payload=None):
        super().__init__(message)
        self.code = code
        self.payload = payload or {}


# ------------------------------------------------------------------ tasks

def task_validate(cfg: RunConfig, out: Path):
    problem = build_problem(cfg, validate=False)
    report = validate_exponents(problem.fields, problem.domain)
    t = np.exp(np.linspace(np.log(1e-4), np.log(1e2), 200))
    mcond = check_M_condition(problem.kirchhoff, t)
    rng = np.random.default_rng(cfg.seed)
    pot = problem.potential
    gamma_ok = problem.kirchhoff.gamma > 1.0 / report.bounds.p_min
    sources = problem.check_sources() if report.passed else {}
    summary = {
        "exponents": report.to_dict(),
        "M_condition": vars(mcond),
        "gamma_above_inverse_p_min": bool(gamma_ok),
        "sources": sources,
        "potential": {"periodicity_error": pot.check_periodicity(rng),
                      "derivative_error": pot.check_derivatives(rng),
                      "c1": pot.sup_bound()},
    }
    passed = (report.passed and mcond.passed and gamma_ok and all(sources.values())
              and summary["potential"]["periodicity_error"] <= 1e-10)
    summary["passed"] = bool(passed)
    io.write_json(out / "summary.json", summary)
    if not passed:
        raise TaskFailure(EXIT_VALIDATION, "validation failed", {"summary": "summary.json"})
    return {"passed": True}


def task_norms(cfg: RunConfig, out: Path):
    problem = build_problem(cfg)
    rng = np.random.default_rng(cfg.seed)
    n = int(cfg.norms.get("fields", 5))
    tol = cfg.norms.get("tolerance")
    records = []
    for k in range(n):
        u = random_field(problem.domain, rng) * float(np.exp(rng.uniform(np.log(0.3), np.log(3.0))))
        rec = modular_report(u, problem.fields, rule=problem.rule, tol=tol).to_record()
        rec["field"] = k
        records.append(rec)
    io.write_json(out / "summary.json", {"records": records})
    return {"fields": n}


def task_properties(cfg: RunConfig, out: Path):
    problem = build_problem(cfg)
    trials = int(cfg.properties.get("trials", 100))
    report = report_properties(problem, seed=cfg.seed, trials=trials,
                               embedding_samples=int(cfg.properties.get("embedding_samples", 200)))
    for fail in report["failures"]:
        if fail["pair"] is not None:
            u, v = fail["pair"]
            names = (f"failure_{fail['trial']}_u.csv", f"failure_{fail['trial']}_v.csv")
            io.write_field(out / names[0], u)
            io.write_field(out / names[1], v)
            fail["pair"] = list(names)
    io.write_json(out / "properties.json", report)
    summary = {k: report[k] for k in ("seed", "trials", "passed", "total_failures", "constants")}
    io.write_json(out / "summary.json", summary)
    if not report["passed"]:
        raise TaskFailure(EXIT_VALIDATION, "property failures", {"total_failures": report["total_failures"]})
    return {"trials": trials}


def _initial_pair(cfg, problem):
    init = cfg.solver.get("init")
    if init == "zero":
        z = DiscreteField.zeros(problem.domain)
        return z, z
    return None


def _minimizer_config(cfg: RunConfig):
    solver = {k: v for k, v in cfg.solver.items() if k != "init"}
    return RunConfig(cfg.problem, cfg.task, cfg.seed, cfg.threads, cfg.out, solver).minimizer_config()


def task_solve(cfg: RunConfig, out: Path):
    problem = build_problem(cfg)
    mcfg = _minimizer_config(cfg)
    try:
        result = minimize(problem, _initial_pair(cfg, problem), mcfg)
    except StallError as exc:
        io.write_json(out / "summary.json", {"status": "stall", "state": exc.state})
        raise TaskFailure(EXIT_STALL, str(exc), {"state": exc.state}) from exc
    io.write_trace_csv(out / "trace.csv", result.trace)
    io.write_plotdata(out / "plotdata.dat", result.trace)
    io.write_field(out / "fields_u.csv", result.u)
    io.write_field(out / "fields_v.csv", result.v)
    r_u, r_v = assemble_weak_residual(result.u, result.v, problem)
    io.write_residual_csv(out / "residual.csv", r_u, r_v)
    io.write_json(out / "summary.json", result.summary())
    return {"solver_status": result.status, "energy": result.energy, "grad_norm": result.grad_norm}


def task_scan(cfg: RunConfig, out: Path):
    problem = build_problem(cfg)
    scales = cfg.scan.get("scales", [1, 2, 4, 8, 16])
    rng = np.random.default_rng(cfg.seed)
    dom = problem.domain
    if cfg.scan.get("direction", "tent") == "tent":
        lo, hi = np.array(dom.lower), np.array(dom.upper)
        u_hat = DiscreteField.from_function(
            dom, lambda x: np.prod(np.clip(1 - np.abs(2 * (x - lo) / (hi - lo) - 1), 0, None), axis=-1))
    else:
        u_hat = random_field(dom, rng)
    v_hat = u_hat if cfg.scan.get("both", False) else DiscreteField.zeros(dom)
    mcfg = _minimizer_config(cfg)
    _, C_hat, c1 = problem_constants(problem, mcfg)
    rows = coercivity_ray_scan(problem, (u_hat, v_hat), scales, C_hat, c1)
    chain = all(r["energy"] >= r["bound"] for r in rows)
    summary = {"rows": rows, "chain_holds": chain, "C_hat": C_hat, "c1": c1,
               "bound_growth": rows[-1]["bound"] / abs(rows[0]["bound"]) if rows[0]["bound"] else None}
    io.write_json(out / "summary.json", summary)
    with open(out / "plotdata.dat", "w") as fh:
        fh.write("# t energy bound\n")
        for r in rows:
            fh.write(f"{r['t']!r} {r['energy']!r} {r['bound']!r}\n")
    if not chain:
        raise TaskFailure(EXIT_VALIDATION, "coercivity chain violated")
    return {"chain_holds": chain}


TASKS = {"validate": task_validate, "norms": task_norms, "properties": task_properties,
         "solve": task_solve, "coercivity-scan": task_scan}


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    start = time.perf_counter()
    record = {"status": "error", "task": None}
    code = EXIT_ERROR
    try:
        args = build_parser().parse_args(argv)
        cfg = load_config(args.config, {"task": args.task, "seed": args.seed,
                                        "threads": args.threads, "out": args.out})
        record["task"] = cfg.task
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        with threadpool_limits(cfg.threads):
            record.update(TASKS[cfg.task](cfg, out))
        record["status"] = "ok"
        code = EXIT_OK
    except ConfigError as exc:
        record.update(error="config", message=str(exc))
        code = EXIT_CONFIG
    except (PreconditionError, DomainError, EvaluationError) as exc:
        record.update(error="validation", message=str(exc))
        code = EXIT_VALIDATION
    except TaskFailure as exc:
        record.update(error="task", message=str(exc), **exc.payload)
        code = exc.code
    except Exception as exc:  # noqa: BLE001 - every exit path reports a record
        record.update(error=type(exc).__name__, message=str(exc))
        code = EXIT_ERROR
    record["exit_code"] = code
    record["wall_time"] = time.perf_counter() - start
    stdout.write(json.dumps(io.jsonable(record), sort_keys=True) + "\n")
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
