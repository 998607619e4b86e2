"""Self-convergence of the loaded 1D preset under uniform refinement.

Prints sup-norm differences between consecutive levels, compared at the
coarsest nodes, and their ratios.
"""
import argparse
import sys
import time
from pathlib import Path

import numpy as np

from kirchfrac import DiscreteField, MinimizerConfig, minimize
from kirchfrac.config import build_problem, load_config

ROOT = Path(__file__).resolve().parents[1]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=ROOT / "configs" / "loaded_1d.toml")
    ap.add_argument("--levels", type=int, nargs="+", default=[16, 32, 64, 128])
    args = ap.parse_args(argv)

    cfg = load_config(args.config)
    mcfg = MinimizerConfig(**{k: v for k, v in cfg.solver.items() if k != "init"})
    coarse = np.linspace(0.0, 1.0, args.levels[0] + 1)[:, None]
    sols = []
    start = time.perf_counter()
    for cells in args.levels:
        sec = dict(cfg.problem, domain=dict(cfg.problem["domain"], cells=[cells]))
        prob = build_problem(sec)
        z = DiscreteField.zeros(prob.domain)
        r = minimize(prob, init=(z, z), cfg=mcfg, C_hat=1.0, c1=0.0)
        sols.append(prob.domain.interpolation_matrix(coarse) @ r.u.flat)
        print(f"cells={cells:4d} status={r.status} iterations={r.iterations} "
              f"grad={r.grad_norm:.2e} max u={r.u.sup_norm():.6f}")
    diffs = [float(np.max(np.abs(a - b))) for a, b in zip(sols, sols[1:])]
    for k, d in enumerate(diffs):
        ratio = "" if k == 0 else f"  ratio {d / diffs[k - 1]:.3f}"
        print(f"|u_{args.levels[k]} - u_{args.levels[k + 1]}|_inf = {d:.3e}{ratio}")
    print(f"total {time.perf_counter() - start:.1f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
