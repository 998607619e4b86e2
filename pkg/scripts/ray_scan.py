"""Energy against the coercivity lower bound along rays t (u, v)."""
import argparse
import sys
from pathlib import Path

import numpy as np

from kirchfrac import DiscreteField, coercivity_ray_scan
from kirchfrac.config import build_problem, load_config
from kirchfrac.minimizer import problem_constants

ROOT = Path(__file__).resolve().parents[1]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=ROOT / "configs" / "scan.toml")
    ap.add_argument("--scales", type=float, nargs="+", default=[1, 2, 4, 8, 16, 32, 64])
    args = ap.parse_args(argv)

    cfg = load_config(args.config)
    prob = build_problem(cfg)
    dom = prob.domain
    lo, hi = np.array(dom.lower), np.array(dom.upper)
    tent = DiscreteField.from_function(
        dom, lambda x: np.prod(np.clip(1 - np.abs(2 * (x - lo) / (hi - lo) - 1), 0, None), axis=-1))
    _, C_hat, c1 = problem_constants(prob, cfg.minimizer_config())
    print(f"C_hat={C_hat:.4f} c1={c1:.4f}")
    for label, direction in (("u only", (tent, DiscreteField.zeros(dom))), ("u = v", (tent, tent))):
        print(f"# {label}\n{'t':>8} {'energy':>14} {'bound':>14} {'gap':>12}")
        for r in coercivity_ray_scan(prob, direction, args.scales, C_hat, c1):
            print(f"{r['t']:8.2f} {r['energy']:14.6g} {r['bound']:14.6g} {r['energy'] - r['bound']:12.4g}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
