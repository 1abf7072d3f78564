#!/usr/bin/env python3
"""Regenerate the four damping-channel figure datasets (CSV + SVG).

Figure 1: exact one-shot distillable bits / cost under both regimes as a
function of the damping parameter.  Figure 2: the same under a rotation of
the second branch state.  Figure 3: approximate distillation at eps = 0.1
next to the exact curves.  Figure 4: minimum conversion error into a
rotated target family.

Usage: python scripts/reproduce_figures.py [outdir] [--steps N] [--jobs J]
"""

import argparse
import math
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from symdist.sweep import SweepSpec, run_sweep, to_svg  # noqa: E402

FIGURES = {
    "figure1": dict(family="gad-gamma", start=0.0, stop=1.0, N=0.1, q=1 / 3,
                    quantities=("xi_min", "xi_max", "sd", "xi_max_star")),
    "figure2": dict(family="gad-phi", start=0.0, stop=math.pi / 2,
                    gamma=0.25, N=0.1, q=1 / 3,
                    quantities=("xi_min", "xi_max", "sd", "xi_max_star")),
    "figure3": dict(family="gad-gamma", start=0.0, stop=1.0, N=0.1, q=1 / 3,
                    eps=0.1,
                    quantities=("xi_min", "sd", "distill_approx_cptpA",
                                "distill_approx_cds")),
    "figure4": dict(family="conversion-phi", start=0.0, stop=math.pi / 2,
                    q=1 / 3, gamma1=0.5, N1=0.3, gamma2=0.25, N2=0.1,
                    q_target=0.25, quantities=("min_conversion_error",)),
}


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("outdir", nargs="?", default="figures")
    ap.add_argument("--steps", type=int, default=41)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--only", choices=sorted(FIGURES), default=None)
    args = ap.parse_args()
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    names = [args.only] if args.only else sorted(FIGURES)
    for name in names:
        spec = SweepSpec(steps=args.steps, **FIGURES[name])
        t0 = time.time()
        result = run_sweep(spec, jobs=args.jobs)
        (outdir / f"{name}.csv").write_text(result.to_csv())
        (outdir / f"{name}.svg").write_text(to_svg(result))
        note = f" ({len(result.failures)} failed cells)" if result.failures else ""
        print(f"{name}: {spec.steps} points in {time.time() - t0:.1f}s{note}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
