"""Command line front end.

Boxes come from JSON files ({"p": ..., "rho0": [[[re,im],...],...], ...})
or from the golden-unit shorthand ``--golden M,q`` (M may be ``inf``).
Values print with 12 significant digits.  Exit codes: 0 success, 2 domain
error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import channels
from . import sweep as sweep_mod
from . import tasks
from .boxes import QuantumBox, box_from_json, golden_box
from .config import TOLS
from .divergences import chernoff, p_err, sd
from .exceptions import SolverError, SymdistError


def _fmt(v: float) -> str:
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, ".12g")


def _parse_golden(text: str) -> QuantumBox:
    try:
        m_str, q_str = text.split(",")
        m = math.inf if m_str.strip().lower() in ("inf", "infinity") \
            else float(m_str)
        return golden_box(m, float(q_str))
    except (ValueError, TypeError) as exc:
        raise ValueError(f"--golden expects 'M,q', got {text!r}") from exc


def _load_box(args, attr: str = "box") -> QuantumBox:
    golden = getattr(args, "golden", None)
    path = getattr(args, attr, None)
    if golden is not None:
        return _parse_golden(golden)
    if path is None:
        raise ValueError("provide a box JSON file or --golden M,q")
    return box_from_json(Path(path).read_text())


def _add_box_arg(p: argparse.ArgumentParser, name: str = "box",
                 required: bool = False):
    p.add_argument(name, nargs=None if required else "?",
                   help="box JSON file")
    p.add_argument("--golden", metavar="M,q",
                   help="golden-unit shorthand instead of a JSON file")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="symdist",
        description="Distinguishability-resource calculations on quantum boxes.")
    ap.add_argument("--seed", type=int, default=None,
                    help="seed for the random channel generators")
    ap.add_argument("--tol", type=float, default=None,
                    help="override the shared infinity-detection tolerance")
    sub = ap.add_subparsers(dest="command", required=True)

    for name, help_ in [("perr", "minimum discrimination error"),
                        ("sd", "symmetric distinguishability in bits"),
                        ("chernoff", "Chernoff divergence of the branch states"),
                        ("rates", "asymptotic distill/cost rates")]:
        p = sub.add_parser(name, help=help_)
        _add_box_arg(p)

    p = sub.add_parser("distill", help="one-shot distillable bits")
    _add_box_arg(p)
    p.add_argument("--regime", choices=(tasks.CPTPA, tasks.CDS),
                   default=tasks.CPTPA)
    p.add_argument("--eps", type=float, default=0.0,
                   help="allowed scaled-trace-distance error (0 = exact)")

    p = sub.add_parser("dilute", help="one-shot cost in bits")
    _add_box_arg(p)
    p.add_argument("--regime", choices=(tasks.CPTPA, tasks.CDS),
                   default=tasks.CPTPA)
    p.add_argument("--eps", type=float, default=0.0)

    p = sub.add_parser("convert", help="minimum conversion error source -> target")
    p.add_argument("source", help="source box JSON file")
    p.add_argument("target", help="target box JSON file")
    p.add_argument("--regime", choices=(tasks.CPTPA, tasks.CDS),
                   default=tasks.CDS)

    p = sub.add_parser("sweep", help="grid sweep reproducing the figure data")
    p.add_argument("--family", choices=sweep_mod.FAMILIES, required=True)
    p.add_argument("--start", type=float, default=0.0)
    p.add_argument("--stop", type=float, default=None,
                   help="default 1 for gad-gamma, pi/2 for the phi families")
    p.add_argument("--steps", type=int, default=41)
    p.add_argument("--quantities", default=None,
                   help="comma-separated subset of " + ",".join(sweep_mod.QUANTITIES))
    p.add_argument("--N", type=float, default=0.1)
    p.add_argument("--gamma", type=float, default=0.25)
    p.add_argument("--q", type=float, default=1 / 3)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--gamma1", type=float, default=0.5)
    p.add_argument("--N1", type=float, default=0.3)
    p.add_argument("--gamma2", type=float, default=0.25)
    p.add_argument("--N2", type=float, default=0.1)
    p.add_argument("--q-target", type=float, default=0.25)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True, help="CSV output path")
    p.add_argument("--svg", default=None, help="optional SVG output path")
    return ap


def _run(args) -> int:
    if args.tol is not None:
        TOLS.support = args.tol
        TOLS.infinite_perr = min(args.tol, TOLS.infinite_perr)
    if args.seed is not None:
        channels.seed_default_rng(args.seed)

    cmd = args.command
    if cmd == "perr":
        print(_fmt(p_err(_load_box(args))))
    elif cmd == "sd":
        print(_fmt(sd(_load_box(args))))
    elif cmd == "chernoff":
        b = _load_box(args)
        print(_fmt(chernoff(b.rho0, b.rho1)))
    elif cmd == "rates":
        r = tasks.asymptotic_rates(_load_box(args))
        print("distill", _fmt(r.distill))
        print("exact_cost", _fmt(r.exact_cost))
        print("approx_cost", _fmt(r.approx_cost))
    elif cmd == "distill":
        b = _load_box(args)
        res = tasks.distill_exact(b, args.regime) if args.eps == 0 \
            else tasks.distill_approx(b, args.eps, args.regime)
        print(_fmt(res.value))
    elif cmd == "dilute":
        b = _load_box(args)
        res = tasks.cost_exact(b, args.regime) if args.eps == 0 \
            else tasks.cost_approx(b, args.eps, args.regime)
        print(_fmt(res.value))
    elif cmd == "convert":
        source = box_from_json(Path(args.source).read_text())
        target = box_from_json(Path(args.target).read_text())
        print(_fmt(tasks.min_conversion_error(source, target, args.regime).value))
    elif cmd == "sweep":
        stop = args.stop
        if stop is None:
            stop = 1.0 if args.family == "gad-gamma" else math.pi / 2
        quantities = tuple(args.quantities.split(",")) if args.quantities else (
            ("min_conversion_error",) if args.family == "conversion-phi"
            else ("xi_min", "xi_max", "sd", "xi_max_star"))
        spec = sweep_mod.SweepSpec(
            family=args.family, start=args.start, stop=stop, steps=args.steps,
            quantities=quantities, N=args.N, gamma=args.gamma, q=args.q,
            eps=args.eps, gamma1=args.gamma1, N1=args.N1, gamma2=args.gamma2,
            N2=args.N2, q_target=args.q_target)
        result = sweep_mod.run_sweep(spec, jobs=args.jobs)
        Path(args.out).write_text(result.to_csv())
        if result.failures:
            sidecar = Path(args.out).with_suffix(".failures.json")
            sidecar.write_text(json.dumps(result.failures, indent=2))
            print(f"wrote {args.out} ({len(result.failures)} failed cells, "
                  f"see {sidecar})")
        else:
            print(f"wrote {args.out}")
        if args.svg:
            Path(args.svg).write_text(sweep_mod.to_svg(result))
            print(f"wrote {args.svg}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3
    except (SymdistError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
