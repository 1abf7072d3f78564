"""Parameter sweeps over damping-channel box families, CSV and SVG output.

Three families: ``gad-gamma`` sweeps the damping parameter for a fixed
thermal noise and prior; ``gad-phi`` rotates the second branch state by an
angle; ``conversion-phi`` sweeps the rotation angle of a conversion target.
Cell values are floats, with inf serialized as the literal ``inf`` and
solver failures recorded as ``nan`` plus a diagnostics sidecar entry.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import tasks
from .boxes import QuantumBox
from .channels import gad_channel
from .divergences import sd, xi_max, xi_max_star, xi_min
from .exceptions import SymdistError

KET0D = np.diag([1.0, 0.0]).astype(complex)
KET1D = np.diag([0.0, 1.0]).astype(complex)

FAMILIES = ("gad-gamma", "gad-phi", "conversion-phi")
QUANTITIES = ("xi_min", "xi_max", "sd", "xi_max_star",
              "distill_approx_cptpA", "distill_approx_cds",
              "min_conversion_error")


@dataclass
class SweepSpec:
    family: str
    start: float
    stop: float
    steps: int = 41
    quantities: tuple[str, ...] = ("xi_min", "xi_max", "sd", "xi_max_star")
    # fixed parameters; which ones matter depends on the family
    N: float = 0.1
    gamma: float = 0.25
    q: float = 1 / 3
    eps: float = 0.1
    gamma1: float = 0.5
    N1: float = 0.3
    gamma2: float = 0.25
    N2: float = 0.1
    q_target: float = 0.25

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if self.steps < 2:
            raise ValueError("grid needs at least 2 steps")
        unknown = [q for q in self.quantities if q not in QUANTITIES]
        if unknown:
            raise ValueError(f"unknown quantities {unknown}; choose from {QUANTITIES}")
        if "min_conversion_error" in self.quantities \
                and self.family != "conversion-phi":
            raise ValueError("min_conversion_error needs the conversion-phi family")
        for name in ("N", "gamma", "gamma1", "N1", "gamma2", "N2"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} = {v} outside [0, 1]")
        for name in ("q", "q_target"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} = {v} outside (0, 1)")
        if self.eps < 0:
            raise ValueError("eps must be nonnegative")

    def grid(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)

    def parameter_name(self) -> str:
        return "gamma" if self.family == "gad-gamma" else "phi"


@dataclass
class SweepResult:
    header: list[str]
    rows: list[list[float]]
    failures: dict = field(default_factory=dict)

    def column(self, name: str) -> list[float]:
        i = self.header.index(name)
        return [row[i] for row in self.rows]

    def to_csv(self) -> str:
        lines = [",".join(self.header)]
        for row in self.rows:
            lines.append(",".join(_serialize(v) for v in row))
        return "\n".join(lines) + "\n"


def _serialize(v: float) -> str:
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, ".17g")


def parse_csv(text: str) -> SweepResult:
    lines = [ln for ln in text.split("\n") if ln]
    header = lines[0].split(",")
    rows = [[float(tok) for tok in ln.split(",")] for ln in lines[1:]]
    return SweepResult(header, rows)


def _rotated(state: np.ndarray, phi: float) -> np.ndarray:
    u = math.cos(phi) * np.eye(2) + 1j * math.sin(phi) * np.array([[0, 1], [1, 0]])
    return u @ state @ u.conj().T


def _boxes_at(spec: SweepSpec, x: float):
    """Source box (and target box for conversion families) at grid point x."""
    if spec.family == "gad-gamma":
        ch = gad_channel(x, spec.N)
        return QuantumBox(spec.q, ch(KET0D), ch(KET1D)), None
    if spec.family == "gad-phi":
        ch = gad_channel(spec.gamma, spec.N)
        return QuantumBox(spec.q, ch(KET0D), _rotated(ch(KET1D), x)), None
    ch1 = gad_channel(spec.gamma1, spec.N1)
    ch2 = gad_channel(spec.gamma2, spec.N2)
    source = QuantumBox(spec.q, ch1(KET0D), ch1(KET1D))
    target = QuantumBox(spec.q_target, ch2(KET0D), _rotated(ch2(KET1D), x))
    return source, target


def _evaluate(spec: SweepSpec, x: float) -> tuple[list[float], dict]:
    box, target = _boxes_at(spec, x)
    values: list[float] = [float(x)]
    errors: dict[str, str] = {}
    for name in spec.quantities:
        try:
            if name == "xi_min":
                v = xi_min(box.rho0, box.rho1)
            elif name == "xi_max":
                v = xi_max(box.rho0, box.rho1)
            elif name == "sd":
                v = sd(box)
            elif name == "xi_max_star":
                v = xi_max_star(box)
            elif name == "distill_approx_cptpA":
                v = tasks.distill_approx(box, spec.eps, tasks.CPTPA).value
            elif name == "distill_approx_cds":
                v = tasks.distill_approx(box, spec.eps, tasks.CDS).value
            else:  # min_conversion_error; family validated at spec construction
                v = tasks.min_conversion_error(box, target, tasks.CDS).value
        except SymdistError as exc:
            v = math.nan
            errors[name] = str(exc)
        values.append(float(v))
    return values, errors


def run_sweep(spec: SweepSpec, jobs: int = 1) -> SweepResult:
    """Evaluate the grid; rows are ordered by grid index regardless of the
    worker pool's completion order."""
    header = [spec.parameter_name()] + list(spec.quantities)
    points = [float(x) for x in spec.grid()]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_evaluate, [spec] * len(points), points))
    else:
        outcomes = [_evaluate(spec, x) for x in points]
    rows = [vals for vals, _ in outcomes]
    failures = {i: errs for i, (_, errs) in enumerate(outcomes) if errs}
    return SweepResult(header, rows, failures)


# --- minimal SVG line plot (no plotting dependency) ---------------------------

def to_svg(result: SweepResult, width: int = 640, height: int = 440) -> str:
    margin = 50
    xs = result.column(result.header[0])
    series = result.header[1:]
    finite = [v for name in series for v in result.column(name)
              if math.isfinite(v)]
    if not finite:
        finite = [0.0, 1.0]
    ymin, ymax = min(finite + [0.0]), max(finite)
    if ymax - ymin < 1e-12:
        ymax = ymin + 1.0
    xmin, xmax = min(xs), max(xs)

    def px(x):
        return margin + (x - xmin) / (xmax - xmin) * (width - 2 * margin)

    def py(y):
        return height - margin - (y - ymin) / (ymax - ymin) * (height - 2 * margin)

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
             f'height="{height}" viewBox="0 0 {width} {height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>',
             f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
             f'y2="{height - margin}" stroke="black"/>',
             f'<line x1="{margin}" y1="{margin}" x2="{margin}" '
             f'y2="{height - margin}" stroke="black"/>',
             f'<text x="{width // 2}" y="{height - 12}" font-size="12" '
             f'text-anchor="middle">{result.header[0]}</text>']
    for k, name in enumerate(series):
        ys = result.column(name)
        pts = [(px(x), py(y)) for x, y in zip(xs, ys) if math.isfinite(y)]
        if not pts:
            continue
        path = " ".join(f"{x:.1f},{y:.1f}" for x, y in pts)
        color = colors[k % len(colors)]
        parts.append(f'<polyline points="{path}" fill="none" '
                     f'stroke="{color}" stroke-width="1.5"/>')
        parts.append(f'<text x="{width - margin + 4}" y="{margin + 14 * k}" '
                     f'font-size="11" fill="{color}">{name}</text>')
    parts.append("</svg>")
    return "\n".join(parts)
