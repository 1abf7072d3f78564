"""Shared numerical tolerances.

All divergences use a single infinity convention: a quantity is infinite when
its defining feasibility condition fails at these thresholds.  The CLI can
override ``TOLS`` fields via ``--tol``.
"""

from dataclasses import dataclass


@dataclass
class Tolerances:
    asymmetry: float = 1e-8        # hard error above this; symmetrized below
    psd_clamp: float = 1e-10       # eigenvalue clamp for PSD spectral calculus
    density: float = 1e-9          # state validation (PSD slack, trace drift)
    tp_sum: float = 1e-8           # trace-preservation of channel branch sums
    support: float = 1e-9          # support-containment test for D_max
    infinite_perr: float = 1e-12   # p_err at or below this means infinite resource
    box_equality: float = 1e-10    # entrywise c-q equality test for D'
    dimension_cap: int = 512       # largest tensor-power dimension


TOLS = Tolerances()
