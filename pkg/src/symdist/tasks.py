"""Operational tasks: distillation, dilution, conversion, asymptotic rates.

Every one-shot task returns a :class:`TaskResult` carrying the value in
SD-bits (base-2), a channel witness where the protocol is constructive,
and solver diagnostics.  Regimes: ``"cptpA"`` restricts to channels on the
quantum register (prior fixed), ``"cds"`` allows classical label flips.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import channels, linalg, model
from .boxes import KET0, KET1, QuantumBox, golden_box
from .channels import CdsMap, CpMap, measure_prepare
from .config import TOLS
from .divergences import (chernoff, p_err, q_max, q_max_star, q_min, sd,
                          thompson, xi_max, xi_max_star, xi_min)
from .exceptions import ParameterRangeError, SolverError
from .model import (Model, channel_output, inner, kron_left, kron_right,
                    ptrace_out, times, trace)
from .sdp import SdpStatus, SolverOptions

Array = np.ndarray
INF = math.inf

CPTPA = "cptpA"
CDS = "cds"


def _check_regime(regime: str) -> str:
    if regime not in (CPTPA, CDS):
        raise ParameterRangeError(f"regime must be {CPTPA!r} or {CDS!r}")
    return regime


@dataclass(eq=False)
class TaskResult:
    value: float
    witness: CdsMap | CpMap | None = None
    diagnostics: dict = field(default_factory=dict)


def _orthogonal_states(rho0: Array, rho1: Array) -> bool:
    proj = linalg.support_projector(rho0)
    return float(np.trace(proj @ rho1).real) <= TOLS.support


# --- exact distillation -------------------------------------------------------

def distill_exact(b: QuantumBox, regime: str) -> TaskResult:
    _check_regime(regime)
    if regime == CPTPA:
        if b.p <= 0.0 or b.p >= 1.0:
            return TaskResult(INF, None, {"reason": "singular prior"})
        qm = q_min(b.rho0, b.rho1)
        if _orthogonal_states(b.rho0, b.rho1) or qm.value <= 0.0:
            value = INF
        else:
            value = max(-math.log2(qm.value), 0.0)
        witness = channels.distill_channel_cptpA(b)
        return TaskResult(value, witness, {"q_min": qm.value})
    value = sd(b)
    if math.isinf(value):
        witness = channels.inf_to_any(b, golden_box(INF, 0.5))
    else:
        witness = channels.distill_channel_cds(b)
    return TaskResult(value, witness, {"p_err": p_err(b)})


def cost_exact(b: QuantumBox, regime: str) -> TaskResult:
    _check_regime(regime)
    if regime == CPTPA:
        if b.p <= 0.0 or b.p >= 1.0:
            return TaskResult(0.0, None, {"reason": "singular prior"})
        big_m = q_max(b.rho0, b.rho1)
        value = xi_max(b.rho0, b.rho1)
        if math.isinf(big_m):
            return TaskResult(INF, None, {})
        return TaskResult(value, channels.dilute_channel_cptpA(b, big_m),
                          {"q_max": big_m})
    big_m = q_max_star(b)
    value = xi_max_star(b)
    if math.isinf(big_m):
        return TaskResult(INF, None, {})
    return TaskResult(value, channels.dilute_channel_cds(b, big_m),
                      {"q_max_star": big_m})


# --- minimum conversion error ---------------------------------------------------

def _psd_floor(m: Array) -> Array:
    w, v = np.linalg.eigh(linalg.hermitian(m))
    return (v * np.maximum(w, 0.0)) @ v.conj().T


def _normalized_chois(chois: list[Array], d_in: int, d_out: int) -> list[Array]:
    """Rescale branch Chois so their sum is exactly trace preserving."""
    chois = [_psd_floor(c) for c in chois]
    total = linalg.ptrace(sum(chois), (d_in, d_out), axis=1)
    g = linalg.pseudo_inverse_sqrt(total)
    corr = np.kron(g, np.eye(d_out))
    return [corr @ c @ corr.conj().T for c in chois]


def _exact_cptpA_conversion(source: QuantumBox, target: QuantumBox) -> CpMap | None:
    """Exact prior-preserving channel source -> target, or None."""
    if abs(source.p - target.p) > 1e-12:
        return None
    if target.p <= TOLS.infinite_perr:
        return measure_prepare([np.eye(source.dim)], [target.rho1])
    if target.p >= 1.0 - TOLS.infinite_perr:
        return measure_prepare([np.eye(source.dim)], [target.rho0])
    if not _orthogonal_states(source.rho0, source.rho1):
        return None
    proj = linalg.support_projector(source.rho0)
    return measure_prepare([proj, np.eye(source.dim) - proj],
                           [target.rho0, target.rho1])


def min_conversion_error(source: QuantumBox, target: QuantumBox,
                         regime: str) -> TaskResult:
    """Smallest scaled-trace-distance error reachable under free operations."""
    _check_regime(regime)
    if p_err(target) <= TOLS.infinite_perr:
        # infinite-resource target: exact conversion or nothing
        if regime == CDS:
            if p_err(source) <= TOLS.infinite_perr:
                return TaskResult(0.0, channels.inf_to_any(source, target), {})
            return TaskResult(INF, None, {"reason": "finite to infinite"})
        witness = _exact_cptpA_conversion(source, target)
        if witness is not None:
            return TaskResult(0.0, witness, {})
        return TaskResult(INF, None, {"reason": "no exact prior-preserving map"})
    if p_err(source) <= TOLS.infinite_perr:
        # infinite-resource source converts exactly
        if regime == CDS:
            return TaskResult(0.0, channels.inf_to_any(source, target), {})
        witness = _exact_cptpA_conversion(source, target)
        if witness is not None:
            return TaskResult(0.0, witness, {})

    d_in, d_out = source.dim, target.dim
    w0, w1 = source.weighted()
    s0 = target.p * target.rho0
    s1 = (1 - target.p) * target.rho1
    weight = s0 - s1

    m = Model()
    b0 = m.psd_var("b0", d_out)
    b1 = m.psd_var("b1", d_out)
    c0 = m.psd_var("c0", d_out)
    c1 = m.psd_var("c1", d_out)
    dv = m.psd_var("dv", d_out)
    ev = m.psd_var("ev", d_out)
    s_extra = m.scalar("s0")  # s = 1 + s_extra
    om0 = m.psd_var("om0", d_in * d_out)
    dims = (d_in, d_out)
    if regime == CDS:
        om1 = m.psd_var("om1", d_in * d_out)
        tau0 = channel_output(w0, om0, dims) + channel_output(w1, om1, dims)
        tau1 = channel_output(w0, om1, dims) + channel_output(w1, om0, dims)
        tp = ptrace_out(om0, dims) + ptrace_out(om1, dims)
    else:
        tau0 = channel_output(w0, om0, dims)
        tau1 = channel_output(w1, om0, dims)
        tp = ptrace_out(om0, dims)
    m.eq(b0 - c0 - tau0 + times(s_extra, s0), -s0)
    m.eq(b1 - c1 - tau1 + times(s_extra, s1), -s1)
    m.eq(dv - ev - times(s_extra, weight), weight)
    m.le(trace(dv) + trace(ev) - s_extra, 0.0)
    m.eq(tp - times(s_extra, np.eye(d_in)), np.eye(d_in))
    m.minimize(trace(b0) + trace(b1) + trace(c0) + trace(c1))
    res = model.require_optimal(m.solve(), "conversion-error program")

    s_val = 1.0 + float(np.real(res.primal["s0"][0, 0]))
    if regime == CDS:
        choi0, choi1 = _normalized_chois(
            [res.primal["om0"] / s_val, res.primal["om1"] / s_val], d_in, d_out)
        witness: CdsMap | CpMap = CdsMap(CpMap(choi0, d_in, d_out),
                                         CpMap(choi1, d_in, d_out))
    else:
        choi0, = _normalized_chois([res.primal["om0"] / s_val], d_in, d_out)
        witness = CpMap(choi0, d_in, d_out)
    return TaskResult(max(res.value, 0.0), witness,
                      {"s": s_val, "gap": res.gap})


def conversion_error_to_infinite(b: QuantumBox, regime: str,
                                 return_pair: bool = False):
    """Minimum trace distance to an orthogonal-pair golden unit.

    Equals p_err(b); computed by the primal conversion program (and, in the
    two-branch regime, cross-checked by its dual when ``return_pair``)."""
    _check_regime(regime)
    q = 0.5 if regime == CDS else b.p
    d_in, d_out = b.dim, 2
    w0, w1 = b.weighted()
    t0 = q * KET0
    t1 = (1 - q) * KET1

    m = Model()
    y0 = m.psd_var("y0", d_out)
    y1 = m.psd_var("y1", d_out)
    g0 = m.psd_var("g0", d_in * d_out)
    dims = (d_in, d_out)
    if regime == CDS:
        g1 = m.psd_var("g1", d_in * d_out)
        tau0 = channel_output(w0, g0, dims) + channel_output(w1, g1, dims)
        tau1 = channel_output(w0, g1, dims) + channel_output(w1, g0, dims)
        tp = ptrace_out(g0, dims) + ptrace_out(g1, dims)
    else:
        tau0 = channel_output(w0, g0, dims)
        tau1 = channel_output(w1, g0, dims)
        tp = ptrace_out(g0, dims)
    m.eq(tp, np.eye(d_in))
    m.ge(y0, tau0 - t0)
    m.ge(y1, tau1 - t1)
    m.minimize(trace(y0) + trace(y1))
    primal = model.require_optimal(m.solve(), "trace-distance conversion").value
    primal = max(primal, 0.0)
    if not return_pair:
        return primal

    if regime != CDS:
        raise ValueError("the dual program is stated for the two-branch regime")
    md = Model()
    yb = md.free_herm("yb", d_in)
    wv = md.psd_var("w", d_out)
    zv = md.psd_var("z", d_out)
    md.le(wv, np.eye(d_out))
    md.le(zv, np.eye(d_out))
    md.le(kron_right(yb, np.eye(d_out)),
          kron_left(w0, wv) + kron_left(w1, zv))
    md.le(kron_right(yb, np.eye(d_out)),
          kron_left(w1, wv) + kron_left(w0, zv))
    md.maximize(trace(yb) - inner(q * KET0, wv) - inner((1 - q) * KET1, zv))
    dual = model.require_optimal(md.solve(), "trace-distance conversion dual").value
    return primal, max(dual, 0.0)


# --- approximate distillation ---------------------------------------------------

def distill_approx(b: QuantumBox, eps: float, regime: str) -> TaskResult:
    """Largest golden unit reachable within scaled-trace-distance eps."""
    _check_regime(regime)
    if eps < 0:
        raise ParameterRangeError("eps must be nonnegative")
    if regime == CPTPA and not 0.0 < b.p < 1.0:
        return TaskResult(INF, None, {"reason": "singular prior"})
    if regime == CPTPA and _orthogonal_states(b.rho0, b.rho1):
        return TaskResult(INF, None, {"reason": "orthogonal supports"})
    if regime == CDS and p_err(b) <= TOLS.infinite_perr:
        return TaskResult(INF, None, {"reason": "infinite resource"})

    d = b.dim
    p = b.p
    m = Model()
    r = m.scalar("r")
    m.le(r, 1.0)
    if regime == CPTPA:
        lam = m.psd_var("lam", d)
        m.le(lam, np.eye(d))
        if eps == 0.0:
            m.eq(inner(b.rho0, lam) + 0.5 * r, 1.0)
            m.eq(inner(b.rho1, lam) - 0.5 * r, 0.0)
        else:
            cs = [m.scalar(f"c{i}") for i in range(4)]
            e0 = m.scalar("e0")
            e1 = m.scalar("e1")
            m.ge(cs[0] + inner(p * b.rho0, lam) + times(r, [[0.5 * p]]), p)
            m.ge(cs[1] - inner(p * b.rho0, lam) - times(r, [[0.5 * p]]), -p)
            m.ge(cs[2] + inner((1 - p) * b.rho1, lam)
                 - times(r, [[0.5 * (1 - p)]]), 0.0)
            m.ge(cs[3] - inner((1 - p) * b.rho1, lam)
                 + times(r, [[0.5 * (1 - p)]]), 0.0)
            m.ge(e0 - times(r, [[0.5]]), -p)
            m.ge(e1 + times(r, [[0.5]]), 1 - p)
            total_c = cs[0] + cs[1] + cs[2] + cs[3]
            m.le(total_c + eps * e0 + eps * e1, eps * (1 - p))
    else:
        lams = [[m.psd_var(f"lam{i}{j}", d) for j in (0, 1)] for i in (0, 1)]
        m.eq(lams[0][0] + lams[0][1] + lams[1][0] + lams[1][1], np.eye(d))
        rows = [
            (lams[0][0], lams[1][0], "big"),
            (lams[0][1], lams[1][1], "small"),
            (lams[1][0], lams[0][0], "small"),
            (lams[1][1], lams[0][1], "big"),
        ]
        cs = []
        for idx, (l_a, l_b, kind) in enumerate(rows):
            expr = inner(p * b.rho0, l_a) + inner((1 - p) * b.rho1, l_b)
            if kind == "big":
                expr = expr + times(r, [[0.25]])
                rhs = 0.5
            else:
                expr = expr - times(r, [[0.25]])
                rhs = 0.0
            if eps > 0.0:
                c = m.scalar(f"c{idx}")
                cs.append(c)
                expr = expr + c
            m.ge(expr, rhs)
        if eps > 0.0:
            m.le(2.0 * (cs[0] + cs[1] + cs[2] + cs[3]) - eps * r, 0.0)
    m.minimize(r.expr())
    res = model.require_optimal(m.solve(), "approximate distillation program")
    r_star = max(res.value, 0.0)
    if r_star <= TOLS.infinite_perr:
        return TaskResult(INF, None, {"r": r_star})
    return TaskResult(-math.log2(r_star), None, {"r": r_star, "gap": res.gap})


# --- approximate dilution (bisection over M) --------------------------------------

_PHASE1_OPTIONS = SolverOptions(gap_tol=1e-10, feas_tol=1e-9)


def _cost_feasible(b: QuantumBox, eps: float, regime: str, big_m: float,
                   slack_tol: float = 1e-8) -> bool:
    """Phase-I feasibility of the fixed-M approximate-dilution program.

    Every inequality is relaxed by a common shift lambda = lam0 - 1 whose
    minimum is the (signed) infeasibility; this keeps a strict interior on
    both sides of the feasibility boundary, including at eps = 0 where the
    error-ball constraints would otherwise pin variables to zero."""
    d = b.dim
    p = b.p
    w0, w1 = b.weighted()
    m = Model()
    lam0 = m.scalar("lam0")        # lambda = lam0 - 1 >= -1
    s_extra = m.scalar("s0")       # s = 1 + s0
    bs = [m.psd_var(f"b{i}", d) for i in (0, 1)]
    cs = [m.psd_var(f"c{i}", d) for i in (0, 1)]
    dvar = m.psd_var("dv", d)
    evar = m.psd_var("ev", d)
    r0 = m.psd_var("r0", d)
    r1 = m.psd_var("r1", d)
    eye = np.eye(d)
    m.ge((2 * big_m - 1) * r1 - r0 + times(lam0, eye), eye)
    m.ge((2 * big_m - 1) * r0 - r1 + times(lam0, eye), eye)
    if regime == CDS:
        # r0, r1 are the weighted branch operators; traces sum to s
        m.eq(bs[0] - cs[0] - times(s_extra, w0) + r0, w0)
        m.eq(bs[1] - cs[1] - times(s_extra, w1) + r1, w1)
        m.eq(dvar - evar - r0 + r1, 0.0 * eye)
        m.eq(trace(r0) + trace(r1) - s_extra, 1.0)
    else:
        # r0, r1 are branch states scaled to trace s; prior fixed at p
        m.eq(bs[0] - cs[0] - times(s_extra, w0) + p * r0, w0)
        m.eq(bs[1] - cs[1] - times(s_extra, w1) + (1 - p) * r1, w1)
        m.eq(dvar - evar - p * r0 + (1 - p) * r1, 0.0 * eye)
        m.eq(trace(r0) - s_extra, 1.0)
        m.eq(trace(r1) - s_extra, 1.0)
    total_bc = trace(bs[0]) + trace(bs[1]) + trace(cs[0]) + trace(cs[1])
    m.le(total_bc - lam0, eps - 1.0)
    m.le(trace(dvar) + trace(evar) - s_extra - lam0, -1.0)
    m.minimize(lam0.expr())
    res = m.solve(_PHASE1_OPTIONS)
    if res.status is not SdpStatus.OPTIMAL:
        # a feasibility decision only needs ~1e-6 accuracy on lambda
        diag = res.diagnostics
        usable = (diag.get("rel_primal", 1.0) <= 1e-6
                  and diag.get("rel_gap", 1.0) <= 1e-6)
        if not usable:
            raise SolverError(
                f"phase-I feasibility solve returned {res.status.value}")
    return res.value - 1.0 <= slack_tol


def cost_approx(b: QuantumBox, eps: float, regime: str,
                m_tol: float = 1e-6) -> TaskResult:
    """Smallest golden unit diluting to the eps-ball of the box.

    Evaluated by bisection over M: for fixed M the program is linear, and
    feasibility only improves as M grows."""
    _check_regime(regime)
    if eps < 0:
        raise ParameterRangeError("eps must be nonnegative")
    if regime == CPTPA and not 0.0 < b.p < 1.0:
        return TaskResult(0.0, None, {"reason": "singular prior"})
    exact = cost_exact(b, regime)
    if math.isinf(exact.value):
        # the eps-ball around an infinite-resource box is the box itself
        return TaskResult(INF, None, {"reason": "infinite resource"})
    hi = 2.0 ** exact.value
    lo = 1.0
    if not _cost_feasible(b, eps, regime, hi * (1 + 1e-7) + 1e-7, slack_tol=1e-6):
        raise SolverError("approximate-dilution bracket infeasible at the exact cost")
    if _cost_feasible(b, eps, regime, lo):
        return TaskResult(0.0, None, {"M": 1.0})
    while hi - lo > m_tol:
        mid = 0.5 * (lo + hi)
        if _cost_feasible(b, eps, regime, mid):
            hi = mid
        else:
            lo = mid
    return TaskResult(math.log2(hi), None, {"M": hi})


# --- asymptotic rates ----------------------------------------------------------

class AsymptoticRates(NamedTuple):
    distill: float
    exact_cost: float
    approx_cost: float


def asymptotic_rates(b: QuantumBox) -> AsymptoticRates:
    """Per-copy rates: distillation and approximate dilution run at the
    Chernoff divergence, exact dilution at the Thompson metric."""
    if not 0.0 < b.p < 1.0:
        raise ParameterRangeError("asymptotic rates need a nonsingular prior")
    xi = chernoff(b.rho0, b.rho1)
    dt = thompson(b.rho0, b.rho1)
    return AsymptoticRates(xi, dt, xi)


class TransformRate(NamedTuple):
    achievable: float
    strong_converse: float


def _ratio(a: float, b_val: float) -> float:
    """xi(source)/xi(target) with the conventions inf/inf = inf, x/0 = inf."""
    if b_val == 0.0 or math.isinf(a):
        return INF
    if math.isinf(b_val):
        return 0.0
    return a / b_val


def _majorizes(p: float, q: float) -> bool:
    return max(p, 1 - p) >= max(q, 1 - q) - 1e-12


def transform_rate(source: QuantumBox, target: QuantumBox,
                   regime: str) -> TransformRate:
    """Optimal achievable and strong-converse conversion rates (copies of
    target per copy of source), by the exact case table."""
    _check_regime(regime)
    p, q = source.p, target.p
    p_singular = p <= 0.0 or p >= 1.0
    q_singular = q <= 0.0 or q >= 1.0
    # equal-state branches need exact zeros; rounding noise sits near 1e-15
    xi_s = chernoff(source.rho0, source.rho1)
    xi_t = chernoff(target.rho0, target.rho1)
    xi_s = 0.0 if xi_s <= 1e-12 else xi_s
    xi_t = 0.0 if xi_t <= 1e-12 else xi_t

    if regime == CDS:
        if p_singular:
            return TransformRate(INF, INF)
        if q_singular:
            if math.isinf(xi_s):
                return TransformRate(INF, INF)
            return TransformRate(0.0, 0.0)
        if xi_t > 0.0:
            r = _ratio(xi_s, xi_t)
            return TransformRate(r, r)
        if xi_s > 0.0:
            return TransformRate(INF, INF)
        if _majorizes(p, q):
            return TransformRate(INF, INF)
        return TransformRate(0.0, INF)

    # prior-preserving regime
    if q_singular:
        if abs(p - q) <= 1e-12:
            return TransformRate(INF, INF)
        return TransformRate(0.0, 0.0)
    if p_singular:
        if xi_t > 0.0:
            return TransformRate(0.0, 0.0)
        return TransformRate(0.0, INF)
    if abs(p - q) <= 1e-12:
        r = _ratio(xi_s, xi_t)
        return TransformRate(r, r)
    if xi_t > 0.0:
        return TransformRate(0.0, 0.0)
    return TransformRate(0.0, INF)
