"""Distinguishability measures on boxes and state pairs.

Every quantity uses base-2 logarithms.  Infinite values follow one shared
convention: a divergence is infinite when its defining feasibility test
fails at the tolerances in :mod:`symdist.config` (support containment at
``TOLS.support``, discrimination error at ``TOLS.infinite_perr``).

Where the underlying quantity is also expressible as a semi-definite
program (the discrimination error, the scaled trace distance), both the
closed form and the program are provided so they can cross-validate each
other.
"""

from __future__ import annotations

import math
from typing import NamedTuple, TYPE_CHECKING

import numpy as np

from . import linalg, model
from .config import TOLS
from .exceptions import DimensionMismatchError, NotPsdError
from .model import Model, inner, trace, times

if TYPE_CHECKING:
    from .boxes import QuantumBox

Array = np.ndarray
INF = math.inf


def _nonneg(v: float) -> float:
    if v < -1e-9:
        raise AssertionError(f"nonnegative divergence evaluated to {v}")
    return max(v, 0.0)


# --- discrimination error ---------------------------------------------------

def p_err(b: "QuantumBox") -> float:
    """Minimum Bayesian discrimination error (Helstrom value)."""
    w0, w1 = b.weighted()
    return _nonneg(0.5 * (1.0 - linalg.trace_norm(w0 - w1)))


def p_err_sdp(b: "QuantumBox") -> float:
    """Greatest-lower-bound program: max{Tr Y : Y <= p rho0, Y <= (1-p) rho1}."""
    w0, w1 = b.weighted()
    m = Model()
    y = m.free_herm("y", b.dim)
    m.maximize(trace(y))
    m.le(y, w0)
    m.le(y, w1)
    res = model.require_optimal(m.solve(), "greatest-lower-bound program")
    return res.value


def sd(b: "QuantumBox") -> float:
    """Symmetric distinguishability -log2(2 p_err); inf on infinite resources."""
    e = p_err(b)
    if e <= TOLS.infinite_perr:
        return INF
    return -math.log2(2.0 * e)


# --- Q_min ------------------------------------------------------------------

class QMinResult(NamedTuple):
    value: float
    minimizer: Array  # POVM effect achieving the minimum


def q_min(rho0: Array, rho1: Array) -> QMinResult:
    """2 min{Tr(L rho0) : Tr(L(rho0+rho1)) = 1, 0 <= L <= 1} and a minimizer."""
    d = rho0.shape[0]
    m = Model()
    lam = m.psd_var("lam", d)
    slack = m.psd_var("slack", d)
    m.minimize(inner(2.0 * rho0, lam))
    m.eq(lam + slack, np.eye(d))
    m.eq(inner(rho0 + rho1, lam), 1.0)
    res = model.require_optimal(m.solve(), "Q_min program")
    w, v = np.linalg.eigh(res.primal["lam"])
    effect = (v * np.clip(w, 0.0, 1.0)) @ v.conj().T  # back into the POVM interval
    return QMinResult(_nonneg(res.value), linalg.hermitian(effect))


def _orthogonal_supports(rho0: Array, rho1: Array) -> bool:
    proj = linalg.support_projector(rho0)
    return float(np.trace(proj @ rho1).real) <= TOLS.support


def xi_min(rho0: Array, rho1: Array) -> float:
    """-log2 Q_min; infinite exactly on orthogonal-support pairs."""
    if _orthogonal_supports(rho0, rho1):
        return INF
    v = q_min(rho0, rho1).value
    if v <= 0.0:
        return INF
    return _nonneg(-math.log2(v))


# --- max-relative entropy and Thompson metric --------------------------------

def d_max(rho: Array, sigma: Array) -> float:
    """inf{lam : rho <= 2^lam sigma}; inf if supp(rho) escapes supp(sigma).

    Subnormalized PSD arguments are allowed.
    """
    rho = linalg.hermitian(rho)
    sigma = linalg.hermitian(sigma)
    for m_ in (rho, sigma):
        if np.linalg.eigvalsh(m_).min(initial=0.0) < -TOLS.density:
            raise NotPsdError("d_max arguments must be PSD")
    proj = linalg.support_projector(sigma)
    outside = float(np.trace((np.eye(len(rho)) - proj) @ rho).real)
    if outside > TOLS.support:
        return INF
    inv_sqrt = linalg.pseudo_inverse_sqrt(sigma)
    op = inv_sqrt @ proj @ rho @ proj @ inv_sqrt
    lam_max = float(np.linalg.eigvalsh(linalg.hermitian(op)).max(initial=0.0))
    if lam_max <= 0.0:
        return -INF  # rho vanishes on the support of sigma
    return math.log2(lam_max)


def thompson(rho0: Array, rho1: Array) -> float:
    """Thompson metric: max of the two one-sided max-relative entropies."""
    return max(d_max(rho0, rho1), d_max(rho1, rho0))


def q_max(rho0: Array, rho1: Array) -> float:
    dt = thompson(rho0, rho1)
    if math.isinf(dt):
        return INF
    return max(0.5 * (2.0 ** dt + 1.0), 1.0)  # >= 1 for unit-trace pairs


def xi_max(rho0: Array, rho1: Array) -> float:
    v = q_max(rho0, rho1)
    return INF if math.isinf(v) else _nonneg(math.log2(v))


def q_max_star(b: "QuantumBox") -> float:
    """Weighted-pair variant governing dilution when labels may be flipped."""
    if b.p <= 0.0 or b.p >= 1.0:
        return INF
    w0, w1 = b.weighted()
    dt = thompson(w0, w1)
    if math.isinf(dt):
        return INF
    v = 0.5 * (2.0 ** dt + 1.0)
    lower = 0.5 * max(1.0 / b.p, 1.0 / (1.0 - b.p))
    # floor at the prior-only bound; guards rounding on equal-state boxes
    return max(v, lower)


def xi_max_star(b: "QuantumBox") -> float:
    v = q_max_star(b)
    return INF if math.isinf(v) else _nonneg(math.log2(v))


# --- Chernoff divergence ------------------------------------------------------

def _chernoff_objective(rho0: Array, rho1: Array):
    w0, v0 = linalg.eig(rho0)
    w1, v1 = linalg.eig(rho1)
    clamp = TOLS.psd_clamp
    keep0 = w0 > clamp
    keep1 = w1 > clamp
    w0, v0 = w0[keep0], v0[:, keep0]
    w1, v1 = w1[keep1], v1[:, keep1]
    overlap = np.abs(v0.conj().T @ v1) ** 2
    if overlap.size == 0:
        return None

    def f(s: float) -> float:
        return float((w0 ** s) @ overlap @ (w1 ** (1.0 - s)))

    return f


def chernoff(rho0: Array, rho1: Array, s_tol: float = 1e-9,
             max_iter: int = 200) -> float:
    """-log2 min_{s in [0,1]} Tr[rho0^s rho1^(1-s)] by golden-section search.

    The objective is convex in s; the search includes both endpoints.
    Returns inf iff the supports are orthogonal.
    """
    if _orthogonal_supports(rho0, rho1):
        return INF
    f = _chernoff_objective(rho0, rho1)
    if f is None:
        return INF
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = 0.0, 1.0
    c, d = b - phi * (b - a), a + phi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= s_tol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = f(d)
    q = min(f(0.0), f(1.0), fc, fd)
    if q <= TOLS.infinite_perr:
        return INF
    return _nonneg(-math.log2(q))


# --- scaled trace distance ----------------------------------------------------

def _boxes_equal(rho: "QuantumBox", sigma: "QuantumBox") -> bool:
    if rho.dim != sigma.dim:
        return False
    r0, r1 = rho.weighted()
    s0, s1 = sigma.weighted()
    tol = TOLS.box_equality
    return (np.abs(r0 - s0).max(initial=0.0) <= tol
            and np.abs(r1 - s1).max(initial=0.0) <= tol)


def cq_trace_distance(rho: "QuantumBox", sigma: "QuantumBox") -> float:
    """(1/2)||rho_XA - sigma_XA||_1 via the block structure."""
    r0, r1 = rho.weighted()
    s0, s1 = sigma.weighted()
    return 0.5 * (linalg.trace_norm(r0 - s0) + linalg.trace_norm(r1 - s1))


def scaled_trace_distance(rho: "QuantumBox", sigma: "QuantumBox") -> float:
    """Trace distance scaled by the second box's discrimination error.

    Three cases: the ratio when p_err(sigma) > 0; when p_err(sigma) = 0 the
    value is 0 for equal boxes and inf otherwise.  Box equality is tested
    entrywise at ``TOLS.box_equality`` on the c-q embedding, so the boundary
    between the last two cases is tolerance-dependent.
    """
    if rho.dim != sigma.dim:
        raise DimensionMismatchError(
            f"boxes live on dimensions {rho.dim} and {sigma.dim}")
    e = p_err(sigma)
    if e <= TOLS.infinite_perr:
        return 0.0 if _boxes_equal(rho, sigma) else INF
    return _nonneg(cq_trace_distance(rho, sigma) / e)


class DPrimePair(NamedTuple):
    primal: float
    dual: float


def scaled_trace_distance_sdp(rho: "QuantumBox", sigma: "QuantumBox",
                              return_pair: bool = False):
    """Primal and dual programs for the scaled trace distance.

    Requires p_err(sigma) > 0 (strong duality regime); both values agree
    with the closed form.  Returns the primal value, or the (primal, dual)
    pair with ``return_pair``.
    """
    if p_err(sigma) <= TOLS.infinite_perr:
        raise ValueError("scaled_trace_distance_sdp needs p_err(sigma) > 0")
    d = rho.dim
    r0, r1 = rho.weighted()
    s0, s1 = sigma.weighted()
    diff0, diff1 = r0 - s0, r1 - s1
    weight = sigma.p * sigma.rho0 - (1 - sigma.p) * sigma.rho1

    # primal: max t with shifted interval variables
    m = Model()
    t = m.scalar("t")
    l0 = m.psd_var("l0", d)
    l1 = m.psd_var("l1", d)
    p1 = m.psd_var("p1", d)
    m.le(l0, 2.0 * np.eye(d))
    m.le(l1, 2.0 * np.eye(d))
    p2 = m.psd_var("p2", d)
    m.eq(p1 + p2, times(t, 2.0 * np.eye(d)))
    # t - Tr[(P1 - tI) weight] = Tr[(L0 - I) diff0] + Tr[(L1 - I) diff1]
    lhs = (t.expr() - inner(weight, p1) + times(t, [[float(np.trace(weight).real)]])
           - inner(diff0, l0) - inner(diff1, l1))
    m.eq(lhs, -float(np.trace(diff0 + diff1).real))
    m.maximize(t.expr())
    primal = model.require_optimal(m.solve(), "D' primal").value

    if not return_pair:
        return primal

    # dual: min Tr[B + C] over the block components
    md = Model()
    b0 = md.psd_var("b0", d)
    b1 = md.psd_var("b1", d)
    c0 = md.psd_var("c0", d)
    c1 = md.psd_var("c1", d)
    dv = md.psd_var("dv", d)
    ev = md.psd_var("ev", d)
    s_extra = md.scalar("s0")  # s = 1 + s_extra
    md.eq(b0 - c0 - times(s_extra, diff0), diff0)
    md.eq(b1 - c1 - times(s_extra, diff1), diff1)
    md.eq(dv - ev - times(s_extra, weight), weight)
    md.le(trace(dv) + trace(ev) - s_extra, 0.0)
    md.minimize(trace(b0) + trace(b1) + trace(c0) + trace(c1))
    dual = model.require_optimal(md.solve(), "D' dual").value
    return DPrimePair(_nonneg(primal), _nonneg(dual))


# --- smoothed Thompson construction -------------------------------------------

class SmoothedThompson(NamedTuple):
    omega0: Array
    omega1: Array
    value: float  # Thompson metric of the smoothed pair


def smooth_thompson_witness(omega0: Array, omega1: Array,
                            eps: float) -> SmoothedThompson:
    """Constructive smoothing of a subnormalized pair.

    Each smoothed operator stays within trace distance ``eps`` of its
    input.  The generic construction guarantees a Thompson metric of at
    most log2(4/eps) and preserves Tr w0 + Tr w1 = 1 when that holds; when
    both inputs have unit trace an equal-trace variant achieving
    log2(2/eps) is used instead.
    """
    if not 0.0 < eps <= 1.0:
        raise ValueError(f"eps must lie in (0, 1], got {eps}")
    omega0 = linalg.hermitian(omega0)
    omega1 = linalg.hermitian(omega1)
    tr0 = float(np.trace(omega0).real)
    tr1 = float(np.trace(omega1).real)

    pos10 = linalg.positive_part(omega1 - omega0)
    pos01 = linalg.positive_part(omega0 - omega1)

    if abs(tr0 - 1.0) <= 1e-12 and abs(tr1 - 1.0) <= 1e-12:
        lam = max(float(np.trace(pos01).real) / eps, 1.0)
        shift = float(np.trace(pos01).real) / lam
        w0 = (omega0 + pos10 / lam) / (1.0 + shift)
        w1 = (omega1 + pos01 / lam) / (1.0 + shift)
        return SmoothedThompson(w0, w1, thompson(w0, w1))

    lam0 = max(2.0 * float(np.trace(pos10).real) / eps, 1.0)
    lam1 = max(2.0 * float(np.trace(pos01).real) / eps, 1.0)
    eps0 = float(np.trace(pos10).real) / lam0
    eps1 = float(np.trace(pos01).real) / lam1
    denom = 1.0 + eps0 + eps1
    w0 = (omega0 + pos10 / lam0) / denom
    w1 = (omega1 + pos01 / lam1) / denom
    return SmoothedThompson(w0, w1, thompson(w0, w1))
