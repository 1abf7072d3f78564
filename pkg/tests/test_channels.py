import math

import numpy as np
import pytest

from symdist import channels, linalg
from symdist.boxes import KET0, KET1, QuantumBox, golden_box, random_box, random_density
from symdist.channels import (CdsMap, apply_cds, apply_cptp,
                              cptp_as_cds, dilute_channel_cds,
                              dilute_channel_cptpA, distill_channel_cds,
                              distill_channel_cptpA, gad_channel,
                              golden_majorize, helstrom_povm, identity_map,
                              inf_to_any, measure_prepare, pgm, random_cds,
                              random_cptp)
from symdist.divergences import p_err, q_max, q_max_star, q_min
from symdist.exceptions import (InfiniteResourceError, MTooSmallError,
                                NotMajorizedError, NotInfiniteResourceError,
                                ParameterRangeError)

from conftest import box_distance


def test_apply_identity(rng):
    b = random_box(3, rng)
    out = apply_cptp(identity_map(3), b)
    assert box_distance(out, b) <= 1e-12


def test_apply_flip_only(rng):
    b = random_box(2, rng)
    flip = CdsMap(channels.zero_map(2, 2), identity_map(2))
    out = apply_cds(flip, b)
    assert out.p == pytest.approx(1 - b.p)
    assert np.allclose(out.rho0, b.rho1)
    assert np.allclose(out.rho1, b.rho0)


def test_apply_trace_and_replace(rng):
    b = random_box(2, rng)
    omega = random_density(2, rng)
    const = measure_prepare([np.eye(2)], [omega])
    out = apply_cptp(const, b)
    assert out.p == pytest.approx(b.p)
    assert np.allclose(out.rho0, omega)
    assert np.allclose(out.rho1, omega)


def test_gad_examples(rng):
    ident = gad_channel(0.0, 0.7)
    rho = random_density(2, rng)
    assert np.allclose(ident(rho), rho, atol=1e-12)
    ch = gad_channel(1.0, 0.1)
    assert np.allclose(ch(KET0), np.diag([0.9, 0.1]))
    for gamma, n in [(0.3, 0.2), (0.9, 0.5), (1.0, 0.0)]:
        ch = gad_channel(gamma, n)
        assert np.allclose(ch(KET1),
                           np.diag([gamma * (1 - n), 1 - gamma * (1 - n)]))
        tr_out = linalg.ptrace(ch.choi, (2, 2), axis=1)
        assert np.abs(tr_out - np.eye(2)).max() <= 1e-10
    with pytest.raises(ParameterRangeError):
        gad_channel(1.2, 0.0)


def test_helstrom_povm_examples(rng):
    orth = QuantumBox(0.5, np.diag([1.0, 0]), np.diag([0, 1.0]))
    assert np.allclose(helstrom_povm(orth), np.diag([0.0, 1.0]))
    rho = random_density(2, rng)
    lam = helstrom_povm(QuantumBox(1 / 3, rho, rho))
    # all mass accepted as the likelier label 1 (support of rho)
    assert np.allclose(lam, linalg.support_projector(rho), atol=1e-10)
    b = golden_box(2, 0.5)
    lam = helstrom_povm(b)
    assert np.allclose(lam, np.diag([0.0, 1.0]))
    err = b.p * np.trace(lam @ b.rho0).real \
        + (1 - b.p) * np.trace((np.eye(2) - lam) @ b.rho1).real
    assert err == pytest.approx(0.25, abs=1e-12)


def test_helstrom_achieves_p_err(rng):
    for _ in range(20):
        b = random_box(3, rng)
        lam = helstrom_povm(b)
        err = b.p * np.trace(lam @ b.rho0).real \
            + (1 - b.p) * np.trace((np.eye(3) - lam) @ b.rho1).real
        assert err == pytest.approx(p_err(b), abs=1e-9)


def test_pgm(rng):
    r0 = np.diag([1.0, 0.0])
    r1 = np.diag([0.0, 1.0])
    assert np.allclose(pgm(r0, r1), np.diag([0.0, 1.0]))
    rho = random_density(2, rng)
    assert np.allclose(pgm(rho, rho), 0.5 * linalg.support_projector(rho),
                       atol=1e-10)
    a, b = random_density(2, rng), random_density(2, rng)
    s = linalg.pseudo_inverse_sqrt(a + b)
    assert np.allclose(pgm(a, b), s @ b @ s)
    assert np.trace(pgm(a, b) @ (a + b)).real == pytest.approx(1.0, abs=1e-9)


def test_distill_cptpA_fixed_point():
    g = golden_box(3, 0.4)
    ch = distill_channel_cptpA(g)
    out = apply_cptp(ch, g)
    assert box_distance(out, g) <= 1e-7


def test_distill_cptpA_orthogonal_and_equal(rng):
    orth = QuantumBox(0.5, np.diag([1.0, 0]), np.diag([0, 1.0]))
    ch = distill_channel_cptpA(orth)
    out = apply_cptp(ch, orth)
    assert box_distance(out, golden_box(math.inf, 0.5)) <= 1e-7
    rho = random_density(2, rng)
    eq = QuantumBox(0.3, rho, rho)
    assert q_min(rho, rho).value == pytest.approx(1.0, abs=1e-7)
    out = apply_cptp(distill_channel_cptpA(eq), eq)
    assert box_distance(out, golden_box(1.0, 0.3)) <= 1e-6


def test_distill_cds_examples(rng):
    b = golden_box(2, 0.5)  # p_err 1/4 -> target gamma^(2, 1/2)
    out = apply_cds(distill_channel_cds(b), b)
    assert box_distance(out, golden_box(2, 0.5)) <= 1e-9
    rho = random_density(2, rng)
    eq = QuantumBox(1 / 3, rho, rho)  # p_err 1/3 -> M = 3/2
    out = apply_cds(distill_channel_cds(eq), eq)
    assert box_distance(out, golden_box(1.5, 0.5)) <= 1e-9
    with pytest.raises(InfiniteResourceError):
        distill_channel_cds(QuantumBox(0.5, np.diag([1.0, 0]), np.diag([0, 1.0])))


def test_dilute_cptpA(rng):
    b = random_box(2, rng)
    m = q_max(b.rho0, b.rho1)
    back = apply_cptp(dilute_channel_cptpA(b, m), golden_box(m, b.p))
    assert box_distance(back, b) <= 1e-8
    # golden target at its own M behaves as the identity on pi_M
    g = golden_box(3, 0.5)
    back = apply_cptp(dilute_channel_cptpA(g, 3.0), golden_box(3, 0.5))
    assert box_distance(back, g) <= 1e-10
    # equal-state target at M = 1 is the constant channel
    rho = random_density(2, rng)
    eq = QuantumBox(0.5, rho, rho)
    back = apply_cptp(dilute_channel_cptpA(eq, 1.0), golden_box(1, 0.5))
    assert box_distance(back, eq) <= 1e-10
    with pytest.raises(MTooSmallError):
        dilute_channel_cptpA(b, max(1.0 + 1e-6, m / 2))


def test_dilute_cds(rng):
    b = random_box(2, rng)
    m = q_max_star(b)
    back = apply_cds(dilute_channel_cds(b, m), golden_box(m, 0.5))
    assert box_distance(back, b) <= 1e-8
    # boundary case: equal states with p < 1/2 at M = 1/(2p)
    rho = random_density(2, rng)
    eq = QuantumBox(0.25, rho, rho)
    back = apply_cds(dilute_channel_cds(eq, 2.0), golden_box(2, 0.5))
    assert box_distance(back, eq) <= 1e-10
    # and the mirrored prior
    eq2 = QuantumBox(0.75, rho, rho)
    back = apply_cds(dilute_channel_cds(eq2, 2.0), golden_box(2, 0.5))
    assert box_distance(back, eq2) <= 1e-10
    # golden target reproduces itself
    g = golden_box(2.5, 0.5)
    back = apply_cds(dilute_channel_cds(g, 2.5), golden_box(2.5, 0.5))
    assert box_distance(back, g) <= 1e-10


def test_distill_dilute_round_trip_on_golden():
    g = golden_box(5, 0.5)
    distilled = apply_cds(distill_channel_cds(g), g)
    m = 1 / (2 * p_err(g))
    diluted = apply_cds(dilute_channel_cds(g, m), distilled)
    assert box_distance(diluted, g) <= 1e-7


def test_inf_to_any(rng):
    source = QuantumBox(0.5, np.diag([1.0, 0]), np.diag([0, 1.0]))
    target = random_box(3, rng)
    out = apply_cds(inf_to_any(source, target), source)
    assert box_distance(out, target) <= 1e-9
    # target equal to source
    out = apply_cds(inf_to_any(source, source), source)
    assert box_distance(out, source) <= 1e-12
    # degenerate target prior
    tgt0 = QuantumBox(0.0, random_density(2, rng), random_density(2, rng))
    out = apply_cds(inf_to_any(source, tgt0), source)
    assert box_distance(out, tgt0) <= 1e-9
    # singular-prior source with overlapping states is still infinite-resource
    rho = random_density(2, rng)
    sing = QuantumBox(0.0, rho, random_density(2, rng))
    out = apply_cds(inf_to_any(sing, target), sing)
    assert box_distance(out, target) <= 1e-9
    with pytest.raises(NotInfiniteResourceError):
        inf_to_any(random_box(2, rng), target)


def test_golden_majorize():
    m = golden_majorize(3, 0.5, 1 / 3)
    out = apply_cds(m, golden_box(3, 1 / 3))
    assert box_distance(out, golden_box(3, 0.5)) <= 1e-12
    ident = golden_majorize(3, 0.3, 0.3)
    out = apply_cds(ident, golden_box(3, 0.3))
    assert box_distance(out, golden_box(3, 0.3)) <= 1e-12
    # extreme source prior majorizes everything
    m = golden_majorize(4, 0.25, 1e-9)
    with pytest.raises(NotMajorizedError):
        golden_majorize(3, 0.1, 0.4)


def test_monotonicity_of_p_err_under_cds(rng):
    """Discrimination never gets easier after a free operation."""
    for _ in range(100):
        b = random_box(2, rng)
        m = random_cds(2, 2, rng)
        assert p_err(apply_cds(m, b)) >= p_err(b) - 1e-9


def test_random_channels_valid(rng):
    for _ in range(20):
        e = random_cptp(2, 3, rng)
        assert e.is_trace_preserving()
        assert np.linalg.eigvalsh(e.choi).min() >= -1e-10
        m = random_cds(3, 2, rng)
        total = m.e0.choi + m.e1.choi
        tr_out = linalg.ptrace(total, (3, 2), axis=1)
        assert np.abs(tr_out - np.eye(3)).max() <= 1e-8


def test_constructed_channels_pass_validity(rng):
    b = random_box(2, rng)
    distill_channel_cptpA(b)       # constructors validate CP/TP internally
    distill_channel_cds(b)
    dilute_channel_cptpA(b, q_max(b.rho0, b.rho1) + 0.1)
    dilute_channel_cds(b, q_max_star(b) + 0.1)
