import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symdist import boxes, linalg
from symdist.boxes import (GoldenUnit, QuantumBox, box_from_json, box_to_json,
                           golden_box, golden_to_box, is_infinite_resource,
                           random_density, tensor_box)
from symdist.divergences import p_err
from symdist.exceptions import DimensionCapError, NotPsdError


def test_golden_m1_is_free():
    b = golden_to_box(GoldenUnit(1, 0.5))
    assert np.allclose(b.rho0, np.diag([0.5, 0.5]))
    assert np.allclose(b.rho1, np.diag([0.5, 0.5]))
    assert b.p == 0.5


def test_golden_infinite_is_orthogonal_pair():
    b = golden_to_box(GoldenUnit(math.inf, 0.3))
    assert np.allclose(b.rho0, np.diag([1.0, 0.0]))
    assert np.allclose(b.rho1, np.diag([0.0, 1.0]))


def test_golden_m2():
    b = golden_to_box(GoldenUnit(2, 0.5))
    assert np.allclose(b.rho0, np.diag([0.75, 0.25]))
    assert np.allclose(b.rho1, np.diag([0.25, 0.75]))


@given(st.floats(1.0, 50.0), st.floats(0.05, 0.95))
@settings(max_examples=60, deadline=None)
def test_golden_error_piecewise_formula(m, q):
    """p_err equals 1/2M in the scaling regime and the absolute-value
    formula outside it."""
    b = golden_box(m, q)
    e = p_err(b)
    if 2 * m >= max(1 / q, 1 / (1 - q)):
        assert abs(e - 1 / (2 * m)) <= 1e-10
    else:
        expected = 0.5 * (1 - abs(q - 1 / (2 * m)) - abs(1 - q - 1 / (2 * m)))
        assert abs(e - expected) <= 1e-10


def test_is_infinite_resource():
    assert is_infinite_resource(QuantumBox(0.5, np.diag([1.0, 0]), np.diag([0, 1.0])))
    rho = random_density(2, np.random.default_rng(0))
    assert not is_infinite_resource(QuantumBox(0.5, rho, rho))
    # singular prior has zero error regardless of the states
    assert is_infinite_resource(QuantumBox(0.0, rho, random_density(2, np.random.default_rng(1))))


def test_tensor_box_shapes_and_values(rng):
    b = boxes.random_box(2, rng)
    assert tensor_box(b, 1).rho0 is not b.rho0  # fresh validated copy
    assert np.allclose(tensor_box(b, 1).rho0, b.rho0)
    t3 = tensor_box(b, 3)
    assert t3.dim == 8
    # commuting diagonal case: entries are products
    d = QuantumBox(0.4, np.diag([0.2, 0.8]), np.diag([0.6, 0.4]))
    t2 = tensor_box(d, 2)
    assert np.allclose(np.diag(t2.rho0), [0.04, 0.16, 0.16, 0.64])
    # consistency of n+m with kron of parts
    t5 = tensor_box(b, 3)
    combined = linalg.tensor(tensor_box(b, 2).rho0, b.rho0)
    assert np.allclose(t5.rho0, combined, atol=1e-12)


def test_tensor_box_cap():
    b = golden_box(2, 0.5)
    with pytest.raises(DimensionCapError):
        tensor_box(b, 10)


def test_validation():
    with pytest.raises(NotPsdError):
        QuantumBox(0.5, np.diag([1.5, -0.5]), np.diag([0.5, 0.5]))
    with pytest.raises(ValueError):
        QuantumBox(0.5, np.diag([0.6, 0.6]), np.diag([0.5, 0.5]))
    with pytest.raises(ValueError):
        QuantumBox(1.5, np.diag([0.5, 0.5]), np.diag([0.5, 0.5]))
    # trace drift within tolerance is renormalized
    b = QuantumBox(0.5, np.diag([0.5 + 4e-10, 0.5]), np.diag([0.5, 0.5]))
    assert np.trace(b.rho0).real == pytest.approx(1.0, abs=1e-15)


def test_json_round_trip(rng):
    b = boxes.random_box(3, rng)
    b2 = box_from_json(box_to_json(b))
    assert b2.p == b.p
    assert np.allclose(b2.rho0, b.rho0)
    assert np.allclose(b2.rho1, b.rho1)


def test_json_errors_name_field():
    with pytest.raises(ValueError, match="rho1"):
        box_from_json(json.dumps({"p": 0.5, "rho0": [[[1, 0]]]}))
    with pytest.raises(ValueError, match="'p'"):
        box_from_json(json.dumps({"p": "x", "rho0": [[[1, 0]]], "rho1": [[[1, 0]]]}))
    with pytest.raises(ValueError, match="rho0"):
        box_from_json(json.dumps({"p": 0.5, "rho0": [[1, 0]], "rho1": [[[1, 0]]]}))
