import numpy as np
import pytest

from symdist import linalg
from symdist.boxes import QuantumBox, random_box, random_density


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_hermitian(d, rng, real=False):
    g = rng.normal(size=(d, d))
    if not real:
        g = g + 1j * rng.normal(size=(d, d))
    return (g + g.conj().T) / 2


def box_distance(a: QuantumBox, b: QuantumBox) -> float:
    """Trace distance between the c-q embeddings."""
    return 0.5 * linalg.trace_norm(a.cq_operator() - b.cq_operator())


__all__ = ["random_hermitian", "random_density", "random_box", "box_distance"]
