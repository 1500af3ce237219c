import numpy as np
import pytest


def haar_unitary(rng: np.random.Generator) -> np.ndarray:
    """Haar-random 2x2 unitary via QR of a Ginibre matrix."""
    g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(g)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


class ScriptedRng:
    """Stand-in generator that replays a fixed list of uniform draws."""

    def __init__(self, values):
        self._values = list(values)

    def random(self, size=None):
        if size is None:
            return self._values.pop(0)
        out = np.array([self._values.pop(0) for _ in range(int(size))])
        return out


@pytest.fixture
def rng():
    return np.random.default_rng(20160811)
