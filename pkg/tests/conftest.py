import numpy as np
import pytest

from hypercongruence.harness import random_rotation


@pytest.fixture
def rng():
    return np.random.default_rng(20260814)


def rot3(rng) -> np.ndarray:
    """Uniform random 3D rotation from a unit quaternion."""
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    a, b, c, d = q
    return np.array([
        [a * a + b * b - c * c - d * d, 2 * (b * c - a * d), 2 * (b * d + a * c)],
        [2 * (b * c + a * d), a * a - b * b + c * c - d * d, 2 * (c * d - a * b)],
        [2 * (b * d - a * c), 2 * (c * d + a * b), a * a - b * b - c * c + d * d]])


__all__ = ["random_rotation", "rot3"]
