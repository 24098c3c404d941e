import math

import numpy as np
import pytest

from simpcoord.errors import OutOfRangeError
from simpcoord.quadrature import integrate


def test_polynomial_exact():
    assert integrate(lambda t: t ** 5 - 2 * t, 0.0, 2.0) == pytest.approx(64 / 6 - 4, rel=1e-15)


def test_vectorized_limits():
    b = np.array([0.5, 1.0, 2.0, -1.0])
    np.testing.assert_allclose(integrate(np.cos, 0.0, b), np.sin(b), rtol=1e-14)


def test_sharp_integrand():
    val = integrate(lambda t: np.exp(-200 * t * t), 0.0, 5.0)
    assert val == pytest.approx(0.5 * math.sqrt(math.pi / 200), rel=1e-13)


def test_rejects_infinite_limit():
    with pytest.raises(OutOfRangeError):
        integrate(np.cos, 0.0, np.inf)
