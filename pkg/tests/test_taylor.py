import math

import numpy as np
import pytest

from segccm.libs import taylor
from segccm.libs.taylor import Jet


def test_jet_arithmetic():
    a = Jet([1.0, 2.0, 3.0])
    b = Jet([2.0, -1.0, 0.5])
    np.testing.assert_allclose((a * b).c, [2.0, 3.0, 4.5])
    np.testing.assert_allclose(((a * b) / b).c, a.c)
    np.testing.assert_allclose((2.0 - a).c, [1.0, -2.0, -3.0])
    np.testing.assert_allclose((a ** 2).c, (a * a).c)
    np.testing.assert_allclose((1.0 / Jet([1.0, -1.0, 0.0])).c, [1.0, 1.0, 1.0])


def test_jet_sqrt():
    a = Jet([4.0, 1.0, -0.5, 2.0])
    root = taylor.sqrt(a)
    np.testing.assert_allclose((root * root).c, a.c)
    assert taylor.sqrt(9.0) == 3.0
    with pytest.raises(ValueError):
        Jet([0.0, 1.0]).sqrt()


def test_jet_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        Jet([1.0, 1.0]) / Jet([0.0, 1.0])


def test_numpy_scalars_defer_to_jets():
    result = np.float64(2.0) * Jet([1.0, 1.0])
    assert isinstance(result, Jet)
    np.testing.assert_allclose(result.c, [2.0, 2.0])


def test_flow_coefficients_exponential():
    coeffs = taylor.flow_coefficients(lambda s: [s[0]], [1.0], 6)
    np.testing.assert_allclose(coeffs[:, 0], [1 / math.factorial(k) for k in range(7)])


def test_time_derivatives_rotation():
    # x' = -y, y' = x from (1, 0): x = cos t
    values = taylor.time_derivatives(lambda s: [-s[1], s[0]], [1.0, 0.0], [1.0, 0.0], 5)
    np.testing.assert_allclose(values, [1.0, 0.0, -1.0, 0.0, 1.0], atol=1e-12)


def test_coefficient_of_constant():
    assert taylor.coefficient(3.0, 0) == 3.0
    assert taylor.coefficient(3.0, 2) == 0.0
