import math

import numpy as np
import pytest
from scipy import integrate, special

from mixpois.quadrature import NumericalError, adaptive_gk15


def test_polynomials_are_exact():
    # G7K15 integrates degree <= 22 exactly on one panel
    assert adaptive_gk15(lambda x: x ** 10, 0.0, 2.0) == pytest.approx(2 ** 11 / 11, rel=1e-14)


@pytest.mark.parametrize("f,a,b", [
    (np.exp, -1.0, 3.0),
    (lambda x: np.sin(20 * x) ** 2, 0.0, math.pi),
    (lambda x: np.exp(-x * x / 2), -8.0, 8.0),
    (lambda x: 1 / (1 + 400 * (x - 0.3) ** 2), 0.0, 1.0),
])
def test_agrees_with_scipy_quad(f, a, b):
    ref = integrate.quad(f, a, b, epsabs=1e-13, epsrel=1e-13, limit=500)[0]
    assert adaptive_gk15(f, a, b, atol=1e-12) == pytest.approx(ref, abs=1e-11)


def test_vector_valued_integrand():
    z = np.array([-1.0, 0.0, 2.0])
    out = adaptive_gk15(lambda s: special.ndtr(np.outer(s, z)), 0.5, 1.5, atol=1e-12)
    ref = [integrate.quad(lambda s: special.ndtr(s * zi), 0.5, 1.5)[0] for zi in z]
    assert np.allclose(out, ref, atol=1e-11, rtol=0)


def test_relative_tolerance_on_tiny_integrand():
    f = lambda x: 1e-200 * np.exp(-x)
    assert adaptive_gk15(f, 0.0, 1.0, atol=0.0, rtol=1e-12) == pytest.approx(
        1e-200 * (1 - math.exp(-1)), rel=1e-12)


def test_unresolved_raises_with_achieved_tolerance():
    with pytest.raises(NumericalError) as e:
        adaptive_gk15(lambda x: np.sign(x - 1 / 3), 0.0, 1.0, atol=1e-15, max_level=3)
    assert e.value.achieved > 1e-15
    assert isinstance(e.value, ArithmeticError)
