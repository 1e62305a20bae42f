import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oddrep.bessel import REL_ERROR, bessel_k0, bessel_k01, bessel_k1, k0_upper_bound
from oddrep.errors import NonPositiveArgument

mpmath.mp.dps = 40


def _ref(nu, x):
    return float(mpmath.besselk(nu, x))


def test_grid_against_mpmath():
    xs = np.concatenate([np.logspace(-6, 2.6, 400), [1.999999, 2.0, 2.000001]])
    k0, k1 = bessel_k01(xs)
    for x, a, b in zip(xs, k0, k1):
        assert abs(a / _ref(0, x) - 1) < REL_ERROR
        assert abs(b / _ref(1, x) - 1) < REL_ERROR


@given(st.floats(1e-4, 300.0))
@settings(max_examples=200, deadline=None)
def test_random_points(x):
    ev = bessel_k0(x)
    assert abs(ev.k0 / _ref(0, x) - 1) < ev.rel_error
    assert abs(bessel_k1(x).k1 / _ref(1, x) - 1) < ev.rel_error


def test_scaled():
    xs = np.array([0.5, 1.5, 2.5, 10.0, 100.0, 700.0])
    k0, k1 = bessel_k01(xs, scaled=True)
    for x, a, b in zip(xs, k0, k1):
        assert abs(a / float(mpmath.besselk(0, x) * mpmath.exp(x)) - 1) < REL_ERROR
        assert abs(b / float(mpmath.besselk(1, x) * mpmath.exp(x)) - 1) < REL_ERROR


def test_upper_bound():
    for x in np.logspace(-2, 2, 50):
        assert bessel_k0(x).k0 <= k0_upper_bound(x)


def test_wronskian_like_identity():
    # K1 = -K0' checked by a central difference
    for x in (0.3, 1.0, 2.0, 5.0, 20.0):
        h = 1e-5 * x
        d = (bessel_k0(x + h).k0 - bessel_k0(x - h).k0) / (2 * h)
        assert d == pytest.approx(-bessel_k1(x).k1, rel=1e-8)


def test_rejects_nonpositive():
    with pytest.raises(NonPositiveArgument):
        bessel_k01(0.0)
    with pytest.raises(NonPositiveArgument):
        bessel_k01(np.array([1.0, -2.0]))
    assert math.isfinite(bessel_k0(1e-300).k0)
