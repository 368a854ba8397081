import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from volterra_lab.quadrature import (cumulative, cumulative_at, interpolate, snap_index, trapezoid,
                                     trapezoid_convolution)


def direct_sum(a, b, h, a_minus=None, b_minus=None):
    """Panel-by-panel O(n^2) trapezoid convolution, the reference for the FFT path."""
    a_minus = a if a_minus is None else a_minus
    b_minus = b if b_minus is None else b_minus
    out = np.zeros(len(a))
    for i in range(1, len(a)):
        for j in range(i):
            # panel [s_j, s_{j+1}] with one-sided end values
            out[i] += 0.5 * h * (a_minus[i - j] * b[j] + a[i - j - 1] * b_minus[j + 1])
    return out


finite = st.floats(-10, 10, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 60).flatmap(lambda n: st.tuples(*(arrays(float, n, elements=finite) for _ in range(4)))))
def test_fft_convolution_matches_direct_sum(arrs):
    a, b, am, bm = arrs
    h = 0.1
    scale = 1 + np.max(np.abs(arrs)) ** 2
    assert np.allclose(trapezoid_convolution(a, b, h), direct_sum(a, b, h), atol=1e-12 * scale * len(a))
    assert np.allclose(trapezoid_convolution(a, b, h, a_minus=am, b_minus=bm),
                       direct_sum(a, b, h, am, bm), atol=1e-12 * scale * len(a))


def test_convolution_of_exponentials():
    h = 1e-3
    t = np.arange(5001) * h
    out = trapezoid_convolution(np.exp(-t), np.exp(-2 * t), h)
    assert np.allclose(out, np.exp(-t) - np.exp(-2 * t), atol=1e-6)


def test_snap_index():
    k, frac = snap_index(np.array([2.9999999999, 3.0000000001, 2.5, -0.5]))
    assert list(k) == [3, 3, 2, -1]
    assert list(frac) == [0.0, 0.0, 0.5, 0.5]


def test_cumulative_with_jumps():
    # step from 1 to 3 at t = 1, both one-sided values given at the node
    h = 0.5
    plus = np.array([1.0, 1.0, 3.0, 3.0, 3.0])
    minus = np.array([1.0, 1.0, 1.0, 3.0, 3.0])
    C = cumulative(plus, h, minus)
    assert C[-1] == pytest.approx(1.0 + 3.0)
    assert cumulative_at(C, plus, h, [1.25], minus)[0] == pytest.approx(1.75)
    with pytest.raises(IndexError):
        cumulative_at(C, plus, h, [2.5], minus)


def test_cumulative_at_nodes_matches_cumulative():
    h = 0.01
    v = np.cos(np.arange(101) * h)
    C = cumulative(v, h)
    assert np.array_equal(cumulative_at(C, v, h, np.arange(101) * h), C)


def test_interpolate_and_trapezoid():
    v = np.array([0.0, 1.0, 4.0])
    assert interpolate(v, 1.0, 1.5) == pytest.approx(2.5)
    assert interpolate(v, 1.0, -0.2) == 0.0
    assert trapezoid(v, 1.0) == pytest.approx(3.0)
    assert trapezoid(v, 1.0, 1.5) == pytest.approx(0.5 + 0.5 * (1.0 + 2.5) / 2)
