"""Composite trapezoid helpers shared by every module.

All sampled functions are allowed to jump at grid nodes.  A panel
``[t_k, t_{k+1}]`` is always integrated with the right limit at its left
end and the left limit at its right end, so piecewise smooth integrands
with breakpoints on the grid keep second-order accuracy.
"""
import numpy as np
from scipy import signal

# relative tolerance used to decide that a time sits on a grid node
SNAP = 1e-9


def snap_index(u):
    """Return ``(k, frac)`` with ``u = k + frac``, snapping near-integers."""
    u = np.asarray(u, dtype=float)
    k = np.floor(u)
    frac = u - k
    up = frac > 1.0 - SNAP * np.maximum(1.0, np.abs(u))
    k = np.where(up, k + 1, k)
    frac = np.where(up, 0.0, frac)
    frac = np.where(frac < SNAP * np.maximum(1.0, np.abs(u)), 0.0, frac)
    return k.astype(np.int64), frac


def cumulative(plus, h, minus=None):
    """Cumulative trapezoid ``C[i] = int_0^{t_i}`` of a sampled function."""
    plus = np.asarray(plus, dtype=float)
    minus = plus if minus is None else np.asarray(minus, dtype=float)
    out = np.empty_like(plus)
    out[0] = 0.0
    np.cumsum(0.5 * h * (plus[:-1] + minus[1:]), out=out[1:])
    return out


def cumulative_at(C, plus, h, u, minus=None):
    """Evaluate the cumulative integral at arbitrary times ``u``.

    Inside a panel the integrand is taken as the straight line between the
    one-sided end values, and the partial panel is integrated exactly.
    """
    minus = plus if minus is None else minus
    n = len(C)
    k, frac = snap_index(np.asarray(u, dtype=float) / h)
    if np.any(k < 0) or np.any(k > n - 1) or np.any((k == n - 1) & (frac > 0)):
        raise IndexError("cumulative_at: time outside the sampled range")
    kk = np.minimum(k, n - 2)
    a = plus[kk]
    b = minus[kk + 1]
    # the partial panel vanishes for on-node queries, including the last node
    partial = np.where(frac > 0, frac * h * (a + 0.5 * frac * (b - a)), 0.0)
    return C[k] + partial


def interpolate(values, h, u):
    """Linear interpolation of node values at times ``u`` (zero for u < 0)."""
    u = np.asarray(u, dtype=float)
    n = len(values)
    k, frac = snap_index(u / h)
    neg = k < 0
    k = np.clip(k, 0, n - 1)
    k1 = np.minimum(k + 1, n - 1)
    out = values[k] * (1.0 - frac) + values[k1] * frac
    return np.where(neg, 0.0, out)


def convolve_full(a, b):
    """First ``len(a)`` entries of the discrete convolution ``a * b``."""
    n = len(a)
    return signal.convolve(a, b, mode="full", method="auto")[:n]


def trapezoid_convolution(a, b, h, a_minus=None, b_minus=None):
    """``int_0^{t_i} a(t_i - s) b(s) ds`` for every node, by trapezoid.

    ``a`` and ``b`` hold right limits at the nodes; ``a_minus`` and
    ``b_minus`` hold left limits (defaulting to the right limits).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) != len(b):
        raise ValueError("trapezoid_convolution: length mismatch")
    same_a = a_minus is None
    same_b = b_minus is None
    a_minus = a if same_a else np.asarray(a_minus, dtype=float)
    b_minus = b if same_b else np.asarray(b_minus, dtype=float)
    if same_a and same_b:
        out = h * convolve_full(a, b)
        out -= 0.5 * h * (a[0] * b + a * b[0])
        return out
    # panel [s_j, s_{j+1}]: a(t_i - s) leaves t_{i-j} from below, b(s_j) from above
    out = convolve_full(a_minus, b) - a_minus[0] * b
    out += convolve_full(a, b_minus) - a * b_minus[0]
    return 0.5 * h * out


def trapezoid(values, h, upto=None):
    """Trapezoid integral of node values over ``[0, upto]``."""
    values = np.asarray(values, dtype=float)
    t_last = (len(values) - 1) * h
    if upto is None or upto >= t_last:
        if len(values) < 2:
            return 0.0
        return float(h * (values.sum() - 0.5 * (values[0] + values[-1])))
    C = cumulative(values, h)
    return float(cumulative_at(C, values, h, upto))
