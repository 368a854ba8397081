import numpy as np
import pytest
from numpy.polynomial import Polynomial

from volterra_lab.measure import Measure, exp_decay


def method_of_steps(a, tau, T):
    """Exact resolvent of ``r'(t) = -a r(t - tau)``, ``r = 1`` on ``[-tau, 0]`` restricted to t >= 0.

    ``r`` is a polynomial of degree ``k`` on ``[k tau, (k+1) tau]``; each piece is the
    integral of the previous one shifted by ``tau``.  Since ``r(t - tau) = 0`` for
    ``t < tau`` in the zero-extension convention, the first piece is the constant 1.
    """
    pieces = [Polynomial([1.0])]
    while len(pieces) * tau < T:
        k = len(pieces)
        prev = pieces[-1]
        integ = (-a * prev(Polynomial([-tau, 1.0]))).integ()
        start = k * tau
        pieces.append(integ - integ(start) + prev(start))

    def r(t):
        t = np.asarray(t, dtype=float)
        k = np.minimum((t / tau + 1e-12).astype(int), len(pieces) - 1)
        out = np.empty_like(t)
        for j, piece in enumerate(pieces):
            sel = k == j
            out[sel] = piece(t[sel])
        return out

    return r


def exp_density_resolvent(t):
    """Resolvent for the density ``-exp(-s)``: inverse Laplace transform of ``(z+1)/(z^2+z+1)``."""
    w = np.sqrt(3.0) / 2
    return np.exp(-t / 2) * (np.cos(w * t) + np.sin(w * t) / (2 * w))


@pytest.fixture
def delta0():
    return Measure(((0.0, -1.0),))


@pytest.fixture
def delay():
    return Measure(((0.5, -1.0),))


@pytest.fixture
def exp_density():
    return Measure((), exp_decay(1.0, 40.0, -1.0))


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE = {}


def record_criterion(number, title, passed, detail=""):
    status = "PASS" if passed else "FAIL"
    line = f"criterion {number:2d} {status}  {title}"
    ACCEPTANCE[number] = line + (f"  [{detail}]" if detail else "")
    print(ACCEPTANCE[number])
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
