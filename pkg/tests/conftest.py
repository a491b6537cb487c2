import math

import numpy as np
import pytest
from scipy import integrate

ACCEPTANCE_LINES = []


def record_line(line):
    """Print an acceptance verdict and keep it for the end-of-run summary."""
    print(line)
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def quad_cos_power(n, tau):
    """Brute-force I_n(tau) by scipy adaptive quadrature."""
    val, _ = integrate.quad(lambda x: math.cos(x) ** (n - 1), 0.0, tau, epsabs=0, epsrel=1e-13, limit=200)
    return val


def quad_sin_power(n, tau):
    val, _ = integrate.quad(lambda x: math.sin(x) ** (n - 1), 0.0, tau, epsabs=0, epsrel=1e-13, limit=200)
    return val


def composite_log_cos_power(n, tau, panels=4000):
    """ln I_n(tau) by a composite Gauss-Legendre rule summed in log space (large-n oracle)."""
    x, w = np.polynomial.legendre.leggauss(20)
    edges = np.linspace(0.0, tau, panels + 1)
    a, b = edges[:-1], edges[1:]
    nodes = 0.5 * (a + b)[:, None] + 0.5 * (b - a)[:, None] * x[None, :]
    logs = (n - 1) * np.log(np.cos(nodes)) + np.log(0.5 * (b - a))[:, None] + np.log(w)[None, :]
    top = logs.max()
    return top + math.log(np.exp(logs - top).sum())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
