"""Independent reference computations used to freeze expected values.

Nothing here imports the package under test.
"""

import math

import numpy as np
from scipy import integrate, stats

# frozen values, each derived by the oracle named next to it
SEMINORM_X_A05_P4 = (1.0 / 3.0) ** 0.25            # closed form: 2/((b+1)(b+2)), b = p - a p - 1 = 1
SEMINORM_X2_A05_P4 = (19.0 / 35.0) ** 0.25         # sympy: iint (x+y)^4 |x-y| = 19/35
SEMINORM_X1X2_A05_P4 = (1.0 / 3.0) ** 0.5          # product of two 1-D integrals (1/3)^2, then ^(1/4)
GRR_COEF_A05_P4 = 24.0 * math.sqrt(2.0)            # 8 * 4^(1/4) * (0.75/0.25)
BM_THETA_A04_P4 = 88.69882939461473                # 8 4^(1/4) (0.65/0.15) (6 (1/0.4 - 1/1.4))^(1/4)
GAUSS_ABS_MOMENT_16 = 2027025.0                    # 15!!


def brute_conjugate(x, g, y):
    """``sup_x (x y - g(x))`` by direct maximisation over the samples."""
    x, g, y = (np.asarray(a, float) for a in (x, g, y))
    return np.max(np.outer(y, x) - g[None, :], axis=1)


def gagliardo_quad(fn, alpha, p):
    """``(iint |f(x)-f(y)|^p / |x-y|^(alpha p + 1))^(1/p)`` by adaptive quadrature.

    Uses ``y = x + u`` with ``u > 0`` and doubles the triangle.
    """
    def inner(u, x):
        return abs(fn(x + u) - fn(x)) ** p / u ** (alpha * p + 1)

    val, _ = integrate.dblquad(inner, 0.0, 1.0, lambda x: 0.0, lambda x: 1.0 - x,
                               epsabs=1e-13, epsrel=1e-11)
    return (2.0 * val) ** (1.0 / p)


def fundamental_dense(log_psi, lo, hi, delta, n=200001):
    """``sup_p delta^(1/p) / psi(p)`` on a dense grid of ``(lo, hi)``."""
    p = np.linspace(lo, hi, n)[1:-1]
    return float(np.max(np.exp(np.log(delta) / p - log_psi(p))))


def gaussian_abs_moment(p):
    return float(stats.norm.expect(lambda z: abs(z) ** p))


def grr_coefficient(alphas, p):
    d = len(alphas)
    return 8.0 ** d * 4.0 ** (d / p) * math.prod((a + 1 / p) / (a - 1 / p) for a in alphas)
