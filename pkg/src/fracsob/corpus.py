"""Standard test-function corpora.

Expressions use the syntax of :func:`fracsob.grid.compile_expression`.
Powers carry exponents above every fractional order used by the checks
(0.8), so all seminorms involved are finite.
"""

from __future__ import annotations

__all__ = ["POWERS", "TRIG", "RAMPS", "STANDARD_1D", "FACTORABLE_2D", "TAPERED", "SMALL_1D"]

POWERS = ["x**0.85", "x**0.9", "x", "x**1.25", "x**1.5", "x**2", "x**3"]

TRIG = ["sin(pi*x)", "cos(2*pi*x)", "sin(3*x) + 0.5*cos(7*x)",
        "sin(2*pi*x)**2", "0.3*sin(5*pi*x) - cos(pi*x)", "sin(11*x)*cos(2*x)", "cos(4*x)**3"]

RAMPS = ["clip((x - 0.25)/0.5, 0, 1)", "clip((0.6 - x)/0.2, 0, 1)",
         "abs(x - 0.5)", "minimum(2*x, 1)", "maximum(0, 3*x - 1) - maximum(0, 3*x - 2)",
         "clip(4*x - 1, 0, 1) - clip(4*x - 3, 0, 1)"]

STANDARD_1D = POWERS + TRIG + RAMPS

# per-axis factors, combined pairwise into products on [0,1]^2
FACTORABLE_2D = ["x1**0.7 * x2**0.8", "x1 * sin(pi*x2)", "sin(3*x1) * x2**1.5",
                 "clip(2*x1 - 0.5, 0, 1) * cos(2*x2)", "x1**0.9 * x2**0.9"]

# functions on [0,1]; the dilation check extends them linearly to 0 at x=2
TAPERED = ["x**0.7", "sin(pi*x)**2", "x**2", "x*(1 - x) + x**1.5"]

SMALL_1D = ["x", "x**2", "sin(pi*x)", "exp(x) - 1", "clip(2*x - 0.5, 0, 1)"]
