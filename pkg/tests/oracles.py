"""Frozen reference values for the test suite, derived independently.

Every constant here was computed from a closed form stated next to it, not
from the library under test, and is frozen so a regression in the library
cannot silently move the expectation.
"""
import math

# Diagonal nonautonomous system A = diag(-1, -2), B(t) = sin(t) diag(0.5, 0.3)
# on [0, 1]: the equation decouples into scalars u' = (a + c sin t) u, whose
# solution at t = 1 is exp(a + c (1 - cos 1)).
DIAG_U11 = 0.46294308781645194  # exp(-1 + 0.5 (1 - cos 1))
DIAG_U22 = 0.15534750686729865  # exp(-2 + 0.3 (1 - cos 1))

# Scalar polygon example a = -1, b(t) = sin t on [0, 1]:
# exp(int_0^1 (-1 + sin tau) dtau) = exp(-cos 1).
SCALAR_POLY = 0.58257211078330851

# Yosida approximant of a scalar a at parameter lam: lam^2/(lam - a) - lam
# = lam a / (lam - a); for a = -1, lam = 9 this is -0.9 exactly.
YOSIDA_SCALAR = -0.9

# lam^2 (1/(lam - 2) - 1/(lam + 1)) = 3 lam^2 / ((lam - 2)(lam + 1)) -> 3,
# the scalar Yosida-distance limit for diag(2, 0) vs diag(-1, 0).
YDIST_DIAG_LIMIT = 3.0

# Discrete 1-mass of the truncated spike sum with n_max = 3: each spike n
# contributes n^2 * n^-4 = n^-2, so the exact mass is 1 + 1/4 + 1/9.
SPIKE_MASS_3 = 1.3611111111111112

# sup_{|t-s| <= h} |sin t - sin s| = 2 sin(h/2) for h <= pi (attained by a
# symmetric pair around a peak).
def sin_modulus(h: float) -> float:
    return 2.0 * math.sin(h / 2.0)
