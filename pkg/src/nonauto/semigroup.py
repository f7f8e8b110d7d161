"""Matrix semigroups T_A(t) = e^{tA}: exponentials, growth certificates, Yosida approximants.

A growth certificate (M, omega0) asserts ||e^{tA}|| <= M e^{omega0 t} on a
verified horizon. Certificates are fitted from the spectral abscissa plus a
margin, with M read off a sampled grid and re-verified on a doubled grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import Overflow, PreconditionViolated
from .linop import NormKind, Operator, identity, norm_of, op_norm, resolvent, spectrum

# Safety inflation applied to a fitted M and to checked bounds.
FIT_INFLATION = 1e-6
BOUND_SLACK = 1e-6
# 1-norm of the scaled argument above which scipy's expm overflows doubles.
EXP_ARG_LIMIT = 700.0


@dataclass(frozen=True)
class GrowthBound:
    """Certificate ||e^{tA}|| <= m e^{omega0 t}, sampled up to verified_horizon.

    verified_horizon and margin are fitting bookkeeping; a certificate known
    a priori (a contraction, say) carries the defaults.
    """

    m: float
    omega0: float
    verified_horizon: float = float("inf")
    margin: float = 0.0

    def __post_init__(self):
        if not (self.m >= 1.0):
            raise PreconditionViolated(f"growth constant m must be >= 1, got {self.m}")

    def envelope(self, t: float) -> float:
        return self.m * math.exp(self.omega0 * t)


@dataclass(frozen=True)
class BoundCheck:
    """Outcome of sampling an inequality lhs(t) <= rhs(t) over a grid."""

    passed: bool
    max_ratio: float
    worst_t: float


def expm(a: Operator, t: float = 1.0) -> Operator:
    """e^{tA} by scaling and squaring with Pade approximants (scipy backend)."""
    if t < 0.0:
        raise PreconditionViolated(f"expm wants t >= 0, got {t}")
    arg = t * a.entries
    result = scipy.linalg.expm(arg)
    if not np.all(np.isfinite(result)):
        anorm = float(np.abs(arg).sum(axis=0).max())
        squarings = max(0, math.ceil(math.log2(max(anorm, 1.0) / EXP_ARG_LIMIT)))
        raise Overflow(f"e^(tA) overflows doubles at t={t!r} (1-norm {anorm:.3e})", required_squarings=squarings)
    return Operator(result, a.norm_kind)


# Order-13 Pade coefficients and the 1-norm threshold under which the
# approximant is accurate to double precision.
_PADE13_B = (
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0, 129060195264000.0, 10559470521600.0,
    670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
    960960.0, 16380.0, 182.0, 1.0,
)
_PADE13_THETA = 5.371920351148152


def expm_stack(mats: np.ndarray) -> np.ndarray:
    """Batched e^{M_j} for a (k, d, d) stack of raw matrices (internal fast path).

    Scaling and squaring with one order-13 Pade solve over the whole stack;
    scipy's expm walks a stack matrix by matrix, whose per-call overhead
    dominates dyadic refinement at small dimensions.
    """
    mats = np.asarray(mats, dtype=float)
    if mats.shape[0] == 0:
        return mats.copy()
    if not np.all(np.isfinite(mats)):
        raise Overflow("a cell exponential overflows doubles")
    norms = np.abs(mats).sum(axis=1).max(axis=1)
    s = np.ceil(np.log2(np.maximum(norms, _PADE13_THETA) / _PADE13_THETA)).astype(int)
    x = mats / np.exp2(s)[:, None, None]
    b = _PADE13_B
    eye = np.eye(mats.shape[-1])
    x2 = x @ x
    x4 = x2 @ x2
    x6 = x2 @ x4
    u = x @ (x6 @ (b[13] * x6 + b[11] * x4 + b[9] * x2) + b[7] * x6 + b[5] * x4 + b[3] * x2 + b[1] * eye)
    v = x6 @ (b[12] * x6 + b[10] * x4 + b[8] * x2) + b[6] * x6 + b[4] * x4 + b[2] * x2 + b[0] * eye
    out = np.linalg.solve(v - u, v + u)
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, int(s.max()) + 1):
            sel = s >= k
            out[sel] = out[sel] @ out[sel]
    if not np.all(np.isfinite(out)):
        raise Overflow("a cell exponential overflows doubles")
    return out


def yosida_approx(a: Operator, lam: float) -> Operator:
    """Yosida approximant A_lambda = lambda^2 R(lambda, A) - lambda I.

    Equals lambda A R(lambda, A); the bounded approximant whose semigroups
    converge to e^{tA} as lambda grows. lam must exceed the growth bound
    omega0 of A, otherwise the resolvent solve itself refuses.
    """
    r = resolvent(a, lam)
    return Operator(lam * lam * r.entries - lam * np.eye(a.dim), a.norm_kind)


def _envelope_ratios(a: Operator, ts: np.ndarray, omega0: float) -> np.ndarray:
    exps = expm_stack(ts[:, None, None] * a.entries[None, :, :])
    return np.array([norm_of(exps[i], a.norm_kind) * math.exp(-omega0 * t) for i, t in enumerate(ts)])


def fit_growth_bound(a: Operator, horizon: float = 5.0, grid_points: int = 257, margin: float = 1e-2) -> GrowthBound:
    """Fit a growth certificate (M, omega0) for A on [0, horizon].

    omega0 is the spectral abscissa plus margin, so ||e^{tA}|| e^{-omega0 t}
    decays eventually and its supremum is read off a sampled grid: M is the
    grid maximum, re-verified on a 2x finer grid, clamped to >= 1 and inflated
    by 1 + FIT_INFLATION against between-node curvature.
    """
    if horizon <= 0.0 or grid_points < 2:
        raise PreconditionViolated("fit_growth_bound wants horizon > 0 and grid_points >= 2")
    omega0 = spectrum(a).abscissa + margin
    coarse = _envelope_ratios(a, np.linspace(0.0, horizon, grid_points), omega0)
    fine = _envelope_ratios(a, np.linspace(0.0, horizon, 2 * grid_points - 1), omega0)
    m = max(1.0, float(coarse.max()), float(fine.max())) * (1.0 + FIT_INFLATION)
    return GrowthBound(m=m, omega0=omega0, verified_horizon=horizon, margin=margin)


def semigroup_diff_bound_check(
    g: Operator,
    h: Operator,
    m: float,
    omega: float,
    tmax: float = 2.0,
    grid: int = 41,
    delta: float | None = None,
) -> BoundCheck:
    """Check ||e^{tG} - e^{tH}|| <= t M^2 e^{4 omega t} delta (1 + slack) on a t-grid.

    delta is the Yosida distance of G and H, which for matrices equals
    ||G - H||; it defaults to the direct norm and can be passed in when the
    caller has computed the distance independently. Both semigroups must obey
    the common certificate (M, omega) on the sampled grid, and omega must be
    >= 0: for omega < 0 the stated e^{4 omega t} factor shrinks faster than
    the true difference decays, so a negative-omega certificate has to be
    relaxed to omega = 0 by the caller.
    """
    g._check(h)
    if omega < 0.0:
        raise PreconditionViolated("semigroup_diff_bound_check wants omega >= 0; relax the certificate to omega = 0")
    if m < 1.0:
        raise PreconditionViolated(f"certificate constant m must be >= 1, got {m}")
    ts = np.linspace(0.0, tmax, grid)
    eg = expm_stack(ts[:, None, None] * g.entries[None, :, :])
    eh = expm_stack(ts[:, None, None] * h.entries[None, :, :])
    for i, t in enumerate(ts):
        envelope = m * math.exp(omega * t) * (1.0 + 1e-9)
        if norm_of(eg[i], g.norm_kind) > envelope or norm_of(eh[i], g.norm_kind) > envelope:
            raise PreconditionViolated(f"certificate (M={m}, omega={omega}) fails at t={t}")
    if delta is None:
        delta = op_norm(g - h)
    max_ratio, worst_t = 0.0, 0.0
    for i, t in enumerate(ts[1:], start=1):
        lhs = norm_of(eg[i] - eh[i], g.norm_kind)
        rhs = t * m * m * math.exp(4.0 * omega * t) * delta * (1.0 + BOUND_SLACK)
        ratio = lhs / rhs if rhs > 0.0 else (0.0 if lhs == 0.0 else float("inf"))
        if ratio > max_ratio:
            max_ratio, worst_t = ratio, float(t)
    return BoundCheck(passed=max_ratio <= 1.0, max_ratio=max_ratio, worst_t=worst_t)


def yosida_semigroup_limit(a: Operator, t: float, lambdas) -> list:
    """Sample ||e^{t A_lambda} - e^{tA}|| over a lambda grid; decays like 1/lambda."""
    target = expm(a, t)
    out = []
    for lam in lambdas:
        approx = expm(yosida_approx(a, float(lam)), t)
        out.append((float(lam), op_norm(approx - target)))
    return out
