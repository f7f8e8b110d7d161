"""Exponential dichotomy detection and its persistence under perturbation.

Hyperbolicity of the dynamics is read off the time-1 operator: the flow has
an exponential dichotomy exactly when that operator has no spectrum on the
unit circle. For a nonautonomous family the time-1 operators U(t, t-1) are
sampled over t; the roughness experiment scales a unit-size perturbation
shape by eps and watches whether hyperbolicity and the spectral gap survive.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .errors import NotInvertible, OutOfInterval, PreconditionViolated, ToleranceNotReached
from .evofam import EvolutionFamilyApprox, PerturbationFamily, refine_to_tolerance
from .linop import COND_LIMIT, Operator, norm_of, _condition_1norm
from .metrics import ANormEvaluator
from .semigroup import GrowthBound, expm, fit_growth_bound

CIRCLE_TOL = 1e-9
EIG_COND_LIMIT = 1e8
K_MAX = 20


@dataclass(frozen=True)
class DichotomyReport:
    """Spectral splitting of a time-1 operator into stable and unstable parts.

    reliable is False when the eigenvector basis is too ill-conditioned for
    the projector to be trusted; the report is still returned.
    """

    hyperbolic: bool
    spectral_gap: float
    stable_rank: int
    projector: Operator
    alpha: float
    m_dich: float
    eigenvalues: tuple
    reliable: bool
    eig_cond: float


def _inverse(m: np.ndarray) -> np.ndarray:
    lu, piv = lu_factor(m)
    diag = np.abs(np.diag(lu))
    if np.any(diag == 0.0):
        raise NotInvertible("time-1 operator is exactly singular")
    cond = _condition_1norm(m, lu, piv)
    if cond > COND_LIMIT:
        raise NotInvertible(f"time-1 operator condition {cond:.3e} exceeds {COND_LIMIT:.0e}")
    return lu_solve((lu, piv), np.eye(m.shape[0]))


def check_hyperbolic(t1: Operator, k_max: int = K_MAX) -> DichotomyReport:
    """Dichotomy report for a time-1 propagator.

    The stable projector sums the spectral projectors of eigenvalues inside
    the unit circle and is symmetrized against its complement. The constant
    m_dich is fitted as the smallest M with ||T^k P|| <= M e^{-alpha k} and
    ||T^{-k}(I - P)|| <= M e^{-alpha k} for k up to k_max.
    """
    t1_inv = _inverse(t1.entries)
    eigvals, vecs = np.linalg.eig(t1.entries)
    moduli = np.abs(eigvals)
    hyperbolic = bool(np.min(np.abs(moduli - 1.0)) > CIRCLE_TOL)
    gap = float(np.min(np.abs(np.log(moduli))))
    stable = moduli < 1.0
    eig_cond = float(np.linalg.cond(vecs, 2))
    reliable = bool(np.isfinite(eig_cond) and eig_cond <= EIG_COND_LIMIT)
    try:
        vinv = np.linalg.inv(vecs)
    except np.linalg.LinAlgError:
        vinv = np.linalg.pinv(vecs)
        reliable = False
    p_raw = (vecs * stable[None, :]) @ vinv
    q_raw = (vecs * (~stable)[None, :]) @ vinv
    p = np.real(p_raw + (np.eye(t1.dim) - q_raw)) / 2.0
    alpha = gap
    m_dich = 0.0
    p_pow = p.copy()
    u_pow = np.eye(t1.dim) - p
    for k in range(k_max + 1):
        decay = math.exp(-alpha * k)
        m_dich = max(
            m_dich,
            norm_of(p_pow, t1.norm_kind) / decay,
            norm_of(u_pow, t1.norm_kind) / decay,
        )
        p_pow = t1.entries @ p_pow
        u_pow = t1_inv @ u_pow
    return DichotomyReport(
        hyperbolic=hyperbolic,
        spectral_gap=gap,
        stable_rank=int(np.count_nonzero(stable)),
        projector=Operator(p, t1.norm_kind),
        alpha=alpha,
        m_dich=float(m_dich),
        eigenvalues=tuple(complex(z) for z in eigvals),
        reliable=reliable,
        eig_cond=eig_cond,
    )


def autonomous_dichotomy(a: Operator) -> DichotomyReport:
    """Dichotomy report of the constant-coefficient flow, via its time-1 map."""
    return check_hyperbolic(expm(a, 1.0))


@dataclass(frozen=True)
class ProximityReport:
    """How far the perturbed time-1 maps sit from the unperturbed one.

    bound is e^{4 omega1} omega1 with omega1 = sup_t ||B(t)||_A; it is the
    target estimate and can be violated when the unperturbed flow has strict
    exponential growth. bound_growth_adjusted = omega1 M^2 e^{omega0 + M^2 omega1}
    folds the growth certificate of A back in and is the one that holds
    unconditionally at this scale.
    """

    sup_diff: float
    bound: float
    bound_growth_adjusted: float
    omega1: float
    samples: tuple

    def __iter__(self):
        return iter((self.sup_diff, self.bound))


def perturbation_proximity(
    u: EvolutionFamilyApprox,
    a: Operator,
    t_samples=None,
    gb: GrowthBound | None = None,
    anorm: ANormEvaluator | None = None,
) -> ProximityReport:
    """sup_t ||U(t, t-1) - e^A|| against e^{4 omega1} omega1."""
    p = u.partition
    if t_samples is None:
        if p.b - p.a < 1.0:
            raise OutOfInterval("interval shorter than 1; no time-1 map fits")
        t_samples = np.linspace(p.a + 1.0, p.b, 9)
    for t in t_samples:
        if not (p.a <= t - 1.0 and t <= p.b):
            raise OutOfInterval(f"t={t} needs [t-1, t] inside [{p.a}, {p.b}]")
    gb = gb or fit_growth_bound(a)
    evaluator = anorm or ANormEvaluator(a, gb)
    omega1 = u.family.sup_anorm(evaluator)
    e_a = expm(a, 1.0).entries
    samples = []
    sup_diff = 0.0
    for t in t_samples:
        d = norm_of(u.evaluate(float(t), float(t) - 1.0).entries - e_a, a.norm_kind)
        samples.append((float(t), float(d)))
        sup_diff = max(sup_diff, float(d))
    bound = math.exp(4.0 * omega1) * omega1
    adjusted = omega1 * gb.m ** 2 * math.exp(gb.omega0 + gb.m ** 2 * omega1)
    return ProximityReport(
        sup_diff=sup_diff,
        bound=bound,
        bound_growth_adjusted=adjusted,
        omega1=float(omega1),
        samples=tuple(samples),
    )


@dataclass(frozen=True)
class SweepRow:
    """One (eps, t) sample of the roughness sweep."""

    t: float
    report: DichotomyReport
    sup_diff: float


@dataclass(frozen=True)
class EpsSweepResult:
    """All time samples for one perturbation size eps."""

    eps: float
    rows: tuple
    persisted: bool
    bound: float
    gap_floor: float
    refine_error: str | None
    achieved_delta: float


def roughness_sweep(
    a: Operator,
    shape: PerturbationFamily,
    eps_list,
    t_samples=None,
    gb: GrowthBound | None = None,
    n_max: int = 14,
    rng=None,
) -> list:
    """Scale a unit-size perturbation shape by each eps and test persistence.

    The shape is renormalized so sup_t ||shape(t)||_A = 1, hence omega1 = eps
    exactly. For each eps the polygon family is refined to
    tol = min(1e-4, eps/100) (floored at 1e-4 for the eps = 0 row) and the
    time-1 maps are tested for hyperbolicity. persisted means every sample is
    hyperbolic with spectral gap at least alpha/2 - e^{4 eps} eps. Refinement
    failures are recorded on the row and the sweep continues.
    """
    base = autonomous_dichotomy(a)
    if not base.hyperbolic:
        raise PreconditionViolated("unperturbed generator has spectrum on the unit circle")
    gb = gb or fit_growth_bound(a)
    evaluator = ANormEvaluator(a, gb)
    scale = shape.sup_anorm(evaluator)
    if scale <= 0.0:
        raise PreconditionViolated("perturbation shape is identically zero")
    unit = shape.scale(1.0 / scale)
    t0, t1 = unit.interval
    if t_samples is None:
        if t1 - t0 < 1.0:
            raise OutOfInterval("interval shorter than 1; no time-1 map fits")
        t_samples = np.linspace(t0 + 1.0, t1, 5)
    e_a = expm(a, 1.0).entries
    out = []
    for eps in eps_list:
        eps = float(eps)
        family = unit.scale(eps)
        tol = min(1e-4, eps / 100.0) if eps > 0.0 else 1e-4
        try:
            refined = refine_to_tolerance(a, family, gb, tol, n_max=n_max, rng=rng, anorm=evaluator)
        except ToleranceNotReached as exc:
            out.append(
                EpsSweepResult(
                    eps=eps,
                    rows=(),
                    persisted=False,
                    bound=math.exp(4.0 * eps) * eps,
                    gap_floor=base.alpha / 2.0 - math.exp(4.0 * eps) * eps,
                    refine_error=str(exc),
                    achieved_delta=float(exc.best_delta),
                )
            )
            continue
        u = refined.approx
        rows = []
        for t in t_samples:
            t1_op = u.evaluate(float(t), float(t) - 1.0)
            rows.append(
                SweepRow(
                    t=float(t),
                    report=check_hyperbolic(t1_op),
                    sup_diff=float(norm_of(t1_op.entries - e_a, a.norm_kind)),
                )
            )
        floor = base.alpha / 2.0 - math.exp(4.0 * eps) * eps
        persisted = all(r.report.hyperbolic and r.report.spectral_gap >= floor for r in rows)
        out.append(
            EpsSweepResult(
                eps=eps,
                rows=tuple(rows),
                persisted=bool(persisted),
                bound=math.exp(4.0 * eps) * eps,
                gap_floor=floor,
                refine_error=None,
                achieved_delta=refined.achieved_delta,
            )
        )
    return out
