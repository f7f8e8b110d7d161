"""Perturbation size measured against a reference generator A.

The central quantity is the resolvent-weighted norm
    ||C||_A = (1/M) sup_{mu > omega0} (mu - omega0) ||C R(mu, A)||,
with (M, omega0) a growth certificate for A. The supremum is sampled on a
geometric mu-grid and completed by its exact large-mu tail op_norm(C)/M.
The Yosida distance d_Y(A, B) = limsup lambda^2 ||R(lambda,A) - R(lambda,B)||
is evaluated in the cancellation-free factored form
    lambda^2 R(lambda, A) (A - B) R(lambda, B).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, PreconditionViolated, SingularResolvent, TailNotSettled
from .linop import NormKind, Operator, norm_of, op_norm, resolvent, spectrum, two_norm_stack
from .semigroup import BOUND_SLACK, BoundCheck, GrowthBound, expm_stack

LAMBDA_CEILING = 1e8
# Fraction of mu-grid points that may fail to solve before a_norm gives up.
SKIP_BUDGET = 0.10
TAIL_REL = 1e-3
TAIL_ABS = 1e-9


@dataclass(frozen=True)
class MuGrid:
    """Geometric grid of offsets mu - omega0 used to sample the supremum."""

    min_offset: float = 1e-3
    max_offset: float = 1e8
    points_per_decade: int = 20

    def offsets(self) -> np.ndarray:
        if not (0.0 < self.min_offset < self.max_offset):
            raise PreconditionViolated("MuGrid wants 0 < min_offset < max_offset")
        decades = math.log10(self.max_offset / self.min_offset)
        count = max(2, round(decades * self.points_per_decade) + 1)
        return np.geomspace(self.min_offset, self.max_offset, count)


@dataclass(frozen=True)
class ANormResult:
    """Value of ||C||_A with the mu realising it (inf means the tail did)."""

    value: float
    argmax_mu: float
    m: float
    omega0: float
    skipped: int
    total: int


class ANormEvaluator:
    """Shared mu-grid resolvents of a fixed A, reused across many C.

    Building the grid costs one resolvent solve per mu; each evaluation is
    then a batched multiply. Grid points whose resolvent cannot be solved are
    skipped and counted; more than SKIP_BUDGET of them is an error.
    """

    def __init__(self, a: Operator, gb: GrowthBound, grid: MuGrid | None = None):
        self.a = a
        self.gb = gb
        self.grid = grid or MuGrid()
        offsets = self.grid.offsets()
        kept_mus, kept_res, skipped = [], [], 0
        for off in offsets:
            mu = gb.omega0 + float(off)
            try:
                kept_res.append(resolvent(a, mu).entries)
                kept_mus.append(mu)
            except SingularResolvent:
                skipped += 1
        if skipped > SKIP_BUDGET * len(offsets):
            raise SingularResolvent(
                f"{skipped} of {len(offsets)} mu-grid points unsolvable; grid does not cover (omega0, inf)"
            )
        self.skipped = skipped
        self.total = len(offsets)
        self._mus = np.array(kept_mus)
        self._stack = np.stack(kept_res) if kept_res else np.zeros((0, a.dim, a.dim))
        self._weights = self._mus - gb.omega0

    def sweep(self, c: Operator) -> list:
        """Per-mu samples (mu, (mu - omega0) ||C R(mu, A)|| / M)."""
        self.a._check(c)
        products = c.entries @ self._stack
        kind = self.a.norm_kind
        if kind is NormKind.ONE:
            norms = np.abs(products).sum(axis=1).max(axis=1)
        elif kind is NormKind.INF:
            norms = np.abs(products).sum(axis=2).max(axis=1)
        else:
            norms = two_norm_stack(products)
        scaled = self._weights * norms / self.gb.m
        return [(float(mu), float(v)) for mu, v in zip(self._mus, scaled)]

    def value(self, c: Operator) -> ANormResult:
        samples = self.sweep(c)
        tail = op_norm(c) / self.gb.m
        best_mu, best = float("inf"), tail
        for mu, v in samples:
            if v > best:
                best_mu, best = mu, v
        return ANormResult(
            value=best,
            argmax_mu=best_mu,
            m=self.gb.m,
            omega0=self.gb.omega0,
            skipped=self.skipped,
            total=self.total,
        )

    def value_stack(self, mats: np.ndarray) -> np.ndarray:
        """Norm values for a whole (k, d, d) stack at once; no argmax bookkeeping."""
        mats = np.asarray(mats, dtype=float)
        if mats.ndim != 3 or mats.shape[-2:] != (self.a.dim, self.a.dim):
            raise DimensionMismatch(f"expected a (k, {self.a.dim}, {self.a.dim}) stack, got {mats.shape}")
        if mats.shape[0] == 0:
            return np.zeros(0)
        kind = self.a.norm_kind
        n_mu = self._stack.shape[0]
        # Cap the intermediate (chunk, n_mu, d, d) product tensor at ~64 MB.
        chunk = max(1, int(8e6 / max(1, n_mu * self.a.dim**2)))
        out = np.empty(mats.shape[0])
        for lo in range(0, mats.shape[0], chunk):
            part = mats[lo : lo + chunk]
            products = part[:, None] @ self._stack[None]
            if kind is NormKind.ONE:
                norms = np.abs(products).sum(axis=2).max(axis=2)
                tails = np.abs(part).sum(axis=1).max(axis=1)
            elif kind is NormKind.INF:
                norms = np.abs(products).sum(axis=3).max(axis=2)
                tails = np.abs(part).sum(axis=2).max(axis=1)
            else:
                norms = two_norm_stack(products.reshape(-1, *products.shape[2:])).reshape(products.shape[:2])
                tails = two_norm_stack(part)
            scaled = (self._weights[None, :] * norms).max(axis=1)
            out[lo : lo + chunk] = np.maximum(scaled, tails) / self.gb.m
        return out


def a_norm(c: Operator, a: Operator, gb: GrowthBound, grid: MuGrid | None = None) -> ANormResult:
    """||C||_A over the sampled mu-grid plus the exact tail op_norm(C)/M."""
    return ANormEvaluator(a, gb, grid).value(c)


@dataclass(frozen=True)
class YosidaDistance:
    """Tail value of lambda^2 ||R(lambda,A) - R(lambda,B)|| with its spread."""

    value: float
    uncertainty: float
    samples: tuple


def default_lambda_grid(a: Operator, b: Operator, points_per_decade: int = 4) -> np.ndarray:
    lo = max(10.0, 4.0 * max(spectrum(a).abscissa, spectrum(b).abscissa, 0.25))
    decades = math.log10(LAMBDA_CEILING / lo)
    return np.geomspace(lo, LAMBDA_CEILING, max(4, round(decades * points_per_decade) + 1))


def yosida_distance(a: Operator, b: Operator, lambdas=None) -> YosidaDistance:
    """d_Y(A, B) from the factored tail lambda^2 R(lambda,A)(A - B) R(lambda,B).

    Reads the value at the largest lambda and reports the spread of the last
    three samples as uncertainty; an unsettled tail is an error since the
    limsup has then not been reached on this grid.
    """
    a._check(b)
    lams = np.asarray(default_lambda_grid(a, b) if lambdas is None else np.sort(np.asarray(lambdas, dtype=float)))
    if lams.size < 3:
        raise PreconditionViolated("yosida_distance wants at least 3 lambda samples")
    if lams[-1] > LAMBDA_CEILING * (1.0 + 1e-12):
        raise PreconditionViolated(f"lambda grid exceeds ceiling {LAMBDA_CEILING:.0e}")
    diff = a.entries - b.entries
    samples = []
    for lam in lams:
        ra = resolvent(a, float(lam)).entries
        rb = resolvent(b, float(lam)).entries
        samples.append((float(lam), float(lam) ** 2 * norm_of(ra @ diff @ rb, a.norm_kind)))
    tail = [v for _, v in samples[-3:]]
    value = samples[-1][1]
    spread = max(tail) - min(tail)
    if spread > TAIL_REL * value + TAIL_ABS:
        raise TailNotSettled(
            f"last-3 spread {spread:.3e} above {TAIL_REL:.0e} * value + {TAIL_ABS:.0e}",
            value=value,
            spread=spread,
        )
    return YosidaDistance(value=value, uncertainty=spread, samples=tuple(samples))


def check_generation_bound(
    a: Operator,
    c: Operator,
    gb: GrowthBound,
    tmax: float = 2.0,
    grid: int = 41,
    mu_grid: MuGrid | None = None,
) -> BoundCheck:
    """Check ||e^{t(A+C)}|| <= M e^{(omega0 + M^2 ||C||_A) t} (1 + slack) on a t-grid."""
    a._check(c)
    c_norm = a_norm(c, a, gb, mu_grid).value
    rate = gb.omega0 + gb.m * gb.m * c_norm
    ts = np.linspace(0.0, tmax, grid)
    exps = expm_stack(ts[:, None, None] * (a.entries + c.entries)[None, :, :])
    max_ratio, worst_t = 0.0, 0.0
    for i, t in enumerate(ts):
        lhs = norm_of(exps[i], a.norm_kind)
        rhs = gb.m * math.exp(rate * t) * (1.0 + BOUND_SLACK)
        if lhs / rhs > max_ratio:
            max_ratio, worst_t = lhs / rhs, float(t)
    return BoundCheck(passed=max_ratio <= 1.0, max_ratio=max_ratio, worst_t=worst_t)


def fd_step(interval) -> float:
    """Central-difference step for t-derivatives on the given interval."""
    return max(1e-5, 1e-8 * (interval[1] - interval[0]))


@dataclass(frozen=True)
class AssumptionReport:
    """Continuity and derivative-boundedness diagnostics for t -> B(t)."""

    a1_modulus: tuple
    a1_pass: bool
    a2_derivative_sup: tuple
    a2_pass: bool
    h_fd: float


def check_assumptions(
    family,
    a: Operator,
    gb: GrowthBound,
    grid: MuGrid | None = None,
    rng=None,
    ladder_levels: int = 8,
    t_samples: int = 33,
) -> AssumptionReport:
    """Diagnose continuity of t -> B(t) in ||.||_A and boundedness of its derivative.

    a1: the modulus Omega(h) = sup_{|t-s| <= h} ||B(t) - B(s)||_A is tabulated
    on a halving ladder of h spanning two decades; it should trend to zero
    (last below a quarter of the first), with identically-zero moduli passing
    outright. a2: sup_t ||d/dt B(t) R(mu, A)|| is tabulated over a mu ladder
    and should stay bounded (last at most twice the median).
    """
    t0, t1 = family.interval
    evaluator = ANormEvaluator(a, gb, grid)
    hs = [(t1 - t0) * 2.0 ** (-k) for k in range(2, 2 + ladder_levels)]
    a1 = [(h, family.modulus(h, evaluator, rng=rng)) for h in hs]
    floor = 1e-12 * (1.0 + a1[0][1])
    a1_pass = a1[-1][1] <= max(a1[0][1] / 4.0, floor)

    h_fd = fd_step(family.interval)
    mus = gb.omega0 + np.geomspace(10.0, 1e6, 11)
    ts = np.linspace(t0 + h_fd, t1 - h_fd, t_samples)
    a2 = []
    for mu in mus:
        r = resolvent(a, float(mu)).entries
        sup = 0.0
        for t in ts:
            dbdt = (family(t + h_fd).entries - family(t - h_fd).entries) / (2.0 * h_fd)
            sup = max(sup, norm_of(dbdt @ r, a.norm_kind))
        a2.append((float(mu), sup))
    med = float(np.median([v for _, v in a2]))
    a2_pass = a2[-1][1] <= 2.0 * med + 1e-300
    return AssumptionReport(
        a1_modulus=tuple(a1),
        a1_pass=bool(a1_pass),
        a2_derivative_sup=tuple(a2),
        a2_pass=bool(a2_pass),
        h_fd=h_fd,
    )


@dataclass(frozen=True)
class Lemma32Result:
    """Decay of sup_t ||d/dt R(mu, A + B(t))|| along a mu ladder."""

    samples: tuple
    identity_residual: float
    slope: float


def lemma32_decay(
    a: Operator,
    family,
    gb: GrowthBound,
    mus=None,
    t_samples: int = 49,
) -> Lemma32Result:
    """Tabulate sup_t ||d/dt R(mu, A + B(t))|| over mu; the sup decays like mu^{-2}.

    Every sampled resolvent of the perturbed generator is cross-checked
    against the factorisation R(mu, A + B(t)) = R(mu, A) [I - B(t) R(mu, A)]^{-1}
    and the worst relative residual is reported.
    """
    t0, t1 = family.interval
    if mus is None:
        mus = gb.omega0 + np.geomspace(10.0, 1e4, 13)
    h_fd = fd_step(family.interval)
    ts = np.linspace(t0 + h_fd, t1 - h_fd, t_samples)
    eye = np.eye(a.dim)
    samples = []
    worst_residual = 0.0
    for mu in mus:
        mu = float(mu)
        ra = resolvent(a, mu).entries
        sup = 0.0
        for t in ts:
            rp = resolvent(a + family(t + h_fd), mu).entries
            rm = resolvent(a + family(t - h_fd), mu).entries
            sup = max(sup, norm_of((rp - rm) / (2.0 * h_fd), a.norm_kind))
            r0 = resolvent(a + family(t), mu).entries
            factored = ra @ np.linalg.inv(eye - family(t).entries @ ra)
            worst_residual = max(worst_residual, norm_of(r0 - factored, a.norm_kind) / max(norm_of(r0, a.norm_kind), 1e-300))
        samples.append((mu, sup))
    values = np.array([v for _, v in samples])
    if np.all(values > 0.0):
        slope = float(np.polyfit(np.log(np.array([m for m, _ in samples])), np.log(values), 1)[0])
    else:
        slope = float("nan")
    return Lemma32Result(samples=tuple(samples), identity_residual=worst_residual, slope=slope)
