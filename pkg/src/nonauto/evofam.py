"""Euler-polygon evolution families for u' = (A + B(t)) u.

The interval is split into 2^n dyadic cells; on each cell the generator is
frozen at the left node, so the approximate propagator is a product of matrix
exponentials. Successive levels form a Cauchy sequence with explicit rate
    ||U_n(t, s) - U_m(t, s)|| <= (t - s) e^{4 omega1} Omega_n,
where omega1 = sup_t ||B(t)||_A and Omega_n is the modulus of continuity of
t -> B(t) in ||.||_A at mesh width 2^{-n}(b - a).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    NormKindMismatch,
    OutOfInterval,
    PreconditionViolated,
    ToleranceNotReached,
)
from .linop import NormKind, Operator, norm_of, op_norm
from .metrics import ANormEvaluator
from .semigroup import GrowthBound, expm_stack

MAX_LEVEL = 24
MODULUS_PAIR_CAP = 4096
PROFILE_SAMPLES = 2049


@dataclass(frozen=True)
class DyadicPartition:
    """Uniform partition of [a, b] into 2^n cells."""

    a: float
    b: float
    n: int

    def __post_init__(self):
        if not (self.b > self.a):
            raise PreconditionViolated("partition wants b > a")
        if not (0 <= self.n <= MAX_LEVEL):
            raise PreconditionViolated(f"partition level must lie in [0, {MAX_LEVEL}]")

    @property
    def cells(self) -> int:
        return 2 ** self.n

    @property
    def delta(self) -> float:
        return (self.b - self.a) / self.cells

    def nodes(self) -> np.ndarray:
        return self.a + self.delta * np.arange(self.cells + 1)

    def node(self, j: int) -> float:
        return self.a + self.delta * j

    def cell_of(self, t: float) -> int:
        """Index j with t in [node(j), node(j+1)); b maps to the last cell."""
        if not (self.a <= t <= self.b):
            raise OutOfInterval(f"t={t} outside [{self.a}, {self.b}]")
        return min(int((t - self.a) / self.delta), self.cells - 1)


class PerturbationFamily:
    """Time-dependent perturbation t -> B(t) on a fixed interval.

    Subclasses implement _value(t); evaluation outside the interval is an
    error. modulus() estimates sup_{|t-s| <= h} ||B(t) - B(s)||_A and is
    exact for subclasses that can bound it structurally.
    """

    def __init__(self, interval, dim: int, norm_kind: NormKind):
        t0, t1 = float(interval[0]), float(interval[1])
        if not (t1 > t0):
            raise PreconditionViolated("family interval wants t1 > t0")
        self.interval = (t0, t1)
        self.dim = int(dim)
        self.norm_kind = norm_kind
        self._modulus_cache: dict = {}

    def __call__(self, t: float) -> Operator:
        t0, t1 = self.interval
        if not (t0 <= t <= t1):
            raise OutOfInterval(f"t={t} outside [{t0}, {t1}]")
        return self._value(float(t))

    def _value(self, t: float) -> Operator:
        raise NotImplementedError

    def values_stack(self, ts: np.ndarray) -> np.ndarray:
        """Entries of B(t) for each t, shape (len(ts), dim, dim)."""
        return np.stack([self(float(t)).entries for t in ts])

    def modulus(self, h: float, anorm: ANormEvaluator, rng=None, max_pairs: int = MODULUS_PAIR_CAP) -> float:
        """sup over sampled pairs |t - s| <= h of ||B(t) - B(s)||_A.

        Sampled fallback; subclasses override where the sup is available in
        closed form. Results are cached per (h, anorm) since refinement asks
        for a whole ladder of h on one evaluator.
        """
        key = (float(h), id(anorm))
        if key not in self._modulus_cache:
            self._modulus_cache[key] = self._modulus_sampled(h, anorm, rng, max_pairs)
        return self._modulus_cache[key]

    def _modulus_sampled(self, h: float, anorm: ANormEvaluator, rng, max_pairs: int) -> float:
        t0, t1 = self.interval
        h = min(float(h), t1 - t0)
        if h <= 0.0:
            return 0.0
        rng = np.random.default_rng(0) if rng is None else rng
        count = min(max_pairs, max(16, math.ceil(4.0 * (t1 - t0) / h)))
        # Adjacent mesh nodes at spacing h catch oscillations aligned to the mesh.
        nodes = np.arange(t0, t1, h)[: max_pairs // 2]
        starts = rng.uniform(t0, t1, size=count)
        offsets = rng.uniform(-h, h, size=count)
        ts = np.concatenate([nodes, starts])
        ss = np.concatenate([np.minimum(nodes + h, t1), np.clip(starts + offsets, t0, t1)])
        diffs = self.values_stack(ts) - self.values_stack(ss)
        return float(anorm.value_stack(diffs).max())

    def sup_anorm(self, anorm: ANormEvaluator, samples: int = 65) -> float:
        """sup_t ||B(t)||_A over a uniform t-grid (exact where overridden)."""
        t0, t1 = self.interval
        return float(anorm.value_stack(self.values_stack(np.linspace(t0, t1, samples))).max())

    def scale(self, c: float) -> "PerturbationFamily":
        return _Scaled(self, float(c))


class _Scaled(PerturbationFamily):
    """c * B(t) for a fixed scalar c."""

    def __init__(self, base: PerturbationFamily, c: float):
        super().__init__(base.interval, base.dim, base.norm_kind)
        self.base = base
        self.c = c

    def _value(self, t: float) -> Operator:
        return self.c * self.base(t)

    def values_stack(self, ts: np.ndarray) -> np.ndarray:
        return self.c * self.base.values_stack(ts)

    def modulus(self, h, anorm, rng=None, max_pairs=MODULUS_PAIR_CAP) -> float:
        return abs(self.c) * self.base.modulus(h, anorm, rng=rng, max_pairs=max_pairs)

    def sup_anorm(self, anorm, samples: int = 65) -> float:
        return abs(self.c) * self.base.sup_anorm(anorm, samples=samples)


class ConstantFamily(PerturbationFamily):
    """B(t) = B0; modulus identically zero, products collapse exactly."""

    def __init__(self, interval, b0: Operator):
        super().__init__(interval, b0.dim, b0.norm_kind)
        self.b0 = b0

    def _value(self, t: float) -> Operator:
        return self.b0

    def values_stack(self, ts: np.ndarray) -> np.ndarray:
        return np.broadcast_to(self.b0.entries, (len(ts), self.dim, self.dim)).copy()

    def modulus(self, h, anorm, rng=None, max_pairs=MODULUS_PAIR_CAP) -> float:
        return 0.0

    def sup_anorm(self, anorm, samples: int = 65) -> float:
        return anorm.value(self.b0).value


class ScaledProfileFamily(PerturbationFamily):
    """B(t) = phi(t) B0 for a scalar profile phi.

    The modulus factorises exactly: Omega(h) = Omega_phi(h) ||B0||_A, with
    Omega_phi tabulated on a dense profile sampling.
    """

    def __init__(self, interval, profile, b0: Operator):
        super().__init__(interval, b0.dim, b0.norm_kind)
        self.profile = profile
        self.b0 = b0
        ts = np.linspace(self.interval[0], self.interval[1], PROFILE_SAMPLES)
        self._profile_ts = ts
        self._profile_vals = np.array([float(profile(t)) for t in ts])

    def _value(self, t: float) -> Operator:
        return float(self.profile(t)) * self.b0

    def values_stack(self, ts: np.ndarray) -> np.ndarray:
        vals = np.array([float(self.profile(float(t))) for t in ts])
        return vals[:, None, None] * self.b0.entries[None, :, :]

    def _profile_modulus(self, h: float) -> float:
        t0, t1 = self.interval
        h = min(float(h), t1 - t0)
        if h <= 0.0:
            return 0.0
        step = (t1 - t0) / (PROFILE_SAMPLES - 1)
        w = max(1, int(round(h / step)))
        # Max-min over every window of width h.
        windows = np.lib.stride_tricks.sliding_window_view(self._profile_vals, w + 1)
        return float((windows.max(axis=1) - windows.min(axis=1)).max())

    def _b0_anorm(self, anorm) -> float:
        key = ("b0", id(anorm))
        if key not in self._modulus_cache:
            self._modulus_cache[key] = anorm.value(self.b0).value
        return self._modulus_cache[key]

    def modulus(self, h, anorm, rng=None, max_pairs=MODULUS_PAIR_CAP) -> float:
        key = (float(h), id(anorm))
        if key not in self._modulus_cache:
            self._modulus_cache[key] = self._profile_modulus(h) * self._b0_anorm(anorm)
        return self._modulus_cache[key]

    def sup_anorm(self, anorm, samples: int = 65) -> float:
        return float(np.abs(self._profile_vals).max()) * self._b0_anorm(anorm)


class BasisFamily(PerturbationFamily):
    """B(t) = sum_k phi_k(t) C_k; modulus bounded by the sum of the parts."""

    def __init__(self, interval, profiles, mats):
        if len(profiles) != len(mats):
            raise DimensionMismatch("profiles and matrices must pair up")
        if not mats:
            raise PreconditionViolated("BasisFamily wants at least one term")
        super().__init__(interval, mats[0].dim, mats[0].norm_kind)
        for m in mats[1:]:
            mats[0]._check(m)
        self.terms = [ScaledProfileFamily(interval, p, m) for p, m in zip(profiles, mats)]

    def _value(self, t: float) -> Operator:
        total = self.terms[0](t)
        for term in self.terms[1:]:
            total = total + term(t)
        return total

    def values_stack(self, ts: np.ndarray) -> np.ndarray:
        total = self.terms[0].values_stack(ts)
        for term in self.terms[1:]:
            total = total + term.values_stack(ts)
        return total

    def modulus(self, h, anorm, rng=None, max_pairs=MODULUS_PAIR_CAP) -> float:
        return sum(term.modulus(h, anorm, rng=rng, max_pairs=max_pairs) for term in self.terms)


class PiecewiseLinearFamily(PerturbationFamily):
    """Linear interpolation of matrices given at increasing nodes.

    For h at most the shortest piece the modulus is exactly h times the
    largest per-piece slope in ||.||_A.
    """

    def __init__(self, nodes, mats, norm_kind: NormKind = NormKind.TWO):
        nodes = np.asarray(nodes, dtype=float)
        if len(nodes) != len(mats):
            raise DimensionMismatch("nodes and matrices must pair up")
        if len(nodes) < 2 or not np.all(np.diff(nodes) > 0):
            raise PreconditionViolated("nodes must be strictly increasing, at least two")
        mats = [m if isinstance(m, Operator) else Operator(np.asarray(m, dtype=float), norm_kind) for m in mats]
        super().__init__((nodes[0], nodes[-1]), mats[0].dim, mats[0].norm_kind)
        for m in mats[1:]:
            mats[0]._check(m)
        self.nodes = nodes
        self.mats = [m for m in mats]
        self._stack = np.stack([m.entries for m in mats])

    def _value(self, t: float) -> Operator:
        j = min(int(np.searchsorted(self.nodes, t, side="right")) - 1, len(self.nodes) - 2)
        j = max(j, 0)
        w = (t - self.nodes[j]) / (self.nodes[j + 1] - self.nodes[j])
        entries = (1.0 - w) * self._stack[j] + w * self._stack[j + 1]
        return Operator(entries, self.norm_kind)

    def _slopes(self, anorm: ANormEvaluator) -> np.ndarray:
        key = ("slopes", id(anorm))
        if key not in self._modulus_cache:
            diffs = np.diff(self._stack, axis=0)
            widths = np.diff(self.nodes)
            self._modulus_cache[key] = np.array(
                [anorm.value(Operator(diffs[j], self.norm_kind)).value / widths[j] for j in range(len(widths))]
            )
        return self._modulus_cache[key]

    def modulus(self, h, anorm, rng=None, max_pairs=MODULUS_PAIR_CAP) -> float:
        t0, t1 = self.interval
        h = min(float(h), t1 - t0)
        if h <= 0.0:
            return 0.0
        if h <= float(np.diff(self.nodes).min()):
            return float(h * self._slopes(anorm).max())
        return self._modulus_sampled(h, anorm, rng, max_pairs)

    def sup_anorm(self, anorm, samples: int = 65) -> float:
        # Convexity of the norm along each piece puts the sup at a node.
        return max(anorm.value(m).value for m in self.mats)


class CallableFamily(PerturbationFamily):
    """B(t) from an arbitrary callable; modulus falls back to sampling."""

    def __init__(self, interval, fn, dim: int, norm_kind: NormKind = NormKind.TWO):
        super().__init__(interval, dim, norm_kind)
        self.fn = fn

    def _value(self, t: float) -> Operator:
        out = self.fn(t)
        if isinstance(out, Operator):
            return out
        return Operator(np.asarray(out, dtype=float), self.norm_kind)


class TabulatedFamily(PiecewiseLinearFamily):
    """Piecewise-linear family read from a CSV of t plus row-major entries."""

    def __init__(self, path, norm_kind: NormKind = NormKind.TWO):
        nodes, rows = [], []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                vals = [float(x) for x in row]
                nodes.append(vals[0])
                rows.append(vals[1:])
        if not rows:
            raise PreconditionViolated(f"no data rows in {path}")
        dim = math.isqrt(len(rows[0]))
        if dim * dim != len(rows[0]):
            raise DimensionMismatch(f"{len(rows[0])} entries per row is not a square matrix")
        mats = [Operator(np.array(r).reshape(dim, dim), norm_kind) for r in rows]
        super().__init__(nodes, mats)


class EvolutionFamilyApprox:
    """Propagators of the frozen-coefficient scheme at one dyadic level.

    All 2^n cell exponentials exp(delta (A + B(node_j))) are built eagerly in
    one batched call. evaluate(t, s) multiplies a partial cell on each end
    with the full cells between, factors ordered by decreasing node index.
    """

    def __init__(self, a: Operator, family: PerturbationFamily, partition: DyadicPartition):
        if family.dim != a.dim:
            raise DimensionMismatch(f"generator dim {a.dim} vs family dim {family.dim}")
        if family.norm_kind is not a.norm_kind:
            raise NormKindMismatch(f"generator uses {a.norm_kind.value}, family uses {family.norm_kind.value}")
        t0, t1 = family.interval
        if not (t0 <= partition.a and partition.b <= t1):
            raise OutOfInterval("partition must lie inside the family interval")
        self.a = a
        self.family = family
        self.partition = partition
        left_nodes = partition.nodes()[:-1]
        self._frozen = a.entries[None, :, :] + family.values_stack(left_nodes)
        self._cell_exp = expm_stack(partition.delta * self._frozen)

    @property
    def level(self) -> int:
        return self.partition.n

    def _partial(self, j: int, tau: float) -> np.ndarray:
        """exp(tau (A + B(node_j))) for 0 <= tau <= delta.

        tau within one part in 1e12 of a cell boundary is snapped to it, so
        query times that are cell nodes up to rounding reuse the stored
        exponentials.
        """
        delta = self.partition.delta
        if tau <= 1e-12 * delta:
            return np.eye(self.a.dim)
        if abs(tau - delta) <= 1e-12 * delta:
            return self._cell_exp[j]
        return expm_stack(tau * self._frozen[j : j + 1])[0]

    def evaluate(self, t: float, s: float) -> Operator:
        p = self.partition
        if not (p.a <= s <= p.b and p.a <= t <= p.b):
            raise OutOfInterval(f"(t, s)=({t}, {s}) outside [{p.a}, {p.b}]")
        if t < s:
            raise PreconditionViolated(f"propagator wants t >= s, got t={t} < s={s}")
        if t == s:
            return Operator(np.eye(self.a.dim), self.a.norm_kind)
        js, jt = p.cell_of(s), p.cell_of(t)
        if js == jt:
            return Operator(self._partial(js, t - s), self.a.norm_kind)
        out = self._partial(jt, t - p.node(jt))
        if jt > js + 1:
            out = out @ _chain_desc(self._cell_exp[js + 1 : jt])
        out = out @ self._partial(js, p.node(js + 1) - s)
        return Operator(out, self.a.norm_kind)

    def evaluate_path(self, ts, s: float) -> list:
        """U(t, s) for ascending t samples, sharing the accumulated product.

        Exact for this scheme since partial-cell factors of one frozen
        generator compose exactly; cost is one pass over the cells instead
        of one pass per sample.
        """
        out = []
        cur = np.eye(self.a.dim)
        last = float(s)
        for t in ts:
            t = float(t)
            if t < last:
                raise PreconditionViolated("evaluate_path wants ascending t starting at s")
            if t > last:
                cur = self.evaluate(t, last).entries @ cur
                last = t
            out.append(Operator(cur, self.a.norm_kind))
        return out

    def __call__(self, t: float, s: float) -> Operator:
        return self.evaluate(t, s)


def _chain_desc(block: np.ndarray) -> np.ndarray:
    """Descending-index product block[-1] @ ... @ block[0] by pairwise reduction.

    Associativity regrouping only; log-many batched matmuls instead of a
    sequential pass.
    """
    while len(block) > 1:
        m = len(block) // 2
        merged = block[1 : 2 * m : 2] @ block[0 : 2 * m : 2]
        block = np.concatenate([merged, block[2 * m :]]) if len(block) % 2 else merged
    return block[0]


def euler_polygon(a: Operator, family: PerturbationFamily, n: int) -> EvolutionFamilyApprox:
    """Frozen-coefficient approximation at dyadic level n on the family interval."""
    t0, t1 = family.interval
    return EvolutionFamilyApprox(a, family, DyadicPartition(t0, t1, n))


def oracle_solve(
    a: Operator,
    family: PerturbationFamily,
    t: float,
    s: float,
    rk_steps: int = 256,
) -> Operator:
    """Classical fourth-order Runge-Kutta for M'(tau) = (A + B(tau)) M(tau), M(s) = I.

    Independent of the polygon scheme; used as a reference solution.
    """
    if t < s:
        raise PreconditionViolated(f"oracle wants t >= s, got t={t} < s={s}")
    steps = max(64, int(rk_steps))
    m = np.eye(a.dim)
    if t == s:
        return Operator(m, a.norm_kind)
    h = (t - s) / steps
    # Stage times land on a half-step grid; batch the generator evaluations.
    gens = a.entries[None, :, :] + family.values_stack(np.linspace(s, t, 2 * steps + 1))
    for i in range(steps):
        g0, gm, g1 = gens[2 * i], gens[2 * i + 1], gens[2 * i + 2]
        k1 = g0 @ m
        k2 = gm @ (m + h / 2.0 * k1)
        k3 = gm @ (m + h / 2.0 * k2)
        k4 = g1 @ (m + h * k3)
        m = m + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return Operator(m, a.norm_kind)


def product_difference_bound(a_factors, b_factors):
    """Difference of two N-term products against its telescoping bound.

    Products are composed in decreasing index order. Returns (lhs, rhs) with
    lhs = ||prod a - prod b|| and rhs = N delta K^{N-1}, where K is the
    largest factor norm over both lists clamped to at least 1 and delta the
    largest pairwise factor difference. Callers assert lhs <= rhs.
    """
    n = len(a_factors)
    if n != len(b_factors):
        raise DimensionMismatch("factor lists must have equal length")
    if n < 1:
        raise PreconditionViolated("product bound wants at least one factor")
    ref = a_factors[0]
    for f in list(a_factors) + list(b_factors):
        ref._check(f)
    k = max(1.0, max(op_norm(f) for f in list(a_factors) + list(b_factors)))
    delta = max(op_norm(fa - fb) for fa, fb in zip(a_factors, b_factors))
    prod_a = a_factors[-1].entries
    prod_b = b_factors[-1].entries
    for j in range(n - 2, -1, -1):
        prod_a = prod_a @ a_factors[j].entries
        prod_b = prod_b @ b_factors[j].entries
    lhs = norm_of(prod_a - prod_b, ref.norm_kind)
    return float(lhs), float(n * delta * k ** (n - 1))


@dataclass(frozen=True)
class RefineResult:
    """Outcome of dyadic refinement down to a target Cauchy increment."""

    approx: EvolutionFamilyApprox
    levels: tuple
    achieved_delta: float
    omega1: float


def refine_to_tolerance(
    a: Operator,
    family: PerturbationFamily,
    gb: GrowthBound,
    tol: float,
    n_max: int = 14,
    rng=None,
    probes: int = 17,
    anorm: ANormEvaluator | None = None,
) -> RefineResult:
    """Refine the dyadic level until successive approximations differ by <= tol.

    The increment between levels n and n+1 is measured as the max difference
    of U(t, t0) over a probe grid. Stops once two consecutive increments sit
    below tol, guarding against accidental zeros on coarse dyadic grids. Each
    level also records the a-priori bound (b - a) e^{4 omega1} Omega_n.
    """
    t0, t1 = family.interval
    evaluator = anorm or ANormEvaluator(a, gb)
    omega1 = family.sup_anorm(evaluator)
    # A family constant in ||.||_A is propagated exactly at level 0.
    if family.modulus(t1 - t0, evaluator, rng=rng) == 0.0:
        return RefineResult(
            approx=euler_polygon(a, family, 0),
            levels=((0, 0.0, 0.0, 0.0),),
            achieved_delta=0.0,
            omega1=float(omega1),
        )
    ts = np.linspace(t0, t1, probes)[1:]
    prev = euler_polygon(a, family, 0)
    prev_vals = [op.entries for op in prev.evaluate_path(ts, t0)]
    levels = []
    below = 0
    for n in range(1, n_max + 1):
        cur = euler_polygon(a, family, n)
        cur_vals = [op.entries for op in cur.evaluate_path(ts, t0)]
        delta = max(
            norm_of(cv - pv, a.norm_kind) for cv, pv in zip(cur_vals, prev_vals)
        )
        omega_n = family.modulus((t1 - t0) * 2.0 ** (-n), evaluator, rng=rng)
        bound = (t1 - t0) * math.exp(4.0 * omega1) * omega_n
        levels.append((n, float(delta), float(omega_n), float(bound)))
        below = below + 1 if delta <= tol else 0
        if below >= 2:
            return RefineResult(approx=cur, levels=tuple(levels), achieved_delta=float(delta), omega1=float(omega1))
        prev, prev_vals = cur, cur_vals
    best = min(lv[1] for lv in levels) if levels else float("inf")
    raise ToleranceNotReached(
        f"increment {best:.3e} > tol {tol:.3e} after level {n_max}",
        best_delta=best,
        levels=tuple(levels),
    )


def verify_generator_derivative(
    u: EvolutionFamilyApprox,
    s: float,
    hs=(1e-2, 1e-3, 1e-4),
) -> list:
    """Residuals of both one-sided derivative identities at time s.

    Returns (h, forward_residual, adjoint_residual) triples with
    forward = ||(U(s+h, s) - I)/h - (A + B(s))|| and
    adjoint = ||(U(b, s) - U(b, s+h))/h - U(b, s)(A + B(s))||, the second
    tested against the full-span propagator. Both shrink linearly in h
    (frozen-cell expansion error plus the modulus of B).
    """
    hs = [float(h) for h in hs]
    if any(h <= 0.0 for h in hs) or any(h1 <= h2 for h1, h2 in zip(hs, hs[1:])):
        raise PreconditionViolated("verify_generator_derivative wants strictly decreasing positive hs")
    gen = u.a.entries + u.family(s).entries
    eye = np.eye(u.a.dim)
    b_end = u.partition.b
    u_bs = u.evaluate(b_end, s).entries
    out = []
    for h in hs:
        forward = (u.evaluate(s + h, s).entries - eye) / h
        adjoint = (u_bs - u.evaluate(b_end, s + h).entries) / h
        out.append((
            float(h),
            float(norm_of(forward - gen, u.a.norm_kind)),
            float(norm_of(adjoint - u_bs @ gen, u.a.norm_kind)),
        ))
    return out


def family_from_spec(config: dict, norm_kind: NormKind = NormKind.TWO) -> PerturbationFamily:
    """Build a family from a plain-dict description (CLI config files).

    kinds: constant {interval, entries}, sinusoid {interval, entries,
    amplitude?, frequency?, phase?}, piecewise {nodes, mats},
    tabulated {path}.
    """
    kind = config.get("kind")
    if kind == "constant":
        b0 = Operator(np.asarray(config["entries"], dtype=float), norm_kind)
        return ConstantFamily(tuple(config["interval"]), b0)
    if kind == "sinusoid":
        b0 = Operator(np.asarray(config["entries"], dtype=float), norm_kind)
        amp = float(config.get("amplitude", 1.0))
        freq = float(config.get("frequency", 1.0))
        phase = float(config.get("phase", 0.0))
        return ScaledProfileFamily(
            tuple(config["interval"]),
            lambda t: amp * math.sin(freq * t + phase),
            b0,
        )
    if kind == "piecewise":
        mats = [Operator(np.asarray(m, dtype=float), norm_kind) for m in config["mats"]]
        return PiecewiseLinearFamily(config["nodes"], mats)
    if kind == "tabulated":
        return TabulatedFamily(config["path"], norm_kind)
    raise PreconditionViolated(f"unknown family kind {kind!r}")
