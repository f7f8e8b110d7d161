"""Dense square operators with a declared induced norm.

An Operator is an immutable float64 matrix plus the induced norm (1, 2 or inf)
in which every downstream estimate about it is made. Mixing norms is an error,
not a coercion: a bound certified in one norm says nothing in another.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, EigenFailure, NormKindMismatch, SingularResolvent

# Resolvent solves are rejected above this 1-norm condition estimate.
COND_LIMIT = 1e12
# Residual allowance for (mu I - A) R = I, scaled by the condition estimate.
RESOLVENT_RESIDUAL = 1e-10
POWER_TOL = 1e-12
POWER_MAXIT = 10_000
# Gram squarings before iterating; each squaring squares the spectral ratios.
POWER_SQUARINGS = 56
SHARPEN_SETTLE_TOL = 1e-13


class NormKind(enum.Enum):
    """Which induced matrix norm an operator is measured in."""

    ONE = "1"
    TWO = "2"
    INF = "inf"

    @classmethod
    def parse(cls, label: str) -> "NormKind":
        for kind in cls:
            if kind.value == str(label):
                return kind
        raise ValueError(f"unknown norm kind {label!r}; expected one of 1, 2, inf")


@dataclass(frozen=True, eq=False)
class Operator:
    """Immutable square matrix tagged with its induced norm."""

    entries: np.ndarray
    norm_kind: NormKind = NormKind.TWO

    def __post_init__(self):
        m = np.array(self.entries, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f"operator entries must be square, got shape {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def _check(self, other: "Operator"):
        if not isinstance(other, Operator):
            raise TypeError(f"expected Operator, got {type(other).__name__}")
        if other.dim != self.dim:
            raise DimensionMismatch(f"dimensions differ: {self.dim} vs {other.dim}")
        if other.norm_kind is not self.norm_kind:
            raise NormKindMismatch(f"norm kinds differ: {self.norm_kind.value} vs {other.norm_kind.value}")

    def __add__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.entries + other.entries, self.norm_kind)

    def __sub__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.entries - other.entries, self.norm_kind)

    def __neg__(self) -> "Operator":
        return Operator(-self.entries, self.norm_kind)

    def __mul__(self, scalar: float) -> "Operator":
        return Operator(float(scalar) * self.entries, self.norm_kind)

    __rmul__ = __mul__

    def __matmul__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.entries @ other.entries, self.norm_kind)


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues with their real-part and modulus envelopes."""

    eigenvalues: tuple
    abscissa: float
    radius: float


def identity(dim: int, norm_kind: NormKind = NormKind.TWO) -> Operator:
    return Operator(np.eye(dim), norm_kind)


def _sharpen(gram: np.ndarray) -> np.ndarray:
    """Normalized repeated squaring of a PSD matrix.

    Squaring squares the eigenvalue ratios, so power iteration on the
    sharpened matrix converges in a handful of steps; the Rayleigh value is
    still read off the original matrix. Squaring continues until the
    normalized iterate stops moving; the per-step change bounds the width of
    the surviving top eigenvalue cluster, so stopping at SHARPEN_SETTLE_TOL
    keeps the later iteration count flat even when the two largest
    eigenvalues agree to within 1e-15, without giving up value accuracy.
    """
    d = gram.shape[0]
    floor = np.finfo(float).tiny * d
    settle = max(SHARPEN_SETTLE_TOL, 8.0 * np.finfo(float).eps * d)
    nrm = float(np.abs(gram).max())
    if nrm <= floor:
        return gram
    sharp = gram / nrm
    for _ in range(POWER_SQUARINGS):
        nxt = sharp @ sharp
        nrm = float(np.abs(nxt).max())
        if nrm <= floor:
            break
        nxt = nxt / nrm
        settled = float(np.abs(nxt - sharp).max()) <= settle
        sharp = nxt
        if settled:
            break
    return sharp


def _power_run(gram: np.ndarray, v: np.ndarray) -> float:
    """One power-iteration run on a Gram matrix; 0.0 if the start collapses."""
    floor = np.finfo(float).tiny * gram.shape[0]
    sharp = _sharpen(gram)
    for _ in range(POWER_MAXIT):
        w = sharp @ v
        nw = math.sqrt(float(w @ w))
        if nw <= floor:
            return 0.0
        w = w / nw
        done = abs(float(w @ v)) >= 1.0 - POWER_TOL
        v = w
        if done:
            break
    return math.sqrt(max(float(v @ (gram @ v)), 0.0))


def _two_norm(m: np.ndarray) -> float:
    """Largest singular value by power iteration on m^T m.

    The matrix is rescaled by its largest entry so sigma_1 of the iterate
    lies in [1, d] and the convergence test is genuinely relative at any
    input scale. The all-ones start can be annihilated or sit exactly in a
    non-dominant eigenspace, so the result is certified against
    max_i (m^T m)_{ii} <= sigma_1^2 and the iteration restarts from the
    dominant coordinate direction when the certificate fails.
    """
    if not np.all(np.isfinite(m)):
        return float("inf")
    scale = float(np.abs(m).max(initial=0.0))
    if scale == 0.0:
        return 0.0
    m = m / scale
    d = m.shape[0]
    gram = m.T @ m
    diag = np.diag(gram)
    val = _power_run(gram, np.full(d, 1.0 / np.sqrt(d)))
    certificate = float(diag.max())
    if val * val < certificate * (1.0 - 1e-9):
        retry = _power_run(gram, np.eye(d)[int(np.argmax(diag))])
        val = max(val, retry, float(np.sqrt(certificate)))
    return scale * val


def two_norm_stack(ms: np.ndarray) -> np.ndarray:
    """Largest singular value of each matrix in a (k, d, d) stack.

    Same sharpened power iteration and certificate as the scalar path, run
    on all items at once; items whose certificate fails fall back to the
    scalar routine with its restart.
    """
    ms = np.asarray(ms, dtype=float)
    k, d, _ = ms.shape
    out = np.full(k, float("inf"))
    finite = np.isfinite(ms).all(axis=(1, 2))
    scale = np.abs(np.where(finite[:, None, None], ms, 0.0)).max(axis=(1, 2))
    out[finite & (scale == 0.0)] = 0.0
    act = finite & (scale > 0.0)
    if not act.any():
        return out
    work = ms[act] / scale[act, None, None]
    gram = np.swapaxes(work, 1, 2) @ work
    floor = np.finfo(float).tiny * d
    settle = max(SHARPEN_SETTLE_TOL, 8.0 * np.finfo(float).eps * d)
    nrm = np.maximum(np.abs(gram).max(axis=(1, 2)), floor)
    sharp = gram / nrm[:, None, None]
    pending = np.arange(sharp.shape[0])
    for _ in range(POWER_SQUARINGS):
        part = sharp[pending]
        nxt = part @ part
        nrm = np.maximum(np.abs(nxt).max(axis=(1, 2)), floor)
        nxt = nxt / nrm[:, None, None]
        sharp[pending] = nxt
        moving = np.abs(nxt - part).max(axis=(1, 2)) > settle
        pending = pending[moving]
        if pending.size == 0:
            break
    v = np.full((gram.shape[0], d), 1.0 / math.sqrt(d))
    for _ in range(POWER_MAXIT):
        w = np.einsum("kij,kj->ki", sharp, v)
        nw = np.sqrt(np.einsum("ki,ki->k", w, w))
        alive = nw > floor
        w = np.where(alive[:, None], w / np.maximum(nw, floor)[:, None], v)
        done = ~alive | (np.abs(np.einsum("ki,ki->k", v, w)) >= 1.0 - POWER_TOL)
        v = w
        if done.all():
            break
    lam = np.einsum("ki,kij,kj->k", v, gram, v)
    vals = np.sqrt(np.maximum(lam, 0.0))
    certificate = np.einsum("kii->ki", gram).max(axis=1)
    bad = vals * vals < certificate * (1.0 - 1e-9)
    for i in np.nonzero(bad)[0]:
        vals[i] = _two_norm(work[i])
    out[act] = vals * scale[act]
    return out


def vector_norm(x: np.ndarray, norm_kind: NormKind) -> float:
    if norm_kind is NormKind.ONE:
        return float(np.abs(x).sum())
    if norm_kind is NormKind.INF:
        return float(np.abs(x).max())
    return float(np.linalg.norm(x))


def norm_of(entries: np.ndarray, norm_kind: NormKind) -> float:
    """Induced norm of a raw matrix (internal fast path)."""
    if norm_kind is NormKind.ONE:
        return float(np.abs(entries).sum(axis=0).max())
    if norm_kind is NormKind.INF:
        return float(np.abs(entries).sum(axis=1).max())
    return _two_norm(entries)


def op_norm(op: Operator) -> float:
    """Induced norm of the operator in its declared norm kind."""
    return norm_of(op.entries, op.norm_kind)


def _condition_1norm(m: np.ndarray, lu, piv) -> float:
    """1-norm condition estimate kappa_1(m) from an existing LU factorisation."""
    anorm = np.abs(m).sum(axis=0).max()
    if anorm == 0.0:
        return float("inf")
    rcond, info = scipy.linalg.lapack.dgecon(lu, anorm, norm="1")
    if info != 0 or not np.isfinite(rcond) or rcond <= 0.0:
        return float("inf")
    return float(1.0 / rcond)


def resolvent(a: Operator, mu: float) -> Operator:
    """R(mu, A) = (mu I - A)^{-1} by LU with partial pivoting.

    Refuses to answer when the 1-norm condition estimate of mu I - A exceeds
    COND_LIMIT, or when the residual ||(mu I - A) R - I||_1 comes out above
    RESOLVENT_RESIDUAL times the condition estimate.
    """
    m = float(mu) * np.eye(a.dim) - a.entries
    try:
        lu, piv = scipy.linalg.lu_factor(m, check_finite=False)
    except Exception as exc:  # LinAlgError from LAPACK
        raise SingularResolvent(f"mu I - A could not be factorised at mu={mu!r}: {exc}") from exc
    if np.any(np.diag(lu) == 0.0):
        raise SingularResolvent(f"mu I - A is exactly singular at mu={mu!r}")
    kappa = _condition_1norm(m, lu, piv)
    if not np.isfinite(kappa) or kappa > COND_LIMIT:
        raise SingularResolvent(f"condition estimate {kappa:.3e} exceeds {COND_LIMIT:.0e} at mu={mu!r}")
    r = scipy.linalg.lu_solve((lu, piv), np.eye(a.dim), check_finite=False)
    residual = np.abs(m @ r - np.eye(a.dim)).sum(axis=0).max()
    if residual > RESOLVENT_RESIDUAL * kappa:
        raise SingularResolvent(f"resolvent residual {residual:.3e} above {RESOLVENT_RESIDUAL:.0e} * kappa at mu={mu!r}")
    return Operator(r, a.norm_kind)


def spectrum(a: Operator) -> Spectrum:
    """Eigenvalues of A with spectral abscissa and radius."""
    try:
        eigs = np.linalg.eigvals(a.entries)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(f"eigenvalue iteration failed: {exc}") from exc
    return Spectrum(
        eigenvalues=tuple(complex(z) for z in eigs),
        abscissa=float(eigs.real.max()),
        radius=float(np.abs(eigs).max()),
    )


def read_matrix(path, norm_kind: NormKind = NormKind.TWO) -> Operator:
    """Read the plain-text matrix format: a `dim k` line, then k rows of k entries."""
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().split()
        if len(header) != 2 or header[0] != "dim":
            raise ValueError(f"{path}: first line must be 'dim k', got {' '.join(header)!r}")
        k = int(header[1])
        rows = []
        for i in range(k):
            row = fh.readline().split()
            if len(row) != k:
                raise ValueError(f"{path}: row {i} has {len(row)} entries, expected {k}")
            rows.append([float(x) for x in row])
    return Operator(np.array(rows), norm_kind)


def write_matrix(path, op: Operator) -> None:
    """Write the plain-text matrix format read by read_matrix."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"dim {op.dim}\n")
        for row in op.entries:
            fh.write(" ".join(format(x, ".17g") for x in row) + "\n")
