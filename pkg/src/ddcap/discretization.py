"""Dense midpoint discretization of interval-restricted operators.

The restriction P L P of the operator with symbol sigma to [0, alpha] is
collocated at x_i = (i + 1/2) delta, M[i, j] = delta * k(x_i, x_j), so that
eigenvalues of M approximate those of P L P.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import symbol as sm
from .errors import ContractError, NumericError, ResourceError, ValidationError

DEFAULT_MAX_DIM = 4096
CLIP_REL = 1e-6


def max_dimension():
    """Matrix size cap, overridable through ``DDCAP_MAX_DIM``."""
    raw = os.environ.get("DDCAP_MAX_DIM")
    if raw is None:
        return DEFAULT_MAX_DIM
    try:
        value = int(raw)
    except ValueError:
        raise ValidationError(f"DDCAP_MAX_DIM must be an integer, got {raw!r}") from None
    if value < 1:
        raise ValidationError("DDCAP_MAX_DIM must be positive")
    return value


@dataclass(frozen=True)
class GridSpec:
    """Collocation grid on [origin, origin + alpha].

    ``padding`` is the extra lag range used for enlarged-domain quantities;
    ``omega_max`` and ``omega_n`` describe the frequency quadrature grid.
    """

    alpha: float
    delta: float
    padding: float = 0.0
    omega_max: float = math.inf
    omega_n: int = 2048
    origin: float = 0.0

    def __post_init__(self):
        for name in ("alpha", "delta"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValidationError(f"grid.{name} must be positive and finite, got {v!r}")
        if not self.padding >= 0:
            raise ValidationError("grid.padding must be non-negative")
        if not math.isfinite(self.origin):
            raise ValidationError("grid.origin must be finite")
        if self.omega_n < 2:
            raise ValidationError("grid.omega_n must be at least 2")
        n = round(self.alpha / self.delta)
        if n < 1 or abs(n * self.delta - self.alpha) > 1e-12 * self.alpha:
            raise ValidationError(
                f"grid.delta={self.delta} does not divide alpha={self.alpha} into whole cells")
        if math.isfinite(self.omega_max) and self.delta > 1.0 / (2 * self.omega_max) * (1 + 1e-12):
            raise ValidationError(
                f"grid.delta={self.delta} exceeds the Nyquist limit 1/(2 omega_max)="
                f"{1 / (2 * self.omega_max):.6g}")

    @classmethod
    def for_symbol(cls, sym, alpha, delta=1 / 16, padding_tol=1e-14, omega_n=2048, origin=0.0):
        env = sm.envelope(sym)
        # half the tolerance so psi(T) < tol holds strictly
        pad = env.support if env.support is not None else env.padding(padding_tol / 2)
        return cls(alpha, delta, padding=pad, omega_max=sm.omega_max(sym), omega_n=omega_n,
                   origin=origin)

    @property
    def n(self):
        return int(round(self.alpha / self.delta))

    @property
    def points(self):
        return self.origin + (np.arange(self.n) + 0.5) * self.delta

    def refined(self):
        """The same grid with delta halved."""
        return GridSpec(self.alpha, self.delta / 2, self.padding, self.omega_max, self.omega_n,
                        self.origin)


@dataclass(frozen=True)
class OperatorMatrix:
    grid: GridSpec
    entries: np.ndarray = field(repr=False)
    hermitian: bool
    quantization: str = sm.WEYL
    symmetrized: bool = False
    op_norm_bound: float | None = None

    def __post_init__(self):
        if self.hermitian:
            a = self.entries
            scale = np.max(np.abs(a)) if a.size else 0.0
            if scale > 0 and np.max(np.abs(a - a.conj().T)) > 1e-12 * scale:
                raise ContractError("matrix flagged hermitian is not hermitian")

    @classmethod
    def from_array(cls, entries, alpha=1.0, hermitian=None):
        """Wrap a plain square array (grid delta = alpha / n)."""
        a = np.asarray(entries)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValidationError("operator matrix must be square")
        if hermitian is None:
            scale = np.max(np.abs(a)) if a.size else 0.0
            hermitian = scale == 0 or np.max(np.abs(a - a.conj().T)) <= 1e-12 * scale
        n = max(a.shape[0], 1)
        return cls(GridSpec(alpha, alpha / n), a, bool(hermitian))


@dataclass(frozen=True)
class Spectrum:
    """Descending non-negative eigenvalues of a restricted operator."""

    eigenvalues: np.ndarray
    clipped_count: int = 0
    alpha: float = 1.0

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=float).ravel()
        if np.any(lam < 0) or not np.all(np.isfinite(lam)):
            raise ValidationError("spectrum eigenvalues must be finite and non-negative")
        lam = np.sort(lam)[::-1].copy()
        lam.setflags(write=False)
        object.__setattr__(self, "eigenvalues", lam)
        if not self.alpha > 0:
            raise ValidationError("spectrum alpha must be positive")

    @property
    def lambda_max(self):
        return float(self.eigenvalues[0]) if self.eigenvalues.size else 0.0

    def __len__(self):
        return self.eigenvalues.size


def build_operator(sym, grid, quantization=sm.WEYL, symmetrize=False, max_dim=None):
    """Collocation matrix of P L_sigma P on ``grid``."""
    n = grid.n
    cap = max_dimension() if max_dim is None else max_dim
    if n > cap:
        raise ResourceError(f"build_operator: n={n} exceeds the maximum dimension {cap}")
    x = grid.points
    M = grid.delta * sm.eval_kernel(sym, x[:, None], x[None, :], quantization)
    hermitian = quantization == sm.WEYL
    if symmetrize:
        M = 0.5 * (M + M.conj().T)
        hermitian = True
    elif not hermitian:
        scale = np.max(np.abs(M)) if M.size else 0.0
        hermitian = scale == 0 or np.max(np.abs(M - M.conj().T)) <= 1e-12 * scale
    if hermitian:
        # remove rounding asymmetry so the flag's invariant holds exactly
        M = 0.5 * (M + M.conj().T)
    bound = sm.envelope(sym).op_norm_bound
    return OperatorMatrix(grid, M, hermitian, quantization, symmetrize, bound)


def eigen_spectrum(M):
    """Full symmetric eigendecomposition of a hermitian operator matrix.

    Negative eigenvalues of size at most ``CLIP_REL * lambda_max`` are set to
    zero and counted; larger ones indicate a modelling error and raise.
    """
    if not isinstance(M, OperatorMatrix):
        M = OperatorMatrix.from_array(M)
    if not M.hermitian:
        raise ContractError("eigen_spectrum requires a hermitian matrix")
    if M.entries.size == 0:
        return Spectrum(np.zeros(0), 0, M.grid.alpha)
    try:
        lam = np.linalg.eigvalsh(M.entries)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigen_spectrum: eigensolver failed: {exc}") from None
    lam = lam[::-1]
    lmax = max(float(lam[0]), 0.0)
    neg = lam < 0
    if np.any(neg):
        worst = float(-lam[neg].min())
        if worst > CLIP_REL * lmax:
            raise NumericError(
                f"eigen_spectrum: negative eigenvalue {-worst:.3e} exceeds the clipping "
                f"threshold {CLIP_REL:g} * lambda_max")
    if M.op_norm_bound is not None and lmax > M.op_norm_bound + 1e-6:
        raise NumericError(
            f"eigen_spectrum: lambda_max={lmax:.6g} exceeds the envelope bound {M.op_norm_bound:.6g}")
    clipped = int(np.count_nonzero(neg))
    return Spectrum(np.where(neg, 0.0, lam), clipped, M.grid.alpha)


def trace_functional(spec, f):
    """sum_k f(lambda_k) for a vectorized scalar function with f(0) = 0."""
    f0 = float(np.asarray(f(np.zeros(1)))[0])
    if abs(f0) > 1e-12:
        raise ContractError(f"trace_functional requires f(0) = 0, got {f0!r}")
    lam = spec.eigenvalues if isinstance(spec, Spectrum) else np.asarray(spec, dtype=float)
    if lam.size == 0:
        return 0.0
    vals = np.asarray(f(lam), dtype=float)
    return float(np.sum(vals))


def singular_values(M):
    a = M.entries if isinstance(M, OperatorMatrix) else np.asarray(M)
    if a.size == 0:
        return np.zeros(0)
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix has non-finite entries")
    try:
        return np.linalg.svd(a, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"singular value decomposition failed: {exc}") from None


def trace_norm(M):
    """Schatten-1 norm: sum of singular values."""
    return float(np.sum(singular_values(M)))


def hs_norm(M):
    a = M.entries if isinstance(M, OperatorMatrix) else np.asarray(M)
    return float(np.linalg.norm(a))


def outside_points(grid):
    """Collocation points of [-T, 0) and (alpha, alpha + T], offset by the origin."""
    p = int(math.ceil(grid.padding / grid.delta - 1e-9))
    left = grid.origin - (np.arange(p)[::-1] + 0.5) * grid.delta
    right = grid.origin + grid.alpha + (np.arange(p) + 0.5) * grid.delta
    return left, right


def offdiag_hs(sym, grid, quantization=sm.WEYL, chunk_entries=1 << 23):
    """Squared Hilbert-Schmidt norm of P L_sigma (1 - P)."""
    env = sm.envelope(sym)
    T = grid.padding
    covered = env.support is not None and T >= env.support
    psi_T = float(np.asarray(env.psi(np.array([T])))[0])
    if not covered and not (psi_T < 1e-14):
        raise ValidationError(
            f"offdiag_hs: padding T={T} too small, envelope psi(T)={psi_T:.3e} >= 1e-14")
    x = grid.points
    left, right = outside_points(grid)
    y = np.concatenate((left, right))
    if y.size == 0:
        return 0.0
    if sym.is_time_invariant:
        # kernel depends on the lag only: weight each lag by its pair count
        n, p = x.size, left.size
        m = np.arange(1, n + p)
        cnt = np.minimum.reduce([m, np.full_like(m, n), np.full_like(m, p), n + p - m])
        z = m * grid.delta
        k2 = np.abs(sm.eval_kernel(sym, z, 0.0, quantization)) ** 2 \
            + np.abs(sm.eval_kernel(sym, -z, 0.0, quantization)) ** 2
        return grid.delta ** 2 * float(np.sum(cnt * k2))
    total = 0.0
    rows = max(1, chunk_entries // y.size)
    for s in range(0, x.size, rows):
        k = sm.eval_kernel(sym, x[s:s + rows, None], y[None, :], quantization)
        total += float(np.sum(np.abs(k) ** 2))
    return grid.delta ** 2 * total


def write_matrix_csv(M, path):
    a = M.entries if isinstance(M, OperatorMatrix) else np.asarray(M)
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["i", "j", "value"])
        for (i, j), v in np.ndenumerate(a):
            w.writerow([i, j, repr(complex(v)) if np.iscomplexobj(a) else repr(float(v))])


def write_spectrum_csv(spec, path):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "lambda"])
        for k, lam in enumerate(spec.eigenvalues):
            w.writerow([k, repr(float(lam))])
