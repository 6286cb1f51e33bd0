"""Discrete Paley-Littlewood analysis on dyadic periodic grids.

Bands are cut with phi_k(omega) = theta(2^-k omega) - theta(2^(1-k) omega),
where theta = 1 - phi(|omega| - 1) equals 1 on [-1, 1] and vanishes
outside [-2, 2]; phi is the smooth step of the mollifier module.  Band k
then lives in 2^(k-1) <= |omega| <= 2^(k+1) and consecutive sums telescope.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .discretization import trace_norm
from .errors import ResolutionError, ResourceError, ValidationError
from .mollifier import smooth_step
from .szego import loglog_slope

DEGENERATE_NORM = 1e-12


def theta(omega):
    """Smooth plateau: 1 on [-1, 1], 0 outside [-2, 2]."""
    return 1.0 - np.asarray(smooth_step(np.abs(np.asarray(omega, dtype=float)) - 1.0))


def bump(k, omega):
    """Dyadic band multiplier for band k."""
    omega = np.asarray(omega, dtype=float)
    return theta(omega / 2.0 ** k) - theta(omega / 2.0 ** (k - 1))


def partition_sum(omega, k_min, k_max):
    return sum(bump(k, omega) for k in range(k_min, k_max + 1))


def _is_pow2(n):
    return n >= 1 and (n & (n - 1)) == 0


def default_k_range(n, spacing):
    """k_min = -log2(L) + 2 and k_max = log2(Nyquist) - 2."""
    L = n * spacing
    nyq = 1.0 / (2 * spacing)
    return int(math.ceil(-math.log2(L) - 1e-12)) + 2, int(math.floor(math.log2(nyq) + 1e-12)) - 2


@dataclass(frozen=True)
class PLDecomposition:
    n: int
    spacing: float
    ks: np.ndarray
    bands: np.ndarray
    low_unresolved: bool = False
    high_unresolved: bool = False

    @property
    def k_range(self):
        return int(self.ks[0]), int(self.ks[-1])

    def band(self, k):
        return self.bands[int(k) - int(self.ks[0])]

    def reconstruct(self):
        return self.bands.sum(axis=0)


def pl_decompose(f, spacing, k_range=None):
    """Split samples of a periodic signal into dyadic frequency bands."""
    f = np.asarray(f)
    n = f.size
    if f.ndim != 1 or not _is_pow2(n):
        raise ValidationError(f"signal length must be a power of two, got {f.shape}")
    if not spacing > 0:
        raise ValidationError("spacing must be positive")
    k_min, k_max = default_k_range(n, spacing) if k_range is None else map(int, k_range)
    if k_max < k_min:
        raise ValidationError("empty k range")
    L = n * spacing
    nyq = 1.0 / (2 * spacing)
    F = np.fft.fft(f)
    freqs = np.fft.fftfreq(n, spacing)
    ks = np.arange(k_min, k_max + 1)
    bands = np.empty((ks.size, n), dtype=complex)
    for i, k in enumerate(ks):
        bands[i] = np.fft.ifft(F * bump(k, freqs))
    return PLDecomposition(n, spacing, ks, bands,
                           low_unresolved=2.0 ** (k_min - 1) < 1.0 / L,
                           high_unresolved=2.0 ** (k_max + 1) > nyq)


@dataclass(frozen=True)
class BesovNorm:
    s: float
    p: float
    q: float
    value: float
    truncation_flags: tuple
    band_norms: np.ndarray
    ks: np.ndarray

    @property
    def weighted_terms(self):
        return 2.0 ** (self.ks * self.s) * self.band_norms


def _lp(x, p, spacing):
    a = np.abs(x)
    if p == math.inf:
        return float(a.max())
    if p == 1:
        return float(spacing * a.sum())
    return float((spacing * np.sum(a ** p)) ** (1.0 / p))


def _lq(terms, q):
    if q == math.inf:
        return float(terms.max()) if terms.size else 0.0
    return float(np.sum(terms ** q) ** (1.0 / q))


def besov_norm(f, spacing, s, p=math.inf, q=1.0, k_range=None, sat_rel=1e-3):
    """Homogeneous Besov quasi-norm over the decomposition's k range.

    ``truncation_flags`` is (low, high): the band at that end of the range
    is unresolved on the grid or carries at least ``sat_rel`` of the
    largest weighted term.
    """
    if not (p >= 1 and q >= 1):
        raise ValidationError("need p >= 1 and q >= 1")
    dec = pl_decompose(f, spacing, k_range)
    norms = np.array([_lp(b, p, spacing) for b in dec.bands])
    terms = 2.0 ** (dec.ks * s) * norms
    top = terms.max() if terms.size else 0.0
    low = dec.low_unresolved or (top > 0 and terms[0] >= sat_rel * top)
    high = dec.high_unresolved or (top > 0 and terms[-1] >= sat_rel * top)
    return BesovNorm(s, p, q, _lq(terms, q), (bool(low), bool(high)), norms, dec.ks)


def dyadic_grid(length, samples_per_unit):
    """Periodic grid on [-length/2, length/2) with a power-of-two sample count."""
    n = int(round(length * samples_per_unit))
    if not _is_pow2(n):
        raise ValidationError(f"length * samples_per_unit = {n} is not a power of two")
    spacing = length / n
    return -length / 2 + np.arange(n) * spacing, spacing


# -- lemma checks ------------------------------------------------------------

@dataclass(frozen=True)
class CompositionGrowth:
    slope: float
    nus: tuple
    norms: tuple
    degenerate: bool


def composition_growth(f, spacing, s, nus, k_range=None):
    """Slope of ln ||exp(i 2 pi nu f)|| against ln nu in the s, infinity, 1 norm.

    The norm is taken as ||cos(2 pi nu f)|| + ||sin(2 pi nu f)||.
    """
    f = np.asarray(f, dtype=float)
    nus = [float(v) for v in nus]
    if len(nus) < 4 or any(v <= 0 for v in nus) or any(b <= a for a, b in zip(nus, nus[1:])):
        raise ValidationError("nus must be at least four positive ascending values")
    step = float(np.max(np.abs(np.diff(np.concatenate((f, f[:1]))))))
    if 2 * np.pi * nus[-1] * step > np.pi / 4:
        raise ResolutionError(
            f"composition_growth: phase step {2 * np.pi * nus[-1] * step:.3f} exceeds pi/4")
    norms = []
    for v in nus:
        ph = 2 * np.pi * v * f
        norms.append(besov_norm(np.cos(ph), spacing, s, math.inf, 1, k_range).value
                     + besov_norm(np.sin(ph), spacing, s, math.inf, 1, k_range).value)
    degenerate = max(norms) <= DEGENERATE_NORM
    slope = math.nan if degenerate else loglog_slope(nus, norms)
    return CompositionGrowth(slope, tuple(nus), tuple(norms), degenerate)


def band_noise(seed, terms=32, band=(1.0, 4.0), period=None):
    """Seeded random trigonometric sum with frequencies in ``band``.

    With ``period`` set, frequencies are snapped to multiples of 1/period.
    """
    rng = np.random.default_rng(seed)
    freqs = rng.uniform(band[0], band[1], terms)
    if period is not None:
        freqs = np.round(freqs * period) / period
    phases = rng.uniform(0, 2 * np.pi, terms)
    amps = rng.normal(size=terms) / math.sqrt(terms)

    def g(x):
        x = np.asarray(x, dtype=float)
        return np.sum(amps[:, None] * np.cos(2 * np.pi * freqs[:, None] * x.ravel()[None, :]
                                             + phases[:, None]), axis=0).reshape(x.shape)

    return g


@dataclass(frozen=True)
class CutoffRecord:
    alpha: float
    value: float


def cutoff_decay(g, alphas, samples_per_unit=32, max_samples=1 << 22):
    """(1/alpha) ||theta(./alpha) g|| in the 1, 1, 1 norm for each alpha.

    ``g`` is a callable.  The grid covers [-L/2, L/2) with L the power of
    two at least 8 max(alpha), so every cut-off (support 4 alpha) fits with
    room for its tails.
    """
    alphas = [float(a) for a in alphas]
    if not alphas or any(a <= 0 for a in alphas):
        raise ValidationError("alphas must be positive")
    if samples_per_unit < 16:
        raise ResourceError("cutoff_decay needs at least 16 samples per unit")
    L = 2.0 ** math.ceil(math.log2(8 * max(alphas)))
    n = int(L * samples_per_unit)
    if n > max_samples or not _is_pow2(n):
        raise ResourceError(f"cutoff_decay: grid of {n} samples for alpha={max(alphas)} "
                            f"exceeds {max_samples} or is not dyadic")
    x, dx = dyadic_grid(L, samples_per_unit)
    gx = np.asarray(g(x))
    out = []
    for a in alphas:
        val = besov_norm(theta(x / a) * gx, dx, 1.0, 1.0, 1.0).value
        out.append(CutoffRecord(a, val / a))
    return out


def is_decreasing(values, allowed_violations=0):
    v = np.asarray(values, dtype=float)
    return int(np.count_nonzero(np.diff(v) >= 0)) <= allowed_violations


@dataclass(frozen=True)
class CommutatorCheck:
    trace_norm: float
    besov_norm: float
    ratio: float


def cz_commutator_check(b, alpha, samples_per_unit=16):
    """Trace norm of the truncated commutator kernel against ||b|| (1, 1, 1).

    The matrix is dx [b(x_i) - b(x_j)] theta((x_i - x_j)/(2 alpha))/(x_i - x_j)
    on [-2 alpha, 2 alpha), with diagonal dx b'(x_i) theta(0) from a centred
    difference.  ``b`` is a callable.
    """
    if not alpha > 0:
        raise ValidationError("alpha must be positive")
    x, dx = dyadic_grid(4 * alpha, samples_per_unit)
    bx = np.asarray(b(x), dtype=np.result_type(np.asarray(b(x[:1])), float))
    z = x[:, None] - x[None, :]
    diff = bx[:, None] - bx[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        K = diff * theta(z / (2 * alpha)) / z
    deriv = (np.asarray(b(x + dx)) - np.asarray(b(x - dx))) / (2 * dx)
    K[np.diag_indices_from(K)] = deriv * theta(0.0)
    tn = trace_norm(dx * K)
    bn = besov_norm(bx, dx, 1.0, 1.0, 1.0).value
    ratio = tn / bn if bn > 0 else (0.0 if tn == 0 else math.inf)
    return CommutatorCheck(tn, bn, ratio)


# -- output ------------------------------------------------------------------

def write_besov_csv(norm, path):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "band_norm_p", "weighted_term"])
        for k, bn, wt in zip(norm.ks, norm.band_norms, norm.weighted_terms):
            w.writerow([int(k), repr(float(bn)), repr(float(wt))])


def write_lemma_csv(pairs, path):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["alpha_or_nu", "value"])
        for a, v in pairs:
            w.writerow([repr(float(a)), repr(float(v))])
