"""Smooth cut-offs of the kinked rate function and their scaling laws.

phi is the classical C-infinity bridge built from g(t) = exp(-1/t); the
approximation f_eps = h * phi((x - 1)/eps) of r = h * chi_[1, inf) differs
from r only on [1, 1 + eps].
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import special

from . import quadrature as qd
from .discretization import Spectrum
from .errors import DomainError, ResolutionError, ValidationError
from .szego import loglog_slope, symbol_trace_integral

MIN_TRANSITION_SAMPLES = 32
DEFAULT_QUAD = qd.QuadSpec(nx=256, nw=8192)


def smooth_step(t):
    """phi(t): 0 for t <= 0, 1 for t >= 1, smooth and nondecreasing between."""
    t = np.asarray(t, dtype=float)
    inside = (t > 0) & (t < 1)
    ti = np.where(inside, t, 0.5)
    # g(t) / (g(t) + g(1 - t)) = expit(1/(1 - t) - 1/t); +-inf near the ends is exact
    with np.errstate(over="ignore", divide="ignore"):
        mid = special.expit(1.0 / (1.0 - ti) - 1.0 / ti)
    out = np.where(t >= 1, 1.0, np.where(inside, mid, 0.0))
    return float(out) if out.ndim == 0 else out


def _check_eps(eps):
    if not (math.isfinite(eps) and eps > 0):
        raise ValidationError(f"epsilon must be positive and finite, got {eps!r}")


def _apply_h(h, x, where):
    vals = np.zeros_like(x)
    if np.any(where):
        with np.errstate(all="ignore"):
            hv = np.asarray(h(x[where]), dtype=float)
        if not np.all(np.isfinite(hv)):
            bad = x[where][~np.isfinite(hv)][0]
            raise DomainError(f"h is undefined at x={bad!r} where the cut-off is nonzero")
        vals[where] = hv
    return vals


def f_eps(x, eps, h=np.log):
    """h(x) phi((x - 1)/eps), defined as 0 wherever the phi factor is 0."""
    _check_eps(eps)
    x = np.asarray(x, dtype=float)
    phi = np.asarray(smooth_step((x - 1.0) / eps))
    out = _apply_h(h, x, phi > 0) * phi
    return float(out) if out.ndim == 0 else out


def rate(x, h=np.log):
    """h(x) for x >= 1, else 0 (r itself when h = ln)."""
    x = np.asarray(x, dtype=float)
    out = _apply_h(h, x, x >= 1)
    return float(out) if out.ndim == 0 else out


def d_eps(x, eps, h=np.log):
    """r - f_eps = h(x) (1 - phi((x - 1)/eps)) on [1, 1 + eps], else 0."""
    _check_eps(eps)
    x = np.asarray(x, dtype=float)
    phi = np.asarray(smooth_step((x - 1.0) / eps))
    on = (x >= 1) & (phi < 1)
    out = _apply_h(h, x, on) * (1.0 - phi)
    return float(out) if out.ndim == 0 else out


def eps_schedule(alpha, delta_exp):
    """eps = alpha^(-delta_exp)."""
    if not delta_exp > 0:
        raise ValidationError("delta_exp must be positive")
    if not alpha > 0:
        raise ValidationError("alpha must be positive")
    return float(alpha) ** (-float(delta_exp))


# -- Fourier decay -----------------------------------------------------------

def _collar(x):
    """Cut-off to zero over the unit collar [2, 3]."""
    return 1.0 - np.asarray(smooth_step(x - 2.0))


@dataclass(frozen=True)
class DecayEstimate:
    """``constant`` includes the eps^n factor, ``raw`` omits it."""

    constant: float
    raw: float
    omega_at_max: float
    band_max: float
    dx: float


def _decay(F, x, dx, n, scale, pad=8, rel_floor=1e-11):
    N = 1 << int(math.ceil(math.log2(pad * x.size)))
    spec = dx * np.abs(np.fft.rfft(F, N))
    freqs = np.fft.rfftfreq(N, dx)
    # resolved band: below a quarter of Nyquist and above the rounding floor
    band = (freqs > 0) & (freqs <= freqs[-1] / 4) & (spec >= rel_floor * spec.max())
    if not np.any(band):
        raise ResolutionError("no resolved Fourier band")
    vals = spec[band] * (2 * np.pi * freqs[band]) ** n
    k = int(np.argmax(vals))
    return DecayEstimate(float(vals[k] * scale), float(vals[k]), float(freqs[band][k]),
                         float(freqs[band][-1]), dx)


def fourier_decay_estimate(eps, n, h=np.log, dx=None):
    """sup over the resolved band of |F^(omega)| |2 pi omega|^n eps^n.

    F is f_eps on I = [0, 2], continued by the same bridge to zero over
    [2, 3].  ``dx`` defaults to eps / 64.
    """
    if n not in (2, 3, 4):
        raise ValidationError("n must be 2, 3 or 4")
    if not (0 < eps <= 1):
        raise ValidationError("epsilon must lie in (0, 1]")
    dx = eps / 64 if dx is None else float(dx)
    if eps / dx < MIN_TRANSITION_SAMPLES:
        raise ResolutionError(
            f"fourier_decay_estimate: {eps / dx:.1f} samples across the transition, "
            f"need {MIN_TRANSITION_SAMPLES}")
    x = (np.arange(int(round(3.0 / dx))) + 0.5) * dx
    F = np.asarray(f_eps(x, eps, h)) * _collar(x)
    return _decay(F, x, dx, n, eps ** n)


def kinked_decay_estimate(n, dx, h=np.log):
    """Same estimate for r itself (no eps factor); grows as dx shrinks."""
    x = (np.arange(int(round(3.0 / dx))) + 0.5) * dx
    F = np.asarray(rate(x, h)) * _collar(x)
    return _decay(F, x, dx, n, 1.0)


# -- trace scaling -----------------------------------------------------------

def deps_trace_symbol(sym, eps, alpha, h=np.log, quad=None):
    """Integral of d_eps(sigma) over [0, alpha] x [-Omega, Omega]."""
    _check_eps(eps)
    return symbol_trace_integral(sym, lambda s: d_eps(s, eps, h), alpha, quad or DEFAULT_QUAD)


def deps_trace_eigen(spec, eps, h=np.log):
    """sum_k d_eps(lambda_k)."""
    _check_eps(eps)
    lam = spec.eigenvalues if isinstance(spec, Spectrum) else np.asarray(spec, dtype=float)
    if lam.size == 0:
        return 0.0
    return float(np.sum(d_eps(lam, eps, h)))


@dataclass(frozen=True)
class EpsRecord:
    epsilon: float
    alpha: float
    trace_symbol: float
    trace_eigen: float | None


@dataclass(frozen=True)
class EpsSweep:
    records: list
    slope_symbol: float
    slope_eigen: float


def eps_sweep(sym, epsilons, alpha, spec=None, h=np.log, quad=None):
    """d_eps traces over a list of widths at fixed alpha, with log-log slopes."""
    eps = [float(e) for e in epsilons]
    recs = []
    for e in eps:
        ts = deps_trace_symbol(sym, e, alpha, h, quad)
        te = deps_trace_eigen(spec, e, h) if spec is not None else None
        recs.append(EpsRecord(e, float(alpha), ts, te))
    s_sym = loglog_slope(eps, [r.trace_symbol for r in recs])
    s_eig = loglog_slope(eps, [r.trace_eigen for r in recs]) if spec is not None else math.nan
    return EpsSweep(recs, s_sym, s_eig)


EPS_COLUMNS = ("epsilon", "alpha", "trace_symbol", "trace_eigen", "slope_fit")


def write_eps_csv(sweep, path):
    """One row per epsilon; slope_fit is the symbol-side log-log slope."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EPS_COLUMNS)
        for r in sweep.records:
            w.writerow([repr(r.epsilon), repr(r.alpha), repr(r.trace_symbol),
                        "" if r.trace_eigen is None else repr(r.trace_eigen),
                        "" if math.isnan(sweep.slope_symbol) else repr(sweep.slope_symbol)])
