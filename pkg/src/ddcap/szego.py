"""Trace asymptotics: spectral trace functionals against symbol integrals.

The harness compares sum_k f(lambda_k(P L P)) with the integral of f(sigma)
over [0, alpha] x R and measures the two surrogate error terms: the
boundary leakage ||P L (1 - P)||_HS^2 and the composition defect Q_alpha.
"""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import discretization as dz
from . import quadrature as qd
from . import symbol as sm
from .errors import ContractError, ResolutionError, ValidationError
from .waterfill import power_threshold, rate_threshold

Q_PADDING_TOL = 1e-30
Q_OMEGA_CUTOFF = 1e-16
STABILITY_SPREAD = 4.0


def scaled_rate(B):
    """x -> r(B x)."""
    return lambda x: rate_threshold(B * np.asarray(x, dtype=float))


def scaled_power(B):
    """x -> p(B x)."""
    return lambda x: power_threshold(B * np.asarray(x, dtype=float))


def _check_f(f):
    f0 = float(np.asarray(f(np.zeros(1)))[0])
    if abs(f0) > 1e-12:
        raise ContractError(f"f(0) must vanish, got {f0!r}")


@dataclass(frozen=True)
class ConvergenceRecord:
    alpha: float
    trace_value: float
    symbol_value: float
    deviation: float
    q_alpha: float | None = None
    offdiag_hs: float | None = None
    runtime_ms: int = 0

    def __post_init__(self):
        vals = [self.alpha, self.trace_value, self.symbol_value, self.deviation]
        vals += [v for v in (self.q_alpha, self.offdiag_hs) if v is not None]
        if not all(math.isfinite(v) for v in vals):
            raise ValidationError(f"non-finite field in record at alpha={self.alpha}")
        if self.deviation < 0:
            raise ValidationError("deviation must be non-negative")


@dataclass(frozen=True)
class SweepPolicy:
    """How each alpha of a sweep is discretized and which diagnostics run."""

    delta: float = 1 / 16
    quantization: str = sm.WEYL
    quad: qd.QuadSpec = field(default_factory=qd.QuadSpec)
    offdiag: bool = True
    q_nu: float | None = None
    threads: int = 1
    origin: float = 0.0


def symbol_trace_integral(sym, f, alpha, quad=None, full_range=False, origin=0.0):
    """Integral of f(sigma) over [origin, origin + alpha] x [-Omega, Omega].

    Periodic symbols use alpha times the one-period integral unless
    ``full_range`` is set.
    """
    _check_f(f)
    if not alpha > 0:
        raise ValidationError("alpha must be positive")
    quad = quad or qd.QuadSpec()
    periodic = sym.family != sm.TABULATED or sym.table.periodic
    if periodic and not full_range:
        # one period in the symbol's own phase frame
        nodes = qd.flat_nodes(sym, quad, sym.shift, sym.shift + 1.0)
        return alpha * float(np.sum(nodes.weight * np.asarray(f(nodes.sigma), dtype=float)))
    nodes = qd.flat_nodes(sym, quad, origin, origin + alpha)
    return float(np.sum(nodes.weight * np.asarray(f(nodes.sigma), dtype=float)))


def loglog_slope(x, y):
    """Least-squares slope of ln y against ln x; NaN if any y <= 0."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or np.any(y <= 0) or np.any(x <= 0):
        return math.nan
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def _record(sym, f, alpha, policy, symbol_unit):
    t0 = time.perf_counter()
    grid = dz.GridSpec.for_symbol(sym, alpha, policy.delta, origin=policy.origin)
    M = dz.build_operator(sym, grid, policy.quantization)
    trace = dz.trace_functional(dz.eigen_spectrum(M), f)
    symbol_value = alpha * symbol_unit if symbol_unit is not None else \
        symbol_trace_integral(sym, f, alpha, policy.quad, origin=policy.origin)
    hs = dz.offdiag_hs(sym, grid, policy.quantization) if policy.offdiag else None
    q = q_alpha(sym, policy.q_nu, grid) if policy.q_nu is not None else None
    ms = int(round(1000 * (time.perf_counter() - t0)))
    return ConvergenceRecord(alpha, trace, symbol_value, abs(trace - symbol_value) / alpha,
                             q, hs, ms)


def _check_alphas(alphas):
    alphas = [float(a) for a in alphas]
    if not alphas or any(not a > 0 for a in alphas):
        raise ValidationError("alphas must be a non-empty list of positive values")
    if any(b <= a for a, b in zip(alphas, alphas[1:])):
        raise ValidationError("alphas must be strictly ascending")
    return alphas


def _map(fn, items, threads):
    if threads <= 1 or len(items) <= 1:
        return [fn(a) for a in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def szego_deviation_sweep(sym, f, alphas, policy=None):
    """One ConvergenceRecord per alpha, in ascending alpha order."""
    _check_f(f)
    alphas = _check_alphas(alphas)
    policy = policy or SweepPolicy()
    periodic = sym.family != sm.TABULATED or sym.table.periodic
    unit = symbol_trace_integral(sym, f, 1.0, policy.quad) if periodic else None
    # largest matrices first for better load balance; order restored below
    order = sorted(alphas, reverse=True)
    recs = _map(lambda a: _record(sym, f, a, policy, unit), order, policy.threads)
    return sorted(recs, key=lambda r: r.alpha)


def deviation_slope(records):
    return loglog_slope([r.alpha for r in records], [r.deviation for r in records])


# -- composition defect ------------------------------------------------------

def _anchor_classes(sym, pts):
    """Group anchor points with identical symbol rows (periodic symbols)."""
    periodic = sym.family != sm.TABULATED or sym.table.periodic
    if sym.is_time_invariant:
        return np.zeros(1), np.zeros(pts.size, dtype=int)
    key = np.mod(pts, 1.0) if periodic else pts
    key = np.round(key, 10) % 1.0 if periodic else np.round(key, 10)
    uniq, inv = np.unique(key, return_inverse=True)
    return uniq, inv


def _fourier_rows(rows, ws, dw, d, reach, chunk=512):
    """Midpoint Fourier sums dw * sum_j rows[:, j] e^{i 2 pi w_j k d}, |k| <= reach."""
    ks = np.arange(-reach, reach + 1)
    out = np.empty((rows.shape[0], ks.size), dtype=complex)
    for s in range(0, ks.size, chunk):
        E = np.exp(2j * np.pi * np.outer(ws, ks[s:s + chunk] * d))
        out[:, s:s + chunk] = dw * (rows @ E)
    return out


def q_alpha(sym, nu, grid, omega_n=None):
    """Trace norm of P (L_sigma L_tau - L_{sigma tau}) P with tau = e^{i 2 pi nu sigma}.

    L_tau is split as I + L_{tau - 1}; the kernels of the decaying symbols
    tau - 1 and sigma (tau - 1) come from a midpoint Fourier sum over omega.
    The intermediate variable runs over the padded interval.
    """
    if not math.isfinite(nu):
        raise ValidationError("nu must be finite")
    if nu == 0:
        return 0.0
    env = sm.envelope(sym)
    T = env.support if env.support is not None else env.padding(Q_PADDING_TOL)
    if not math.isfinite(T):
        raise ValidationError("q_alpha: kernel envelope admits no finite padding")
    d, n = grid.delta, grid.n
    p = int(math.ceil(T / d))
    N = n + 2 * p
    lo, hi = sm.omega_range(sym, Q_OMEGA_CUTOFF)
    # the phase kernels are not confined to the sigma envelope: keep every lag
    # of the padded domain, and the Fourier sum's alias period 1/domega beyond
    # twice that range
    nw = max(omega_n or grid.omega_n, int(math.ceil((hi - lo) * 2 * N * d)) + 1)
    dw = (hi - lo) / nw
    ws = lo + (np.arange(nw) + 0.5) * dw

    ext = grid.origin + (np.arange(N) - p + 0.5) * d
    uniq, cls = _anchor_classes(sym, ext)
    sig = np.atleast_2d(np.asarray(sm.eval_symbol(sym, uniq[:, None], ws[None, :]), dtype=float))
    step = 2 * np.pi * abs(nu) * np.max(np.abs(np.diff(sig, axis=1))) if nw > 1 else 0.0
    if step > np.pi / 4:
        raise ResolutionError(
            f"q_alpha: phase step {step:.3f} per omega sample exceeds pi/4; raise omega_n")
    rho = np.expm1(2j * np.pi * nu * sig)
    k_rho = _fourier_rows(rho, ws, dw, d, N)
    k_srho = _fourier_rows(sig * rho, ws, dw, d, N)
    short = np.arange(-p, p + 1) * d
    k_sig = np.asarray(sm.eval_kernel(sym, uniq[:, None], uniq[:, None] - short[None, :],
                                      sm.KOHN_NIRENBERG))

    inner = np.arange(p, p + n)
    cols = np.arange(N)

    def band(table, rows, cols_, reach):
        idx = rows[:, None] - cols_[None, :]
        mask = np.abs(idx) <= reach
        out = np.zeros(idx.shape, dtype=complex)
        rcls = np.broadcast_to(cls[rows][:, None], idx.shape)
        out[mask] = table[rcls[mask], idx[mask] + reach]
        return d * out

    A = band(k_sig, inner, cols, p)
    Bm = band(k_rho, cols, inner, N)
    C = band(k_srho, inner, inner, N)
    return dz.trace_norm(A @ Bm - C)


# -- boundary leakage --------------------------------------------------------

@dataclass(frozen=True)
class StabilityRecord:
    alpha: float
    offdiag_hs: float
    ratio: float


@dataclass(frozen=True)
class StabilityReport:
    records: list
    spread: float
    passed: bool
    hypothesis_verified: bool = True
    message: str = ""

    @property
    def flag(self):
        return "PASS" if self.passed else "FAIL"


def stability_sweep(sym, alphas, delta=1 / 16, quantization=sm.WEYL, threads=1):
    """offdiag_hs / (1 + ln alpha) across a sweep; PASS when its max/min <= 4."""
    alphas = _check_alphas(alphas)
    env = sm.envelope(sym)

    def one(a):
        grid = dz.GridSpec.for_symbol(sym, a, delta)
        hs = dz.offdiag_hs(sym, grid, quantization)
        return StabilityRecord(a, hs, hs / (1 + math.log(a)))

    recs = sorted(_map(one, alphas, threads), key=lambda r: r.alpha)
    ratios = np.array([r.ratio for r in recs])
    if np.all(ratios == 0):
        spread = 1.0
    elif np.any(ratios <= 0):
        spread = math.inf
    else:
        spread = float(ratios.max() / ratios.min())
    return StabilityReport(recs, spread, spread <= STABILITY_SPREAD, env.verified, env.message)


def heavy_tail_symbol(h=1e-7, points=400, lag_window=1024.0):
    """Time-invariant table with sigma ~ |omega|^(-1/2) (1 - |omega|)^2.

    The kernel then decays like |z|^(-1/2), so |k|^2 ~ 1/|z| and the c/s
    tail hypothesis fails.  The omega mesh is graded geometrically down to
    ``h`` so the singular mass is resolved for lags up to ~1/h.
    """
    pos = np.geomspace(h, 1.0, points)
    om = np.concatenate((-pos[::-1], [0.0], pos))
    a = np.abs(om)
    vals = np.power(np.where(a > 0, a, h), -0.5) * (1 - a) ** 2
    # peak value keeping the interpolant's mass on [-h, h] equal to 4 sqrt(h)
    vals[points] = 3 * h ** -0.5
    # unit zero-lag kernel: the interpolant integrates to one
    vals /= np.sum(np.diff(om) * (vals[1:] + vals[:-1]) / 2)
    return sm.Symbol.tabulated([0.0], om, [vals], lag_window=lag_window)


# -- output ------------------------------------------------------------------

SWEEP_COLUMNS = ("alpha", "trace_value", "symbol_value", "deviation", "q_alpha",
                 "offdiag_hs", "runtime_ms")


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_sweep_csv(records, path, include_runtime=True):
    """Sweep CSV; ``include_runtime=False`` blanks runtimes for byte-stable output."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for r in records:
            w.writerow([_fmt(r.alpha), _fmt(r.trace_value), _fmt(r.symbol_value),
                        _fmt(r.deviation), _fmt(r.q_alpha), _fmt(r.offdiag_hs),
                        _fmt(r.runtime_ms if include_runtime else None)])


def write_stability_csv(report, path):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["alpha", "offdiag_hs", "ratio"])
        for r in report.records:
            w.writerow([_fmt(r.alpha), _fmt(r.offdiag_hs), _fmt(r.ratio)])
