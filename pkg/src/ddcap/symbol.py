"""Time-varying transfer functions (symbols) and their kernels.

A symbol sigma(x, omega) is real-valued and 1-periodic in time x. The
operator it defines has kernel

    k(x, y) = int sigma(x, omega) exp(i 2 pi omega (x - y)) d omega

in the Kohn-Nirenberg convention; the Weyl convention evaluates the symbol
at the midpoint (x + y) / 2 instead of x.

Built-in families are separable, sigma(x, omega) = gain * a(x) * g(omega)
with a(x) = 1 + m cos(2 pi x), so their kernels are known in closed form.
Tabulated symbols are bilinearly interpolated; their kernels are the exact
Fourier transform of the piecewise-linear interpolant in omega.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, NamedTuple

import numpy as np
from scipy import special

from .errors import NumericError, RangeError, ValidationError

GAUSS = "gauss-separable"
BANDLIMITED = "bandlimited-separable"
TIME_INVARIANT = "time-invariant"
TABULATED = "tabulated"
FAMILIES = (GAUSS, BANDLIMITED, TIME_INVARIANT, TABULATED)

KOHN_NIRENBERG = "kohn-nirenberg"
WEYL = "weyl"
QUANTIZATIONS = (KOHN_NIRENBERG, WEYL)

# sup_x |sigma(x, omega)| drops below this outside [-omega_max, omega_max]
OMEGA_CUTOFF = 1e-10
# sampled lag range for tabulated envelopes without an explicit lag window,
# in units of 1 / omega_max
_ENVELOPE_PROBE = 256.0
_ENVELOPE_UNIFORM_MAX = 1 << 13


class Smoothness(NamedTuple):
    c3: bool
    time_besov_s: float


@dataclass(frozen=True)
class SymbolTable:
    """Symbol samples on a rectilinear (x, omega) grid.

    ``values[i, j]`` is sigma(xs[i], omegas[j]). Periodic tables hold one
    period, xs in [0, 1], and wrap around; a single row is x-independent.
    """

    xs: np.ndarray
    omegas: np.ndarray
    values: np.ndarray
    periodic: bool = True

    def __post_init__(self):
        xs = np.array(self.xs, dtype=float).ravel()
        omegas = np.array(self.omegas, dtype=float).ravel()
        values = np.array(self.values, dtype=float).reshape(xs.size, omegas.size)
        if xs.size < 1 or omegas.size < 2:
            raise ValidationError("table needs at least one x row and two omega samples")
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(omegas)) and np.all(np.isfinite(values))):
            raise ValidationError("table contains non-finite values")
        if np.any(np.diff(xs) <= 0) or np.any(np.diff(omegas) <= 0):
            raise ValidationError("table grids must be strictly increasing")
        if self.periodic and (xs[0] < 0 or xs[-1] > 1):
            raise ValidationError("periodic table rows must lie in [0, 1]")
        for arr in (xs, omegas, values):
            arr.setflags(write=False)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "omegas", omegas)
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class Symbol:
    """A real symbol sigma(x, omega), 1-periodic in x.

    Parameters
    ----------
    family : str
        One of ``FAMILIES``.
    m : float
        Modulation depth of a(x) = 1 + m cos(2 pi x), |m| < 1.
    W : float
        Bandwidth scale of the frequency profile.
    gain : float
        Overall amplitude factor (e.g. a water level B folded into sigma).
    table : SymbolTable, optional
        Samples for the tabulated family.
    lag_window : float, optional
        Tabulated family only: the kernel is set to zero for lags beyond
        this value (finite delay spread).
    shift : float
        Built-in families only: time offset of the modulation,
        cos(2 pi (x - shift)).
    """

    family: str = GAUSS
    m: float = 0.0
    W: float = 1.0
    gain: float = 1.0
    period: float = 1.0
    table: SymbolTable | None = field(default=None, repr=False)
    lag_window: float | None = None
    shift: float = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValidationError(f"unknown symbol family {self.family!r}")
        for name in ("m", "W", "gain", "period", "shift"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"symbol parameter {name} is not finite")
        if self.period != 1.0:
            raise ValidationError("symbols are 1-periodic; period must be 1")
        if self.gain < 0:
            raise ValidationError("gain must be non-negative")
        if self.family == TABULATED:
            if self.table is None:
                raise ValidationError("tabulated symbol requires a table")
            if self.lag_window is not None and not self.lag_window > 0:
                raise ValidationError("lag_window must be positive")
            if self.shift != 0:
                raise ValidationError("shift applies to built-in families only")
            return
        if not abs(self.m) < 1:
            raise ValidationError("modulation depth must satisfy |m| < 1")
        if not self.W > 0:
            raise ValidationError("bandwidth W must be positive")
        if self.family == TIME_INVARIANT and self.m != 0:
            raise ValidationError("time-invariant symbols have m = 0")

    @classmethod
    def gauss(cls, m=0.0, W=1.0, gain=1.0):
        return cls(GAUSS, m=m, W=W, gain=gain)

    @classmethod
    def time_invariant(cls, W=1.0, gain=1.0):
        return cls(TIME_INVARIANT, W=W, gain=gain)

    @classmethod
    def bandlimited(cls, m=0.0, W=1.0, gain=1.0):
        return cls(BANDLIMITED, m=m, W=W, gain=gain)

    @classmethod
    def tabulated(cls, xs, omegas, values, periodic=True, lag_window=None, gain=1.0):
        return cls(TABULATED, table=SymbolTable(xs, omegas, values, periodic),
                   lag_window=lag_window, gain=gain)

    def scaled(self, factor):
        """The same symbol multiplied by ``factor``."""
        return Symbol(self.family, m=self.m, W=self.W, gain=self.gain * factor,
                      table=self.table, lag_window=self.lag_window, shift=self.shift)

    def shifted(self, s):
        """sigma(x - s, omega) for a built-in family."""
        if self.family == TABULATED:
            raise ValidationError("shifted() applies to built-in families only")
        return Symbol(self.family, m=self.m, W=self.W, gain=self.gain, shift=self.shift + s)

    @property
    def is_time_invariant(self):
        if self.family == TABULATED:
            return self.table.xs.size == 1
        return self.m == 0

    @property
    def smoothness(self):
        # the C^3 / Besov-in-time split is reported, not arbitrated
        if self.family in (GAUSS, TIME_INVARIANT):
            return Smoothness(True, math.inf)
        if self.family == BANDLIMITED:
            return Smoothness(False, math.inf)
        return Smoothness(False, math.inf if self.is_time_invariant else 1.0)

    def __call__(self, x, omega):
        return eval_symbol(self, x, omega)


def ideal_band(width=1.0, ramp=1e-9, extent=None):
    """Tabulated time-invariant indicator of |omega| <= width / 2.

    The edges are linear ramps of length ``ramp``.
    """
    half = width / 2
    outer = extent if extent is not None else width
    omegas = [-outer, -half - ramp, -half, half, half + ramp, outer]
    values = [0.0, 0.0, 1.0, 1.0, 0.0, 0.0]
    return Symbol.tabulated([0.0], omegas, [values])


def zero_symbol(extent=1.0):
    return Symbol.tabulated([0.0], [-extent, extent], [[0.0, 0.0]])


# -- evaluation --------------------------------------------------------------

def modulation(sym, x):
    x = np.asarray(x, dtype=float)
    if sym.m == 0:
        return np.ones_like(x)
    return 1.0 + sym.m * np.cos(2 * np.pi * (x - sym.shift))


def frequency_profile(sym, omega):
    omega = np.asarray(omega, dtype=float)
    if sym.family == BANDLIMITED:
        return np.maximum(0.0, 1.0 - np.abs(omega) / sym.W)
    return np.exp(-np.pi * (omega / sym.W) ** 2)


def lag_profile(sym, z):
    """Inverse Fourier transform of the frequency profile."""
    z = np.asarray(z, dtype=float)
    W = sym.W
    if sym.family == BANDLIMITED:
        return W * np.sinc(W * z) ** 2
    return W * np.exp(-np.pi * (W * z) ** 2)


def eval_symbol(sym, x, omega):
    """sigma(x, omega), broadcasting over array arguments."""
    if sym.family == TABULATED:
        return sym.gain * _table_eval(sym.table, x, omega)
    return sym.gain * modulation(sym, x) * frequency_profile(sym, omega)


def eval_kernel(sym, x, y, quantization=KOHN_NIRENBERG):
    """Kernel k(x, y) of the operator with symbol ``sym``."""
    if quantization not in QUANTIZATIONS:
        raise ValidationError(f"unknown quantization {quantization!r}")
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    anchor = x if quantization == KOHN_NIRENBERG else 0.5 * (x + y)
    z = x - y
    if sym.family == TABULATED:
        return sym.gain * _table_kernel(sym, anchor, z)
    return sym.gain * modulation(sym, anchor) * lag_profile(sym, z)


def omega_range(sym, cutoff=OMEGA_CUTOFF):
    """Frequency interval outside of which sigma is below ``cutoff`` (or undefined)."""
    if sym.family == TABULATED:
        return float(sym.table.omegas[0]), float(sym.table.omegas[-1])
    if sym.family == BANDLIMITED:
        return -sym.W, sym.W
    peak = sym.gain * (1 + abs(sym.m))
    if peak <= cutoff:
        return -sym.W, sym.W
    om = sym.W * math.sqrt(math.log(peak / cutoff) / math.pi)
    return -om, om


def omega_max(sym, cutoff=OMEGA_CUTOFF):
    lo, hi = omega_range(sym, cutoff)
    return max(abs(lo), abs(hi))


def sup_symbol(sym):
    """sup over (x, omega) of sigma."""
    if sym.family == TABULATED:
        return sym.gain * float(np.max(sym.table.values))
    return sym.gain * (1 + abs(sym.m))


def sup_l2_norm(sym):
    """sup_x of the L2 norm of sigma(x, .)."""
    g = sym.gain * (1 + abs(sym.m))
    if sym.family in (GAUSS, TIME_INVARIANT):
        return g * sym.W ** 0.5 / 2 ** 0.25
    if sym.family == BANDLIMITED:
        return g * math.sqrt(2 * sym.W / 3)
    t = sym.table
    h = np.diff(t.omegas)
    # exact integral of the square of a piecewise-linear function
    seg = h * (t.values[:, :-1] ** 2 + t.values[:, :-1] * t.values[:, 1:] + t.values[:, 1:] ** 2) / 3
    return sym.gain * float(np.sqrt(seg.sum(axis=1).max()))


# -- tabulated internals -----------------------------------------------------

def _x_weights(table, x):
    x = np.asarray(x, dtype=float)
    xs = table.xs
    nrow = xs.size
    if nrow == 1:
        zero = np.zeros(x.shape, dtype=int)
        return zero, zero, np.zeros(x.shape)
    if table.periodic:
        xe = np.concatenate(([xs[-1] - 1.0], xs, [xs[0] + 1.0]))
        rows = np.concatenate(([nrow - 1], np.arange(nrow), [0]))
        xm = np.mod(x, 1.0)
    else:
        tol = 1e-12 * max(1.0, abs(xs[-1]))
        if np.any(x < xs[0] - tol) or np.any(x > xs[-1] + tol):
            raise RangeError("x outside the table range of a non-periodic symbol")
        xe = xs
        rows = np.arange(nrow)
        xm = np.clip(x, xs[0], xs[-1])
    k = np.clip(np.searchsorted(xe, xm, side="right") - 1, 0, xe.size - 2)
    t = (xm - xe[k]) / (xe[k + 1] - xe[k])
    return rows[k], rows[k + 1], t


def _table_eval(table, x, omega):
    x, omega = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(omega, dtype=float))
    om = table.omegas
    tol = 1e-12 * max(1.0, abs(om[0]), abs(om[-1]))
    if np.any(np.isnan(omega)) or np.any(np.isnan(x)):
        raise ValidationError("NaN evaluation point")
    if np.any(omega < om[0] - tol) or np.any(omega > om[-1] + tol):
        raise RangeError(f"omega outside the table range [{om[0]}, {om[-1]}]")
    i0, i1, tx = _x_weights(table, x)
    wc = np.clip(omega, om[0], om[-1])
    j = np.clip(np.searchsorted(om, wc, side="right") - 1, 0, om.size - 2)
    tw = (wc - om[j]) / (om[j + 1] - om[j])
    V = table.values
    lo = (1 - tw) * V[i0, j] + tw * V[i0, j + 1]
    hi = (1 - tw) * V[i1, j] + tw * V[i1, j + 1]
    return (1 - tx) * lo + tx * hi


def _sph_j1(u):
    """Spherical Bessel j1; power series near zero where the closed form cancels."""
    small = np.abs(u) < 0.5
    us = np.where(small, 1.0, u)
    out = np.sin(us) / us ** 2 - np.cos(us) / us
    # j1(u) = u sum_k (-u^2/2)^k / (k! (2k+3)!!)
    t = -0.5 * u * u
    term = np.full(np.shape(u), 1.0 / 3.0)
    series = term.copy()
    for k in range(1, 9):
        term = term * t / (k * (2 * k + 3))
        series = series + term
    return np.where(small, u * series, out)


def table_kernel_rows(table, z, chunk=2048):
    """Kernel of each table row at lags ``z``: exact transform of the
    piecewise-linear interpolant in omega. Returns an (nrow, len(z)) array."""
    z = np.asarray(z, dtype=float).ravel()
    om = table.omegas
    h = np.diff(om)
    c = 0.5 * (om[:-1] + om[1:])
    V = table.values
    mean = 0.5 * (V[:, :-1] + V[:, 1:])
    slope = (V[:, 1:] - V[:, :-1]) / h
    out = np.empty((V.shape[0], z.size), dtype=complex)
    for start in range(0, z.size, chunk):
        kappa = 2 * np.pi * z[start:start + chunk]
        u = 0.5 * np.outer(h, kappa)
        phase = np.exp(1j * np.outer(c, kappa)) * h[:, None]
        j0 = np.sinc(u / np.pi)
        j1 = _sph_j1(u)
        A = phase * j0
        B = phase * (1j * 0.5 * h[:, None] * j1)
        out[:, start:start + chunk] = mean @ A + slope @ B
    return out


def _table_kernel(sym, anchor, z):
    table = sym.table
    shape = z.shape
    zu, zinv = np.unique(np.round(z.ravel(), 12), return_inverse=True)
    rows = table_kernel_rows(table, zu)
    if sym.lag_window is not None:
        rows[:, np.abs(zu) > sym.lag_window] = 0.0
    i0, i1, t = _x_weights(table, anchor.ravel())
    vals = (1 - t) * rows[i0, zinv] + t * rows[i1, zinv]
    vals = vals.reshape(shape)
    scale = np.max(np.abs(vals)) if vals.size else 0.0
    if not np.all(np.isfinite(vals)):
        raise NumericError("tabulated kernel quadrature produced non-finite values")
    if scale == 0 or np.max(np.abs(vals.imag)) <= 1e-12 * scale:
        return vals.real
    return vals


# -- envelopes ---------------------------------------------------------------

@dataclass(frozen=True)
class KernelEnvelope:
    """Lag envelope psi(z) >= sup_x |k(x, x - z)|^2 and derived constants.

    ``op_norm_bound`` is the L1 norm of sqrt(psi), which bounds the operator
    norm; ``tail_constant`` is a c with int_{|z|>s} psi <= c / s.
    """

    psi: Callable[[np.ndarray], np.ndarray]
    l1_norm: float
    op_norm_bound: float
    tail_constant: float
    verified: bool = True
    message: str = ""
    support: float | None = None
    padding_fn: Callable[[float], float] | None = field(default=None, repr=False)

    def padding(self, tol=1e-14):
        """Smallest lag T with psi(z) < tol for all |z| >= T."""
        if self.padding_fn is not None:
            return self.padding_fn(tol)
        return math.inf


def _sup_u_erfc():
    u = np.linspace(0, 4, 40001)
    return float(np.max(u * special.erfc(u)))


def envelope(sym):
    """Kernel envelope of ``sym`` (closed form for built-in families)."""
    if sym.family == TABULATED:
        return _table_envelope(sym)
    g = sym.gain * (1 + abs(sym.m))
    W = sym.W
    A = g ** 2 * W ** 2
    if A == 0:
        return KernelEnvelope(lambda z: np.zeros_like(np.asarray(z, dtype=float)),
                              0.0, 0.0, 0.0, padding_fn=lambda tol: 0.0)
    if sym.family == BANDLIMITED:
        l1 = A * 2 / (3 * W)

        def psi(z):
            return A * np.sinc(W * np.asarray(z, dtype=float)) ** 4

        # tail <= min(l1, 2A / (3 pi^4 W^4 s^3)); sup of s * tail
        s_star = (2 * A / (3 * np.pi ** 4 * W ** 4 * l1)) ** (1 / 3)
        tail_c = l1 * s_star

        def padding(tol):
            return (A / tol) ** 0.25 / (np.pi * W)

        return KernelEnvelope(psi, l1, g, tail_c, padding_fn=padding)

    l1 = A / (math.sqrt(2) * W)

    def psi(z):
        return A * np.exp(-2 * np.pi * (W * np.asarray(z, dtype=float)) ** 2)

    # int_{|z|>s} psi = l1 * erfc(sqrt(2 pi) W s)
    tail_c = l1 * _sup_u_erfc() / (math.sqrt(2 * np.pi) * W)

    def padding(tol):
        if tol >= A:
            return 0.0
        return math.sqrt(math.log(A / tol) / (2 * np.pi)) / W

    return KernelEnvelope(psi, l1, g, tail_c, padding_fn=padding)


def _table_envelope(sym):
    table = sym.table
    om = omega_max(sym)
    Z = sym.lag_window if sym.lag_window is not None else _ENVELOPE_PROBE / om
    dz = 1.0 / (32 * om)
    if Z / dz <= _ENVELOPE_UNIFORM_MAX:
        z_fine, z_geo = np.arange(0.0, Z, dz), np.empty(0)
    else:
        z_fine = np.arange(0.0, min(Z, 32.0 / om), dz)
        z_geo = np.geomspace(max(z_fine[-1], dz), Z, 1 + int(64 * np.log2(Z / max(z_fine[-1], dz))))
    zs = np.unique(np.concatenate((z_fine, z_geo, [Z])))
    rows = table_kernel_rows(table, np.concatenate((zs, -zs)))
    k2 = np.abs(rows) ** 2 * sym.gain ** 2
    psi_s = np.maximum(k2[:, :zs.size].max(axis=0), k2[:, zs.size:].max(axis=0))
    # running max from the tail keeps the sampled envelope monotone in |z|
    psi_mono = np.maximum.accumulate(psi_s[::-1])[::-1]
    # kernel is band-limited to omega_max: a peak between samples exceeds the
    # nearest sample by at most 1/cos^2(pi omega_max dz)
    psi_mono = psi_mono / math.cos(math.pi * om * dz) ** 2
    # integrals of the step function that psi() returns
    dzs = np.diff(zs)
    l1 = 2 * float(np.sum(psi_mono[:-1] * dzs))
    op = 2 * float(np.sum(np.sqrt(psi_mono[:-1]) * dzs))
    cum = np.concatenate(([0.0], np.cumsum(psi_mono[:-1] * dzs)))
    tail = 2 * (cum[-1] - cum)
    tail_c = float(np.max(zs * tail))
    raw_cum = np.concatenate(([0.0], np.cumsum(0.5 * (psi_s[1:] + psi_s[:-1]) * dzs)))
    raw_tail = 2 * (raw_cum[-1] - raw_cum)

    fit = (zs >= Z / 64) & (zs <= Z / 4) & (raw_tail > 0)
    verified, message = True, ""
    if np.count_nonzero(fit) >= 4 and tail_c > 0:
        slope = np.polyfit(np.log(zs[fit]), np.log(raw_tail[fit]), 1)[0]
        if slope > -0.8:
            verified = False
            message = (f"stability hypothesis unverified: kernel tail mass decays "
                       f"like s^{slope:.2f}, slower than c/s")

    windowed = sym.lag_window is not None

    def psi(z):
        za = np.abs(np.asarray(z, dtype=float))
        # left sample value: the running max already covers everything beyond
        idx = np.clip(np.searchsorted(zs, za, side="right") - 1, 0, zs.size - 1)
        out = psi_mono[idx]
        beyond = za > Z
        if np.any(beyond):
            out = np.where(beyond, 0.0 if windowed else np.nan, out)
        return out

    def padding(tol):
        if windowed:
            above = np.nonzero(psi_mono >= tol)[0]
            return float(Z) if above.size else 0.0
        above = np.nonzero(psi_mono >= tol)[0]
        if above.size == 0:
            return 0.0
        # still above tol in the last sampled octave: padding not certifiable
        if zs[above[-1]] >= Z / 2:
            return math.inf
        return float(zs[above[-1] + 1])

    return KernelEnvelope(psi, l1, op, tail_c, verified, message,
                          support=Z if windowed else None, padding_fn=padding)


# -- CSV ---------------------------------------------------------------------

def load_table_csv(path, periodic=True, lag_window=None):
    """Read a tabulated symbol from CSV with header ``x,omega,sigma``.

    Rows are ordered by x, then omega, on a full rectilinear grid.
    """
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"symbol table not found: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["x", "omega", "sigma"]:
            raise ValidationError(f"{path}: header must be x,omega,sigma")
        try:
            data = np.array([[float(v) for v in row] for row in reader if row], dtype=float)
        except ValueError as exc:
            raise ValidationError(f"{path}: {exc}") from None
    if data.ndim != 2 or data.shape[1] != 3 or data.shape[0] < 2:
        raise ValidationError(f"{path}: expected rows of three values")
    xs = np.unique(data[:, 0])
    omegas = data[data[:, 0] == xs[0], 1]
    if data.shape[0] != xs.size * omegas.size:
        raise ValidationError(f"{path}: rows do not form a rectilinear grid")
    grid_x = np.repeat(xs, omegas.size)
    grid_w = np.tile(omegas, xs.size)
    if not (np.array_equal(data[:, 0], grid_x) and np.array_equal(data[:, 1], grid_w)):
        raise ValidationError(f"{path}: rows must be ordered by x then omega with strictly increasing grids")
    values = data[:, 2].reshape(xs.size, omegas.size)
    try:
        return Symbol.tabulated(xs, omegas, values, periodic=periodic, lag_window=lag_window)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from None


def write_table_csv(sym, path):
    t = sym.table
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "omega", "sigma"])
        for i, x in enumerate(t.xs):
            for j, om in enumerate(t.omegas):
                w.writerow([repr(float(x)), repr(float(om)), repr(float(sym.gain * t.values[i, j]))])
