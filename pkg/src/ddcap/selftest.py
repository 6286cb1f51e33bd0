"""Quick self-checks of closed-form and oracle examples across all modules."""

from __future__ import annotations

import math

import numpy as np

from . import besov as bv
from . import discretization as dz
from . import mollifier as mo
from . import symbol as sm
from . import szego as sz
from . import waterfill as wf
from .errors import ContractError, DDCapError


def _close(a, b, tol):
    return abs(a - b) <= tol


def _raises(exc, fn):
    try:
        fn()
    except exc:
        return True
    return False


def _checks():
    g = sm.Symbol.gauss(0.5, 1.0)
    g0 = sm.Symbol.gauss(0.0, 1.0)
    ti = sm.Symbol.time_invariant(1.0)
    band = sm.ideal_band()
    yield "symbol value at origin", _close(sm.eval_symbol(g, 0.0, 0.0), 1.5, 1e-15)
    yield "symbol value at quarter period", _close(sm.eval_symbol(g, 0.25, 0.0), 1.0, 1e-15)
    yield "weyl kernel closed form", _close(
        sm.eval_kernel(g, 0.2, 0.3, sm.WEYL), math.exp(-0.01 * math.pi), 1e-12)
    yield "unit kernel diagonal", _close(sm.eval_kernel(g0, 0.3, 0.3), 1.0, 1e-15)
    yield "envelope bound", _close(sm.envelope(g).op_norm_bound, 1.5, 1e-12)
    yield "zero symbol bound", sm.envelope(sm.zero_symbol()).op_norm_bound == 0.0
    yield "eigen of diagonal", np.allclose(
        dz.eigen_spectrum(np.diag([2.0, 0.5])).eigenvalues, [2.0, 0.5], atol=1e-14)
    yield "trace norm diag(3,-4)", _close(dz.trace_norm(np.diag([3.0, -4.0])), 7.0, 1e-12)
    yield "trace functional f(0) contract", _raises(
        ContractError, lambda: dz.trace_functional(np.array([1.0]), lambda x: x + 1))
    yield "r(e) = 1", _close(wf.rate_threshold(math.e), 1.0, 1e-15)
    yield "p(2) = 1/2", wf.power_threshold(2.0) == 0.5
    r = wf.waterfill_eigen(np.array([2.0, 2 / 3]), 1.0)
    yield "hand water-fill", _close(r.B, 1.5, 1e-12) and _close(r.capacity, math.log(3), 1e-12) \
        and r.active_count == 1
    for S in (0.5, 1.0, 3.0):
        c = wf.waterfill_symbol(band, S).capacity
        yield f"shannon band S={S}", _close(c / math.log1p(S), 1.0, 1e-4)
    yield "symbol integral of unit gauss", _close(
        sz.symbol_trace_integral(g0, lambda x: x, 1.0), 1.0, 1e-8)
    grid = dz.GridSpec.for_symbol(ti, 8.0)
    yield "time-invariant composition defect", sz.q_alpha(ti, 1.0, grid) <= 1e-6 * 8
    yield "zero-nu composition defect", sz.q_alpha(g, 0.0, grid) == 0.0
    yield "smooth step midpoint", mo.smooth_step(0.5) == 0.5
    yield "d_eps at midpoint", _close(mo.d_eps(1.05, 0.1), math.log(1.05) / 2, 1e-15)
    yield "eps schedule", _close(mo.eps_schedule(16, 0.25), 0.5, 1e-15)
    x, dx = bv.dyadic_grid(16, 64)
    w = np.fft.fftfreq(x.size, dx)
    k0, k1 = bv.default_k_range(x.size, dx)
    on = (np.abs(w) >= 2.0 ** k0) & (np.abs(w) <= 2.0 ** k1)
    yield "partition of unity", np.max(np.abs(bv.partition_sum(w[on], k0, k1) - 1)) <= 1e-12
    f = np.exp(-x ** 2) * np.cos(4 * np.pi * x)
    yield "besov homogeneity", _close(
        bv.besov_norm(2 * f, dx, 1.0).value, 2 * bv.besov_norm(f, dx, 1.0).value, 1e-12)
    yield "constant commutator", bv.cz_commutator_check(lambda t: np.ones_like(t), 2.0).trace_norm \
        <= 1e-12


def run_selftest(report=print):
    """Run every check; returns a list of (name, passed)."""
    results = []
    it = _checks()
    while True:
        try:
            name, ok = next(it)
        except StopIteration:
            break
        except DDCapError as exc:
            name, ok = f"error: {exc}", False
        results.append((name, bool(ok)))
        report(f"{'PASS' if ok else 'FAIL'}  {name}")
    return results
