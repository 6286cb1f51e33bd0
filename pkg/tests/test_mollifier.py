import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ddcap import mollifier as mo
from ddcap import symbol as sm
from ddcap.errors import DomainError, ResolutionError, ValidationError


def test_smooth_step_examples():
    assert mo.smooth_step(-1.0) == 0.0
    assert mo.smooth_step(2.0) == 1.0
    assert mo.smooth_step(0.5) == 0.5
    assert mo.smooth_step(0.0) == 0.0 and mo.smooth_step(1.0) == 1.0


def test_smooth_step_matches_bridge():
    t = np.linspace(0.01, 0.99, 99)
    g = lambda u: np.exp(-1 / u)
    assert np.allclose(mo.smooth_step(t), g(t) / (g(t) + g(1 - t)), atol=1e-15)


def test_smooth_step_monotone():
    v = mo.smooth_step(np.linspace(-0.5, 1.5, 10_000))
    assert np.min(np.diff(v)) >= -1e-15


@settings(max_examples=100, deadline=None)
@given(t=st.floats(-5, 5))
def test_smooth_step_symmetry(t):
    assert mo.smooth_step(t) + mo.smooth_step(1 - t) == pytest.approx(1.0, abs=1e-15)


def test_f_eps_examples():
    assert mo.f_eps(1.0, 0.3) == 0.0
    assert mo.f_eps(1.1, 0.1) == pytest.approx(math.log(1.1), abs=1e-15)
    # phi factor is exactly zero below 1, so ln is never evaluated there
    assert mo.f_eps(-1.0, 0.1) == 0.0


def test_f_eps_domain_error():
    with pytest.raises(DomainError):
        mo.f_eps(1.05, 0.1, h=lambda x: np.log(x - 1.1))
    with pytest.raises(ValidationError):
        mo.f_eps(1.0, 0.0)


@pytest.mark.parametrize("eps", [0.5, 0.2, 0.05])
def test_d_eps_support(eps):
    x = np.linspace(0, 3, 30_001)
    d = mo.d_eps(x, eps)
    outside = (x < 1) | (x > 1 + eps)
    assert np.max(np.abs(d[outside])) <= 1e-14
    r = mo.rate(x)
    assert np.max(np.abs(mo.f_eps(x, eps)[outside] - r[outside])) <= 1e-14


def test_d_eps_bounds_with_normalized_h():
    h = lambda x: np.log(x) / math.log(2)
    x = np.linspace(0, 2, 10_000)
    for eps in (1.0, 0.5, 0.1):
        d = mo.d_eps(x, eps, h)
        assert d.min() >= 0 and d.max() <= 1


def test_d_eps_midpoint():
    eps = 0.1
    assert mo.d_eps(1 + eps / 2, eps) == pytest.approx(math.log(1 + eps / 2) / 2, abs=1e-15)


def test_eps_schedule():
    assert mo.eps_schedule(16, 0.25) == pytest.approx(0.5)
    assert mo.eps_schedule(1, 0.7) == 1.0
    assert mo.eps_schedule(64, 0.25) < mo.eps_schedule(16, 0.25)
    with pytest.raises(ValidationError):
        mo.eps_schedule(16, 0.0)


def test_decay_n2_finite():
    d = mo.fourier_decay_estimate(0.1, 2)
    assert math.isfinite(d.constant) and d.constant > 0


def test_decay_resolution_error():
    with pytest.raises(ResolutionError):
        mo.fourier_decay_estimate(0.1, 3, dx=0.01)
    with pytest.raises(ValidationError):
        mo.fourier_decay_estimate(0.1, 5)


def test_kinked_constant_grows_with_refinement():
    c = [mo.kinked_decay_estimate(3, dx).constant for dx in (1 / 256, 1 / 1024, 1 / 4096)]
    assert c[0] < c[1] < c[2]


def test_deps_trace_symbol_below_one(gauss):
    small = gauss.scaled(0.5)
    assert mo.deps_trace_symbol(small, 0.1, 16.0) == 0.0


def test_deps_trace_symbol_linear_in_alpha(gauss):
    sym = gauss.scaled(1.5)
    per = [mo.deps_trace_symbol(sym, 0.1, a) / a for a in (8.0, 16.0, 32.0)]
    assert max(per) / min(per) <= 1.1


def test_deps_trace_eigen_examples():
    eps = 0.1
    assert mo.deps_trace_eigen(np.array([0.2, 0.9]), eps) == 0.0
    assert mo.deps_trace_eigen(np.array([1 + eps / 2]), eps) == pytest.approx(
        math.log(1 + eps / 2) / 2, abs=1e-15)
    assert mo.deps_trace_eigen(np.zeros(0), eps) == 0.0


def test_eps_sweep_csv(tmp_path, gauss):
    sw = mo.eps_sweep(gauss.scaled(1.5), [0.2, 0.1], 16.0)
    mo.write_eps_csv(sw, tmp_path / "e.csv")
    lines = (tmp_path / "e.csv").read_text().splitlines()
    assert lines[0] == "epsilon,alpha,trace_symbol,trace_eigen,slope_fit"
    assert lines[1].split(",")[3] == ""


def test_symbol_quadrature_converged(gauss):
    from ddcap import quadrature as qd
    sym = gauss.scaled(1.5)
    a = mo.deps_trace_symbol(sym, 0.05, 1.0)
    b = mo.deps_trace_symbol(sym, 0.05, 1.0, quad=qd.QuadSpec(512, 16384))
    assert abs(a - b) <= 1e-3 * b


def test_scaled_symbol_crosses_one():
    assert sm.sup_symbol(sm.Symbol.gauss(0.5, 1.0).scaled(1.5)) == pytest.approx(2.25)
