import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from ddcap import symbol as sm
from ddcap.errors import RangeError, ValidationError


def test_gauss_values(gauss):
    assert sm.eval_symbol(gauss, 0.0, 0.0) == pytest.approx(1.5, abs=1e-15)
    assert sm.eval_symbol(gauss, 0.25, 0.0) == pytest.approx(1.0, abs=1e-15)


def test_time_invariant_ignores_x(flat_gauss, rng):
    om = rng.normal(size=50)
    a = sm.eval_symbol(flat_gauss, rng.uniform(-5, 5, 50), om)
    b = sm.eval_symbol(flat_gauss, rng.uniform(-5, 5, 50), om)
    assert np.max(np.abs(a - b)) == 0.0


@pytest.mark.parametrize("family", [sm.GAUSS, sm.BANDLIMITED])
def test_periodicity(family, rng):
    sym = sm.Symbol(family, m=0.7, W=1.3)
    x = rng.uniform(-3, 3, 10_000)
    om = rng.uniform(-2, 2, 10_000)
    assert np.max(np.abs(sm.eval_symbol(sym, x + 1, om) - sm.eval_symbol(sym, x, om))) <= 1e-12


def test_sup_l2_norm_against_quadrature(gauss):
    closed = sm.sup_l2_norm(gauss)
    assert closed == pytest.approx(1.5 / 2 ** 0.25, rel=1e-15)
    xs = np.linspace(0, 1, 201)
    quad = max(math.sqrt(integrate.quad(lambda w: sm.eval_symbol(gauss, x, w) ** 2,
                                        -np.inf, np.inf)[0]) for x in xs)
    assert quad == pytest.approx(closed, rel=1e-6)


def test_tabulated_sup_l2_exact():
    t = sm.Symbol.tabulated([0.0], [-1.0, 0.0, 1.0], [[0.0, 2.0, 0.0]])
    assert sm.sup_l2_norm(t) == pytest.approx(math.sqrt(8 / 3), rel=1e-14)


def test_kernel_unit_diagonal():
    g = sm.Symbol.gauss(0.0, 1.0)
    assert sm.eval_kernel(g, 0.37, 0.37) == pytest.approx(1.0, abs=1e-15)
    quad = integrate.quad(lambda w: math.exp(-math.pi * w * w), -np.inf, np.inf)[0]
    assert quad == pytest.approx(1.0, abs=1e-12)


def test_weyl_kernel_closed_form(gauss):
    k = sm.eval_kernel(gauss, 0.2, 0.3, sm.WEYL)
    assert k == pytest.approx(math.exp(-0.01 * math.pi), abs=1e-12)
    # quadrature oracle over the symbol at the midpoint
    re = integrate.quad(lambda w: sm.eval_symbol(gauss, 0.25, w) * math.cos(2 * math.pi * w * -0.1),
                        -10, 10, epsabs=1e-13)[0]
    assert k == pytest.approx(re, abs=1e-8)


@pytest.mark.parametrize("sym", [sm.Symbol.gauss(0.5, 1.0), sm.Symbol.bandlimited(0.3, 2.0),
                                 sm.ideal_band()])
def test_weyl_symmetry(sym, rng):
    x, y = rng.uniform(-2, 2, (2, 200))
    k1 = sm.eval_kernel(sym, x, y, sm.WEYL)
    k2 = sm.eval_kernel(sym, y, x, sm.WEYL)
    assert np.max(np.abs(k1 - k2)) == 0.0


def test_kernel_symbol_consistency(gauss):
    # Fourier transform of k(x, x - z) over 1024 lag samples returns sigma(x, .)
    n, dz = 1024, 1 / 64
    z = (np.arange(n) - n // 2) * dz
    om = np.linspace(-3, 3, 61)
    for x in (0.0, 0.3, 0.77):
        k = sm.eval_kernel(gauss, x, x - z)
        ft = dz * np.real(np.exp(-2j * np.pi * np.outer(om, z)) @ k)
        assert np.max(np.abs(ft - sm.eval_symbol(gauss, x, om))) <= 1e-6


def test_tabulated_kernel_matches_interpolant_transform():
    om = np.linspace(-2, 2, 81)
    vals = np.exp(-np.pi * om ** 2)
    t = sm.Symbol.tabulated([0.0], om, [vals])
    z = np.array([0.0, 0.3, 1.1])
    fine = np.linspace(-2, 2, 400_001)
    v = np.interp(fine, om, vals)
    ref = [integrate.trapezoid(v * np.cos(2 * np.pi * fine * zz), fine) for zz in z]
    assert np.allclose(np.real(sm.eval_kernel(t, z, 0.0)), ref, atol=1e-9)


def test_envelope_gauss_bounds():
    assert sm.envelope(sm.Symbol.gauss(0.0, 1.0)).op_norm_bound == pytest.approx(1.0)
    assert sm.envelope(sm.Symbol.gauss(0.5, 1.0)).op_norm_bound == pytest.approx(1.5)
    assert sm.envelope(sm.zero_symbol()).op_norm_bound == 0.0
    # op bound is the L1 norm of sqrt(psi)
    env = sm.envelope(sm.Symbol.gauss(0.5, 1.0))
    l1 = integrate.quad(lambda z: math.sqrt(env.psi(z)), -np.inf, np.inf)[0]
    assert l1 == pytest.approx(1.5, rel=1e-9)


@pytest.mark.parametrize("sym", [sm.Symbol.gauss(0.5, 1.0), sm.Symbol.gauss(-0.3, 2.5),
                                 sm.Symbol.bandlimited(0.4, 1.0)])
def test_envelope_dominates_kernel(sym):
    env = sm.envelope(sym)
    x = np.linspace(0, 1, 41)[:, None]
    z = np.linspace(-4, 4, 801)[None, :]
    k2 = np.abs(sm.eval_kernel(sym, x, x - z)) ** 2
    assert np.all(k2 <= env.psi(z) * (1 + 1e-12) + 1e-30)


def test_envelope_tail_constant(gauss):
    env = sm.envelope(gauss)
    for s in (0.1, 0.5, 1.0, 2.0):
        tail = 2 * integrate.quad(env.psi, s, np.inf)[0]
        assert tail <= env.tail_constant / s * (1 + 1e-9)


def test_tabulated_envelope_dominates_kernel():
    sym = sm.ideal_band()
    env = sm.envelope(sym)
    z = np.linspace(0, 200, 200_001)
    k2 = np.abs(sm.eval_kernel(sym, 0.0, -z)) ** 2
    assert np.all(k2 <= env.psi(z))


def test_omega_max_gauss():
    assert sm.omega_max(sm.Symbol.gauss(0.5, 1.0)) == pytest.approx(
        math.sqrt(math.log(1.5e10) / math.pi), rel=1e-14)


def test_validation():
    with pytest.raises(ValidationError):
        sm.Symbol.gauss(1.0, 1.0)
    with pytest.raises(ValidationError):
        sm.Symbol.gauss(0.5, 0.0)
    with pytest.raises(ValidationError):
        sm.Symbol.gauss(float("nan"), 1.0)
    with pytest.raises(ValidationError):
        sm.Symbol(sm.TIME_INVARIANT, m=0.2)


def test_table_range_error():
    t = sm.Symbol.tabulated([0.0, 0.5], [-1.0, 1.0], [[1, 1], [2, 2]], periodic=False)
    with pytest.raises(RangeError):
        sm.eval_symbol(t, 0.2, 1.5)
    with pytest.raises(RangeError):
        sm.eval_symbol(t, 0.7, 0.0)


def test_periodic_table_wraps():
    t = sm.Symbol.tabulated([0.0, 0.5], [-1.0, 1.0], [[1, 1], [3, 3]])
    assert sm.eval_symbol(t, 0.75, 0.0) == pytest.approx(2.0)
    assert sm.eval_symbol(t, 1.25, 0.0) == pytest.approx(2.0)


def test_smoothness_metadata(gauss, band):
    s = gauss.smoothness
    assert s.c3 and s.time_besov_s == math.inf
    assert not band.smoothness.c3


def test_table_csv_round_trip(tmp_path):
    sym = sm.Symbol.tabulated([0.0, 0.5], [-1.0, 0.0, 1.0], [[0, 1, 0], [0, 2, 0]])
    p = tmp_path / "t.csv"
    sm.write_table_csv(sym, p)
    assert p.read_text().splitlines()[0] == "x,omega,sigma"
    back = sm.load_table_csv(p)
    assert np.array_equal(back.table.values, sym.table.values)


@pytest.mark.parametrize("body", ["x,omega,sigma\n0,1,1\n0,0,1\n", "a,b,c\n0,0,1\n",
                                  "x,omega,sigma\n0,0,abc\n0,1,1\n"])
def test_table_csv_rejects(tmp_path, body):
    p = tmp_path / "bad.csv"
    p.write_text(body)
    with pytest.raises(ValidationError, match="bad.csv"):
        sm.load_table_csv(p)


@settings(max_examples=50, deadline=None)
@given(m=st.floats(-0.95, 0.95), W=st.floats(0.2, 5.0),
       x=st.floats(-10, 10), om=st.floats(-10, 10))
def test_symbol_bounded_by_sup(m, W, x, om):
    sym = sm.Symbol.gauss(m, W)
    v = sm.eval_symbol(sym, x, om)
    assert 0.0 <= v <= sm.sup_symbol(sym) * (1 + 1e-15)
