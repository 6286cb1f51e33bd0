import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import jacobi_eigvals
from ddcap import discretization as dz
from ddcap import symbol as sm
from ddcap import waterfill as wf
from ddcap.errors import ContractError, NumericError, ResourceError, ValidationError


def _grid(alpha, delta=1 / 16):
    return dz.GridSpec(alpha, delta)


def test_grid_invariants():
    g = dz.GridSpec(8.0, 1 / 16)
    assert g.n == 128 and g.n * g.delta == pytest.approx(8.0, rel=1e-12)
    assert g.points[0] == 1 / 32 and g.points[-1] == 8 - 1 / 32
    with pytest.raises(ValidationError):
        dz.GridSpec(1.0, 0.3)
    with pytest.raises(ValidationError, match="Nyquist"):
        dz.GridSpec(8.0, 0.25, omega_max=4.0)


def test_zero_symbol_matrix():
    M = dz.build_operator(sm.zero_symbol(), _grid(4.0))
    assert not np.any(M.entries)
    assert dz.eigen_spectrum(M).lambda_max == 0.0


def test_time_invariant_toeplitz(flat_gauss):
    M = dz.build_operator(flat_gauss, _grid(8.0)).entries
    n = M.shape[0]
    assert np.max(np.abs(M - M.T)) == 0.0
    dev = max(np.max(np.abs(M[i, i:] - M[0, :n - i])) for i in range(n))
    assert dev <= 1e-12


def test_gauss_diagonal(gauss):
    g = _grid(4.0)
    M = dz.build_operator(gauss, g).entries
    a = 1 + 0.5 * np.cos(2 * np.pi * g.points)
    assert np.allclose(np.diag(M), g.delta * a * 1.0, atol=1e-15)


def test_kn_not_hermitian_unless_symmetrized(gauss):
    g = _grid(2.0)
    M = dz.build_operator(gauss, g, sm.KOHN_NIRENBERG)
    assert not M.hermitian
    with pytest.raises(ContractError):
        dz.eigen_spectrum(M)
    S = dz.build_operator(gauss, g, sm.KOHN_NIRENBERG, symmetrize=True)
    assert S.hermitian and S.symmetrized
    assert np.allclose(S.entries, 0.5 * (M.entries + M.entries.T))


def test_hermitian_flag_contract():
    with pytest.raises(ContractError):
        dz.OperatorMatrix(dz.GridSpec(2.0, 1.0), np.array([[1.0, 2.0], [0.0, 1.0]]), True)


def test_resource_cap(gauss, monkeypatch):
    monkeypatch.setenv("DDCAP_MAX_DIM", "100")
    with pytest.raises(ResourceError):
        dz.build_operator(gauss, _grid(8.0))
    monkeypatch.setenv("DDCAP_MAX_DIM", "abc")
    with pytest.raises(ValidationError):
        dz.build_operator(gauss, _grid(1.0))


def test_eigen_examples():
    lam = dz.eigen_spectrum(0.3 * np.eye(4)).eigenvalues
    assert np.allclose(lam, 0.3, atol=1e-15)
    assert np.allclose(dz.eigen_spectrum(np.diag([2.0, 0.5])).eigenvalues, [2.0, 0.5])


def test_eigen_matches_jacobi_oracle(gauss):
    M = dz.build_operator(gauss, dz.GridSpec(2.0, 1 / 8))
    lam = dz.eigen_spectrum(M).eigenvalues
    ref = jacobi_eigvals(M.entries)
    ref = np.where(ref < 0, 0.0, ref)
    assert np.max(np.abs(lam - ref)) <= 1e-12


def test_clip_small_negatives_and_reject_large():
    spec = dz.eigen_spectrum(np.diag([1.0, -1e-8]))
    assert spec.clipped_count == 1 and spec.eigenvalues[-1] == 0.0
    with pytest.raises(NumericError):
        dz.eigen_spectrum(np.diag([1.0, -1e-3]))


def test_lambda_max_convolution_limit(flat_gauss):
    M = dz.build_operator(flat_gauss, dz.GridSpec.for_symbol(flat_gauss, 32.0))
    lam = dz.eigen_spectrum(M).lambda_max
    assert abs(lam - 1.0) <= 0.02
    assert lam <= M.op_norm_bound + 1e-6


def test_lambda_max_refinement(gauss):
    g = dz.GridSpec.for_symbol(gauss, 16.0)
    a = dz.eigen_spectrum(dz.build_operator(gauss, g)).lambda_max
    b = dz.eigen_spectrum(dz.build_operator(gauss, g.refined())).lambda_max
    assert abs(a - b) <= 1e-3 * a


def test_trace_functional_examples():
    spec = dz.Spectrum(np.array([2.0, 0.5]))
    assert dz.trace_functional(spec, lambda x: x) == pytest.approx(2.5)
    r = np.vectorize(wf.rate_threshold)
    assert dz.trace_functional(spec, r) == pytest.approx(math.log(2))
    assert dz.trace_functional(dz.Spectrum(np.zeros(0)), lambda x: x) == 0.0
    with pytest.raises(ContractError):
        dz.trace_functional(spec, lambda x: x + 1)


def test_trace_norm_examples(rng):
    assert dz.trace_norm(np.zeros((3, 3))) == 0.0
    u, v = rng.normal(size=(2, 5))
    u, v = u / np.linalg.norm(u), v / np.linalg.norm(v)
    assert dz.trace_norm(np.outer(u, v)) == pytest.approx(1.0, abs=1e-12)
    assert dz.trace_norm(np.diag([3.0, -4.0])) == pytest.approx(7.0, abs=1e-12)


@pytest.mark.parametrize("quant", [sm.WEYL, sm.KOHN_NIRENBERG])
def test_schatten_ordering_and_trace(gauss, quant):
    M = dz.build_operator(gauss, _grid(4.0), quant)
    tr = dz.trace_norm(M)
    assert dz.hs_norm(M) <= tr * (1 + 1e-12)
    assert abs(np.trace(M.entries)) <= tr * (1 + 1e-12)


def test_trace_consistency(gauss):
    M = dz.build_operator(gauss, _grid(8.0))
    lam = dz.eigen_spectrum(M).eigenvalues
    assert abs(np.trace(M.entries) - lam.sum()) <= 1e-8 * M.grid.n


@settings(max_examples=25, deadline=None)
@given(n=st.integers(1, 12), seed=st.integers(0, 2**31))
def test_schatten_ordering_random(n, seed):
    a = np.random.default_rng(seed).normal(size=(n, n))
    tr = dz.trace_norm(a)
    assert dz.hs_norm(a) <= tr * (1 + 1e-12) + 1e-15
    assert abs(np.trace(a)) <= tr * (1 + 1e-12) + 1e-15


@settings(max_examples=25, deadline=None)
@given(vals=st.lists(st.floats(0, 10), min_size=1, max_size=8))
def test_spectrum_sorted(vals):
    lam = dz.Spectrum(np.array(vals)).eigenvalues
    assert np.all(np.diff(lam) <= 0)


def test_offdiag_zero_symbol():
    g = dz.GridSpec.for_symbol(sm.zero_symbol(), 8.0)
    assert dz.offdiag_hs(sm.zero_symbol(), g) == 0.0


def test_offdiag_log_bound(flat_gauss):
    ratios = []
    for a in (8.0, 16.0, 32.0, 64.0):
        g = dz.GridSpec.for_symbol(flat_gauss, a)
        ratios.append(dz.offdiag_hs(flat_gauss, g) / (1 + math.log(a)))
    assert max(ratios) / min(ratios) <= 4


def test_offdiag_time_invariant_value(flat_gauss):
    # each end gives delta^2 sum_m m exp(-2 pi (m delta)^2), the trapezoid sum of
    # int t exp(-2 pi t^2) = 1 / (4 pi); Euler-Maclaurin corrections at t = 0 are
    # -d^2 g'(0) / 12 + d^4 g'''(0) / 720 - d^6 g'''''(0) / 30240 with
    # g = t - 2 pi t^3 + 2 pi^2 t^5 + ...
    g = dz.GridSpec.for_symbol(flat_gauss, 16.0)
    d = g.delta
    value = dz.offdiag_hs(flat_gauss, g)
    m = np.arange(1, 4000)
    assert value == pytest.approx(2 * d * d * np.sum(m * np.exp(-2 * np.pi * (m * d) ** 2)),
                                  rel=1e-12)
    expected = 2 * (1 / (4 * math.pi) - d ** 2 / 12 - math.pi * d ** 4 / 60
                    - math.pi ** 2 * d ** 6 / 126)
    assert value == pytest.approx(expected, rel=1e-9)


def test_offdiag_increases_with_W():
    vals = []
    for W in (1.0, 2.0):
        sym = sm.Symbol.gauss(0.5, W)
        vals.append(dz.offdiag_hs(sym, dz.GridSpec.for_symbol(sym, 16.0)))
    assert vals[1] > vals[0]


def test_offdiag_insufficient_padding(gauss):
    with pytest.raises(ValidationError, match="padding"):
        dz.offdiag_hs(gauss, dz.GridSpec(8.0, 1 / 16, padding=1.0))


def test_dump_csv(tmp_path):
    M = dz.OperatorMatrix.from_array(np.array([[1.0, 0.5], [0.5, 2.0]]))
    dz.write_matrix_csv(M, tmp_path / "m.csv")
    assert (tmp_path / "m.csv").read_text().splitlines()[:2] == ["i,j,value", "0,0,1.0"]
    dz.write_spectrum_csv(dz.eigen_spectrum(M), tmp_path / "s.csv")
    assert (tmp_path / "s.csv").read_text().splitlines()[0] == "k,lambda"
