import numpy as np
import pytest

from ddcap import symbol as sm


@pytest.fixture
def gauss():
    return sm.Symbol.gauss(0.5, 1.0)


@pytest.fixture
def flat_gauss():
    return sm.Symbol.time_invariant(1.0)


@pytest.fixture
def band():
    return sm.ideal_band()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def jacobi_eigvals(a, sweeps=50, tol=1e-14):
    """Cyclic Jacobi rotations for a real symmetric matrix (test oracle)."""
    a = np.array(a, dtype=float)
    n = a.shape[0]
    for _ in range(sweeps):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off <= tol * max(1.0, np.linalg.norm(a)):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) < 1e-300:
                    continue
                th = (a[q, q] - a[p, p]) / (2 * a[p, q])
                t = np.sign(th) / (abs(th) + np.sqrt(th * th + 1)) if th != 0 else 1.0
                c = 1 / np.sqrt(t * t + 1)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q], rot[q, p] = s, -s
                a = rot.T @ a @ rot
    return np.sort(np.diag(a))[::-1]
