"""Water-filling over eigenvalues and over the time-frequency plane.

Power per mode (or per unit area) at level B is max(0, B - 1/lambda), the
mode's rate is r(B lambda) with r(x) = ln(x) for x >= 1.  The level solving
the power constraint is found by bisection and then polished with the
closed form valid on the final active set.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import quadrature as qd
from . import symbol as sm
from .discretization import Spectrum
from .errors import ContractError, InfeasibleError, ValidationError

TIE_TOL = 1e-12
BISECT_RTOL = 1e-12
BISECT_MAXITER = 200

CONVENTION_B = "b"
CONVENTION_A = "a"


def _nonneg(x, name):
    x = np.asarray(x, dtype=float)
    if np.any(np.isnan(x)):
        raise ContractError(f"{name}: NaN input")
    if np.any(x < 0):
        raise ContractError(f"{name}: negative input")
    return x


def rate_threshold(x):
    """r(x) = ln(x) for x >= 1, else 0."""
    x = _nonneg(x, "rate_threshold")
    out = np.log(np.where(x >= 1, x, 1.0))
    return float(out) if out.ndim == 0 else out


def power_threshold(x):
    """p(x) = (x - 1)/x for x >= 1, else 0."""
    x = _nonneg(x, "power_threshold")
    safe = np.where(x >= 1, x, 1.0)
    out = (safe - 1.0) / safe
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class WaterfillResult:
    """Solution of a water-filling problem.

    ``capacity`` is in nats per unit time.  Eigen-domain results carry
    ``active_count`` (modes with positive power) and ``boundary_count``
    (modes sitting exactly at the level, active with zero power);
    symbol-domain results carry ``active_measure``.
    """

    B: float
    capacity: float
    power_realized: float
    S: float = 0.0
    active_count: int | None = None
    boundary_count: int = 0
    active_measure: float | None = None
    convention: str = CONVENTION_B
    alternate: WaterfillResult | None = None
    iterations: int = 0
    warnings: tuple[str, ...] = field(default=())

    @property
    def active(self):
        return self.active_count if self.active_count is not None else self.active_measure

    def capacity_in(self, bits=False):
        return self.capacity / math.log(2) if bits else self.capacity


def _check_power(S):
    if not (isinstance(S, (int, float, np.floating, np.integer)) and math.isfinite(S)):
        raise ValidationError(f"power S must be a finite number, got {S!r}")
    if S < 0:
        raise ValidationError(f"power S must be non-negative, got {S}")
    return float(S)


def _inv(v):
    pos = v > 0
    return np.divide(1.0, v, out=np.full(v.shape, np.inf), where=pos)


def _power(B, inv, w, convention):
    if convention == CONVENTION_B:
        return float(np.sum(w * np.maximum(0.0, B - inv)))
    return float(np.sum(w * np.maximum(0.0, 1.0 - inv / B)))


def _closed_form(S, inv, w, active, convention):
    wa = float(np.sum(w[active]))
    ia = float(np.sum(w[active] * inv[active]))
    if convention == CONVENTION_B:
        return (S + ia) / wa
    if wa - S <= 0:
        return math.inf
    return ia / (wa - S)


def solve_level(values, weights, S, convention=CONVENTION_B):
    """Water level for non-negative ``values`` with quadrature ``weights``.

    Returns ``(B, iterations)``.
    """
    v = np.asarray(values, dtype=float)
    w = np.broadcast_to(np.asarray(weights, dtype=float), v.shape)
    vmax = float(v.max()) if v.size else 0.0
    if S == 0:
        return (1.0 / vmax if vmax > 0 else math.inf), 0
    if not vmax > 0:
        raise InfeasibleError("water-filling: no positive eigenvalue or symbol value but S > 0")
    inv = _inv(v)
    if convention == CONVENTION_A:
        ceiling = float(np.sum(w[v > 0]))
        if S >= ceiling:
            raise InfeasibleError(
                f"water-filling convention (a): S={S} is not below the support measure {ceiling:.6g}")
    lo = 1.0 / vmax
    hi = lo
    for _ in range(2100):
        if _power(hi, inv, w, convention) >= S:
            break
        hi *= 2.0
    else:
        raise InfeasibleError("water-filling: level bracket diverged")
    it = 0
    while hi - lo > BISECT_RTOL * hi and it < BISECT_MAXITER:
        mid = 0.5 * (lo + hi)
        if _power(mid, inv, w, convention) >= S:
            hi = mid
        else:
            lo = mid
        it += 1
    B = hi
    active = B * v >= 1 - TIE_TOL
    Bc = _closed_form(S, inv, w, active, convention)
    if math.isfinite(Bc) and Bc > 0:
        same = np.array_equal(Bc * v >= 1 - TIE_TOL, active) or (
            np.all(Bc * v[active] >= 1 - TIE_TOL) and np.all(Bc * v[~active] <= 1 + TIE_TOL))
        if same:
            B = Bc
    return B, it


def waterfill_eigen(spec, S, alpha=None):
    """Water-filling over the eigenvalues of a restricted operator.

    Solves (1/alpha) sum_k max(0, B - 1/lambda_k) = S.
    """
    S = _check_power(S)
    lam = spec.eigenvalues if isinstance(spec, Spectrum) else np.asarray(spec, dtype=float)
    if alpha is None:
        alpha = spec.alpha if isinstance(spec, Spectrum) else 1.0
    if not alpha > 0:
        raise ValidationError("alpha must be positive")
    if lam.size == 0 and S > 0:
        raise InfeasibleError("waterfill_eigen: empty spectrum with S > 0")
    B, it = solve_level(lam, 1.0 / alpha, S)
    if S == 0:
        return WaterfillResult(B, 0.0, 0.0, S, 0, 0, iterations=0)
    x = B * lam
    capacity = float(np.sum(np.log(x[x > 1]))) / alpha
    power = float(np.sum(np.maximum(0.0, B - _inv(lam)))) / alpha
    gap = x - 1
    boundary = int(np.count_nonzero(np.abs(gap) <= TIE_TOL))
    active = int(np.count_nonzero(gap > TIE_TOL))
    return WaterfillResult(B, capacity, power, S, active, boundary, iterations=it)


def active_set(lam, B):
    """Indices with B lambda >= 1 (ties included)."""
    return np.flatnonzero(B * np.asarray(lam, dtype=float) >= 1 - TIE_TOL)


def _symbol_solution(nodes, S, convention):
    B, it = solve_level(nodes.sigma, nodes.weight, S, convention)
    x = B * nodes.sigma
    on = x > 1
    capacity = float(np.sum(nodes.weight[on] * np.log(x[on])))
    inv = _inv(nodes.sigma)
    power = _power(B, inv, nodes.weight, convention)
    measure = float(np.sum(nodes.weight[x >= 1 - TIE_TOL]))
    return B, capacity, power, measure, it


def waterfill_symbol(sym, S, quad=None):
    """Water-filling over one period of the time-frequency plane.

    Both power conventions are solved: (b) the default, integrating
    max(0, B - 1/sigma); (a) integrating p(B sigma), attached as
    ``alternate`` (or noted in ``warnings`` when infeasible).
    """
    S = _check_power(S)
    quad = quad or qd.QuadSpec()
    if sym.family == sm.TABULATED and not sym.table.periodic:
        raise ValidationError("waterfill_symbol requires a periodic symbol")
    warnings = []
    if quad.coarse:
        warnings.append(f"quadrature grid {quad.nx}x{quad.nw} coarser than "
                        f"{qd.MIN_NX}x{qd.MIN_NW}")
    if sm.sup_symbol(sym) <= 0:
        if S > 0:
            raise InfeasibleError("waterfill_symbol: sup sigma = 0 with S > 0")
        return WaterfillResult(math.inf, 0.0, 0.0, S, active_measure=0.0, warnings=tuple(warnings))
    grid = qd.symbol_grid(sym, quad, sym.shift, sym.shift + 1.0)
    base = qd.Nodes(grid[4].ravel(), (grid[1][:, None] * grid[3][None, :]).ravel())

    def solve(convention):
        B, cap, power, meas, it = _symbol_solution(base, S, convention)
        if quad.refine and S > 0:
            nodes, _ = qd.refine_boundary(sym, grid, B * grid[4] >= 1)
            B, cap, power, meas, it2 = _symbol_solution(nodes, S, convention)
            it += it2
        return WaterfillResult(B, cap, power, S, active_measure=meas,
                               convention=convention, iterations=it)

    main = solve(CONVENTION_B)
    alt = None
    try:
        alt = solve(CONVENTION_A)
    except InfeasibleError as exc:
        warnings.append(str(exc))
    return WaterfillResult(main.B, main.capacity, main.power_realized, S,
                           active_measure=main.active_measure, convention=CONVENTION_B,
                           alternate=alt, iterations=main.iterations, warnings=tuple(warnings))


def power_sweep(solver, powers):
    """Apply ``solver(S)`` over a list of powers."""
    return [solver(float(S)) for S in powers]


SWEEP_COLUMNS = ("S", "B", "capacity_nats", "power_realized", "active")


def write_sweep_csv(results, path, bits=False):
    cols = list(SWEEP_COLUMNS)
    if bits:
        cols[2] = "capacity_bits"
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for r in results:
            w.writerow([repr(r.S), repr(float(r.B)), repr(r.capacity_in(bits)),
                        repr(r.power_realized), repr(r.active)])
