"""Midpoint product quadrature over the time-frequency plane."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import symbol as sm
from .errors import ValidationError

MIN_NX = 64
MIN_NW = 256


@dataclass(frozen=True)
class QuadSpec:
    """Cell counts in x (per unit time) and omega (over the full band)."""

    nx: int = 128
    nw: int = 1024
    refine: bool = True

    def __post_init__(self):
        if self.nx < 1 or self.nw < 1:
            raise ValidationError("quadrature cell counts must be positive")

    @property
    def coarse(self):
        return self.nx < MIN_NX or self.nw < MIN_NW


def aligned_midpoints(breaks, n):
    """Midpoint nodes on ``[breaks[0], breaks[-1]]`` honouring every breakpoint.

    Each segment receives cells in proportion to its length, at least one.
    Returns nodes and cell widths.
    """
    breaks = np.asarray(breaks, dtype=float)
    lengths = np.diff(breaks)
    total = breaks[-1] - breaks[0]
    counts = np.maximum(1, np.rint(n * lengths / total).astype(int))
    nodes, widths = [], []
    for a, L, c in zip(breaks[:-1], lengths, counts):
        h = L / c
        nodes.append(a + (np.arange(c) + 0.5) * h)
        widths.append(np.full(c, h))
    return np.concatenate(nodes), np.concatenate(widths)


def x_cells(sym, quad, x0=0.0, x1=1.0):
    """x nodes and widths over [x0, x1]; aligned to table rows if tabulated."""
    n = max(1, int(round(quad.nx * (x1 - x0))))
    if sym.family == sm.TABULATED and sym.table.xs.size > 1:
        xs = sym.table.xs
        inner = xs[(xs > x0) & (xs < x1)]
        if sym.table.periodic:
            shifts = np.arange(np.floor(x0), np.ceil(x1) + 1)
            inner = np.unique((xs[None, :] + shifts[:, None]).ravel())
            inner = inner[(inner > x0) & (inner < x1)]
        return aligned_midpoints(np.concatenate(([x0], inner, [x1])), n)
    h = (x1 - x0) / n
    return x0 + (np.arange(n) + 0.5) * h, np.full(n, h)


def omega_cells(sym, quad):
    lo, hi = sm.omega_range(sym)
    if sym.family == sm.TABULATED:
        return aligned_midpoints(sym.table.omegas, quad.nw)
    return aligned_midpoints([lo, hi], quad.nw)


@dataclass(frozen=True)
class Nodes:
    """Flattened quadrature nodes: symbol values and cell areas."""

    sigma: np.ndarray
    weight: np.ndarray


def symbol_grid(sym, quad, x0=0.0, x1=1.0):
    """sigma on the (x, omega) midpoint grid with cell widths."""
    xs, hx = x_cells(sym, quad, x0, x1)
    ws, hw = omega_cells(sym, quad)
    sig = np.asarray(sm.eval_symbol(sym, xs[:, None], ws[None, :]), dtype=float)
    return xs, hx, ws, hw, sig


def flat_nodes(sym, quad, x0=0.0, x1=1.0):
    xs, hx, ws, hw, sig = symbol_grid(sym, quad, x0, x1)
    return Nodes(sig.ravel(), (hx[:, None] * hw[None, :]).ravel())


def refine_boundary(sym, grid, active):
    """Split in half, along omega, every cell whose active flag differs from
    an omega-neighbour's.  Returns refined flattened nodes."""
    xs, hx, ws, hw, sig = grid
    edge = np.zeros_like(active)
    diff = active[:, 1:] != active[:, :-1]
    edge[:, 1:] |= diff
    edge[:, :-1] |= diff
    area = hx[:, None] * hw[None, :]
    keep = ~edge
    sig_out = [sig[keep]]
    w_out = [area[keep]]
    ii, jj = np.nonzero(edge)
    if ii.size:
        for s in (-0.25, 0.25):
            om = ws[jj] + s * hw[jj]
            sig_out.append(np.asarray(sm.eval_symbol(sym, xs[ii], om), dtype=float))
            w_out.append(0.5 * area[ii, jj])
    return Nodes(np.concatenate(sig_out), np.concatenate(w_out)), int(ii.size)
