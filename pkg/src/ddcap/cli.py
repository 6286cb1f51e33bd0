"""Command-line entry point.

Exit codes: 0 success, 1 validation, 2 numeric failure, 3 resource limit.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
import traceback
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import besov as bv
from . import config as cf
from . import discretization as dz
from . import mollifier as mo
from . import quadrature as qd
from . import report as rp
from . import szego as sz
from . import waterfill as wf
from .errors import DDCapError
from .selftest import run_selftest

COMMANDS = ("capacity", "sweep", "szego", "mollifier", "besov", "selftest")
CAPACITY_COLUMNS = ("domain", "convention", "S", "B", "capacity_nats", "power_realized", "active")


def _quad(cfg):
    return qd.QuadSpec(cfg["quad.nx"], cfg["quad.nw"])


def _spectrum(sym, cfg, alpha):
    grid = dz.GridSpec.for_symbol(sym, alpha, cfg["grid.delta"], omega_n=cfg["grid.omega_n"])
    return dz.eigen_spectrum(dz.build_operator(sym, grid, cfg["grid.quantization"]))


def cmd_capacity(cfg, out):
    sym = cf.make_symbol(cfg)
    bits = cfg["run.bits"]
    spec = _spectrum(sym, cfg, cfg["run.alpha"])
    S = cfg["run.power"]
    eig = wf.waterfill_eigen(spec, S)
    sym_res = wf.waterfill_symbol(sym, S, _quad(cfg))
    rows = [("eigen", "b", eig), ("symbol", "b", sym_res)]
    if sym_res.alternate is not None:
        rows.append(("symbol", "a", sym_res.alternate))
    header = list(CAPACITY_COLUMNS)
    if bits:
        header[4] = "capacity_bits"
    rp.write_csv(out / "capacity.csv", header,
                 [(d, c, r.S, r.B, r.capacity_in(bits), r.power_realized, r.active)
                  for d, c, r in rows])
    files = ["capacity.csv"]
    if cfg["run.powers"]:
        powers = cfg["run.powers"]
        wf.write_sweep_csv([wf.waterfill_eigen(spec, s) for s in powers],
                           out / "capacity_sweep_eigen.csv", bits)
        wf.write_sweep_csv([wf.waterfill_symbol(sym, s, _quad(cfg)) for s in powers],
                           out / "capacity_sweep_symbol.csv", bits)
        files += ["capacity_sweep_eigen.csv", "capacity_sweep_symbol.csv"]
    summary = {"eigen_capacity": eig.capacity_in(bits), "symbol_capacity": sym_res.capacity_in(bits),
               "warnings": list(sym_res.warnings)}
    return files, summary


def _f(cfg):
    return (sz.scaled_rate if cfg["run.f"] == "rate" else sz.scaled_power)(cfg["run.level"])


def _policy(cfg, offdiag):
    return sz.SweepPolicy(cfg["grid.delta"], cfg["grid.quantization"], _quad(cfg),
                          offdiag=offdiag, threads=cfg["run.threads"])


def _svg(out, name, records, y, title):
    vals = [getattr(r, y) for r in records]
    loglog = all(v is not None and v > 0 for v in vals)
    rp.write_svg(out / name, records, x="alpha", y=y, loglog=loglog, title=title)


def cmd_sweep(cfg, out):
    sym = cf.make_symbol(cfg)
    recs = sz.szego_deviation_sweep(sym, _f(cfg), cfg["run.alphas"], _policy(cfg, False))
    sz.write_sweep_csv(recs, out / "sweep.csv", cfg["output.runtimes"])
    files = ["sweep.csv"]
    if len(recs) >= 2:
        _svg(out, "sweep.svg", recs, "deviation", "deviation vs alpha")
        files.append("sweep.svg")
    slope = sz.deviation_slope(recs)
    return files, {"deviation_slope": None if math.isnan(slope) else slope}


def cmd_szego(cfg, out):
    sym = cf.make_symbol(cfg)
    recs = sz.szego_deviation_sweep(sym, _f(cfg), cfg["run.alphas"], _policy(cfg, True))
    nu = cfg["run.nu"]
    qs = {}
    for a in cfg["run.q_alphas"]:
        grid = dz.GridSpec.for_symbol(sym, a, cfg["grid.delta"], omega_n=cfg["grid.omega_n"])
        qs[a] = sz.q_alpha(sym, nu, grid)
    recs = [replace(r, q_alpha=qs.get(r.alpha)) for r in recs]
    sz.write_sweep_csv(recs, out / "szego.csv", cfg["output.runtimes"])
    rp.write_csv(out / "q_alpha.csv", ["alpha", "q_alpha", "q_over_alpha"],
                 [(a, q, q / a) for a, q in sorted(qs.items())])
    stab = sz.stability_sweep(sym, cfg["run.alphas"], cfg["grid.delta"],
                              cfg["grid.quantization"], cfg["run.threads"])
    sz.write_stability_csv(stab, out / "stability.csv")
    files = ["szego.csv", "q_alpha.csv", "stability.csv"]
    if len(recs) >= 2:
        _svg(out, "szego.svg", recs, "deviation", "deviation vs alpha")
        files.append("szego.svg")
    summary = {"stability": stab.flag, "stability_spread": stab.spread,
               "stability_hypothesis_verified": stab.hypothesis_verified,
               "q_over_alpha": [qs[a] / a for a in sorted(qs)]}
    return files, summary


def _h(cfg):
    return np.log if cfg["mollifier.h"] == "ln" else (lambda x: np.ones_like(x))


def cmd_mollifier(cfg, out):
    sym = cf.make_symbol(cfg)
    alpha = cfg["mollifier.alpha"]
    spec = _spectrum(sym, cfg, alpha)
    h = _h(cfg)
    sweep = mo.eps_sweep(sym, cfg["mollifier.epsilons"], alpha, spec, h)
    mo.write_eps_csv(sweep, out / "mollifier.csv")
    n = cfg["mollifier.n"]
    rows = []
    for e in cfg["mollifier.epsilons"]:
        d = mo.fourier_decay_estimate(e, n, h)
        rows.append((e, n, d.constant, d.raw, d.omega_at_max))
    rp.write_csv(out / "decay.csv", ["epsilon", "n", "constant", "raw", "omega_at_max"], rows)
    summary = {"slope_symbol": None if math.isnan(sweep.slope_symbol) else sweep.slope_symbol,
               "slope_eigen": None if math.isnan(sweep.slope_eigen) else sweep.slope_eigen,
               "eps_schedule": mo.eps_schedule(alpha, cfg["mollifier.delta_exp"])}
    return ["mollifier.csv", "decay.csv"], summary


def cmd_besov(cfg, out):
    x, dx = bv.dyadic_grid(16, 64)
    probe = bv.besov_norm(np.exp(-x ** 2) * np.cos(4 * np.pi * x), dx, 1.0)
    bv.write_besov_csv(probe, out / "besov.csv")
    xc, dc = bv.dyadic_grid(8, 1024)
    comp = bv.composition_growth(np.cos(2 * np.pi * xc), dc, 1.0, cfg["besov.nus"])
    bv.write_lemma_csv(zip(comp.nus, comp.norms), out / "composition.csv")
    cut_cos = bv.cutoff_decay(lambda t: np.cos(2 * np.pi * t), cfg["besov.alphas"])
    cut_noise = bv.cutoff_decay(bv.band_noise(cfg["run.seed"]), cfg["besov.alphas"])
    bv.write_lemma_csv([(c.alpha, c.value) for c in cut_cos], out / "cutoff_cos.csv")
    bv.write_lemma_csv([(c.alpha, c.value) for c in cut_noise], out / "cutoff_noise.csv")
    a = cfg["besov.alpha"]
    family = {"cos1": lambda t: np.cos(2 * np.pi * t), "cos2": lambda t: np.cos(4 * np.pi * t),
              "bump": lambda t: np.exp(-t ** 2)}
    rows = []
    for name, b in family.items():
        c = bv.cz_commutator_check(b, a)
        rows.append((name, c.trace_norm, c.besov_norm, c.ratio))
    rp.write_csv(out / "commutator.csv", ["signal", "trace_norm", "besov_norm", "ratio"], rows)
    summary = {"composition_slope": None if comp.degenerate else comp.slope,
               "cutoff_cos_decreasing": bv.is_decreasing([c.value for c in cut_cos]),
               "cutoff_noise_decreasing": bv.is_decreasing([c.value for c in cut_noise], 1)}
    return ["besov.csv", "composition.csv", "cutoff_cos.csv", "cutoff_noise.csv",
            "commutator.csv"], summary


def cmd_selftest(cfg, out):
    results = run_selftest()
    rp.write_csv(out / "selftest.csv", ["check", "passed"], results)
    failed = [n for n, ok in results if not ok]
    return ["selftest.csv"], {"failed": failed}


HANDLERS = {"capacity": cmd_capacity, "sweep": cmd_sweep, "szego": cmd_szego,
            "mollifier": cmd_mollifier, "besov": cmd_besov, "selftest": cmd_selftest}


def _origin(exc):
    """module.function of the innermost public package frame that raised."""
    where = "ddcap"
    pkg = str(Path(__file__).parent)
    for frame, _ in traceback.walk_tb(exc.__traceback__):
        if frame.f_code.co_filename.startswith(pkg) and not frame.f_code.co_name.startswith("_"):
            mod = Path(frame.f_code.co_filename).stem
            where = f"{mod}.{frame.f_code.co_name}"
    return where


def build_parser():
    ap = argparse.ArgumentParser(prog="ddcap", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", metavar="PATH")
    ap.add_argument("--out", metavar="DIR")
    ap.add_argument("--alpha", type=float)
    ap.add_argument("--power", type=float)
    ap.add_argument("--bits", action="store_true", default=None)
    ap.add_argument("--threads", type=int)
    ap.add_argument("--seed", type=int)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        raw = cf.load(args.config) if args.config else {}
        cfg = cf.build(raw, {"run.alpha": args.alpha, "run.power": args.power,
                             "run.bits": args.bits, "run.threads": args.threads,
                             "run.seed": args.seed, "output.dir": args.out})
        out = Path(cfg["output.dir"])
        out.mkdir(parents=True, exist_ok=True)
        files, summary = HANDLERS[args.command](cfg, out)
        rp.write_manifest(out, args.command, cfg, time.perf_counter() - t0, files, summary)
    except DDCapError as exc:
        print(f"ddcap {args.command}: {_origin(exc)}: {exc}", file=sys.stderr)
        return exc.exit_code
    except MemoryError:
        print(f"ddcap {args.command}: out of memory", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"ddcap {args.command}: {exc}", file=sys.stderr)
        return 1
    if args.command == "selftest" and summary["failed"]:
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
