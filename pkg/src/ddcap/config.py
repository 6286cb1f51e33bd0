"""Run configuration: ``key = value`` lines with dotted keys.

Every key is checked against a schema in a fixed order, so an invalid file
is rejected with the first offending key named in the message.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import symbol as sm
from .errors import ValidationError

EXTRA_FAMILIES = ("ideal-band", "heavy-tail", "zero")
F_CHOICES = ("rate", "power")
H_CHOICES = ("ln", "one")


def _num(text):
    text = text.strip()
    try:
        return float(Fraction(text)) if "/" in text else float(text)
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"not a number: {text!r}") from None


def _int(text):
    v = _num(text)
    if v != int(v):
        raise ValueError(f"not an integer: {text!r}")
    return int(v)


def _list(text):
    items = [t for t in (s.strip() for s in text.split(",")) if t]
    if not items:
        raise ValueError("empty list")
    return [_num(t) for t in items]


def _bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _str(text):
    return text.strip()


# key -> (parser, default); order is validation order
SCHEMA = {
    "symbol.family": (_str, sm.GAUSS),
    "symbol.m": (_num, 0.5),
    "symbol.W": (_num, 1.0),
    "symbol.gain": (_num, 1.0),
    "symbol.table": (_str, None),
    "symbol.periodic": (_bool, True),
    "symbol.lag_window": (_num, None),
    "grid.delta": (_num, 1 / 16),
    "grid.omega_n": (_int, 2048),
    "grid.quantization": (_str, sm.WEYL),
    "quad.nx": (_int, 128),
    "quad.nw": (_int, 1024),
    "run.alpha": (_num, 32.0),
    "run.power": (_num, 1.0),
    "run.powers": (_list, None),
    "run.alphas": (_list, [8.0, 16.0, 32.0, 64.0, 128.0]),
    "run.f": (_str, "rate"),
    "run.level": (_num, 2.0),
    "run.nu": (_num, 1.0),
    "run.q_alphas": (_list, [8.0, 16.0, 32.0, 64.0]),
    "run.threads": (_int, 1),
    "run.seed": (_int, 0),
    "run.bits": (_bool, False),
    "mollifier.alpha": (_num, 16.0),
    "mollifier.epsilons": (_list, [0.2, 0.1, 0.05, 0.025]),
    "mollifier.h": (_str, "ln"),
    "mollifier.n": (_int, 3),
    "mollifier.delta_exp": (_num, 0.25),
    "besov.alpha": (_num, 8.0),
    "besov.nus": (_list, [1.0, 2.0, 4.0, 8.0]),
    "besov.alphas": (_list, [8.0, 16.0, 32.0, 64.0]),
    "output.dir": (_str, "ddcap-out"),
    "output.runtimes": (_bool, False),
}


def parse_text(text, source="<config>"):
    """Parse ``key = value`` lines into a dict of raw strings."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in SCHEMA:
            raise ValidationError(f"{source}:{lineno}: unknown config key {key!r}")
        if key in raw:
            raise ValidationError(f"{source}:{lineno}: duplicate config key {key!r}")
        raw[key] = value
    return raw


def load(path):
    """Read a config file; a JSON run manifest is accepted as well."""
    p = Path(path)
    if not p.is_file():
        raise ValidationError(f"config file not found: {path}")
    text = p.read_text()
    if p.suffix == ".json":
        try:
            raw = json.loads(text)["config"]
        except (ValueError, KeyError, TypeError):
            raise ValidationError(f"{path}: not a run manifest") from None
        unknown = [k for k in raw if k not in SCHEMA]
        if unknown:
            raise ValidationError(f"{path}: unknown config key {unknown[0]!r}")
        return {k: str(v) for k, v in raw.items()}
    return parse_text(text, str(path))


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]

    def echo(self):
        """Canonical key = value text of every explicitly set key."""
        return "".join(f"{k} = {self.raw[k]}\n" for k in SCHEMA if k in self.raw)


def _fail(key, msg):
    raise ValidationError(f"config key {key}: {msg}")


def _positive(key, v):
    if not (math.isfinite(v) and v > 0):
        _fail(key, f"must be positive, got {v}")


def _ascending(key, vs):
    for v in vs:
        _positive(key, v)
    if any(b <= a for a, b in zip(vs, vs[1:])):
        _fail(key, "must be strictly ascending")


def _check(key, v, vals):
    if v is None:
        if key == "symbol.table" and vals["symbol.family"] == sm.TABULATED:
            _fail(key, "required for the tabulated family")
        return
    if key == "symbol.family":
        if v not in sm.FAMILIES + EXTRA_FAMILIES:
            _fail(key, f"unknown family {v!r}")
    elif key == "symbol.m":
        if not abs(v) < 1:
            _fail(key, "|m| must be below 1")
        if vals["symbol.family"] == sm.TIME_INVARIANT and v != 0 and "symbol.m" in vals.get("_set", ()):
            _fail(key, "time-invariant family requires m = 0")
    elif key in ("symbol.W", "grid.delta", "run.alpha", "run.level", "mollifier.alpha",
                 "mollifier.delta_exp", "besov.alpha", "symbol.lag_window"):
        _positive(key, v)
    elif key in ("symbol.gain", "run.power"):
        if not (math.isfinite(v) and v >= 0):
            _fail(key, f"must be non-negative, got {v}")
    elif key == "symbol.table":
        if vals["symbol.family"] == sm.TABULATED and not Path(v).is_file():
            _fail(key, f"table file not found: {v}")
    elif key in ("grid.omega_n", "quad.nx", "quad.nw", "run.threads"):
        if v < 1:
            _fail(key, "must be at least 1")
    elif key == "grid.quantization":
        if v not in sm.QUANTIZATIONS:
            _fail(key, f"must be one of {', '.join(sm.QUANTIZATIONS)}")
    elif key == "run.powers":
        if any(not (math.isfinite(s) and s >= 0) for s in v):
            _fail(key, "powers must be non-negative")
        if any(b < a for a, b in zip(v, v[1:])):
            _fail(key, "powers must be ascending")
    elif key in ("run.alphas", "run.q_alphas", "besov.alphas", "besov.nus"):
        _ascending(key, v)
    elif key == "mollifier.epsilons":
        if any(not (0 < e <= 1) for e in v):
            _fail(key, "epsilons must lie in (0, 1]")
    elif key == "run.f":
        if v not in F_CHOICES:
            _fail(key, f"must be one of {', '.join(F_CHOICES)}")
    elif key == "mollifier.h":
        if v not in H_CHOICES:
            _fail(key, f"must be one of {', '.join(H_CHOICES)}")
    elif key == "mollifier.n":
        if v not in (2, 3, 4):
            _fail(key, "must be 2, 3 or 4")


def _grid_divides(key, alpha, delta):
    n = round(alpha / delta)
    if n < 1 or abs(n * delta - alpha) > 1e-12 * alpha:
        _fail(key, f"alpha={alpha} is not a whole number of grid.delta={delta} cells")


def build(raw, overrides=None):
    """Validate raw strings (plus CLI overrides) into a RunConfig."""
    raw = dict(raw)
    for k, v in (overrides or {}).items():
        if v is not None:
            raw[k] = str(v)
    vals = {"_set": set(raw)}
    for key, (parser, default) in SCHEMA.items():
        if key in raw:
            try:
                v = parser(raw[key])
            except ValueError as exc:
                _fail(key, str(exc))
        else:
            v = default
        vals[key] = v
        _check(key, v, vals)
    for key in ("run.alpha", "mollifier.alpha"):
        _grid_divides(key, vals[key], vals["grid.delta"])
    for key in ("run.alphas", "run.q_alphas"):
        for a in vals[key]:
            _grid_divides(key, a, vals["grid.delta"])
    vals.pop("_set")
    return RunConfig(vals, raw)


def make_symbol(cfg):
    """Construct the configured Symbol."""
    fam = cfg["symbol.family"]
    m, W, gain = cfg["symbol.m"], cfg["symbol.W"], cfg["symbol.gain"]
    if fam == sm.GAUSS:
        return sm.Symbol.gauss(m, W, gain)
    if fam == sm.BANDLIMITED:
        return sm.Symbol.bandlimited(m, W, gain)
    if fam == sm.TIME_INVARIANT:
        return sm.Symbol.time_invariant(W, gain)
    if fam == "ideal-band":
        return sm.ideal_band(W).scaled(gain)
    if fam == "zero":
        return sm.zero_symbol()
    if fam == "heavy-tail":
        from .szego import heavy_tail_symbol
        return heavy_tail_symbol()
    try:
        sym = sm.load_table_csv(cfg["symbol.table"], cfg["symbol.periodic"],
                                cfg["symbol.lag_window"])
    except ValidationError as exc:
        raise ValidationError(f"config key symbol.table: {exc}") from None
    return sym.scaled(gain) if gain != 1 else sym
