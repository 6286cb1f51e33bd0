"""CSV, SVG and manifest output."""

from __future__ import annotations

import csv
import json
import math
import platform
from importlib import metadata
from pathlib import Path

import numpy as np
import scipy

from .errors import ValidationError

SVG_W, SVG_H = 640, 400
MARGIN = 60


def fmt(v):
    """Deterministic text for a CSV cell: repr for floats, blank for None."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, header, rows):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def _get(rec, name):
    return rec[name] if isinstance(rec, dict) else getattr(rec, name)


def emit_svg(records, x="alpha", y="deviation", loglog=True, title=""):
    """Single-series line chart as a standalone SVG string."""
    if len(records) < 2:
        raise ValidationError("emit_svg needs at least two records")
    pts = []
    for i, r in enumerate(records):
        xv, yv = _get(r, x), _get(r, y)
        if xv is None or yv is None or not (math.isfinite(xv) and math.isfinite(yv)):
            raise ValidationError(f"emit_svg: non-finite value in row {i}")
        if loglog and (xv <= 0 or yv <= 0):
            raise ValidationError(f"emit_svg: non-positive value in row {i} on log axes")
        pts.append((math.log10(xv), math.log10(yv)) if loglog else (float(xv), float(yv)))
    xs, ys = zip(*pts)

    def scale(vals, lo_px, hi_px):
        lo, hi = min(vals), max(vals)
        span = hi - lo or 1.0
        return [lo_px + (v - lo) / span * (hi_px - lo_px) for v in vals]

    px = scale(xs, MARGIN, SVG_W - MARGIN)
    py = scale(ys, SVG_H - MARGIN, MARGIN)
    poly = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
    label = "log10 " if loglog else ""
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_W}" height="{SVG_H}" '
        f'viewBox="0 0 {SVG_W} {SVG_H}">',
        f'<rect x="0" y="0" width="{SVG_W}" height="{SVG_H}" fill="white"/>',
        f'<line x1="{MARGIN}" y1="{SVG_H - MARGIN}" x2="{SVG_W - MARGIN}" '
        f'y2="{SVG_H - MARGIN}" stroke="black"/>',
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{SVG_H - MARGIN}" stroke="black"/>',
        f'<text x="{SVG_W / 2:.0f}" y="{SVG_H - 20}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">{label}{x} [{min(xs):.4g}, {max(xs):.4g}]</text>',
        f'<text x="20" y="{SVG_H / 2:.0f}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="12" transform="rotate(-90 20 {SVG_H / 2:.0f})">'
        f'{label}{y} [{min(ys):.4g}, {max(ys):.4g}]</text>',
    ]
    if title:
        lines.append(f'<text x="{SVG_W / 2:.0f}" y="30" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="14">{title}</text>')
    lines.append(f'<polyline fill="none" stroke="steelblue" stroke-width="2" points="{poly}"/>')
    lines += [f'<circle cx="{a:.2f}" cy="{b:.2f}" r="3" fill="steelblue"/>' for a, b in zip(px, py)]
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def write_svg(path, records, **kw):
    Path(path).write_text(emit_svg(records, **kw))


def versions():
    try:
        pkg = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        pkg = "unknown"
    return {"python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__, "ddcap": pkg}


def write_manifest(out_dir, command, cfg, wall_time, outputs, summary=None):
    """manifest.json next to the outputs; its config block is a valid --config."""
    doc = {
        "command": command,
        "config": {k: cfg.raw[k] for k in sorted(cfg.raw)},
        "versions": versions(),
        "wall_time_s": round(wall_time, 3),
        "outputs": sorted(outputs),
    }
    if summary:
        doc["summary"] = summary
    path = Path(out_dir) / "manifest.json"
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path
