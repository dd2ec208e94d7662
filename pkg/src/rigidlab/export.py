"""Artifact writers: CSV with a config-hash comment line, sorted JSON, SVG scatter plots."""

import csv
import hashlib
import io
import json
import math

import numpy as np


def config_hash(text):
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def csv_text(columns, rows, chash):
    """RFC-4180 CSV (CRLF) preceded by a ``# config_sha256=`` line; floats round-trip."""
    buf = io.StringIO()
    buf.write(f"# config_sha256={chash}\r\n")
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else repr(f)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def json_text(obj, chash):
    d = dict(_plain(obj))
    d["config_sha256"] = chash
    return json.dumps(d, sort_keys=True, indent=1) + "\n"


SVG_SIZE = 480


def svg_scatter(points, radius, title, chash):
    """Fixed-size scatter of complex points (or reals on a line) with the window outline."""
    pts = np.asarray(points)
    if not np.iscomplexobj(pts):
        pts = pts.astype(complex)
    finite = np.isfinite(radius) and radius > 0
    extent = radius if finite else (float(np.max(np.abs(pts))) * 1.05 if pts.size else 1.0)
    half = SVG_SIZE / 2
    scale = (half - 10) / max(extent, 1e-300)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_SIZE}" height="{SVG_SIZE}" '
        f'viewBox="0 0 {SVG_SIZE} {SVG_SIZE}">',
        f"<!-- config_sha256={chash} -->",
        f"<title>{title}</title>",
        f'<rect width="{SVG_SIZE}" height="{SVG_SIZE}" fill="white"/>',
    ]
    if finite:
        out.append(f'<circle cx="{half}" cy="{half}" r="{half - 10:.3f}" fill="none" stroke="#888"/>')
    for z in pts:
        x, y = half + scale * z.real, half - scale * z.imag
        out.append(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="2" fill="#1f4e9a"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
