"""CSV, JSON and minimal SVG line-chart writers."""
import json
import math
from pathlib import Path

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def write_csv(path, columns: dict, max_rows=None):
    """Write equal-length columns; ``max_rows`` thins long series by a stride."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = list(columns)
    data = np.column_stack([np.asarray(columns[k], dtype=float) for k in names])
    if max_rows and len(data) > max_rows:
        stride = math.ceil((len(data) - 1) / (max_rows - 1))
        keep = np.arange(0, len(data), stride)
        if keep[-1] != len(data) - 1:
            keep = np.append(keep, len(data) - 1)
        data = data[keep]
    np.savetxt(path, data, delimiter=",", header=",".join(names), comments="", fmt="%.17g")
    return path


def write_json(path, record):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(record, indent=2, sort_keys=True, default=_jsonable) + "\n")
    return path


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serialisable: {type(obj)}")


def clean(value):
    """Plain Python scalars, with non-finite floats as strings, so the JSON stays standard."""
    if isinstance(value, dict):
        return {k: clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [clean(v) for v in value]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


def line_chart(path, t, series: dict, title="", width=720, height=360, max_points=2000):
    """Plot each named series against ``t`` as a polyline."""
    t = np.asarray(t, dtype=float)
    stride = max(1, math.ceil(len(t) / max_points))
    tt = t[::stride]
    ys = {k: np.asarray(v, dtype=float)[::stride] for k, v in series.items()}
    finite = np.concatenate([y[np.isfinite(y)] for y in ys.values()] or [np.zeros(1)])
    lo, hi = (float(finite.min()), float(finite.max())) if finite.size else (0.0, 1.0)
    if hi - lo < 1e-300:
        lo, hi = lo - 1.0, hi + 1.0
    pad = 40
    sx = (width - 2 * pad) / max(tt[-1] - tt[0], 1e-300)
    sy = (height - 2 * pad) / (hi - lo)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<text x="{pad}" y="20" font-size="13" font-family="sans-serif">{_esc(title)}</text>',
           f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
           f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
           f'<text x="{pad}" y="{height - pad + 15}" font-size="10">{tt[0]:.3g}</text>',
           f'<text x="{width - pad}" y="{height - pad + 15}" font-size="10" text-anchor="end">{tt[-1]:.3g}</text>',
           f'<text x="{pad - 3}" y="{pad}" font-size="10" text-anchor="end">{hi:.3g}</text>',
           f'<text x="{pad - 3}" y="{height - pad}" font-size="10" text-anchor="end">{lo:.3g}</text>']
    for j, (name, y) in enumerate(ys.items()):
        colour = PALETTE[j % len(PALETTE)]
        ok = np.isfinite(y)
        pts = " ".join(f"{pad + (a - tt[0]) * sx:.2f},{height - pad - (b - lo) * sy:.2f}"
                       for a, b in zip(tt[ok], y[ok]))
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1" points="{pts}"/>')
        out.append(f'<text x="{width - pad - 4}" y="{pad + 14 * (j + 1)}" font-size="11" '
                   f'text-anchor="end" fill="{colour}">{_esc(name)}</text>')
    out.append("</svg>")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(out) + "\n")
    return path


def _esc(s):
    return str(s).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
