"""Deterministic report artifacts: canonical JSON, CSV and plain SVG plots.

Artifacts are content-addressed (the filename carries a hash of the payload)
so reruns never mutate previously written files; identical configurations
reproduce byte-identical documents.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from pathlib import Path

import numpy as np

__all__ = [
    "to_plain",
    "canonical_json",
    "config_hash",
    "write_artifact",
    "write_csv",
    "write_svg_loglog",
]


def to_plain(obj):
    """Recursively convert dataclasses/ndarrays/tuples into JSON-ready types."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_plain(getattr(obj, f.name))
                for f in dataclasses.fields(obj)}
    if isinstance(obj, np.ndarray):
        return [to_plain(x) for x in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(x) for x in obj]
    return obj


def canonical_json(payload) -> str:
    return json.dumps(to_plain(payload), sort_keys=True, separators=(",", ":"),
                      allow_nan=False)


def config_hash(config) -> str:
    return hashlib.sha256(canonical_json(config).encode()).hexdigest()


def write_artifact(out_dir: Path, stem: str, payload) -> Path:
    """Write canonical JSON to <stem>_<contenthash12>.json; never overwrites."""
    out_dir.mkdir(parents=True, exist_ok=True)
    text = canonical_json(payload)
    digest = hashlib.sha256(text.encode()).hexdigest()[:12]
    path = out_dir / f"{stem}_{digest}.json"
    if not path.exists():
        path.write_text(text + "\n")
    return path


def write_csv(out_dir: Path, stem: str, header: list[str], rows) -> Path:
    lines = [",".join(header)]
    for row in rows:
        cells = [to_plain(x) for x in row]
        lines.append(",".join(repr(x) if isinstance(x, float) else str(x)
                              for x in cells))
    text = "\n".join(lines) + "\n"
    digest = hashlib.sha256(text.encode()).hexdigest()[:12]
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{stem}_{digest}.csv"
    if not path.exists():
        path.write_text(text)
    return path


def write_svg_loglog(out_dir: Path, stem: str, xs, ys, title: str,
                     fit_slope: float | None = None) -> Path:
    """Minimal log-log scatter with an optional fitted line; no plotting deps."""
    xs = np.log10(np.asarray(xs, dtype=float))
    ys = np.log10(np.asarray(ys, dtype=float))
    w, h, pad = 480, 360, 48

    def sx(x):
        span = xs.max() - xs.min() or 1.0
        return pad + (x - xs.min()) / span * (w - 2 * pad)

    def sy(y):
        span = ys.max() - ys.min() or 1.0
        return h - pad - (y - ys.min()) / span * (h - 2 * pad)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">',
        f'<rect width="{w}" height="{h}" fill="white"/>',
        f'<text x="{w / 2:.1f}" y="20" text-anchor="middle" '
        f'font-size="13">{title}</text>',
        f'<line x1="{pad}" y1="{h - pad}" x2="{w - pad}" y2="{h - pad}" '
        'stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{h - pad}" stroke="black"/>',
    ]
    if fit_slope is not None and len(xs) > 1:
        y0 = ys[0] + fit_slope * (xs - xs[0])
        parts.append(f'<polyline fill="none" stroke="#888" points="'
                     + " ".join(f"{sx(x):.1f},{sy(y):.1f}" for x, y in zip(xs, y0))
                     + '"/>')
    for x, y in zip(xs, ys):
        parts.append(f'<circle cx="{sx(x):.1f}" cy="{sy(y):.1f}" r="3" '
                     'fill="#1f6fb2"/>')
    parts.append("</svg>")
    text = "\n".join(parts) + "\n"
    digest = hashlib.sha256(text.encode()).hexdigest()[:12]
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{stem}_{digest}.svg"
    if not path.exists():
        path.write_text(text)
    return path
