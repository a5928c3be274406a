"""16-bit grayscale PGM images with a plain-text sidecar."""
from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from ..field import WaveField

MAXVAL = 65535


def _scale_bar(extent: float) -> float:
    """A 1-2-5 length close to a fifth of the field of view."""
    target = extent / 5
    decade = 10 ** math.floor(math.log10(target))
    return max(m * decade for m in (1, 2, 5) if m * decade <= target)


def field_to_gray(f: WaveField, kind: str) -> np.ndarray:
    """Map a field to ``uint16`` gray levels, row 0 at the top (+y).

    ``intensity`` is scaled linearly so the maximum maps to 65535.
    ``phase`` maps ``(-pi, pi]`` linearly onto ``(0, 65535]``.
    """
    if kind == "intensity":
        inten = f.intensity()
        peak = inten.max()
        vals = inten / peak if peak > 0 else np.zeros_like(inten)
    elif kind == "phase":
        vals = (np.angle(f.values) + np.pi) / (2 * np.pi)
    else:
        raise ValueError(f"kind must be 'intensity' or 'phase', got {kind!r}")
    gray = np.rint(np.clip(vals, 0, 1) * MAXVAL).astype(">u2")
    return gray[::-1]


def write_pgm(path, gray: np.ndarray) -> None:
    h, w = gray.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n{MAXVAL}\n".encode("ascii"))
        fh.write(np.ascontiguousarray(gray, dtype=">u2").tobytes())


def read_pgm(path) -> np.ndarray:
    """Read a binary 16-bit PGM written by :func:`write_pgm`."""
    data = Path(path).read_bytes()
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        start = pos
        while not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos].decode("ascii"))
    pos += 1
    if tokens[0] != "P5" or int(tokens[3]) != MAXVAL:
        raise ValueError(f"{path} is not a 16-bit binary PGM")
    w, h = int(tokens[1]), int(tokens[2])
    return np.frombuffer(data[pos:pos + 2 * w * h], dtype=">u2").reshape(h, w).astype(np.uint16)


def render_field(f: WaveField, kind: str, path) -> Path:
    """Write ``f`` as a PGM image plus a ``.txt`` sidecar with the geometry.

    Returns the image path.
    """
    path = Path(path)
    gray = field_to_gray(f, kind)
    write_pgm(path, gray)
    bar = _scale_bar(f.extent)
    lines = [
        f"kind = {kind}",
        f"width_px = {f.n_x}",
        f"height_px = {f.n_y}",
        f"pitch_m = {f.pitch!r}",
        f"extent_m = {f.extent!r}",
        f"z_m = {f.z_pos!r}",
        f"scale_bar_m = {bar!r}",
        f"scale_bar_px = {bar / f.pitch:.2f}",
        "orientation = row 0 is +y, column 0 is -x, optical axis at pixel (n/2, n/2) from bottom-left",
    ]
    if kind == "intensity":
        lines.append(f"gray_65535 = {float(f.intensity().max())!r}")
    else:
        lines.append("gray_0 = -pi, gray_65535 = +pi")
    path.with_suffix(".txt").write_text("\n".join(lines) + "\n")
    return path
