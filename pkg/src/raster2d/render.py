"""Expected camera image of a rastered pattern, written as binary PGM."""

from __future__ import annotations

import numpy as np

from .compiler import Pattern

DEFAULT_WX = 15e-6
DEFAULT_WY = 11.3e-6
DEFAULT_PITCH = 30e-6
DEFAULT_PIXEL = 1e-6

EDGE_ROW_NOTE = ("top and bottom rows: measured resolution ~10% below nominal "
                 "(imaging lens walk-off); geometry here is unmodified")


def spot_centers(n: int, pitch: float, margin: float) -> np.ndarray:
    return margin + pitch * np.arange(n)


def render_pattern(pattern: Pattern, pitch_x: float = DEFAULT_PITCH, pitch_y: float = DEFAULT_PITCH,
                   wx: float = DEFAULT_WX, wy: float = DEFAULT_WY,
                   pixel: float = DEFAULT_PIXEL) -> np.ndarray:
    """Sum of elliptical Gaussian spots, one per lit cell, scaled by weight.

    Returns intensity indexed ``[y, x]``; a lone spot of weight 1 peaks at 1.
    """
    margin_x = 3 * max(wx, pitch_x / 2)
    margin_y = 3 * max(wy, pitch_y / 2)
    cx = spot_centers(pattern.n_cols, pitch_x, margin_x)
    cy = spot_centers(pattern.n_rows, pitch_y, margin_y)
    nx = int(np.ceil((cx[-1] + margin_x) / pixel)) + 1
    ny = int(np.ceil((cy[-1] + margin_y) / pixel)) + 1
    x = np.arange(nx) * pixel
    y = np.arange(ny) * pixel
    gx = np.exp(-2 * ((x[None, :] - cx[:, None]) / wx) ** 2)
    gy = np.exp(-2 * ((y[None, :] - cy[:, None]) / wy) ** 2)
    return gy.T @ pattern.weights.T @ gx


def to_gray(image: np.ndarray, maxval: int = 255) -> np.ndarray:
    """Quantise, keeping weight-1 spots at full scale unless overlaps exceed it."""
    scale = max(1.0, float(image.max()))
    return np.rint(np.clip(image / scale, 0, 1) * maxval).astype(np.uint8)


def pgm_bytes(gray: np.ndarray, comments=()) -> bytes:
    ny, nx = gray.shape
    header = "P5\n"
    for c in comments:
        header += f"# {c}\n"
    header += f"{nx} {ny}\n255\n"
    return header.encode("ascii") + np.ascontiguousarray(gray, dtype=np.uint8).tobytes()


def read_pgm(data: bytes) -> tuple[np.ndarray, list[str]]:
    lines = []
    comments = []
    pos = 0
    while len(lines) < 3:
        end = data.index(b"\n", pos)
        line = data[pos:end].decode("ascii")
        pos = end + 1
        if line.startswith("#"):
            comments.append(line[1:].strip())
        else:
            lines.append(line)
    if lines[0] != "P5":
        raise ValueError("not a binary PGM")
    nx, ny = (int(v) for v in lines[1].split())
    return np.frombuffer(data[pos:pos + nx * ny], dtype=np.uint8).reshape(ny, nx), comments
