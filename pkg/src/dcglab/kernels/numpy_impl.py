"""Pure-numpy fallback backend.

Must stay observably identical to ``numba_impl``: same component labels,
same modal codes, same RNG stream consumption in the motion loop.
"""

from __future__ import annotations

import numpy as np

from ..rng import MASK64, splitmix64_next

# limit for exact rejection sampling of below-7 draws: 2**64 - (2**64 % 7)
_LIMIT7 = (1 << 64) - ((1 << 64) % 7)

# direction order: N S E W NE NW SE SW
DX = np.array([0, 0, 1, -1, 1, -1, 1, -1], dtype=np.int32)
DY = np.array([-1, 1, 0, 0, -1, -1, 1, 1], dtype=np.int32)


def mode_codes(stack: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-pixel modal code over a (frames, H, W) uint8 stack.

    Ties break toward the lowest code. Returns (modes uint8, counts int32).
    """
    f, h, w = stack.shape
    npix = h * w
    flat = stack.reshape(f, npix).astype(np.int64)
    offsets = np.arange(npix, dtype=np.int64) * 64
    counts = np.bincount((flat + offsets).ravel(), minlength=npix * 64)
    counts = counts.reshape(npix, 64)
    modes = counts.argmax(axis=1).astype(np.uint8)  # argmax: lowest index wins ties
    modal = counts[np.arange(npix), modes].astype(np.int32)
    return modes.reshape(h, w), modal.reshape(h, w)


def label_components(mask: np.ndarray) -> tuple[np.ndarray, int]:
    """4-connected components of a boolean mask.

    Labels are 1..n in order of each component's first row-major pixel.
    Run-based two-pass union-find: rows are decomposed into horizontal
    runs, runs are merged across adjacent rows.
    """
    h, w = mask.shape
    labels = np.zeros((h, w), dtype=np.int32)
    runs = []  # (row, x0, x1, provisional_label)
    parent: list[int] = []

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a: int, b: int) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    padded = np.zeros(w + 2, dtype=bool)
    prev_runs: list[tuple[int, int, int]] = []  # (x0, x1, label)
    for y in range(h):
        padded[1:-1] = mask[y]
        edges = np.flatnonzero(padded[1:] != padded[:-1])
        row_runs = []
        for i in range(0, len(edges), 2):
            x0, x1 = int(edges[i]), int(edges[i + 1])
            lab = len(parent)
            parent.append(lab)
            for px0, px1, plab in prev_runs:
                if px0 < x1 and x0 < px1:
                    union(lab, plab)
            row_runs.append((x0, x1, lab))
            runs.append((y, x0, x1, lab))
        prev_runs = row_runs

    # canonical relabel: components numbered by first run appearance
    remap: dict[int, int] = {}
    for y, x0, x1, lab in runs:
        root = find(lab)
        if root not in remap:
            remap[root] = len(remap) + 1
        labels[y, x0:x1] = remap[root]
    return labels, len(remap)


def advance_objects(pos_x, pos_y, dirs, widths, heights, moving, blocking,
                    bx0: int, by0: int, bx1: int, by1: int,
                    n_frames: int, state: int) -> int:
    """Advance free objects n_frames steps inside [bx0,bx1)x[by0,by1).

    A proposed move colliding with the border or another blocking object's
    current box is cancelled for that frame, and a new direction is drawn
    uniformly from the 7 others, rejecting (up to 8 draws) directions that
    still collide. Arrays are mutated in place; returns the new RNG state.
    """
    n = pos_x.shape[0]
    for _ in range(n_frames):
        for i in range(n):
            if not moving[i]:
                continue
            d = int(dirs[i])
            nx = int(pos_x[i]) + int(DX[d])
            ny = int(pos_y[i]) + int(DY[d])
            if _collides(i, nx, ny, pos_x, pos_y, widths, heights,
                         blocking, bx0, by0, bx1, by1, n):
                for _attempt in range(8):
                    while True:
                        state, z = splitmix64_next(state)
                        if z < _LIMIT7:
                            break
                    c = z % 7
                    if c >= d:
                        c += 1
                    dirs[i] = c
                    cx = int(pos_x[i]) + int(DX[c])
                    cy = int(pos_y[i]) + int(DY[c])
                    if not _collides(i, cx, cy, pos_x, pos_y, widths, heights,
                                     blocking, bx0, by0, bx1, by1, n):
                        break
            else:
                pos_x[i] = nx
                pos_y[i] = ny
    return state & MASK64


def _collides(i, nx, ny, pos_x, pos_y, widths, heights, blocking,
              bx0, by0, bx1, by1, n) -> bool:
    if nx < bx0 or ny < by0 or nx + int(widths[i]) > bx1 or ny + int(heights[i]) > by1:
        return True
    for j in range(n):
        if j == i or not blocking[j]:
            continue
        if (nx < pos_x[j] + widths[j] and pos_x[j] < nx + widths[i]
                and ny < pos_y[j] + heights[j] and pos_y[j] < ny + heights[i]):
            return True
    return False
