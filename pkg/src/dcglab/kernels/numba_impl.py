"""numba @njit backend for the hot kernels."""

from __future__ import annotations

import numpy as np
from numba import njit

from ..rng import MASK64

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_LIMIT7 = np.uint64((1 << 64) - ((1 << 64) % 7))

DX = np.array([0, 0, 1, -1, 1, -1, 1, -1], dtype=np.int32)
DY = np.array([-1, 1, 0, 0, -1, -1, 1, 1], dtype=np.int32)


@njit(cache=True)
def _next_u64(state):
    state = state + _GAMMA
    z = state
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    z = z ^ (z >> np.uint64(31))
    return state, z


@njit(cache=True)
def _mode_kernel(stack, modes, counts):
    f, h, w = stack.shape
    hist = np.zeros(64, dtype=np.int32)
    for y in range(h):
        for x in range(w):
            hist[:] = 0
            for k in range(f):
                hist[stack[k, y, x]] += 1
            best = 0
            best_count = hist[0]
            for c in range(1, 64):
                if hist[c] > best_count:
                    best = c
                    best_count = hist[c]
            modes[y, x] = best
            counts[y, x] = best_count


def mode_codes(stack: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    _, h, w = stack.shape
    modes = np.empty((h, w), dtype=np.uint8)
    counts = np.empty((h, w), dtype=np.int32)
    _mode_kernel(np.ascontiguousarray(stack), modes, counts)
    return modes, counts


@njit(cache=True)
def _label_kernel(mask, labels, stack):
    h, w = mask.shape
    n = 0
    for y0 in range(h):
        for x0 in range(w):
            if mask[y0, x0] and labels[y0, x0] == 0:
                n += 1
                labels[y0, x0] = n
                top = 0
                stack[top, 0] = y0
                stack[top, 1] = x0
                top += 1
                while top > 0:
                    top -= 1
                    y = stack[top, 0]
                    x = stack[top, 1]
                    if y > 0 and mask[y - 1, x] and labels[y - 1, x] == 0:
                        labels[y - 1, x] = n
                        stack[top, 0] = y - 1
                        stack[top, 1] = x
                        top += 1
                    if y + 1 < h and mask[y + 1, x] and labels[y + 1, x] == 0:
                        labels[y + 1, x] = n
                        stack[top, 0] = y + 1
                        stack[top, 1] = x
                        top += 1
                    if x > 0 and mask[y, x - 1] and labels[y, x - 1] == 0:
                        labels[y, x - 1] = n
                        stack[top, 0] = y
                        stack[top, 1] = x - 1
                        top += 1
                    if x + 1 < w and mask[y, x + 1] and labels[y, x + 1] == 0:
                        labels[y, x + 1] = n
                        stack[top, 0] = y
                        stack[top, 1] = x + 1
                        top += 1
    return n


def label_components(mask: np.ndarray) -> tuple[np.ndarray, int]:
    h, w = mask.shape
    labels = np.zeros((h, w), dtype=np.int32)
    stack = np.empty((h * w, 2), dtype=np.int32)
    n = _label_kernel(np.ascontiguousarray(mask), labels, stack)
    return labels, int(n)


@njit(cache=True)
def _collides(i, nx, ny, pos_x, pos_y, widths, heights, blocking,
              bx0, by0, bx1, by1, n):
    if nx < bx0 or ny < by0 or nx + widths[i] > bx1 or ny + heights[i] > by1:
        return True
    for j in range(n):
        if j == i or blocking[j] == 0:
            continue
        if (nx < pos_x[j] + widths[j] and pos_x[j] < nx + widths[i]
                and ny < pos_y[j] + heights[j] and pos_y[j] < ny + heights[i]):
            return True
    return False


@njit(cache=True)
def _advance_kernel(pos_x, pos_y, dirs, widths, heights, moving, blocking,
                    bx0, by0, bx1, by1, n_frames, state):
    n = pos_x.shape[0]
    for _ in range(n_frames):
        for i in range(n):
            if moving[i] == 0:
                continue
            d = dirs[i]
            nx = pos_x[i] + DX[d]
            ny = pos_y[i] + DY[d]
            if _collides(i, nx, ny, pos_x, pos_y, widths, heights,
                         blocking, bx0, by0, bx1, by1, n):
                for _attempt in range(8):
                    while True:
                        state, z = _next_u64(state)
                        if z < _LIMIT7:
                            break
                    c = z % np.uint64(7)
                    if c >= np.uint64(d):
                        c = c + np.uint64(1)
                    dirs[i] = c
                    cx = pos_x[i] + DX[c]
                    cy = pos_y[i] + DY[c]
                    if not _collides(i, cx, cy, pos_x, pos_y, widths, heights,
                                     blocking, bx0, by0, bx1, by1, n):
                        break
            else:
                pos_x[i] = nx
                pos_y[i] = ny
    return state


def advance_objects(pos_x, pos_y, dirs, widths, heights, moving, blocking,
                    bx0: int, by0: int, bx1: int, by1: int,
                    n_frames: int, state: int) -> int:
    new_state = _advance_kernel(
        pos_x, pos_y, dirs, widths, heights, moving, blocking,
        np.int32(bx0), np.int32(by0), np.int32(bx1), np.int32(by1),
        np.int64(n_frames), np.uint64(state & MASK64))
    return int(new_state)
