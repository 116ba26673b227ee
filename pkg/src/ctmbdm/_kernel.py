"""Compiled simulation loop used for whole-space enumeration.

Each machine's output is packed into one int64 so that a range of machines
reduces to ``np.unique`` over an integer array:

* ``-1``: did not halt within the cutoff
* ``-2``: halted, but the output is too large to pack; the caller re-runs
  that index through the reference simulator
* 1D: ``offsets[L] + value`` where ``value`` reads the output in base k
* 2D: ``rows << 58 | cols << 52 | value`` (row-major, base k)
"""
import math

import numba
import numpy as np

NOT_HALTED = -1
OVERFLOW = -2

_MAX_ROWS_2D = 31
_MAX_COLS_2D = 63


def length_offsets(k: int) -> np.ndarray:
    """``offsets[L]`` = number of strings shorter than L, for L up to the pack limit."""
    offsets = [0, 0]
    while True:
        nxt = offsets[-1] + k ** (len(offsets) - 1)
        if nxt + k ** len(offsets) >= 2**62:
            break
        offsets.append(nxt)
    return np.array(offsets, dtype=np.int64)


def max_cells_2d(k: int) -> int:
    return int(52 / math.log2(k))


@numba.njit(cache=True, nogil=True)
def _simulate(t, k, dim, cutoff, start, count, stride, total, offsets, max_cells):
    n_cells = t * k
    n_moves = 2 if dim == 1 else 4
    radix = k * n_moves * (t + 1)
    writes = np.empty(n_cells, dtype=np.int64)
    moves = np.empty(n_cells, dtype=np.int64)
    nexts = np.empty(n_cells, dtype=np.int64)
    out = np.empty(count, dtype=np.int64)

    side = 2 * cutoff + 3
    origin = cutoff + 1
    if dim == 1:
        grid = np.zeros((1, side), dtype=np.int8)
    else:
        grid = np.zeros((side, side), dtype=np.int8)
    max_len = offsets.shape[0] - 1

    idx = start
    for j in range(count):
        rem = idx
        for c in range(n_cells - 1, -1, -1):
            d = rem % radix
            rem //= radix
            nexts[c] = d % (t + 1)
            d //= t + 1
            moves[c] = d % n_moves
            writes[c] = d // n_moves

        row = origin if dim == 2 else 0
        col = origin
        rmin = rmax = row
        cmin = cmax = col
        state = 0
        halted = False
        for _ in range(cutoff):
            if row < rmin:
                rmin = row
            if row > rmax:
                rmax = row
            if col < cmin:
                cmin = col
            if col > cmax:
                cmax = col
            cell = state * k + grid[row, col]
            grid[row, col] = writes[cell]
            mv = moves[cell]
            if mv == 0:
                col -= 1
            elif mv == 1:
                col += 1
            elif mv == 2:
                row -= 1
            else:
                row += 1
            if nexts[cell] == t:
                halted = True
                break
            state = nexts[cell]

        code = NOT_HALTED
        if halted:
            nrows = rmax - rmin + 1
            ncols = cmax - cmin + 1
            if dim == 1:
                if ncols <= max_len:
                    value = 0
                    for cc in range(cmin, cmax + 1):
                        value = value * k + grid[0, cc]
                    code = offsets[ncols] + value
                else:
                    code = OVERFLOW
            else:
                if nrows <= _MAX_ROWS_2D and ncols <= _MAX_COLS_2D and nrows * ncols <= max_cells:
                    value = 0
                    for rr in range(rmin, rmax + 1):
                        for cc in range(cmin, cmax + 1):
                            value = value * k + grid[rr, cc]
                    code = (nrows << 58) | (ncols << 52) | value
                else:
                    code = OVERFLOW
        out[j] = code

        for rr in range(rmin, rmax + 1):
            for cc in range(cmin, cmax + 1):
                grid[rr, cc] = 0

        idx += stride
        if idx >= total:
            idx -= total
    return out


def simulate_indices(t, k, dim, cutoff, start, count, stride, total):
    """Simulate ``count`` machines at indices ``start + j*stride (mod total)``."""
    offsets = length_offsets(k)
    return _simulate(
        np.int64(t), np.int64(k), np.int64(dim), np.int64(cutoff),
        np.int64(start), np.int64(count), np.int64(stride), np.int64(total),
        offsets, np.int64(max_cells_2d(k)),
    )


def decode(code: int, k: int, dim: int, offsets: np.ndarray):
    """Inverse of the packing above; returns a 1D string or a tuple of row strings."""
    if dim == 1:
        length = int(np.searchsorted(offsets, code, side="right")) - 1
        value = code - int(offsets[length])
        return _digits(value, k, length)
    nrows = code >> 58
    ncols = (code >> 52) & 0x3F
    flat = _digits(code & ((1 << 52) - 1), k, nrows * ncols)
    return tuple(flat[r * ncols:(r + 1) * ncols] for r in range(nrows))


def _digits(value: int, k: int, length: int) -> str:
    out = []
    for _ in range(length):
        value, d = divmod(value, k)
        out.append(str(d))
    return "".join(reversed(out))
