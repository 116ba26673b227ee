"""Canonical text keys for blocks.

1D blocks are plain symbol strings (``"0110"``).  Blocks of two or more
dimensions carry their shape as a prefix: ``"2x3:011010"`` is a 2x3 matrix
in row-major order.  The same keys are used in memory and in table files.
"""
from __future__ import annotations

import numpy as np

_DIGITS = "0123456789"


def block_key(block) -> str:
    if isinstance(block, str):
        return block
    if isinstance(block, tuple) and block and isinstance(block[0], str):
        return f"{len(block)}x{len(block[0])}:" + "".join(block)
    arr = np.asarray(block)
    flat = "".join(_DIGITS[v] for v in arr.ravel().tolist())
    if arr.ndim == 1:
        return flat
    return "x".join(str(n) for n in arr.shape) + ":" + flat


def key_shape(key: str) -> tuple:
    if ":" not in key:
        return (len(key),)
    dims, _ = key.split(":", 1)
    return tuple(int(n) for n in dims.split("x"))


def key_array(key: str) -> np.ndarray:
    shape = key_shape(key)
    flat = key.split(":", 1)[-1]
    return np.array([int(c) for c in flat], dtype=np.int8).reshape(shape)


def complement_key(key: str, k: int) -> str:
    head, sep, flat = key.rpartition(":")
    return head + sep + "".join(str(k - 1 - int(c)) for c in flat)


def reverse_key(key: str) -> str:
    """Mirror image: reversed string in 1D, each row reversed in 2D."""
    if ":" not in key:
        return key[::-1]
    return block_key(np.flip(key_array(key), axis=-1))


def all_blocks(shape: tuple, k: int):
    """Every block of ``shape`` over ``k`` symbols, in lexicographic key order."""
    n = int(np.prod(shape))
    prefix = "" if len(shape) == 1 else "x".join(map(str, shape)) + ":"
    for i in range(k**n):
        digits = []
        for _ in range(n):
            i, d = divmod(i, k)
            digits.append(_DIGITS[d])
        yield prefix + "".join(reversed(digits))
