"""Shannon entropy baselines: plain, block, best-block and mutual information.

All probabilities are empirical ("natural") frequencies, with no smoothing.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Hashable, Iterable, Mapping, Tuple

import numpy as np


@dataclass(frozen=True)
class SymbolDistribution:
    probabilities: Mapping[Hashable, float]

    def __post_init__(self):
        if not self.probabilities:
            raise ValueError("distribution has empty support")
        if any(not 0 < p <= 1 for p in self.probabilities.values()):
            raise ValueError("probabilities must lie in (0, 1]")
        total = math.fsum(self.probabilities.values())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {total!r}, not 1")

    @classmethod
    def from_counts(cls, counts: Mapping[Hashable, int]) -> "SymbolDistribution":
        n = sum(counts.values())
        return cls({x: c / n for x, c in counts.items() if c > 0})

    @classmethod
    def natural(cls, items: Iterable[Hashable]) -> "SymbolDistribution":
        return cls.from_counts(Counter(items))


def _entropy_of_counts(counts: Iterable[int]) -> float:
    counts = [c for c in counts if c > 0]
    n = sum(counts)
    if n == 0:
        raise ValueError("distribution has empty support")
    # sum c log c form keeps exact zeros for single-symbol supports
    return max(0.0, math.log2(n) - math.fsum(c * math.log2(c) for c in counts) / n)


def entropy(dist) -> float:
    """Shannon entropy in bits of a distribution, or of the symbols of a sequence."""
    if isinstance(dist, SymbolDistribution):
        return max(0.0, -math.fsum(p * math.log2(p) for p in dist.probabilities.values()))
    if isinstance(dist, Mapping):
        return entropy(SymbolDistribution(dist))
    return _entropy_of_counts(Counter(_symbols(dist)).values())


def _symbols(seq) -> list:
    if isinstance(seq, str):
        return list(seq)
    return np.asarray(seq).ravel().tolist()


def _as_string(s) -> str:
    if isinstance(s, str):
        return s
    return "".join(str(int(v)) for v in np.asarray(s).ravel())


def blocks_of(s, l: int, overlapping: bool = False) -> list:
    s = _as_string(s)
    if not 1 <= l <= len(s):
        raise ValueError(f"block size must be in 1..{len(s)}, got {l}")
    step = 1 if overlapping else l
    return [s[i:i + l] for i in range(0, len(s) - l + 1, step)]


def block_entropy(s, l: int, overlapping: bool = False) -> float:
    """Entropy of the empirical distribution of length-``l`` blocks of ``s``.

    Non-overlapping blocks drop a trailing remainder shorter than ``l``.
    """
    return _entropy_of_counts(Counter(blocks_of(s, l, overlapping)).values())


def block_denominator(n: int, l: int, k: int = 2, reading: str = "distinct") -> float:
    """``log2`` of the largest number of different ``l``-blocks a length-``n`` string can show.

    ``"distinct"``: no more than ``k**l`` blocks exist and no more than
    ``n // l`` fit.  ``"positions"``: only the ``n // l`` slots count.
    """
    slots = n // l
    if reading == "distinct":
        return math.log2(min(k**l, slots))
    if reading == "positions":
        return math.log2(slots)
    raise ValueError(f"unknown reading {reading!r}")


def best_block_entropy(s, normalized: bool = False, k: int = 2,
                       reading: str = "distinct") -> Tuple[int, float]:
    """Smallest block entropy over block sizes ``1 .. len(s)//2``; ties go to the smaller size.

    Returns ``(best_block_size, bits)``.  With ``normalized=True`` each
    ``H_l`` is first divided by :func:`block_denominator`.
    """
    s = _as_string(s)
    if len(s) < 2:
        raise ValueError("best block entropy needs a string of length >= 2")
    best_l, best = 0, math.inf
    for l in range(1, len(s) // 2 + 1):
        h = block_entropy(s, l)
        if normalized:
            h /= block_denominator(len(s), l, k, reading)
        if h < best:
            best_l, best = l, h
    return best_l, best


def _pairs(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return list(zip(a.ravel().tolist(), b.ravel().tolist()))


def conditional_entropy(a, b) -> float:
    """``H(a | b)`` from the joint distribution of aligned cells."""
    pairs = _pairs(a, b)
    joint = _entropy_of_counts(Counter(pairs).values())
    return max(0.0, joint - _entropy_of_counts(Counter(y for _, y in pairs).values()))


def mutual_information(a, b) -> float:
    """``H(a) + H(b) - H(a, b)`` over aligned cells; symmetric by construction."""
    pairs = _pairs(a, b)
    ha = _entropy_of_counts(Counter(x for x, _ in pairs).values())
    hb = _entropy_of_counts(Counter(y for _, y in pairs).values())
    hab = _entropy_of_counts(Counter(pairs).values())
    mi = math.fsum([ha, hb, -hab])
    return max(0.0, min(mi, ha, hb))


def normalized_mutual_information(a, b) -> float:
    """Mutual information divided by ``max(H(a), H(b))``; two constant blocks give 1."""
    pairs = _pairs(a, b)
    ha = _entropy_of_counts(Counter(x for x, _ in pairs).values())
    hb = _entropy_of_counts(Counter(y for _, y in pairs).values())
    top = max(ha, hb)
    if top == 0.0:
        return 1.0
    return min(1.0, mutual_information(a, b) / top)
