"""Block Decomposition Method.

An object (string, matrix or tensor) is cut into blocks small enough to be
looked up in a :class:`~ctmbdm.ctm.CtmTable`; the estimate is

    sum over distinct blocks r of  CTM(r) + log2(n_r)

where ``n_r`` is the multiplicity of ``r``.  Boundary strategies decide
what happens with cells that do not fill a whole block:

``trim``
    ignore them (underestimates)
``cyclic``
    wrap the object on a torus and slide a window over it (overestimates)
``recursive``
    cover the leftovers with ever smaller square blocks
``addborder``
    pad with a constant row/column fill up to the next multiple, and
    subtract ``log2`` of the number of padded rows and columns

Variants ``smooth`` and ``mutual_info`` reweight block complexities; see
:func:`smooth_bdm` and :func:`mi_bdm`.
"""
from __future__ import annotations

import enum
import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .blocks import block_key, key_array, key_shape, all_blocks
from .ctm import CtmTable, ShapeError, lookup
from .entropy import normalized_mutual_information
from .turing import ConfigurationError


class Boundary(str, enum.Enum):
    TRIM = "trim"
    CYCLIC = "cyclic"
    RECURSIVE = "recursive"
    ADD_BORDER = "addborder"


class Variant(str, enum.Enum):
    PLAIN = "plain"
    SMOOTH = "smooth"
    MUTUAL_INFO = "mutual_info"


class DecompositionError(ValueError):
    pass


@dataclass(frozen=True)
class BdmConfig:
    """Parameters that fully determine one BDM computation.

    ``offset`` is the step between consecutive windows (``m``); it defaults
    to ``block`` which gives a partition with no overlap.
    """

    block: int
    offset: Optional[int] = None
    boundary: Boundary = Boundary.TRIM
    variant: Variant = Variant.PLAIN
    quadrants: Tuple[str, ...] = ("UL",)
    fill: Optional[int] = None

    def __post_init__(self):
        if self.block < 1:
            raise ValueError("block size must be >= 1")
        step = self.block if self.offset is None else self.offset
        if not 1 <= step <= self.block:
            raise ValueError(f"offset must satisfy 1 <= m <= {self.block}, got {step}")
        object.__setattr__(self, "offset", step)
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        object.__setattr__(self, "variant", Variant(self.variant))

    @property
    def overlapping(self) -> bool:
        return self.offset < self.block

    def label(self) -> str:
        """Short label such as ``b12m1-trim``."""
        return f"b{self.block}m{self.offset}-{self.boundary.value}"


@dataclass(frozen=True)
class Leftover:
    ignored_cells: int = 0
    added_cells: int = 0
    fill: Optional[int] = None
    padded_shape: Optional[Tuple[int, ...]] = None
    correction: float = 0.0


@dataclass(frozen=True)
class BlockMultiset:
    """Distinct blocks with multiplicities, plus where each occurrence sits.

    ``placements`` lists ``(origin, shape)`` for every block occurrence in
    the coordinates of the (possibly padded) object; cyclic windows may run
    past the far edge and wrap around.
    """

    entries: Tuple[Tuple[str, int], ...]
    placements: Tuple[Tuple[Tuple[int, ...], Tuple[int, ...]], ...]
    object_shape: Tuple[int, ...]
    leftover: Leftover = Leftover()
    cyclic: bool = False

    @property
    def n_blocks(self) -> int:
        return sum(n for _, n in self.entries)

    def coverage(self) -> np.ndarray:
        """How many blocks cover each cell of the original object."""
        shape = self.leftover.padded_shape or self.object_shape
        cov = np.zeros(shape, dtype=np.int64)
        for origin, bshape in self.placements:
            idx = tuple(
                np.arange(o, o + s) % n if self.cyclic else slice(o, o + s)
                for o, s, n in zip(origin, bshape, shape)
            )
            if self.cyclic:
                cov[np.ix_(*idx)] += 1
            else:
                cov[idx] += 1
        return cov[tuple(slice(0, n) for n in self.object_shape)]


@dataclass(frozen=True)
class BdmResult:
    value: float
    multiset: BlockMultiset
    config: BdmConfig
    correction: float = 0.0
    # per distinct block: the complexity term actually summed (after weighting)
    terms: Dict[str, float] = field(default_factory=dict)

    def recompute(self) -> float:
        parts = []
        for key, n in self.multiset.entries:
            parts += [self.terms[key], math.log2(n)]
        return math.fsum(parts) - self.correction


# -- input handling --------------------------------------------------------

def as_array(obj) -> np.ndarray:
    """Strings become 1D symbol arrays; anything array-like is taken as is."""
    if isinstance(obj, str):
        if not obj or not obj.isdigit():
            raise ValueError("string objects must be non-empty digit strings")
        return np.frombuffer(obj.encode("ascii"), dtype=np.uint8).astype(np.int8) - ord("0")
    arr = np.asarray(obj)
    if arr.size == 0:
        raise ValueError("object is empty")
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.equal(np.mod(arr, 1), 0)):
            raise ValueError("object entries must be integer symbols")
    return arr.astype(np.int8)


def _check_compatible(arr: np.ndarray, table: CtmTable, block: int) -> None:
    if arr.ndim != table.ndim:
        raise ConfigurationError(
            f"{arr.ndim}D object cannot be evaluated with a {table.ndim}D table"
        )
    if arr.min() < 0 or arr.max() >= table.k:
        raise ConfigurationError(f"object symbols fall outside the table alphabet 0..{table.k - 1}")
    if not table.covers((block,) * arr.ndim):
        raise ShapeError(f"block exceeds table base shape ({block} > {table.base_shape})")


# -- decomposition ---------------------------------------------------------

def _pad(arr: np.ndarray, block: int, offset: int, fill: int):
    """Pad at the far end of each axis so windows of ``block`` at step ``offset`` tile exactly."""
    widths = []
    for n in arr.shape:
        target = block if n <= block else block + math.ceil((n - block) / offset) * offset
        widths.append((0, target - n))
    padded = np.pad(arr, widths, constant_values=fill)
    added = [w for _, w in widths]
    correction = math.fsum(math.log2(a) for a in added if a > 0)
    return padded, added, correction


def _collect(arr, origins, block, cyclic=False):
    keys = []
    placements = []
    bshape = (block,) * arr.ndim
    for origin in origins:
        if cyclic:
            idx = np.ix_(*[np.arange(o, o + block) % n for o, n in zip(origin, arr.shape)])
            sub = arr[idx]
        else:
            sub = arr[tuple(slice(o, o + block) for o in origin)]
        keys.append(block_key(sub))
        placements.append((tuple(origin), bshape))
    return keys, placements


def _multiset(keys, placements, shape, leftover=Leftover(), cyclic=False) -> BlockMultiset:
    counts = Counter(keys)
    return BlockMultiset(tuple(sorted(counts.items())), tuple(placements), tuple(shape),
                         leftover, cyclic)


def decompose(obj, config: BdmConfig) -> BlockMultiset:
    """Cut ``obj`` into blocks according to ``config``.

    ``addborder`` pads with ``config.fill`` (0 when unset); :func:`bdm` tries
    both constant fills instead.
    """
    arr = as_array(obj)
    d, m = config.block, config.offset
    boundary = config.boundary
    if boundary is Boundary.CYCLIC:
        if any(n < d for n in arr.shape):
            raise DecompositionError("object below block size")
        origins = itertools.product(*[range(0, n, m) for n in arr.shape])
        keys, placements = _collect(arr, origins, d, cyclic=True)
        return _multiset(keys, placements, arr.shape, cyclic=True)
    if boundary is Boundary.RECURSIVE:
        pieces = recursive_partition(arr, d, config.quadrants)
        keys = [block_key(sub) for _, sub in pieces]
        placements = [(origin, sub.shape) for origin, sub in pieces]
        return _multiset(keys, placements, arr.shape)
    if boundary is Boundary.ADD_BORDER:
        fill = 0 if config.fill is None else config.fill
        padded, added, correction = _pad(arr, d, m, fill)
        origins = itertools.product(*[range(0, n - d + 1, m) for n in padded.shape])
        keys, placements = _collect(padded, origins, d)
        leftover = Leftover(added_cells=padded.size - arr.size, fill=fill,
                            padded_shape=padded.shape, correction=correction)
        return _multiset(keys, placements, arr.shape, leftover)

    if any(n < d for n in arr.shape):
        raise DecompositionError("object below block size")
    origins = list(itertools.product(*[range(0, n - d + 1, m) for n in arr.shape]))
    keys, placements = _collect(arr, origins, d)
    covered = np.zeros(arr.shape, dtype=bool)
    for origin, bshape in placements:
        covered[tuple(slice(o, o + s) for o, s in zip(origin, bshape))] = True
    leftover = Leftover(ignored_cells=int((~covered).sum()))
    return _multiset(keys, placements, arr.shape, leftover)


_CORNERS = {
    "UL": (True, True), "UR": (True, False),
    "LL": (False, True), "LR": (False, False), "DR": (False, False),
    "L": (True, True), "R": (True, False),
}


def recursive_partition(X, d: int, quadrants: Sequence[str] = ("UL",)) -> List[Tuple[tuple, np.ndarray]]:
    """Cover ``X`` with square blocks of decreasing size ``d, d-1, ..., 1``.

    At each level the largest grid of ``d x d`` blocks is anchored in the
    corner named by that level's quadrant; the two strips and the corner
    piece left over are partitioned again one size down.  The quadrant
    vector is indexed by level; its last entry is reused for deeper levels.
    Strings are handled as a single row and anchor left (``UL``/``LL``/``L``)
    or right.

    Returns ``(origin, block)`` pairs; every cell is covered exactly once.
    """
    arr = as_array(X)
    if arr.ndim > 2:
        raise NotImplementedError("recursive partition is implemented for strings and matrices")
    if not quadrants:
        raise ValueError("at least one quadrant is needed")
    for q in quadrants:
        if q not in _CORNERS:
            raise ValueError(f"unknown quadrant {q!r}; use UL, UR, LL or LR")
    mat = arr.reshape(1, -1) if arr.ndim == 1 else arr
    out = []

    def part(r0, c0, rows, cols, size, level):
        if rows == 0 or cols == 0:
            return
        top, left = _CORNERS[quadrants[min(level, len(quadrants) - 1)]]
        bh = size if arr.ndim == 2 else 1
        a = (rows // bh) * bh
        b = (cols // size) * size
        br0 = r0 if top else r0 + rows - a
        bc0 = c0 if left else c0 + cols - b
        for i in range(0, a, bh):
            for j in range(0, b, size):
                sub = mat[br0 + i:br0 + i + bh, bc0 + j:bc0 + j + size]
                origin = (bc0 + j,) if arr.ndim == 1 else (br0 + i, bc0 + j)
                out.append((origin, sub[0].copy() if arr.ndim == 1 else sub.copy()))
        rest_r0 = r0 + a if top else r0
        rest_c0 = c0 + b if left else c0
        # strip beside the block grid, strip below/above it, and the corner piece
        part(br0, rest_c0, a, cols - b, size - 1, level + 1)
        part(rest_r0, bc0, rows - a, b, size - 1, level + 1)
        part(rest_r0, rest_c0, rows - a, cols - b, size - 1, level + 1)

    part(0, 0, mat.shape[0], mat.shape[1], d, 0)
    return out


def cyclic_embed(X, d: int) -> BlockMultiset:
    """Every ``d x d`` window of ``X`` wrapped on a torus (one per cell)."""
    return decompose(X, BdmConfig(d, 1, Boundary.CYCLIC))


# -- estimators ------------------------------------------------------------

def _plain_value(ms: BlockMultiset, table: CtmTable, correction: float):
    terms = {key: lookup(table, key) for key, _ in ms.entries}
    parts = []
    for key, n in ms.entries:
        parts += [terms[key], math.log2(n)]
    return math.fsum(parts) - correction, terms


def _border_fills(config: BdmConfig, table: CtmTable):
    return (config.fill,) if config.fill is not None else (0, table.k - 1)


def _best_over_fills(arr, table, config, evaluate):
    """Evaluate each constant border fill and keep the smallest result (first on ties)."""
    best = None
    for fill in _border_fills(config, table):
        cfg = BdmConfig(config.block, config.offset, Boundary.ADD_BORDER, config.variant,
                        config.quadrants, fill)
        ms = decompose(arr, cfg)
        value, terms = evaluate(ms)
        value -= ms.leftover.correction
        if best is None or value < best.value:
            best = BdmResult(value, ms, cfg, ms.leftover.correction, terms)
    return best


def bdm(obj, table: CtmTable, config: BdmConfig) -> BdmResult:
    """BDM estimate in bits; dispatches on ``config.variant``."""
    if config.variant is Variant.SMOOTH:
        return smooth_bdm(obj, table, config)
    if config.variant is Variant.MUTUAL_INFO:
        return mi_bdm(obj, table, config)
    arr = as_array(obj)
    _check_compatible(arr, table, config.block)
    if config.boundary is Boundary.ADD_BORDER:
        return _best_over_fills(arr, table, config, lambda ms: _plain_value(ms, table, 0.0))
    ms = decompose(arr, config)
    value, terms = _plain_value(ms, table, 0.0)
    return BdmResult(value, ms, config, 0.0, terms)


def frequency_weights(table: CtmTable) -> Callable[[str], float]:
    """Weight of a block = its production frequency relative to the most frequent block of its shape.

    Written as ``2 ** (min value of the shape - value)`` so completed
    (never produced) blocks get a small positive weight too.  Values lie
    in (0, 1].
    """
    shape_min: Dict[tuple, float] = {}

    def weight(key: str) -> float:
        shape = key_shape(key)
        if shape not in shape_min:
            shape_min[shape] = min(table.shape_values(shape).values())
        return 2.0 ** (shape_min[shape] - lookup(table, key))

    return weight


def _weighted_decomposition(arr, table, config, evaluate):
    d = config.block
    if config.overlapping:
        cfg = BdmConfig(d, config.offset, Boundary.TRIM, config.variant)
        ms = decompose(arr, cfg)
        value, terms = evaluate(ms)
        return BdmResult(value, ms, cfg, 0.0, terms)
    if all(n % d == 0 for n in arr.shape):
        cfg = BdmConfig(d, d, Boundary.TRIM, config.variant)
        ms = decompose(arr, cfg)
        value, terms = evaluate(ms)
        return BdmResult(value, ms, cfg, 0.0, terms)
    return _best_over_fills(arr, table, config, evaluate)


def smooth_bdm(obj, table: CtmTable, config: BdmConfig,
               weights: Optional[Callable[[str], float]] = None) -> BdmResult:
    """Weighted BDM: ``sum CTM(r) * W(r) + log2(n_r)``.

    Objects whose sides are multiples of the block size are partitioned
    without overlap.  Otherwise both an all-0 and an all-(k-1) border are
    added up to the next multiple, the border correction is subtracted and
    the smaller value is returned.  With ``offset < block`` a sliding window
    is used instead and no border is added.
    """
    arr = as_array(obj)
    _check_compatible(arr, table, config.block)
    weight = weights or frequency_weights(table)

    def evaluate(ms):
        terms = {key: lookup(table, key) * weight(key) for key, _ in ms.entries}
        parts = []
        for key, n in ms.entries:
            parts += [terms[key], math.log2(n)]
        return math.fsum(parts), terms

    return _weighted_decomposition(arr, table, config, evaluate)


def mibdm_term(ctm_i: float, ctm_j: float, mi_ij: float, mi_ji: float) -> float:
    """Smaller of the two ways of mixing two block complexities by their mutual information."""
    return min(mi_ij * ctm_i + (1 - mi_ji) * ctm_j,
               mi_ij * ctm_j + (1 - mi_ji) * ctm_i)


def mi_bdm(obj, table: CtmTable, config: BdmConfig) -> BdmResult:
    """BDM where each block's complexity is mixed with that of its closest block.

    For every distinct block the partner is the *other* distinct block with
    the largest normalized mutual information (ties go to the smaller key).
    A decomposition with a single distinct block reduces to plain BDM.
    Border handling is the same as in :func:`smooth_bdm`.
    """
    arr = as_array(obj)
    _check_compatible(arr, table, config.block)

    def evaluate(ms):
        keys = [key for key, _ in ms.entries]
        blocks = {key: key_array(key) for key in keys}
        ctm = {key: lookup(table, key) for key in keys}
        terms = {}
        for ki in keys:
            partner, best = None, -1.0
            for kj in keys:
                if kj == ki or key_shape(kj) != key_shape(ki):
                    continue
                mi = normalized_mutual_information(blocks[ki], blocks[kj])
                if mi > best:
                    partner, best = kj, mi
            if partner is None:
                terms[ki] = ctm[ki]
            else:
                mi_ji = normalized_mutual_information(blocks[partner], blocks[ki])
                terms[ki] = mibdm_term(ctm[ki], ctm[partner], best, mi_ji)
        parts = []
        for key, n in ms.entries:
            parts += [terms[key], math.log2(n)]
        return math.fsum(parts), terms

    return _weighted_decomposition(arr, table, config, evaluate)


# -- normalization ---------------------------------------------------------

def _block_shape(table: CtmTable, d: int):
    return (d,) * table.ndim


def _n_blocks(n: int, d: int, ndim: int) -> int:
    return (n // d) ** ndim


def min_bdm(n: int, d: int, table: CtmTable, form: str = "multiplicity") -> float:
    """Smallest BDM of an object of side ``n``: the cheapest block repeated everywhere.

    ``form="multiplicity"`` charges ``log2`` of the repetition count, which
    is what BDM itself gives for a constant object.  ``form="printed"``
    charges the number of blocks per side instead.
    """
    if n < d:
        raise ValueError("object side must be at least the block size")
    cheapest = min(table.shape_values(_block_shape(table, d)).values())
    if form == "multiplicity":
        return math.fsum([cheapest, math.log2(_n_blocks(n, d, table.ndim))])
    if form == "printed":
        return (n // d) + cheapest
    raise ValueError(f"unknown form {form!r}")


def occupancy(n: int, d: int, table: CtmTable) -> List[Tuple[str, int]]:
    """Block counts for the most complex object of side ``n``.

    The ``(n // d) ** ndim`` slots are spread as evenly as possible over all
    blocks, highest complexity first: counts differ by at most one and a
    more complex block never gets fewer copies than a simpler one.
    """
    values = table.shape_values(_block_shape(table, d))
    ranked = sorted(values, key=lambda key: (-values[key], key))
    slots = _n_blocks(n, d, table.ndim)
    base, extra = divmod(slots, len(ranked))
    counts = [(key, base + (1 if i < extra else 0)) for i, key in enumerate(ranked)]
    return [(key, c) for key, c in counts if c > 0]


def max_bdm(n: int, d: int, table: CtmTable) -> float:
    parts = []
    for key, count in sorted(occupancy(n, d, table)):
        parts += [lookup(table, key), math.log2(count)]
    return math.fsum(parts)


def max_complexity_object(n: int, d: int, table: CtmTable) -> np.ndarray:
    """An object of side ``n`` whose trimmed partition realizes :func:`occupancy`."""
    ndim = table.ndim
    per_side = n // d
    tiles = [key for key, count in occupancy(n, d, table) for _ in range(count)]
    out = np.zeros((n,) * ndim, dtype=np.int8)
    for pos, key in zip(itertools.product(range(per_side), repeat=ndim), tiles):
        out[tuple(slice(p * d, (p + 1) * d) for p in pos)] = key_array(key)
    return out


def normalized_bdm(X, table: CtmTable, d: int, min_form: str = "multiplicity") -> float:
    """BDM rescaled to [0, 1] between the constant object and the max-complexity mosaic."""
    arr = as_array(X)
    if len(set(arr.shape)) != 1:
        raise ValueError("normalized BDM needs a square object")
    n = arr.shape[0]
    lo = min_bdm(n, d, table, min_form)
    hi = max_bdm(n, d, table)
    if hi == lo:
        raise ValueError("table has no complexity spread")
    value = bdm(arr, table, BdmConfig(d)).value
    return min(1.0, max(0.0, (value - lo) / (hi - lo)))


# -- error bounds ----------------------------------------------------------

def boundary_error_bound(shape: Sequence[int], d: int, strategy, table: Optional[CtmTable] = None,
                         max_value: Optional[float] = None) -> float:
    """Analytic bound on the boundary error of a strategy, in bits.

    ``trim``: 0 if every side is divisible by ``d``, else ``k**2 / e**k``
    with ``k`` the first side of the object.  ``cyclic``: ``(d-1)`` times the
    largest block value.  ``recursive``: ``(d-1)**2`` times it.
    ``addborder``: ``log2`` of the padded rows plus padded columns.  The
    largest block value is ``max_value`` when given, else the table maximum.
    """
    strategy = Boundary(strategy)
    shape = tuple(int(n) for n in shape)
    if strategy is Boundary.TRIM:
        if all(n % d == 0 for n in shape):
            return 0.0
        k = shape[0]
        return k**2 / math.exp(k)
    if strategy is Boundary.ADD_BORDER:
        added = [(-n) % d for n in shape]
        return math.fsum(math.log2(a) for a in added if a > 0)
    if max_value is None:
        if table is None:
            raise ValueError("cyclic and recursive bounds need a table or max_value")
        max_value = table.max_value()
    if strategy is Boundary.CYCLIC:
        return (d - 1) * max_value
    return (d - 1) ** 2 * max_value


__all__ = [
    "BdmConfig", "BdmResult", "BlockMultiset", "Boundary", "DecompositionError", "Leftover",
    "Variant", "as_array", "bdm", "boundary_error_bound", "cyclic_embed", "decompose",
    "frequency_weights", "max_bdm", "max_complexity_object", "mi_bdm", "mibdm_term", "min_bdm",
    "normalized_bdm", "occupancy", "recursive_partition", "smooth_bdm", "all_blocks",
]
