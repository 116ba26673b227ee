"""Output distributions of small Turing machines and CTM lookup tables.

Building a table is a two stage affair.  :func:`build_distribution` runs
every machine of a rule space (or a reproducible stride sample of it) and
counts how often each output is produced among halting runs.  By default
every machine counts once on an all-0 tape and once on an all-(k-1) tape;
the second run is the first one with symbols relabelled ``s -> k-1-s``, so
it is obtained by adding the complement of each output rather than by
simulating again.  The resulting distribution is complement-symmetric.
:func:`ctm_table` turns those counts into complexities in bits,
``-log2(count / total_halting)``, and fills the blocks no machine produced
with the largest observed value of their shape plus a penalty ``r``.
"""
from __future__ import annotations

import hashlib
import logging
import math
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from . import _kernel
from .blocks import all_blocks, block_key, complement_key, key_shape
from .turing import ConfigurationError, RuleSpace, halting_cutoff, machine_from_index, run

log = logging.getLogger(__name__)

TABLE_MAGIC = "#ctm-table v1"
DIST_MAGIC = "#ctm-dist v1"
_BATCH = 1 << 21


class TableError(ValueError):
    """Malformed, inconsistent or mismatched table data."""


class ShapeError(ValueError):
    """A block is larger than the table's base shape."""


@dataclass(frozen=True)
class Sampling:
    """Index-stride sample: machines ``start + j*stride (mod total)`` for ``j < size``."""

    size: int
    stride: int
    seed: int


@dataclass
class OutputDistribution:
    space: RuleSpace
    cutoff: int
    total_halting: int
    counts: Dict[str, int]
    sampling: Optional[Sampling] = None
    blanks: str = "both"

    def frequency(self, key: str) -> float:
        return self.counts.get(key, 0) / self.total_halting

    def to_text(self) -> str:
        lines = [DIST_MAGIC, _header(self.space, self.cutoff, self.total_halting, None,
                                     self.sampling, self.blanks)]
        lines += [f"{key},{self.counts[key]}" for key in sorted(self.counts)]
        return "\n".join(lines) + "\n"


def default_stride(total: int) -> int:
    """Golden-ratio stride made coprime to ``total`` so the walk never repeats early."""
    stride = max(1, int(total * (math.sqrt(5) - 1) / 2))
    while math.gcd(stride, total) != 1:
        stride += 1
    return stride


def _run_chunk(job):
    t, k, dim, cutoff, start, count, stride, total = job
    codes = _kernel.simulate_indices(t, k, dim, cutoff, start, count, stride, total)
    uniq, cnt = np.unique(codes, return_counts=True)
    overflow = []
    if (codes == _kernel.OVERFLOW).any():
        pos = np.flatnonzero(codes == _kernel.OVERFLOW)
        overflow = [(start + int(p) * stride) % total for p in pos]
    return dict(zip(uniq.tolist(), cnt.tolist())), overflow


def _chunk_jobs(space, cutoff, start, size, stride, partitions):
    """Split ``size`` consecutive walk positions into ``partitions`` ranges, then batches."""
    bounds = np.linspace(0, size, partitions + 1).astype(np.int64).tolist()
    jobs = []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        for blo in range(lo, hi, _BATCH):
            bhi = min(hi, blo + _BATCH)
            jobs.append((space.t, space.k, space.dim, cutoff,
                          (start + blo * stride) % space.total, bhi - blo, stride, space.total))
    return jobs


def build_distribution(
    space: RuleSpace,
    cutoff: Optional[int] = None,
    partitions: int = 1,
    workers: Optional[int] = None,
    sample: Optional[int] = None,
    stride: Optional[int] = None,
    seed: int = 0,
    blanks: str = "both",
) -> OutputDistribution:
    """Count the outputs of every halting machine in ``space``.

    Parameters
    ----------
    cutoff : int, optional
        Step bound; defaults to the Busy Beaver value for the space.
    partitions : int
        Number of disjoint index ranges.  The result does not depend on it.
    workers : int, optional
        Worker processes; defaults to ``min(partitions, cpu_count)``.
    sample, stride, seed :
        When ``sample`` is given only that many machines are run, at indices
        ``start + j*stride`` modulo the space size, with ``start`` drawn from
        ``seed``.  The triple is kept in the result for provenance.
    blanks : {"both", "zero"}
        ``"both"`` counts every machine on the all-0 and the all-(k-1) tape;
        ``"zero"`` only on the all-0 tape.
    """
    if blanks not in ("both", "zero"):
        raise ValueError(f"blanks must be 'both' or 'zero', got {blanks!r}")
    cutoff = halting_cutoff(space, cutoff)
    if partitions < 1:
        raise ValueError("partitions must be >= 1")
    total = space.total
    if sample is None:
        start, size, step, sampling = 0, total, 1, None
    else:
        if not 0 < sample <= total:
            raise ValueError(f"sample size must be in 1..{total}")
        step = default_stride(total) if stride is None else int(stride)
        if not 0 < step < total or math.gcd(step, total) != 1:
            raise ValueError("stride must be in 1..total-1 and coprime to the space size")
        start = int(np.random.default_rng(seed).integers(total))
        size, sampling = int(sample), Sampling(int(sample), step, int(seed))

    jobs = _chunk_jobs(space, cutoff, start, size, step, partitions)
    workers = min(partitions, os.cpu_count() or 1) if workers is None else workers
    log.info("enumerating %d machines of %s at cutoff %d in %d batches",
             size, space, cutoff, len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_chunk, jobs))
    else:
        results = [_run_chunk(s) for s in jobs]

    code_counts: Counter = Counter()
    overflow = []
    for counts, over in results:
        code_counts.update(counts)
        overflow.extend(over)

    offsets = _kernel.length_offsets(space.k)
    counts: Dict[str, int] = {}
    for code, n in code_counts.items():
        if code < 0:
            continue
        key = block_key(_kernel.decode(code, space.k, space.dim, offsets))
        counts[key] = counts.get(key, 0) + n
    for idx in overflow:
        res = run(machine_from_index(space, idx), cutoff)
        key = block_key(res.output)
        counts[key] = counts.get(key, 0) + 1

    if blanks == "both":
        both: Dict[str, int] = {}
        for key, n in counts.items():
            both[key] = both.get(key, 0) + n
            comp = complement_key(key, space.k)
            both[comp] = both.get(comp, 0) + n
        counts = both
    total_halting = sum(counts.values())
    if total_halting == 0:
        raise RuntimeError(f"no machine of {space} halted within {cutoff} steps")
    return OutputDistribution(space, cutoff, total_halting, counts, sampling, blanks)


def shape_classes(dim: int, base_shape) -> list:
    """Block shapes a table with ``base_shape`` must cover, smallest first."""
    if dim == 1:
        return [(n,) for n in range(1, int(base_shape) + 1)]
    rows, cols = base_shape
    return [(r, c) for r in range(1, rows + 1) for c in range(1, cols + 1)]


def _fits(shape, base_shape) -> bool:
    base = (base_shape,) if np.isscalar(base_shape) else tuple(base_shape)
    return len(shape) == len(base) and all(s <= b for s, b in zip(shape, base))


@dataclass
class CtmTable:
    """Exhaustive block -> bits mapping up to ``base_shape``.

    ``counts`` holds production counts of observed blocks; every other key in
    ``values`` was completed as ``max observed value of its shape + r``.
    """

    space: RuleSpace
    cutoff: int
    total_halting: int
    base_shape: object
    values: Dict[str, float]
    counts: Dict[str, int]
    r: float = 1.0
    sampling: Optional[Sampling] = None
    completion_max: Dict[Tuple[int, ...], float] = field(default_factory=dict)
    blanks: str = "both"
    _shapes: Optional[frozenset] = field(default=None, init=False, repr=False, compare=False)
    _by_shape: Optional[dict] = field(default=None, init=False, repr=False, compare=False)

    @property
    def k(self) -> int:
        return self.space.k

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def ndim(self) -> int:
        """Dimension of the blocks (1 for strings, 2 for matrices, ...)."""
        return 1 if np.isscalar(self.base_shape) else len(self.base_shape)

    def is_observed(self, key: str) -> bool:
        return key in self.counts

    def shape_values(self, shape) -> Dict[str, float]:
        """All entries of one block shape (cached; tables are not mutated after construction)."""
        if self._by_shape is None:
            groups: Dict[tuple, Dict[str, float]] = {}
            for b, v in self.values.items():
                groups.setdefault(key_shape(b), {})[b] = v
            self._by_shape = groups
        return dict(self._by_shape.get(tuple(shape), {}))

    def max_value(self) -> float:
        return max(self.values.values())

    def min_value(self) -> float:
        return min(self.values.values())

    def shapes(self) -> frozenset:
        """Every block shape with at least one value, complete or not."""
        if self._shapes is None:
            self._shapes = frozenset(key_shape(b) for b in self.values)
        return self._shapes

    def covers(self, shape) -> bool:
        """True when blocks of ``shape`` can be looked up.

        That is every shape up to the base shape, plus shapes that only
        have injected entries (lookups of missing keys then fail).
        """
        shape = tuple(shape)
        return _fits(shape, self.base_shape) or shape in self.shapes()

    def with_values(self, overrides: Dict[str, float]) -> "CtmTable":
        """Copy of the table with some values replaced or added (injected) by hand.

        Injected entries lose their production count, so they serialize
        with ``-`` in the count column.  Keys may lie beyond the base shape;
        their shape class is then partial.
        """
        values = dict(self.values)
        counts = dict(self.counts)
        for key, bits in overrides.items():
            shape = key_shape(key)
            flat = key.split(":", 1)[-1]
            if len(shape) != self.ndim or any(
                    not c.isdigit() or int(c) >= self.k for c in flat):
                raise ConfigurationError(f"block {key!r} does not fit the table alphabet or dimension")
            values[key] = float(bits)
            counts.pop(key, None)
        return CtmTable(self.space, self.cutoff, self.total_halting, self.base_shape,
                        values, counts, self.r, self.sampling, dict(self.completion_max),
                        self.blanks)


def ctm_table(dist: OutputDistribution, base_shape, r: float = 1.0) -> CtmTable:
    """Convert a distribution to bits and complete it over every shape up to ``base_shape``."""
    if r <= 0:
        raise ValueError("completion offset r must be positive")
    if dist.space.dim == 2 and np.isscalar(base_shape):
        base_shape = (int(base_shape), int(base_shape))
    values: Dict[str, float] = {}
    counts: Dict[str, int] = {}
    completion_max = {}
    for shape in shape_classes(dist.space.dim, base_shape):
        observed = {b: n for b, n in dist.counts.items() if key_shape(b) == shape}
        if not observed:
            raise TableError(
                f"no block of shape {'x'.join(map(str, shape))} was produced; "
                "cannot complete that class"
            )
        shape_max = -math.inf
        for b, n in observed.items():
            values[b] = -math.log2(n / dist.total_halting)
            counts[b] = n
            shape_max = max(shape_max, values[b])
        completion_max[shape] = shape_max
        for b in all_blocks(shape, dist.space.k):
            if b not in values:
                values[b] = shape_max + r
    return CtmTable(dist.space, dist.cutoff, dist.total_halting, base_shape,
                    values, counts, float(r), dist.sampling, completion_max, dist.blanks)


def lookup(table: CtmTable, block) -> float:
    key = block_key(block)
    value = table.values.get(key)
    if value is not None:
        return value
    shape = key_shape(key)
    if not table.covers(shape):
        raise ShapeError(
            f"block of shape {'x'.join(map(str, shape))} exceeds table base shape "
            f"{table.base_shape}; decompose it with BDM instead"
        )
    raise TableError(f"table has no value for block {key!r}")


# -- persistence -----------------------------------------------------------

def _header(space, cutoff, total_halting, r, sampling, blanks="both") -> str:
    parts = [f"space={space.t},{space.k},{space.dim}", f"cutoff={cutoff}",
             f"total_halting={total_halting}"]
    if r is not None:
        parts.append(f"completion_r={r!r}")
    if sampling is not None:
        parts.append(f"sample={sampling.size}:{sampling.stride}:{sampling.seed}")
    if blanks != "both":
        parts.append(f"blanks={blanks}")
    return " ".join(parts)


def _format_row(key: str, count: Optional[int], bits: float) -> str:
    return f"{key},{'-' if count is None else count},{bits:.12f}"


def table_text(table: CtmTable) -> str:
    rows = [_format_row(b, table.counts.get(b), table.values[b]) for b in sorted(table.values)]
    body = "".join(row + "\n" for row in rows)
    digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
    head = _header(table.space, table.cutoff, table.total_halting, table.r, table.sampling,
                   table.blanks)
    return f"{TABLE_MAGIC}\n{head}\nsha256={digest}\n{body}"


def save_table(table: CtmTable, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(table_text(table))


def _parse_header(line: str, lineno: int) -> dict:
    fields = {}
    for token in line.split():
        name, sep, value = token.partition("=")
        if not sep:
            raise TableError(f"line {lineno}: malformed header token {token!r}")
        fields[name] = value
    missing = {"space", "cutoff", "total_halting", "completion_r"} - set(fields)
    if missing:
        raise TableError(f"line {lineno}: header missing {', '.join(sorted(missing))}")
    try:
        t, k, dim = (int(x) for x in fields["space"].split(","))
        meta = {
            "space": RuleSpace(t, k, dim),
            "cutoff": int(fields["cutoff"]),
            "total_halting": int(fields["total_halting"]),
            "r": float(fields["completion_r"]),
            "sampling": None,
            "blanks": fields.get("blanks", "both"),
        }
        if meta["blanks"] not in ("both", "zero"):
            raise ValueError(f"unknown blanks value {meta['blanks']!r}")
        if "sample" in fields:
            size, stride, seed = (int(x) for x in fields["sample"].split(":"))
            meta["sampling"] = Sampling(size, stride, seed)
    except ValueError as exc:
        raise TableError(f"line {lineno}: bad header value ({exc})") from None
    return meta


def _infer_base_shape(dim: int, k: int, values: Dict[str, float]):
    per_shape = Counter(key_shape(b) for b in values)
    complete = {s for s, n in per_shape.items() if n == k ** int(np.prod(s))}
    if dim == 1:
        lengths = sorted(s[0] for s in complete)
        return lengths[-1] if lengths else 0
    best = (0, 0)
    for s in complete:
        if s[0] * s[1] > best[0] * best[1] or (s[0] * s[1] == best[0] * best[1] and s > best):
            best = s
    return best


def load_table(path, expect_space: Optional[RuleSpace] = None) -> CtmTable:
    """Parse a table file; nothing is returned unless the whole file validates."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    else:
        raise TableError(f"line {len(lines)}: file truncated (missing final newline)")
    if len(lines) < 3:
        raise TableError(f"line {len(lines) + 1}: file truncated before the checksum line")
    if lines[0] != TABLE_MAGIC:
        raise TableError(f"line 1: unsupported version header {lines[0]!r}, expected {TABLE_MAGIC!r}")
    meta = _parse_header(lines[1], 2)
    space = meta["space"]
    if expect_space is not None and expect_space != space:
        raise TableError(f"line 2: metadata mismatch: table space {space} but {expect_space} expected")
    if not lines[2].startswith("sha256="):
        raise TableError("line 3: missing sha256 checksum")
    body = "".join(line + "\n" for line in lines[3:])
    digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
    if digest != lines[2][len("sha256="):]:
        raise TableError("line 3: checksum failure, table body does not match sha256 header")

    values: Dict[str, float] = {}
    counts: Dict[str, int] = {}
    prev = None
    for lineno, line in enumerate(lines[3:], start=4):
        parts = line.split(",")
        if len(parts) != 3:
            raise TableError(f"line {lineno}: expected 3 comma-separated fields, got {len(parts)}")
        key, count, bits = parts
        if prev is not None and key <= prev:
            raise TableError(f"line {lineno}: rows not in sorted order")
        prev = key
        try:
            shape = key_shape(key)
            symbols = key.split(":", 1)[-1]
            if len(shape) != space.dim or len(symbols) != int(np.prod(shape)) or not symbols:
                raise ValueError("block shape does not match table dimension")
            if any(not c.isdigit() or int(c) >= space.k for c in symbols):
                raise ValueError("symbol outside alphabet")
            values[key] = float(bits)
            if count != "-":
                counts[key] = int(count)
                if counts[key] <= 0:
                    raise ValueError("counts must be positive")
        except ValueError as exc:
            raise TableError(f"line {lineno}: malformed row {line!r} ({exc})") from None
        if len(bits.partition(".")[2]) != 12:
            raise TableError(f"line {lineno}: value must carry 12 fractional digits")
        if key in counts and meta["total_halting"] > 0:
            expected = -math.log2(counts[key] / meta["total_halting"])
            if abs(expected - values[key]) > 1e-9:
                raise TableError(f"line {lineno}: value {bits} inconsistent with count {count}")

    base_shape = _infer_base_shape(space.dim, space.k, values)
    completion_max = {}
    for key in counts:
        shape = key_shape(key)
        completion_max[shape] = max(completion_max.get(shape, -math.inf), values[key])
    return CtmTable(space, meta["cutoff"], meta["total_halting"], base_shape,
                    values, counts, meta["r"], meta["sampling"], completion_max, meta["blanks"])


def save_distribution(dist: OutputDistribution, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dist.to_text())


def build_table(space: RuleSpace, base_shape, cutoff=None, r=1.0, **kwargs) -> CtmTable:
    """Convenience: :func:`build_distribution` followed by :func:`ctm_table`."""
    return ctm_table(build_distribution(space, cutoff, **kwargs), base_shape, r)


def max_exhaustive_shape(dist: OutputDistribution):
    """Largest base shape for which every shape class has at least one observed block."""
    present = {key_shape(b) for b in dist.counts}
    if dist.space.dim == 1:
        n = 0
        while (n + 1,) in present:
            n += 1
        return n
    best = (0, 0)
    for rows in range(1, 32):
        for cols in range(1, 64):
            if all((r, c) in present for r in range(1, rows + 1) for c in range(1, cols + 1)):
                if rows * cols > best[0] * best[1]:
                    best = (rows, cols)
    return best


def bundled_table(name: str) -> CtmTable:
    """Load a table shipped with the package: ``d22``, ``d32``, ``d42s`` or ``d42_2d``."""
    from importlib import resources

    ref = resources.files("ctmbdm").joinpath("data", f"{name}.ctm")
    with resources.as_file(ref) as path:
        return load_table(path)


__all__ = [
    "ConfigurationError", "CtmTable", "OutputDistribution", "Sampling", "ShapeError",
    "TableError", "build_distribution", "build_table", "ctm_table", "load_table", "lookup",
    "bundled_table", "max_exhaustive_shape", "save_distribution", "save_table", "table_text",
]
