"""Desk-scale versions of the comparative experiments.

* rank correlation between BDM configurations and reference measures over
  a whole set of strings (:func:`correlation_sweep`)
* per-object measure reports (:func:`measure_report`)
* exact graph spectra, cospectrality and line graphs, and the
  graph/line-graph BDM comparison (:func:`graph_pair_report`)

Reports are plain comma-delimited text with six fractional digits so that
two runs over the same inputs can be compared byte for byte.
"""
from __future__ import annotations

import io
import itertools
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .bdm import BdmConfig, as_array, bdm, normalized_bdm
from .ctm import CtmTable, ShapeError, lookup
from .entropy import best_block_entropy, block_entropy, entropy


# -- rank correlation ------------------------------------------------------

def average_ranks(xs: Sequence[float]) -> List[float]:
    """1-based ranks; tied values share the mean of the ranks they span."""
    order = sorted(range(len(xs)), key=lambda i: xs[i])
    ranks = [0.0] * len(xs)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and xs[order[j + 1]] == xs[order[i]]:
            j += 1
        mean = (i + j) / 2 + 1
        for pos in range(i, j + 1):
            ranks[order[pos]] = mean
        i = j + 1
    return ranks


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Spearman's rho: Pearson correlation of average ranks."""
    if len(xs) != len(ys):
        raise ValueError(f"length mismatch: {len(xs)} vs {len(ys)}")
    if len(xs) < 3:
        raise ValueError("need at least 3 paired values")
    rx, ry = average_ranks(list(xs)), average_ranks(list(ys))
    mx, my = math.fsum(rx) / len(rx), math.fsum(ry) / len(ry)
    dx = [r - mx for r in rx]
    dy = [r - my for r in ry]
    sxx = math.fsum(d * d for d in dx)
    syy = math.fsum(d * d for d in dy)
    if sxx == 0 or syy == 0:
        raise ValueError("constant input: ranks are undefined")
    rho = math.fsum(a * b for a, b in zip(dx, dy)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, rho))


def _p_note(rho: float, n: int) -> str:
    # t statistic of the rank correlation; p-values are left to the reader
    if abs(rho) >= 1.0:
        return f"n={n} exact"
    t = rho * math.sqrt((n - 2) / (1 - rho * rho))
    return f"n={n} t={t:.3f}"


# -- correlation sweep -----------------------------------------------------

def parse_sweep_config(label: str) -> Tuple[int, int]:
    """``"b11o10"`` -> ``(11, 10)``: block size and overlap length."""
    body = label.strip().lower()
    if not body.startswith("b") or "o" not in body:
        raise ValueError(f"sweep config must look like b<block>o<overlap>, got {label!r}")
    block, overlap = body[1:].split("o", 1)
    return int(block), int(overlap)


def sweep_config(block: int, overlap: int) -> BdmConfig:
    """BDM config for block size ``block`` whose windows share ``overlap`` symbols."""
    if not 0 <= overlap < block:
        raise ValueError(f"overlap must be in 0..{block - 1}, got {overlap}")
    return BdmConfig(block, block - overlap)


def all_strings(length: int, k: int = 2) -> List[str]:
    return ["".join(map(str, digits)) for digits in itertools.product(range(k), repeat=length)]


@dataclass(frozen=True)
class SweepRow:
    name: str
    reference: str
    rho: Optional[float]
    note: str


@dataclass
class SweepReport:
    rows: List[SweepRow] = field(default_factory=list)

    def rho(self, name: str, reference: Optional[str] = None) -> Optional[float]:
        for row in self.rows:
            if row.name == name and (reference is None or row.reference == reference):
                return row.rho
        raise KeyError(name)

    def to_text(self) -> str:
        out = io.StringIO()
        out.write("measure,reference,rho,note\n")
        for row in self.rows:
            rho = "" if row.rho is None else f"{row.rho:.6f}"
            out.write(f"{row.name},{row.reference},{rho},{row.note}\n")
        return out.getvalue()


def _reference_values(strings, table, reference):
    if reference == "ctm":
        return [lookup(table, s) for s in strings]
    if reference == "entropy":
        return [entropy(s) for s in strings]
    raise ValueError(f"unknown reference {reference!r}")


def correlation_sweep(strings: Sequence[str], table: CtmTable, configs: Iterable,
                      reference: str = "ctm", both_symbols: bool = False,
                      baselines: bool = True) -> SweepReport:
    """Spearman rho of each BDM configuration against a reference measure.

    Parameters
    ----------
    strings : equal-length strings, e.g. :func:`all_strings`
    configs : ``(block, overlap)`` pairs or labels like ``"b11o10"``
    reference : ``"ctm"`` (table value of the whole string) or ``"entropy"`` (H1)
    both_symbols : keep only strings that use more than one symbol
    baselines : append rows for H1, H2 and best block entropy

    A configuration that cannot be evaluated is reported with an empty rho
    and the reason in the note column; so is every row when the reference
    itself cannot be computed.
    """
    strings = list(strings)
    if len({len(s) for s in strings}) > 1:
        raise ValueError("all strings in a sweep must have the same length")
    if both_symbols:
        strings = [s for s in strings if len(set(s)) > 1]
    length = len(strings[0]) if strings else 0
    try:
        ref = _reference_values(strings, table, reference)
        ref_error = None
    except ShapeError:
        ref, ref_error = None, f"reference unavailable: length-{length} strings exceed table base shape"

    report = SweepReport()

    def add(name, values_fn):
        if ref_error:
            report.rows.append(SweepRow(name, reference, None, ref_error))
            return
        try:
            values = values_fn()
            rho = spearman(values, ref)
        except (ShapeError, ValueError) as exc:
            report.rows.append(SweepRow(name, reference, None, f"skipped: {exc}"))
            return
        report.rows.append(SweepRow(name, reference, rho, _p_note(rho, len(ref))))

    for item in configs:
        block, overlap = parse_sweep_config(item) if isinstance(item, str) else item
        name = f"b{block}o{overlap}"
        if block > length:
            report.rows.append(SweepRow(name, reference, None, "skipped: block longer than strings"))
            continue
        cfg = sweep_config(block, overlap)
        add(name, lambda cfg=cfg: [bdm(s, table, cfg).value for s in strings])
    if baselines:
        if reference != "entropy":
            add("H1", lambda: [entropy(s) for s in strings])
        if length >= 2:
            add("H2", lambda: [block_entropy(s, 2) for s in strings])
            add("best_H", lambda: [best_block_entropy(s)[1] for s in strings])
    return report


def default_sweep_configs(length: int) -> List[Tuple[int, int]]:
    """Every (block, overlap) with block up to ``length`` and overlap below block."""
    return [(b, o) for b in range(1, length + 1) for o in range(b)]


# -- graphs ----------------------------------------------------------------

@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices ``0 .. n-1``."""

    n: int
    edges: frozenset

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("a graph needs at least one vertex")
        clean = set()
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u}, {v}) outside 0..{self.n - 1}")
            clean.add((min(u, v), max(u, v)))
        object.__setattr__(self, "edges", frozenset(clean))

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        return cls(n, frozenset(map(tuple, edges)))

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.int8)
        for u, v in self.edges:
            a[u, v] = a[v, u] = 1
        return a

    def relabel(self, perm: Sequence[int]) -> "Graph":
        return Graph(self.n, frozenset((perm[u], perm[v]) for u, v in self.edges))

    def to_text(self) -> str:
        lines = [f"{self.n} {len(self.edges)}"] + [f"{u} {v}" for u, v in sorted(self.edges)]
        return "\n".join(lines) + "\n"


def parse_graph(text: str) -> Graph:
    lines = [line.split() for line in text.splitlines() if line.strip()]
    if not lines or len(lines[0]) != 2:
        raise ValueError("line 1: expected 'n m'")
    n, m = int(lines[0][0]), int(lines[0][1])
    if len(lines) - 1 != m:
        raise ValueError(f"expected {m} edge lines, found {len(lines) - 1}")
    edges = []
    for lineno, parts in enumerate(lines[1:], start=2):
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'u v'")
        u, v = int(parts[0]), int(parts[1])
        if not u < v:
            raise ValueError(f"line {lineno}: vertex ids must satisfy u < v")
        edges.append((u, v))
    if len(set(edges)) != len(edges):
        raise ValueError("duplicate edge")
    return Graph.from_edges(n, edges)


def read_graph(path) -> Graph:
    return parse_graph(Path(path).read_text(encoding="utf-8"))


def write_graph(graph: Graph, path) -> None:
    Path(path).write_text(graph.to_text(), encoding="utf-8")


def char_poly(g: Graph) -> List[int]:
    """Coefficients of ``det(xI - A)``, highest degree first, in exact integers.

    Faddeev-LeVerrier recursion over Python integers; every division by
    ``j`` below is exact for an integer matrix.
    """
    n = g.n
    a = [[int(x) for x in row] for row in g.adjacency()]
    coeffs = [1]
    m = [[0] * n for _ in range(n)]
    for j in range(1, n + 1):
        c_prev = coeffs[-1]
        # M_j = A @ M_{j-1} + c_{j-1} I
        am = [[sum(a[r][i] * m[i][c] for i in range(n) if a[r][i]) for c in range(n)] for r in range(n)]
        for i in range(n):
            am[i][i] += c_prev
        m = am
        trace = sum(sum(a[i][l] * m[l][i] for l in range(n) if a[i][l]) for i in range(n))
        q, rem = divmod(-trace, j)
        assert rem == 0
        coeffs.append(q)
    return coeffs


def format_poly(coeffs: Sequence[int], var: str = "x") -> str:
    n = len(coeffs) - 1
    terms = []
    for i, c in enumerate(coeffs):
        if c == 0:
            continue
        p = n - i
        mono = "" if p == 0 else (var if p == 1 else f"{var}^{p}")
        mag = abs(c)
        body = f"{mag}{mono}" if (mag != 1 or not mono) else mono
        sign = "-" if c < 0 else "+"
        terms.append((sign, body))
    if not terms:
        return "0"
    first_sign, first = terms[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, body in terms[1:]:
        out += f" {sign} {body}"
    return out


def is_cospectral(g1: Graph, g2: Graph) -> bool:
    return char_poly(g1) == char_poly(g2)


def line_graph(g: Graph) -> Graph:
    """Vertices are the edges of ``g`` (sorted); adjacent when they share an endpoint."""
    edges = sorted(g.edges)
    if not edges:
        raise ValueError("line graph of an edgeless graph is empty")
    out = []
    for i, j in itertools.combinations(range(len(edges)), 2):
        if set(edges[i]) & set(edges[j]):
            out.append((i, j))
    return Graph.from_edges(len(edges), out)


def random_geometric_graph(n: int, rng: np.random.Generator, neighbours: int = 2) -> Graph:
    """Connected sparse graph: points in the unit square, each joined to its nearest neighbours,
    plus a nearest-point spanning tree so no component is left out."""
    pts = rng.random((n, 2))
    dist = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
    edges = set()
    for u in range(n):
        for v in np.argsort(dist[u])[1:neighbours + 1]:
            edges.add((min(u, int(v)), max(u, int(v))))
    # Prim's tree on the same distances
    in_tree = {0}
    while len(in_tree) < n:
        best = None
        for u in in_tree:
            for v in range(n):
                if v not in in_tree and (best is None or dist[u, v] < best[0]):
                    best = (dist[u, v], u, v)
        _, u, v = best
        edges.add((min(u, v), max(u, v)))
        in_tree.add(v)
    return Graph.from_edges(n, edges)


def generate_graph_corpus(count: int = 32, seed: int = 2017, sizes=(8, 16)) -> List[Graph]:
    rng = np.random.default_rng(seed)
    return [random_geometric_graph(int(rng.integers(sizes[0], sizes[1] + 1)), rng)
            for _ in range(count)]


def shipped_graph(name: str) -> Graph:
    """Load one of the graph files bundled with the package (``data/graphs``)."""
    ref = resources.files("ctmbdm").joinpath("data", "graphs", f"{name}.graph")
    return parse_graph(ref.read_text(encoding="utf-8"))


def shipped_corpus() -> List[Graph]:
    folder = resources.files("ctmbdm").joinpath("data", "graphs")
    names = sorted(p.name for p in folder.iterdir() if p.name.startswith("corpus_"))
    return [parse_graph(folder.joinpath(name).read_text(encoding="utf-8")) for name in names]


def shipped_strings() -> List[str]:
    ref = resources.files("ctmbdm").joinpath("data", "low_complexity_strings.txt")
    return ref.read_text(encoding="utf-8").split()


# -- reports ---------------------------------------------------------------

def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{x:.6f}"


def _row_values(obj, table, configs, nbdm_block):
    arr = as_array(obj)
    flat = "".join(str(int(v)) for v in arr.ravel())
    values = [entropy(flat)]
    if len(flat) >= 2:
        l_best, h_best = best_block_entropy(flat)
        values += [h_best, l_best]
    else:
        values += [None, None]
    values += [bdm(arr, table, cfg).value for cfg in configs]
    values.append(None if nbdm_block is None else normalized_bdm(arr, table, nbdm_block))
    return values


def measure_report(objects: Sequence, table: CtmTable, configs: Sequence[BdmConfig],
                   ids: Optional[Sequence[str]] = None, nbdm_block: Optional[int] = None) -> str:
    """One CSV row per object: H1, best block entropy (and its size), BDM per config, NBDM.

    Matrices are flattened row by row for the entropy columns.  A row whose
    computation fails keeps its id and carries the error in ``note``.
    """
    ids = [str(i) for i in range(len(objects))] if ids is None else list(ids)
    header = ["id", "H1", "best_H", "best_l"] + [f"bdm_{c.label()}" for c in configs]
    header += ["nbdm", "note"]
    out = io.StringIO()
    out.write(",".join(header) + "\n")
    for oid, obj in zip(ids, objects):
        try:
            values = _row_values(obj, table, configs, nbdm_block)
            note = ""
        except (ValueError, ShapeError) as exc:
            values = [None] * (len(header) - 2)
            note = "error: " + str(exc).replace(",", ";")
        out.write(",".join([oid] + [_fmt(v) for v in values] + [note]) + "\n")
    return out.getvalue()


@dataclass
class GraphPairReport:
    rows: List[Tuple[int, int, int, float, float]]
    rho: Optional[float]
    config: BdmConfig

    def to_text(self) -> str:
        out = io.StringIO()
        out.write(f"# config={self.config.label()} rho={_fmt(self.rho)}\n")
        out.write("pair,n,line_n,bdm_graph,bdm_line\n")
        for i, n, ln, a, b in self.rows:
            out.write(f"{i},{n},{ln},{a:.6f},{b:.6f}\n")
        return out.getvalue()


def graph_pair_report(graphs: Sequence[Graph], table: CtmTable, config: BdmConfig,
                      partners: Optional[Sequence[Graph]] = None) -> GraphPairReport:
    """BDM of each graph's adjacency matrix next to that of its partner.

    The partner defaults to the line graph; externally built pairs (for
    example planar duals) can be passed in ``partners``.
    """
    partners = [line_graph(g) for g in graphs] if partners is None else list(partners)
    if len(partners) != len(graphs):
        raise ValueError("graphs and partners must pair up one to one")
    rows = []
    for i, (g, h) in enumerate(zip(graphs, partners)):
        rows.append((i, g.n, h.n, bdm(g.adjacency(), table, config).value,
                     bdm(h.adjacency(), table, config).value))
    rho = spearman([r[3] for r in rows], [r[4] for r in rows]) if len(rows) >= 3 else None
    return GraphPairReport(rows, rho, config)
