"""Small Turing machines in the Busy Beaver formalism.

A machine with ``t`` states and ``k`` symbols has one rule per
(state, read-symbol) cell.  Each rule writes a symbol, moves the head and
either enters a state in ``1..t`` or halts.  Machines are addressed by a
canonical mixed-radix index so that a whole rule space can be cut into
disjoint index ranges.

Rule ordering inside one cell is lexicographic on (write, move, next) with
moves ordered ``L, R`` (plus ``U, D`` on a 2D grid) and ``HALT`` after every
proper state.  The cell for (state 1, symbol 0) is the most significant
digit of the index.

Output convention: the result of a halting run is the content of the
smallest contiguous region (bounding box on a grid) containing every cell
the head *read*.  The cell the head lands on after the halting transition is
not read and is not part of the output.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

HALT = 0

MOVES_1D = ("L", "R")
MOVES_2D = ("L", "R", "U", "D")

# (drow, dcol); 1D machines only use the column component
_DELTAS = {"L": (0, -1), "R": (0, 1), "U": (-1, 0), "D": (1, 0)}

# Busy Beaver step bounds S(t) for 2-symbol machines on a 1D tape
BUSY_BEAVER_STEPS = {(2, 2): 6, (3, 2): 21, (4, 2): 107}


class ConfigurationError(ValueError):
    """Raised when a computation cannot be configured from its inputs."""


@dataclass(frozen=True)
class RuleSpace:
    t: int
    k: int
    dim: int = 1

    def __post_init__(self):
        if self.t < 1:
            raise ValueError(f"t must be >= 1, got {self.t}")
        if not 2 <= self.k <= 10:
            raise ValueError(f"k must be in 2..10 (one digit per symbol), got {self.k}")
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")

    @property
    def moves(self) -> Tuple[str, ...]:
        return MOVES_1D if self.dim == 1 else MOVES_2D

    @property
    def rules_per_cell(self) -> int:
        return self.k * len(self.moves) * (self.t + 1)

    @property
    def n_cells(self) -> int:
        return self.t * self.k

    @property
    def total(self) -> int:
        """Number of machines in the full space."""
        return self.rules_per_cell ** self.n_cells

    def __str__(self):
        suffix = "" if self.dim == 1 else "_2D"
        return f"({self.t},{self.k}){suffix}"


Rule = Tuple[int, str, int]


@dataclass(frozen=True)
class TuringMachine:
    """Transition table of a machine.

    ``rules[(state, symbol)] = (write, move, next_state)`` with states
    numbered from 1 and ``next_state == HALT`` (0) for halting rules.
    """

    space: RuleSpace
    rules: Tuple[Tuple[Tuple[int, int], Rule], ...]

    @classmethod
    def from_rules(cls, space: RuleSpace, rules: dict) -> "TuringMachine":
        expected = {(q, s) for q in range(1, space.t + 1) for s in range(space.k)}
        if set(rules) != expected:
            raise ValueError("rules must cover every (state, symbol) cell exactly")
        for (q, s), (w, mv, nxt) in rules.items():
            if not 0 <= w < space.k:
                raise ValueError(f"write symbol {w} outside alphabet")
            if mv not in space.moves:
                raise ValueError(f"move {mv!r} not allowed in {space.dim}D")
            if not 0 <= nxt <= space.t:
                raise ValueError(f"next state {nxt} outside 0..{space.t}")
        return cls(space, tuple(sorted(rules.items())))

    @property
    def table(self) -> dict:
        return dict(self.rules)

    def complement(self) -> "TuringMachine":
        """Relabel every symbol s as k-1-s, in both read and write positions."""
        k = self.space.k
        return TuringMachine.from_rules(
            self.space,
            {(q, k - 1 - s): (k - 1 - w, mv, nxt) for (q, s), (w, mv, nxt) in self.rules},
        )

    def mirror(self) -> "TuringMachine":
        """Swap L and R in every rule."""
        swap = {"L": "R", "R": "L", "U": "U", "D": "D"}
        return TuringMachine.from_rules(
            self.space,
            {cell: (w, swap[mv], nxt) for cell, (w, mv, nxt) in self.rules},
        )


@dataclass(frozen=True)
class SimulationResult:
    halted: bool
    steps: int
    # 1D: str of symbol digits; 2D: tuple of row strings; empty when not halted
    output: object = ""


def _encode_rule(space: RuleSpace, rule: Rule) -> int:
    w, mv, nxt = rule
    nxt_digit = space.t if nxt == HALT else nxt - 1
    return (w * len(space.moves) + space.moves.index(mv)) * (space.t + 1) + nxt_digit


def _decode_rule(space: RuleSpace, digit: int) -> Rule:
    rest, nxt_digit = divmod(digit, space.t + 1)
    w, mv_idx = divmod(rest, len(space.moves))
    nxt = HALT if nxt_digit == space.t else nxt_digit + 1
    return (w, space.moves[mv_idx], nxt)


def _cells(space: RuleSpace):
    return [(q, s) for q in range(1, space.t + 1) for s in range(space.k)]


def machine_from_index(space: RuleSpace, idx: int) -> TuringMachine:
    total = space.total
    if not 0 <= idx < total:
        raise IndexError(f"machine index {idx} out of range for {space}: total count is {total}")
    radix = space.rules_per_cell
    digits = []
    for _ in range(space.n_cells):
        idx, d = divmod(idx, radix)
        digits.append(d)
    digits.reverse()
    rules = {cell: _decode_rule(space, d) for cell, d in zip(_cells(space), digits)}
    return TuringMachine.from_rules(space, rules)


def index_of(machine: TuringMachine) -> int:
    space = machine.space
    table = machine.table
    idx = 0
    for cell in _cells(space):
        idx = idx * space.rules_per_cell + _encode_rule(space, table[cell])
    return idx


def halting_cutoff(space: RuleSpace, override: Optional[int] = None) -> int:
    """Step bound after which a run is treated as non-halting."""
    if override is not None:
        if override < 1:
            raise ConfigurationError(f"cutoff must be positive, got {override}")
        return int(override)
    if space.dim == 1 and (space.t, space.k) in BUSY_BEAVER_STEPS:
        return BUSY_BEAVER_STEPS[(space.t, space.k)]
    raise ConfigurationError(
        f"cutoff required: no known Busy Beaver step bound for {space}"
    )


def run(machine: TuringMachine, cutoff: int, blank: int = 0) -> SimulationResult:
    """Run ``machine`` from state 1 on a blank tape for at most ``cutoff`` steps.

    Every cell initially holds ``blank`` (0 unless told otherwise).

    Reference implementation: plain dictionaries, no array tricks.  The
    enumeration kernel in :mod:`ctmbdm._kernel` is checked against it.
    """
    if cutoff < 1:
        raise ValueError("cutoff must be >= 1")
    if not 0 <= blank < machine.space.k:
        raise ValueError(f"blank symbol {blank} outside alphabet")
    table = machine.table
    tape = {}
    row = col = 0
    rmin = rmax = cmin = cmax = 0
    state = 1
    for step in range(1, cutoff + 1):
        rmin, rmax = min(rmin, row), max(rmax, row)
        cmin, cmax = min(cmin, col), max(cmax, col)
        sym = tape.get((row, col), blank)
        w, mv, nxt = table[(state, sym)]
        tape[(row, col)] = w
        dr, dc = _DELTAS[mv]
        row += dr
        col += dc
        if nxt == HALT:
            return SimulationResult(True, step, _region(tape, machine.space.dim, rmin, rmax, cmin, cmax, blank))
        state = nxt
    return SimulationResult(False, cutoff, "")


def _region(tape, dim, rmin, rmax, cmin, cmax, blank=0):
    rows = [
        "".join(str(tape.get((r, c), blank)) for c in range(cmin, cmax + 1))
        for r in range(rmin, rmax + 1)
    ]
    return rows[0] if dim == 1 else tuple(rows)


def output_as_array(output) -> np.ndarray:
    """Convert a :class:`SimulationResult` output to an integer array."""
    if isinstance(output, str):
        return np.array([int(c) for c in output], dtype=np.int8)
    return np.array([[int(c) for c in row] for row in output], dtype=np.int8)
