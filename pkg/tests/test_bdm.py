import itertools
import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ctmbdm.bdm import (
    BdmConfig, DecompositionError, boundary_error_bound, bdm, cyclic_embed, decompose,
    max_bdm, max_complexity_object, mi_bdm, mibdm_term, min_bdm, normalized_bdm, occupancy,
    recursive_partition, smooth_bdm,
)
from ctmbdm.blocks import all_blocks, block_key
from ctmbdm.ctm import CtmTable, ShapeError, lookup
from ctmbdm.entropy import entropy
from ctmbdm.turing import ConfigurationError, RuleSpace

WORKED = "010101010101010101"


@pytest.fixture(scope="module")
def worked_table(d22):
    return d22.with_values({"010101010101": 26.99073, "101010101010": 26.99073})


def brute_bdm_1d(s, table, l, m):
    """Independent oracle: slice, count, sum."""
    counts = Counter(s[i:i + l] for i in range(0, len(s) - l + 1, m))
    return math.fsum([table.values[b] for b in counts] + [math.log2(n) for n in counts.values()])


def brute_bdm_2d(x, table, d):
    counts = Counter()
    for i in range(0, x.shape[0] - d + 1, d):
        for j in range(0, x.shape[1] - d + 1, d):
            counts[block_key(x[i:i + d, j:j + d])] += 1
    return math.fsum([table.values[b] for b in counts] + [math.log2(n) for n in counts.values()])


# -- decomposition -------------------------------------------------------------

def test_worked_decomposition():
    ms = decompose(WORKED, BdmConfig(12, 1))
    assert dict(ms.entries) == {"010101010101": 4, "101010101010": 3}
    assert ms.n_blocks == 7


def test_worked_value(worked_table):
    res = bdm(WORKED, worked_table, BdmConfig(12, 1))
    assert res.value == pytest.approx(57.566, abs=1e-3)
    assert res.value == math.log2(3) + math.log2(4) + 2 * 26.99073


def test_exact_partition_has_no_leftover():
    ms = decompose("0" * 24, BdmConfig(12, 12))
    assert ms.n_blocks == 2 and ms.leftover.ignored_cells == 0


def test_matrix_partition():
    ms = decompose(np.zeros((8, 8), int), BdmConfig(4))
    assert ms.n_blocks == 4 and ms.entries[0][0] == "4x4:" + "0" * 16


def test_object_below_block_size():
    with pytest.raises(DecompositionError, match="object below block size"):
        decompose("0101", BdmConfig(5))


def test_offset_bounds():
    with pytest.raises(ValueError):
        BdmConfig(4, 5)
    with pytest.raises(ValueError):
        BdmConfig(4, 0)
    assert not BdmConfig(4).overlapping and BdmConfig(4, 4).offset == 4


# -- plain BDM ---------------------------------------------------------------

def test_single_base_block(d42s):
    for b in ("01101001", "00000000", "11010010"):
        assert bdm(b, d42s, BdmConfig(8)).value == lookup(d42s, b)


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8])
def test_repetition(d42s, n):
    b = "0110"
    assert bdm(b * n, d42s, BdmConfig(4)).value == math.fsum([lookup(d42s, b), math.log2(n)])


@settings(max_examples=200, deadline=None)
@given(st.text("01", min_size=8, max_size=40), st.integers(1, 8), st.data())
def test_matches_bruteforce_1d(s, l, data):
    from ctmbdm.ctm import bundled_table
    table = bundled_table("d42s")
    m = data.draw(st.integers(1, l))
    res = bdm(s, table, BdmConfig(l, m))
    assert res.value == brute_bdm_1d(s, table, l, m)
    assert res.recompute() == res.value


def test_matches_bruteforce_2d(d2d, rng):
    for _ in range(30):
        x = rng.integers(0, 2, (int(rng.integers(4, 11)), int(rng.integers(4, 11))))
        for d in (2, 3, 4):
            assert bdm(x, d2d, BdmConfig(d)).value == brute_bdm_2d(x, d2d, d)


def test_value_at_least_table_minimum(d2d, rng):
    for _ in range(20):
        x = rng.integers(0, 2, (7, 9))
        assert bdm(x, d2d, BdmConfig(3)).value >= d2d.min_value()


def test_alphabet_mismatch(d42s, d2d):
    with pytest.raises(ConfigurationError):
        bdm("0120", d42s, BdmConfig(2))
    with pytest.raises(ConfigurationError):
        bdm(np.zeros((4, 4), int), d42s, BdmConfig(2))
    with pytest.raises(ConfigurationError):
        bdm("0101", d2d, BdmConfig(2))


def test_block_exceeds_base(d42s):
    with pytest.raises(ShapeError, match="block exceeds table base shape"):
        bdm("0" * 20, d42s, BdmConfig(9))


# -- recursive partition -------------------------------------------------------

def coverage(x, pieces):
    cov = np.zeros(np.shape(x), dtype=int)
    for origin, sub in pieces:
        cov[tuple(slice(o, o + n) for o, n in zip(origin, sub.shape))] += 1
    return cov


def test_recursive_exact_fit():
    pieces = recursive_partition(np.ones((4, 4), int), 4)
    assert len(pieces) == 1 and pieces[0][1].shape == (4, 4)


def test_recursive_5x5_ul():
    x = np.arange(25).reshape(5, 5) % 2
    pieces = recursive_partition(x, 4, ("UL",))
    shapes = Counter(sub.shape for _, sub in pieces)
    # 4x4 corner; the 4x1 and 1x4 strips end up as 1x1 blocks, plus the 1x1 corner
    assert shapes == Counter({(4, 4): 1, (1, 1): 9})
    assert (coverage(x, pieces) == 1).all()
    for origin, sub in pieces:
        assert (x[tuple(slice(o, o + n) for o, n in zip(origin, sub.shape))] == sub).all()


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 12), st.integers(1, 12), st.integers(1, 5),
       st.lists(st.sampled_from(["UL", "UR", "LL", "LR"]), min_size=1, max_size=5))
def test_recursive_covers_once_and_count_is_quadrant_free(rows, cols, d, quadrants):
    x = np.zeros((rows, cols), int)
    pieces = recursive_partition(x, d, quadrants)
    assert (coverage(x, pieces) == 1).all()
    reference = recursive_partition(x, d, ("UL",))
    assert len(pieces) == len(reference)
    assert Counter(s.shape for _, s in pieces) == Counter(s.shape for _, s in reference)


def test_recursive_strings():
    pieces = recursive_partition("0110100", 3, ("R",))
    assert [block_key(b) for _, b in pieces] == ["110", "100", "0"]


def test_recursive_bdm_uses_smaller_blocks(d2d):
    x = np.ones((5, 5), int)
    res = bdm(x, d2d, BdmConfig(4, boundary="recursive"))
    assert dict(res.multiset.entries) == {"4x4:" + "1" * 16: 1, "1x1:1": 9}


def test_dr_alias():
    x = np.arange(30).reshape(5, 6) % 3 % 2
    a = recursive_partition(x, 4, ("DR",))
    b = recursive_partition(x, 4, ("LR",))
    assert [(o, s.tolist()) for o, s in a] == [(o, s.tolist()) for o, s in b]


# -- cyclic -------------------------------------------------------------------

def test_cyclic_constant():
    ms = cyclic_embed(np.zeros((6, 6), int), 4)
    assert ms.entries == (("4x4:" + "0" * 16, 36),)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 8), st.integers(2, 8), st.integers(1, 2), st.integers(0, 2**32 - 1))
def test_cyclic_count_and_coverage(rows, cols, d, seed):
    x = np.random.default_rng(seed).integers(0, 2, (rows, cols))
    ms = cyclic_embed(x, d)
    assert ms.n_blocks == rows * cols
    assert (ms.coverage() == d * d).all()


def test_cyclic_overestimates(d2d, rng):
    for _ in range(50):
        x = rng.integers(0, 2, (6, 6))
        assert bdm(x, d2d, BdmConfig(4, 1, "cyclic")).value >= bdm(x, d2d, BdmConfig(4)).value


# -- border extension ----------------------------------------------------------

def test_add_border_correction(d2d):
    x = np.zeros((5, 6), int)
    res = bdm(x, d2d, BdmConfig(4, boundary="addborder"))
    assert res.multiset.leftover.padded_shape == (8, 8)
    assert res.correction == math.log2(3) + math.log2(2)
    assert res.value == math.fsum([lookup(d2d, "4x4:" + "0" * 16), 2.0]) - res.correction


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 10), st.integers(1, 10), st.sampled_from(["trim", "addborder", "recursive"]),
       st.integers(0, 2**32 - 1))
def test_decomposition_audit(rows, cols, boundary, seed):
    x = np.random.default_rng(seed).integers(0, 2, (rows, cols))
    d = 3
    if boundary == "trim" and min(rows, cols) < d:
        return
    ms = decompose(x, BdmConfig(d, boundary=boundary))
    cov = ms.coverage()
    if boundary == "trim":
        assert ((cov == 1) | (cov == 0)).all()
        assert int((cov == 0).sum()) == ms.leftover.ignored_cells
    else:
        assert (cov == 1).all()
    if boundary == "addborder":
        padded = ms.leftover.padded_shape
        assert ms.leftover.added_cells == padded[0] * padded[1] - rows * cols
        assert ms.n_blocks * d * d == padded[0] * padded[1]


# -- smooth and mutual information variants -----------------------------------------

def test_smooth_with_unit_weights_is_plain(d2d, rng):
    for _ in range(10):
        x = rng.integers(0, 2, (8, 8))
        assert smooth_bdm(x, d2d, BdmConfig(4), weights=lambda key: 1.0).value == \
            bdm(x, d2d, BdmConfig(4)).value


def test_smooth_zero_border_branch(d2d):
    z = np.zeros((5, 5), int)
    branches = [smooth_bdm(z, d2d, BdmConfig(4, fill=f)).value for f in (0, 1)]
    assert branches[0] <= branches[1]
    assert smooth_bdm(z, d2d, BdmConfig(4)).value == min(branches)


def test_smooth_not_above_plain(d2d, rng):
    for _ in range(20):
        x = rng.integers(0, 2, (8, 8))
        s = smooth_bdm(x, d2d, BdmConfig(4))
        assert s.correction == 0
        assert s.value <= bdm(x, d2d, BdmConfig(4)).value


def test_smooth_weights_in_unit_interval(d2d):
    from ctmbdm.bdm import frequency_weights
    w = frequency_weights(d2d)
    values = [w(b) for b in all_blocks((3, 3), 2)]
    assert all(0 < v <= 1 for v in values) and max(values) == 1.0


def test_mi_identical_blocks_is_plain(d2d):
    x = np.tile(np.array([[0, 1], [1, 1]]), (4, 4))
    assert mi_bdm(x, d2d, BdmConfig(2)).value == bdm(x, d2d, BdmConfig(2)).value


def test_mi_term_algebra():
    assert mibdm_term(5.0, 9.0, 0.0, 0.0) == 5.0
    assert mibdm_term(9.0, 5.0, 0.0, 0.0) == 5.0
    assert mibdm_term(5.0, 9.0, 1.0, 1.0) == 5.0
    assert mibdm_term(5.0, 9.0, 0.5, 0.5) == 7.0


def test_mi_independent_pair(d2d):
    # the two distinct blocks are constant vs non-constant: normalized MI is 0
    a = np.zeros((2, 2), int)
    b = np.array([[0, 1], [1, 0]])
    x = np.hstack([a, b])
    res = mi_bdm(x, d2d, BdmConfig(2))
    lo = min(lookup(d2d, a), lookup(d2d, b))
    assert res.terms == {block_key(a): lo, block_key(b): lo}
    assert res.value == 2 * lo


def test_mi_not_above_plain_for_two_blocks(d2d, rng):
    for _ in range(20):
        x = rng.integers(0, 2, (8, 8))
        assert mi_bdm(x, d2d, BdmConfig(4)).value <= bdm(x, d2d, BdmConfig(4)).value + 1e-9


# -- normalized BDM -----------------------------------------------------------

def test_nbdm_zero_matrix_d4(d2d):
    # premise of the example: the all-0 4x4 block is the cheapest of its shape
    zero = "4x4:" + "0" * 16
    table = d2d.with_values({zero: min(d2d.shape_values((4, 4)).values()) - 1.0})
    assert normalized_bdm(np.zeros((8, 8), int), table, 4) == 0.0


@pytest.mark.parametrize("n", [4, 6, 8, 9, 12, 16])
def test_nbdm_extremes_d2(d2d, n):
    assert normalized_bdm(np.zeros((n, n), int), d2d, 2) == 0.0
    assert normalized_bdm(max_complexity_object(n, 2, d2d), d2d, 2) == 1.0


def test_nbdm_random_strictly_inside(d2d, rng):
    for _ in range(20):
        v = normalized_bdm(rng.integers(0, 2, (8, 8)), d2d, 2)
        assert 0 < v < 1


def test_occupancy_conditions(d2d):
    for n, d in [(8, 2), (12, 3), (16, 4), (9, 2)]:
        occ = occupancy(n, d, d2d)
        counts = [c for _, c in occ]
        assert sum(counts) == (n // d) ** 2
        full = d2d.shape_values((d, d))
        given = dict(occ)
        allc = [given.get(b, 0) for b in full]
        assert max(allc) <= 1 + min(allc)
        # a more complex block never occurs less often than a simpler one
        by_value = {}
        for b, v in full.items():
            by_value.setdefault(v, []).append(given.get(b, 0))
        levels = [by_value[v] for v in sorted(by_value, reverse=True)]
        for higher, lower in zip(levels, levels[1:]):
            assert min(higher) >= max(lower)


def test_min_bdm_forms(d2d):
    cheapest = min(d2d.shape_values((4, 4)).values())
    assert min_bdm(12, 4, d2d, "printed") == 3 + cheapest
    assert min_bdm(12, 4, d2d) == math.fsum([cheapest, math.log2(9)])
    assert max_bdm(8, 4, d2d) > min_bdm(8, 4, d2d)


def test_degenerate_table():
    values = {b: 3.0 for b in all_blocks((2, 2), 2)}
    values.update({b: 1.0 for b in all_blocks((1, 1), 2)})
    values.update({b: 2.0 for b in list(all_blocks((1, 2), 2)) + list(all_blocks((2, 1), 2))})
    flat = CtmTable(RuleSpace(2, 2, 2), 10, 1, (2, 2), values, {})
    with pytest.raises(ValueError, match="no complexity spread"):
        normalized_bdm(np.zeros((2, 2), int), flat, 2)


# -- error bounds -------------------------------------------------------------

def test_error_bounds(d2d):
    assert boundary_error_bound((8, 8), 4, "trim") == 0.0
    assert boundary_error_bound((10, 10), 4, "trim") == pytest.approx(0.00454, abs=1e-5)
    assert boundary_error_bound((6, 6), 4, "cyclic", max_value=30.0) == 90.0
    assert boundary_error_bound((6, 6), 4, "recursive", max_value=30.0) == 270.0
    assert boundary_error_bound((5, 6), 4, "addborder") == math.log2(3) + math.log2(2)
    assert boundary_error_bound((6, 6), 2, "cyclic", d2d) == d2d.max_value()
    with pytest.raises(ValueError):
        boundary_error_bound((6, 6), 4, "spiral")


# -- invariants ---------------------------------------------------------------

def test_permutation_invariance_string(d42s):
    blocks = ["01101001", "00000000", "11100010"]
    values = {bdm("".join(p), d42s, BdmConfig(8)).value for p in itertools.permutations(blocks)}
    assert len(values) == 1


def test_permutation_invariance_matrix(d2d, rng):
    tiles = [rng.integers(0, 2, (4, 4)) for _ in range(3)] + [np.zeros((4, 4), int)]
    values = set()
    for p in itertools.permutations(range(4)):
        x = np.block([[tiles[p[0]], tiles[p[1]]], [tiles[p[2]], tiles[p[3]]]])
        values.add(bdm(x, d2d, BdmConfig(4)).value)
    assert len(values) == 1


def test_entropy_bound(d2d, rng):
    for _ in range(100):
        x = rng.integers(0, 2, (8, 8))
        res = bdm(x, d2d, BdmConfig(2))
        ms = res.multiset
        assert res.value - math.fsum(res.terms.values()) == pytest.approx(
            math.fsum(math.log2(n) for _, n in ms.entries), abs=1e-9)
        h = entropy({k: n / ms.n_blocks for k, n in ms.entries})
        c = len(ms.entries) * d2d.max_value()
        assert abs(res.value - h) <= c * math.log2(ms.n_blocks) + c


def test_not_below_largest_block(d2d, rng):
    for _ in range(30):
        x = rng.integers(0, 2, (8, 8))
        res = bdm(x, d2d, BdmConfig(4))
        assert res.value >= max(res.terms.values())


def test_merging_identical_blocks(d42s):
    b = "01101001"
    merged = bdm(b + b, d42s, BdmConfig(8)).value
    separate = 2 * lookup(d42s, b)
    assert merged == math.fsum([separate - lookup(d42s, b), math.log2(2)])


def test_repetition_grows_logarithmically(d42s):
    b = "01101001"
    values = [bdm(b * 2**j, d42s, BdmConfig(8)).value for j in range(6)]
    steps = np.diff(values)
    assert np.allclose(steps, 1.0)


def test_tensor_trim():
    values = {}
    for shape in itertools.product((1, 2), repeat=3):
        for i, b in enumerate(all_blocks(shape, 2)):
            values[b] = 2.0 + i / 1000
    table = CtmTable(RuleSpace(2, 2, 2), 10, 1, (2, 2, 2), values, {})
    x = np.zeros((4, 4, 5), int)
    res = bdm(x, table, BdmConfig(2))
    assert res.multiset.n_blocks == 8 and res.value == 2.0 + 3.0
    assert res.multiset.leftover.ignored_cells == 16
