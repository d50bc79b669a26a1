import random
from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ubcode.finite_field import GF
from ubcode.linalg import FieldTooSmallError, Matrix, column_weights, rank, hstack
from ubcode.code_model import (
    InvalidParamsError,
    bounds,
    feasible,
    redundancy,
    update_bandwidth,
    update_complexity,
    verify_mds,
)
from ubcode.construct import (
    DivisibilityError,
    RowWiseMdsBase,
    TooManyErasuresError,
    build_mrmub,
    build_mub,
    default_field,
    fig1b,
    fig3,
    systematic_mds_generator,
)

from conftest import random_fill


def symbol_index(m_vec, node, sym):
    return sum(m_vec[:node]) + sym


def cell_terms(code, j, r):
    """Cell (row r of column j) as the set of (node, symbol) data terms."""
    row = code.column_maps()[j].data[r]
    m_vec = code.m
    terms = set()
    for c, v in enumerate(row):
        if v:
            node = 0
            while c >= sum(m_vec[: node + 1]):
                node += 1
            terms.add((node, c - sum(m_vec[:node]), v))
    return terms


def grid_of(code):
    return [
        [cell_terms(code, j, r) for r in range(code.col_lens[j])]
        for j in range(code.n)
    ]


def T(*pairs):
    """Terms helper: T((1,1), (2,2)) = {x_{2,2}, x_{3,3}} in 1-based naming."""
    return {(i, l, 1) for i, l in pairs}


# -- fig1b: the balanced binary (4,2) worked example ---------------------------------


def test_fig1b_reproduces_published_grid(fig1b_code):
    grid = grid_of(fig1b_code)
    # transcribed cell-by-cell; indices 0-based (node, symbol)
    expect = [
        [T((0, 0)), T((0, 1)), T((3, 0), (2, 1)), T((1, 0), (1, 1), (2, 1))],
        [T((1, 0)), T((1, 1)), T((0, 0), (3, 1)), T((2, 0), (2, 1), (3, 1))],
        [T((2, 0)), T((2, 1)), T((1, 0), (0, 1)), T((3, 0), (3, 1), (0, 1))],
        [T((3, 0)), T((3, 1)), T((2, 0), (1, 1)), T((0, 0), (0, 1), (1, 1))],
    ]
    for j in range(4):
        assert grid[j] == expect[j], f"column {j}"


def test_fig1b_intermediate_table(fig1b_code):
    # Row i of the published intermediates table, cyclic destinations.
    f = fig1b_code.field
    basis = []
    for i in range(4):
        for x in ([1, 0], [0, 1]):
            basis.append((i, x))
    # p[0->1]=x11, p[0->2]=x12, p[0->3]=x11+x12 and cyclic shifts:
    for i in range(4):
        outs = fig1b_code.intermediates(i, [1, 0])
        assert outs == [(((i + 1) % 4), [1]), (((i + 2) % 4), [0]), (((i + 3) % 4), [1])]
        outs = fig1b_code.intermediates(i, [0, 1])
        assert outs == [(((i + 1) % 4), [0]), (((i + 2) % 4), [1]), (((i + 3) % 4), [1])]


def test_fig1b_metrics(fig1b_code):
    grid, average = update_bandwidth(fig1b_code.code)
    assert average == Fraction(3)
    assert all(grid[i][j] == 1 for i in range(4) for j in range(4) if i != j)
    assert redundancy(fig1b_code.code) == 8
    assert update_complexity(fig1b_code.code) == Fraction(5, 2)
    assert verify_mds(fig1b_code).is_mds


def test_fig1b_decode_matches_published_walkthrough(fig1b_code, rng):
    # Erase nodes 0 and 1, rebuild, compare bitwise.
    for _ in range(20):
        data = random_fill(fig1b_code, rng)
        cols = fig1b_code.encode(data)
        known = {2: cols[2], 3: cols[3]}
        assert fig1b_code.decode_columns(known) == cols


# -- fig3: the irregular binary (4,2,[4,2,2,0]) worked example -------------------------


def test_fig3_reproduces_published_grid(fig3_code):
    grid = grid_of(fig3_code)
    expect = [
        [T((0, 0)), T((0, 1)), T((0, 2)), T((0, 3)),
         T((1, 0), (1, 1)), T((2, 1))],
        [T((1, 0)), T((1, 1)), T((0, 0)), T((0, 1)), T((2, 0), (2, 1))],
        [T((2, 0)), T((2, 1)), T((0, 2)), T((0, 3)), T((1, 0))],
        [T((0, 0), (0, 2), (2, 0)), T((0, 1), (0, 3), (2, 0)), T((1, 1), (2, 0))],
    ]
    for j in range(4):
        assert grid[j] == expect[j], f"column {j}"


def test_fig3_intermediates_table(fig3_code):
    # Node 0 ships column-major row pairs; node 3 ships nothing.
    outs = fig3_code.intermediates(0, [1, 0, 0, 0])
    assert outs == [(1, [1, 0]), (2, [0, 0]), (3, [1, 0])]
    outs = fig3_code.intermediates(0, [0, 0, 1, 0])
    assert outs == [(1, [0, 0]), (2, [1, 0]), (3, [1, 0])]
    outs = fig3_code.intermediates(3, [])
    assert outs == [(0, []), (1, []), (2, [])]
    # single symbols of nodes 1 and 2 follow the parity-check pattern
    assert fig3_code.intermediates(1, [1, 0]) == [(2, [1]), (3, [0]), (0, [1])]
    assert fig3_code.intermediates(2, [0, 1]) == [(3, [0]), (0, [1]), (1, [1])]


def test_fig3_unit_vector_parity_placement(fig3_code):
    # Exciting only the second symbol of node 1 must touch exactly the first
    # parity row of node 0 and the last parity row of node 3.
    data = [[0, 0, 0, 0], [0, 1], [0, 0], []]
    cols = fig3_code.encode(data)
    assert cols[0][4:] == [1, 0]
    assert cols[1][2:] == [0, 0, 0]
    assert cols[2][2:] == [0, 0, 0]
    assert cols[3] == [0, 0, 1]


def test_fig3_metrics(fig3_code):
    grid, average = update_bandwidth(fig3_code.code)
    assert average == Fraction(3)
    assert redundancy(fig3_code.code) == 11
    rep = bounds(4, 2, [4, 2, 2, 0])
    assert average == rep.min_update_bandwidth
    assert redundancy(fig3_code.code) == rep.min_redundancy_at_min_bandwidth
    assert verify_mds(fig3_code).is_mds


def test_fig3_decode_erase_first_two(fig3_code, rng):
    for _ in range(20):
        data = random_fill(fig3_code, rng)
        cols = fig3_code.encode(data)
        assert fig3_code.decode_columns({2: cols[2], 3: cols[3]}) == cols


# -- row-wise MDS base ------------------------------------------------------------------


def test_parity_check_base_matches_worked_example(gf2):
    base = RowWiseMdsBase(gf2, 3, 2, 1, generator=[[1, 0, 1], [0, 1, 1]])
    enc = base.encode([1, 0])
    assert enc.data == [[1, 0, 1]]
    enc = base.encode([0, 1])
    assert enc.data == [[0, 1, 1]]


def test_two_row_base_column_major_split(gf2):
    base = RowWiseMdsBase(gf2, 3, 2, 2, generator=[[1, 0, 1], [0, 1, 1]])
    enc = base.encode([1, 0, 1, 0])
    # rows pair (x1, x3) and (x2, x4)
    assert enc.data == [[1, 1, 0], [0, 0, 0]]


def test_base_decode_from_any_k_columns(rng):
    f = GF(8)
    base = RowWiseMdsBase(f, 5, 3, 2)
    for _ in range(50):
        x = [rng.randrange(8) for _ in range(6)]
        enc = base.encode(x)
        for keep in combinations(range(5), 3):
            known = {d: enc.col(d) for d in keep}
            assert base.decode(known) == x


def test_systematic_generator_shape_and_property():
    f = GF(8)
    g = systematic_mds_generator(f, 3, 7)
    assert g.take_cols(range(3)) == Matrix.identity(f, 3)
    for sel in combinations(range(7), 3):
        assert rank(g.take_cols(sel)) == 3


def test_base_rejects_bad_generator(gf2):
    with pytest.raises(InvalidParamsError):
        RowWiseMdsBase(gf2, 3, 2, 1, generator=[[1, 0, 1], [0, 0, 1]])


# -- builders: parameters and optimality ---------------------------------------------------


def test_build_mrmub_rejects_indivisible():
    with pytest.raises(DivisibilityError):
        build_mrmub(4, 2, 3)
    with pytest.raises(DivisibilityError):
        build_mub(4, 2, [2, 3, 2, 0])


def test_build_rejects_too_small_field():
    with pytest.raises(FieldTooSmallError):
        build_mrmub(6, 2, 4, field=GF(4))  # assembly needs (n-1)m/k = 10 columns


def test_default_field_policy():
    assert default_field(4, 2, [2, 2, 2, 2]).q == 4
    assert default_field(4, 2, [4, 2, 2, 0]).q == 8  # needs 3*4/2 + 1 = 7
    assert default_field(9, 8, [8] * 9).q == 16


def test_build_mrmub_k1_replicates():
    built = build_mrmub(4, 1, 2)
    grid, average = update_bandwidth(built.code)
    assert all(grid[i][j] == 2 for i in range(4) for j in range(4) if i != j)
    assert built.p == (6, 6, 6, 6)
    data = [[1, 2], [3, 4], [5, 6], [7, 8]]
    data = [[v % built.field.q for v in row] for row in data]
    cols = built.encode(data)
    # every other node's data is recoverable from any single survivor
    assert verify_mds(built).is_mds


def test_built_codes_meet_bounds(mrmub_codes, mub_codes):
    for n, k, m, built in mrmub_codes:
        rep = bounds(n, k, [m] * n)
        grid, average = update_bandwidth(built.code)
        assert average == rep.min_update_bandwidth
        assert redundancy(built.code) == rep.min_redundancy
        assert redundancy(built.code) == rep.min_redundancy_at_min_bandwidth
        assert feasible(n, k, [m] * n, built.p, grid).feasible
    for n, k, m, built in mub_codes:
        rep = bounds(n, k, m)
        grid, average = update_bandwidth(built.code)
        assert average == rep.min_update_bandwidth
        assert redundancy(built.code) == rep.min_redundancy_at_min_bandwidth
        assert built.p == rep.bandwidth_profile
        assert feasible(n, k, m, built.p, grid).feasible


def test_built_codes_are_mds(mrmub_codes, mub_codes):
    for _, _, _, built in mrmub_codes + mub_codes:
        rep = verify_mds(built)
        assert rep.is_mds, rep
        assert rep.insufficient_subset is not None


def test_pipeline_encode_equals_direct_encode(mrmub_codes, mub_codes, fig1b_code, fig3_code):
    rng = random.Random(101)
    built_list = [fig1b_code, fig3_code] + [b for *_, b in mrmub_codes + mub_codes]
    trials = 1000
    for t in range(trials):
        built = built_list[t % len(built_list)]
        data = random_fill(built, rng)
        assert built.encode(data) == built.code.encode(data)


def test_decode_every_erasure_pattern(mrmub_codes, mub_codes, fig1b_code, fig3_code):
    rng = random.Random(55)
    built_list = [(4, 2, fig1b_code), (4, 2, fig3_code)]
    built_list += [(n, k, b) for n, k, _, b in mrmub_codes + mub_codes]
    for n, k, built in built_list:
        patterns = []
        for size in range(0, n - k + 1):
            patterns.extend(combinations(range(n), size))
        fills = [random_fill(built, rng) for _ in range(20)]
        for data in fills:
            cols = built.encode(data)
            for erased in patterns:
                known = {j: cols[j] for j in range(n) if j not in erased}
                assert built.decode_columns(known) == cols, (n, k, erased)


def test_decode_rejects_too_many_erasures(fig1b_code, rng):
    data = random_fill(fig1b_code, rng)
    cols = fig1b_code.encode(data)
    with pytest.raises(TooManyErasuresError):
        fig1b_code.decode_columns({0: cols[0]})


def test_receiver_blocks_have_full_rank(mrmub_codes, mub_codes):
    # Any n-k erased senders leave every survivor a solvable assembly system.
    for n, k, _, built in mrmub_codes + mub_codes:
        f = built.field
        for erased in combinations(range(n), n - k):
            for j in range(n):
                if j in erased:
                    continue
                blocks = [built.code.B[e][j] for e in erased]
                stacked = hstack(f, blocks)
                assert rank(stacked) == stacked.cols
                if built.kind == "mrmub":
                    assert stacked.rows == stacked.cols  # square and invertible


def test_symbol_spread_at_least_n_minus_k(mrmub_codes):
    # Every data symbol must reach n-k foreign parities (holds for all k).
    for n, k, m, built in mrmub_codes:
        code = built.code
        for i in range(n):
            for sym in range(m):
                touched = sum(
                    1
                    for j in range(n)
                    if j != i and any(
                        code.construction[i][j].data[r][sym]
                        for r in range(code.construction[i][j].rows)
                    )
                )
                assert touched >= n - k


def test_column_weight_consequences(mrmub_codes):
    # Heavy-column and complexity bounds; sound for k <= n-2 (two or more
    # simultaneously erased blocks force distinct receiver columns).
    for n, k, m, built in mrmub_codes:
        if k > n - 2:
            continue
        code = built.code
        heavy_total = 0
        for j in range(n):
            heavy_j = 0
            for i in range(n):
                if i == j:
                    continue
                heavy_j += sum(
                    1 for w in column_weights(code.construction[i][j]) if w >= 2
                )
            assert heavy_j >= (k - 1) * m // k
            heavy_total += heavy_j
        assert heavy_total >= (k - 1) * m * n // k
        assert update_complexity(code) >= Fraction(n - k) + Fraction(k - 1, k)


def test_threshold_n_minus_1_complexity_counterexample():
    # With a single tolerated erasure the receiver blocks are 1-column wide,
    # so nothing forces heavy columns: the balanced builds sit at the
    # definitional optimum (one parity touched per symbol), strictly below
    # the k <= n-2 closed-form bound.
    for n in (3, 4, 5):
        k = n - 1
        built = build_mrmub(n, k, k)
        rep = bounds(n, k, [k] * n)
        assert redundancy(built.code) == rep.min_redundancy
        assert update_bandwidth(built.code)[1] == rep.min_update_bandwidth
        assert verify_mds(built).is_mds
        assert update_complexity(built.code) == Fraction(n - k)
        assert update_complexity(built.code) < Fraction(n - k) + Fraction(k - 1, k)


def test_build_mub_uniform_matches_mrmub_parameters():
    a = build_mrmub(5, 2, 2)
    b = build_mub(5, 2, [2] * 5)
    assert a.p == b.p
    assert update_bandwidth(a.code)[1] == update_bandwidth(b.code)[1]


def test_build_mub_small_balanced_redundancy():
    built = build_mub(4, 2, [2, 2, 2, 0])
    assert built.p == (2, 2, 2, 2)
    assert redundancy(built.code) == 8
    assert bounds(4, 2, [2, 2, 2, 0]).min_redundancy_at_min_bandwidth == 8


def test_build_mrmub_matches_bounds_example():
    built = build_mrmub(5, 3, 3)
    assert redundancy(built.code) == 10
    rep = bounds(5, 3, [3] * 5)
    assert redundancy(built.code) == rep.min_redundancy
    assert update_bandwidth(built.code)[1] == rep.min_update_bandwidth


@settings(max_examples=120, deadline=None)
@given(payload=st.data())
def test_any_two_columns_recover_random_data(fig1b_code, payload):
    bits = payload.draw(st.lists(st.integers(0, 1), min_size=8, max_size=8))
    keep = payload.draw(st.sets(st.sampled_from(range(4)), min_size=2, max_size=2))
    fill = [bits[0:2], bits[2:4], bits[4:6], bits[6:8]]
    cols = fig1b_code.encode(fill)
    known = {j: cols[j] for j in keep}
    assert fig1b_code.decode_columns(known) == cols
