"""Constructions and generators: the factor-free blow-up family, the
small-cover triangle instance, random degree-constrained instances, and
the collapse reduction with tiling lifts."""

from fractions import Fraction

import pytest

from ckblowup.core import (
    PreconditionError,
    VertexRef,
    degree,
    degree_profile,
    validate_tiling,
)
from ckblowup.exact import is_cover, max_tiling
from ckblowup.generators import (
    CollapseMap,
    collapse,
    collapse_with_least_matching,
    complete_blowup,
    cover_example,
    haggkvist_example,
    random_min_degree,
    reduce_small_deltas,
)
from ckblowup.matching import max_matching


@pytest.mark.parametrize("k,m", [(3, 1), (3, 2), (4, 1)])
def test_tight_example_degree_profile(k, m):
    G, blocks = haggkvist_example(k, m)
    n = 2 * k * m
    assert G.n == n
    prof = degree_profile(G)
    assert prof.delta_star == (k + 1) * m - 1
    # the short Z_k block depresses the two pairs touching V_k by one;
    # every other pair sits exactly at (k+1)m
    for i in range(1, k + 1):
        want = (k + 1) * m - (1 if i >= k - 1 else 0)
        assert prof.deltas[i - 1] == want


@pytest.mark.parametrize("k,m", [(3, 1), (3, 2), (4, 1)])
def test_tight_example_blocks_partition_parts(k, m):
    G, blocks = haggkvist_example(k, m)
    n = G.n
    for i in range(1, k + 1):
        ids = sorted(
            blocks[f"U_{i}"] + blocks[f"W_{i}"] + blocks[f"Z_{i}"]
        )
        assert ids == list(range(n))
    assert len(blocks[f"Z_{k}"]) == 2 * m - 1
    for i in range(1, k):
        assert len(blocks[f"Z_{i}"]) == 2 * m


@pytest.mark.parametrize("k,m", [(3, 1), (3, 2), (4, 1)])
def test_tight_example_z_union_is_cover(k, m):
    G, blocks = haggkvist_example(k, m)
    Z = {i: blocks[f"Z_{i}"] for i in range(1, k + 1)}
    assert is_cover(G, Z)
    assert sum(len(v) for v in Z.values()) == 2 * k * m - 1


def test_tight_example_has_no_factor_small():
    G, _ = haggkvist_example(3, 1)
    res = max_tiling(G)
    assert res.optimal
    assert res.size == G.n - 1


def test_tight_example_rejects_bad_args():
    with pytest.raises(PreconditionError):
        haggkvist_example(2, 1)
    with pytest.raises(PreconditionError):
        haggkvist_example(3, 0)


def test_cover_example_exact_structure():
    ex = cover_example(7, 9)
    assert ex.n == 36
    assert ex.gamma == Fraction(7, 9)
    assert ex.beta == Fraction(4, 3) - Fraction(7, 9)
    G = ex.graph
    # exact bipartite minimum degrees of the three pairs
    prof = degree_profile(G)
    assert prof.deltas[0] == 27  # pair (A, B): gamma*n - eps*n
    assert prof.deltas[2] == 20  # pair (C, A): beta*n
    assert prof.deltas[1] == 18  # pair (B, C): n/2
    # hub cover size (1 - 3*eps)n + ... = 33 here
    assert sum(len(v) for v in ex.cover.values()) == 33


def test_cover_example_blocks_partition():
    ex = cover_example(7, 9)
    for part, prefix in ((1, "A"), (2, "B"), (3, "C")):
        ids = []
        for i in range(4):
            ids.extend(ex.blocks[f"{prefix}_{i}"])
        assert sorted(ids) == list(range(ex.n))


def test_cover_example_rejects_out_of_range_gamma():
    with pytest.raises(PreconditionError):
        cover_example(3, 4)  # gamma = 3/4 excluded
    with pytest.raises(PreconditionError):
        cover_example(4, 5)  # above 7/9


def test_random_min_degree_meets_bounds():
    deltas = [4, 5, 3]
    G = random_min_degree(3, 8, deltas, seed=11)
    prof = degree_profile(G)
    for want, got in zip(deltas, prof.deltas):
        assert got >= want


def test_random_min_degree_reproducible():
    a = random_min_degree(4, 6, [3, 3, 3, 3], seed=42)
    b = random_min_degree(4, 6, [3, 3, 3, 3], seed=42)
    c = random_min_degree(4, 6, [3, 3, 3, 3], seed=43)
    assert a == b
    assert a != c


def test_random_min_degree_validates_args():
    with pytest.raises(PreconditionError):
        random_min_degree(3, 6, [3, 3], seed=0)
    with pytest.raises(PreconditionError):
        random_min_degree(3, 6, [3, 3, 7], seed=0)


def test_collapse_lifts_cycles_back():
    G = complete_blowup(4, 4)
    reduced, cmap = collapse(G, 2, max_matching(G, 2))
    assert reduced.k == 3 and reduced.n == 4
    res = max_tiling(reduced)
    assert res.size == 4
    lifted = cmap.lift_tiling(res.cycles)
    assert validate_tiling(G, lifted) is None
    assert len(lifted) == 4
    for c in lifted:
        assert len(c) == 4


def test_collapse_rejects_non_matching():
    G = complete_blowup(4, 3)
    with pytest.raises(PreconditionError):
        collapse(G, 1, {0: 0, 1: 1})  # not a bijection
    with pytest.raises(PreconditionError):
        collapse(complete_blowup(3, 3), 1, {0: 0, 1: 1, 2: 2})  # k too small


def test_collapse_respects_graph_edges():
    # remove one matching edge so the identity matching is invalid
    G0 = complete_blowup(4, 3)
    mats = [G0.pair_matrix(i).copy() for i in range(1, 5)]
    mats[0][1, 1] = False
    from ckblowup.core import BlowupGraph

    G = BlowupGraph(4, 3, mats)
    with pytest.raises(PreconditionError):
        collapse(G, 1, {0: 0, 1: 1, 2: 2})
    # the deterministic collapse routes around the missing edge
    reduced, cmap = collapse_with_least_matching(G, 1)
    assert reduced.k == 3


def test_reduce_small_deltas_collapses_weak_pairs():
    # k=5; make pair 2 weak by thinning it, keep the rest complete
    G0 = complete_blowup(5, 6)
    mats = [G0.pair_matrix(i).copy() for i in range(1, 6)]
    mats[1][:, :] = False
    for u in range(6):
        for w in range(u, u + 3):
            mats[1][u, w % 6] = True
    from ckblowup.core import BlowupGraph

    G = BlowupGraph(5, 6, mats)
    res = reduce_small_deltas(G, Fraction(1, 5))
    assert res.collapsed_parts == [2]
    assert res.graph.k == 4
    tiling = max_tiling(res.graph).cycles
    lifted = res.lift_tiling(tiling)
    assert validate_tiling(G, lifted) is None


def test_reduce_small_deltas_requires_three_parts_left():
    G, _ = haggkvist_example(3, 1)
    # every pair of the tight example is below (1+eps)n/2 for large eps
    with pytest.raises(PreconditionError):
        reduce_small_deltas(G, Fraction(9, 10))
