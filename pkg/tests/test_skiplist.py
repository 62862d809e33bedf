import math

import pytest
from hypothesis import given, strategies as st

from aasl.skiplist import MAX_INDEX, Hop, hop_level, max_level, path_elements, traversal_path
from reference import brute_force_path


@pytest.mark.parametrize("i, expected", [(8, 3), (9, 0), (12, 2), (1, 0), (2**63, 63)])
def test_max_level(i, expected):
    assert max_level(i) == expected


def test_max_level_rejects_zero_and_bad_input():
    with pytest.raises(ValueError):
        max_level(0)
    with pytest.raises(ValueError):
        max_level(-3)
    with pytest.raises(ValueError):
        max_level(MAX_INDEX + 1)
    with pytest.raises(TypeError):
        max_level(2.0)


@pytest.mark.parametrize("i, n, expected", [(3, 7, 0), (4, 7, 1), (0, 9, 3), (0, 1, 0), (8, 16, 3), (0, 2**63, 63)])
def test_hop_level(i, n, expected):
    assert hop_level(i, n) == expected


@pytest.mark.parametrize("i, n", [(5, 5), (7, 3)])
def test_hop_level_requires_source_before_destination(i, n):
    with pytest.raises(ValueError):
        hop_level(i, n)


def test_traversal_examples():
    assert path_elements(3, 7) == [3, 4, 6, 7]
    assert traversal_path(0, 9) == [Hop(0, 3, 8), Hop(8, 0, 9)]
    assert traversal_path(5, 5) == []
    with pytest.raises(ValueError):
        traversal_path(6, 5)


def test_greedy_path_matches_brute_force():
    for n in range(1, 129):
        for i in range(n):
            assert path_elements(i, n) == brute_force_path(i, n), (i, n)


def _check_hops(i, n):
    hops = traversal_path(i, n)
    prev = i
    for hop in hops:
        assert hop.source == prev
        assert hop.destination == hop.source + 2**hop.level
        assert hop.source % 2**hop.level == 0
        assert hop.destination % 2**hop.level == 0
        prev = hop.destination
    assert prev == n
    assert len(hops) <= 2 * math.ceil(math.log2(n)) + 1
    return hops


@given(st.integers(1, 2**16).flatmap(lambda n: st.tuples(st.integers(1, n - 1) if n > 1 else st.just(0), st.just(n))))
def test_hop_divisibility_random(pair):
    i, n = pair
    _check_hops(i, n)


@given(st.integers(0, MAX_INDEX - 1).flatmap(lambda i: st.tuples(st.just(i), st.integers(i + 1, MAX_INDEX))))
def test_hops_never_overflow_index_range(pair):
    i, n = pair
    hops = _check_hops(i, n) if n > 1 else traversal_path(i, n)
    assert all(h.level <= 63 for h in hops)


def _parallel_paths(bound):
    """First part of the shared-element lemma, with the witness it names.

    For a path A through i that reaches j or beyond, its last element at or
    before j must lie on every path from some i' <= i to j.
    """
    elems = {(a, b): path_elements(a, b) for b in range(bound + 1) for a in range(b + 1)}
    sets = {k: set(v) for k, v in elems.items()}
    # first_miss[j][w]: smallest i' whose path to j avoids w
    first_miss = {}
    for j in range(1, bound + 1):
        for w in range(j + 1):
            first_miss[j, w] = next((a for a in range(j + 1) if w not in sets[a, j]), j + 1)
    for (s, m), path in elems.items():
        for pos, i in enumerate(path):
            if i == 0:
                continue
            for j in range(i + 1, m + 1):
                witness = max(e for e in path[pos:] if e <= j)
                assert i <= witness <= j
                # every path starting at or before i and ending at j contains it
                assert first_miss[j, witness] > i, (s, m, i, j, witness)


def test_parallel_paths_exhaustive_64():
    _parallel_paths(64)


@pytest.mark.slow
def test_parallel_paths_exhaustive_128():
    _parallel_paths(128)
