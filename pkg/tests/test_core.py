import pytest
from fractions import Fraction

from hypothesis import given, settings, strategies as st

from polydis.core import (
    CrossingChords,
    Dissection,
    DuplicateChord,
    OutOfRange,
    NotOuterEdge,
    OracleLimitExceeded,
    count_occurrences,
    dual_tree,
    enumerate_dissections,
    faces,
    glue,
    load_patterns,
    make_dissection,
    make_pattern,
    occurrence_vector,
    occurrence_vector_census,
    pattern_from_name,
    _subtree_profile,
)

C3 = pattern_from_name("C3")
C4 = pattern_from_name("C4")
C5 = pattern_from_name("C5")


def all_dissections(n):
    return list(enumerate_dissections(n))


def test_make_dissection_valid():
    t = make_dissection(3, [])
    assert t.n == 3 and t.chords == ()
    fan = make_dissection(5, [(1, 3), (1, 4)])
    assert fan.chords == ((1, 3), (1, 4))


def test_make_dissection_errors():
    with pytest.raises(CrossingChords) as e:
        make_dissection(5, [(1, 3), (2, 4)])
    assert e.value.pair == ((1, 3), (2, 4))
    with pytest.raises(DuplicateChord):
        make_dissection(5, [(1, 3), (3, 1)])
    with pytest.raises(OutOfRange):
        make_dissection(5, [(1, 5)])  # that's a polygon side
    with pytest.raises(OutOfRange):
        make_dissection(5, [(2, 3)])
    with pytest.raises(OutOfRange):
        make_dissection(4, [(1, 7)])


def test_faces_triangle():
    t = make_dissection(3, [])
    assert [f.vertices for f in faces(t)] == [(2, 3, 1)]


def test_faces_fan():
    fan = make_dissection(5, [(1, 3), (1, 4)])
    fs = {frozenset(f.vertices) for f in faces(fan)}
    assert fs == {frozenset({1, 2, 3}), frozenset({1, 3, 4}), frozenset({1, 4, 5})}
    dt = dual_tree(fan)
    assert len(dt) == 2  # path


def test_faces_star_dual():
    d = make_dissection(6, [(1, 3), (3, 5), (1, 5)])
    fs = faces(d)
    assert len(fs) == 4
    # the central face {1,3,5} is adjacent to the other three
    deg = {}
    for i, j, _ in dual_tree(d):
        deg[i] = deg.get(i, 0) + 1
        deg[j] = deg.get(j, 0) + 1
    center = [i for i, f in enumerate(fs) if set(f.vertices) == {1, 3, 5}]
    assert len(center) == 1 and deg[center[0]] == 3


def test_face_count_invariant():
    for n in range(3, 9):
        for d in enumerate_dissections(n):
            assert len(faces(d)) == len(d.chords) + 1
            assert len(dual_tree(d)) == len(d.chords)


SUPER_CATALAN = [1, 1, 3, 11, 45, 197, 903, 4279, 20793, 103049, 518859]


def closed_form_counts(nmax):
    """Series of z/4 + z^2/4 - (z/4) sqrt(z^2 - 6z + 1), exact rationals."""
    # sqrt via the recurrence s^2 = 1 - 6z + z^2, s0 = 1
    s = [Fraction(1)] + [Fraction(0)] * nmax
    for n in range(1, nmax + 1):
        rhs = Fraction(-6 if n == 1 else 0) + (1 if n == 2 else 0)
        acc = sum(s[i] * s[n - i] for i in range(1, n))
        s[n] = (rhs - acc) / 2
    d = [Fraction(0)] * (nmax + 1)
    for n in range(2, nmax + 1):
        d[n] = (Fraction(1, 4) if n == 2 else 0) - Fraction(1, 4) * s[n - 1]
        if n == 1:
            d[n] += Fraction(1, 4)
    return [int(d[n]) for n in range(nmax + 1)]


def test_enumeration_counts_match_closed_form():
    cf = closed_form_counts(12)
    for n in range(2, 13):
        if n <= 9:
            assert len(all_dissections(n)) == cf[n] == SUPER_CATALAN[n - 2]
    for n in range(2, 13):
        assert cf[n] == SUPER_CATALAN[n - 2]


def test_enumeration_small():
    assert len(all_dissections(2)) == 1
    assert len(all_dissections(4)) == 3
    assert len(all_dissections(5)) == 11
    # deterministic order, no duplicates
    seen = all_dissections(6)
    assert len(set(seen)) == len(seen) == 45
    assert seen == all_dissections(6)


def test_glue_two_triangles():
    t = make_dissection(3, [])
    g = glue(t, (2, 3), t)
    assert g.n == 4 and len(g.chords) == 1
    assert g.chords[0] in {(1, 3), (2, 4)}


def test_glue_triangle_square():
    t = make_dissection(3, [])
    s = make_dissection(4, [])
    g = glue(t, (3, 1), s)
    assert g.n == 5 and len(g.chords) == 1
    assert sorted(f.size for f in faces(g)) == [3, 4]


def test_glue_errors():
    edge = make_dissection(2, [])
    t = make_dissection(3, [])
    with pytest.raises(NotOuterEdge):
        glue(edge, (2, 3), t)
    from polydis.core import RootEdgeGlue

    with pytest.raises(RootEdgeGlue):
        glue(t, (1, 2), t)


def test_glue_face_count_property():
    t = make_dissection(3, [])
    for host in list(enumerate_dissections(5))[:8]:
        for e in host.sides():
            g = glue(host, e, t)
            assert len(faces(g)) == len(faces(host)) + 1


def test_count_occurrences_examples():
    t = make_dissection(3, [])
    assert count_occurrences(t, C3) == 1
    d = make_dissection(4, [(1, 3)])
    assert count_occurrences(d, C4) == 1
    assert count_occurrences(d, C3) == 2
    fan = make_dissection(5, [(1, 3), (1, 4)])
    assert count_occurrences(fan, C5) == 1
    assert count_occurrences(fan, C4) == 2
    assert count_occurrences(fan, C3) == 3


def test_count_occurrences_with_chords():
    pI = pattern_from_name("patternI")
    d = make_dissection(4, [(1, 3)])
    assert count_occurrences(d, pI) == 1
    fan = make_dissection(5, [(1, 3), (1, 4)])
    # adjacent triangle pairs: (123,134) and (134,145)
    assert count_occurrences(fan, pI) == 2
    pII = pattern_from_name("patternII")
    assert count_occurrences(fan, pII) == 2
    assert count_occurrences(make_dissection(5, [(1, 3)]), pII) == 1


def test_occurrence_dihedral_invariance():
    # counting is invariant under relabelling by the dissection's symmetries:
    # rotating/reflecting the hexagon chord set must not change counts
    base = make_dissection(6, [(1, 3), (3, 5)])
    rotated = make_dissection(6, [(3, 5), (1, 5)])
    reflected = make_dissection(6, [(2, 6), (4, 6)])
    for p in (C3, C4, C5, pattern_from_name("C6"), pattern_from_name("patternI")):
        c = count_occurrences(base, p)
        assert count_occurrences(rotated, p) == c
        assert count_occurrences(reflected, p) == c


def test_cycle_counts_equal_subtree_profile():
    for d in enumerate_dissections(7):
        prof = _subtree_profile(d, 5)
        for k in (3, 4, 5, 6, 7):
            assert count_occurrences(d, pattern_from_name(f"C{k}")) == prof[k - 2]


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=3, max_value=8), st.randoms())
def test_random_dissection_counts_consistent(n, rng):
    ds = all_dissections(n)
    d = ds[rng.randrange(len(ds))]
    vec = occurrence_vector(d, [C3, C4])
    assert vec == (count_occurrences(d, C3), count_occurrences(d, C4))


def test_census_examples():
    c = occurrence_vector_census([C3], 3)
    assert c == {(1,): 1}
    c5 = occurrence_vector_census([C3], 5)
    assert sum(c5.values()) == 11
    assert c5[(0,)] == 1
    c6 = occurrence_vector_census([C4], 6)
    assert sum(c6.values()) == 45
    assert c6[(0,)] == 7


def test_census_limit():
    with pytest.raises(OracleLimitExceeded):
        occurrence_vector_census([C3], 15)
    occurrence_vector_census([C3], 6, limit=5, force=True)


def test_pattern_canonicalization():
    a = make_pattern(5, [(1, 3)])
    b = make_pattern(5, [(2, 4)])
    c = make_pattern(5, [(3, 1)])
    assert a == b == c
    assert len(set([a, b, c])) == 1


def test_pattern_symmetries_group():
    for p in (C3, C4, pattern_from_name("patternI"), pattern_from_name("patternII")):
        syms = p.symmetries
        ident = tuple(range(p.size))
        assert ident in syms
        as_set = set(syms)
        for m1 in syms:
            for m2 in syms:
                comp = tuple(m1[m2[i]] for i in range(p.size))
                assert comp in as_set
    assert len(C4.symmetries) == 8
    assert len(pattern_from_name("patternI").symmetries) == 4


def test_load_patterns():
    ps = load_patterns(["C3", {"n": 4, "chords": [[1, 3]]}])
    assert ps[0] == C3 and ps[1] == pattern_from_name("patternI")
    with pytest.raises(ValueError):
        load_patterns([])
    with pytest.raises(ValueError):
        load_patterns(["C3", "C3"])
