import pytest

from polydis.core import (
    Dissection,
    enumerate_dissections,
    load_patterns,
    make_dissection,
    occurrence_vector,
    pattern_from_name,
)
from polydis.errors import CapExceeded
from polydis.roots import (
    FREE,
    RESTRICTED,
    classify_object,
    generate_composite_roots,
    h_delta,
    interaction_decomposition,
    interaction_exponents,
    is_composite_root,
    maximal_root_faces,
    polygon,
    reconstruct_exponents,
    subdissection,
)


def pats(*names):
    return load_patterns(list(names))


def roots_of(names, mode):
    return generate_composite_roots(pats(*names), mode)


def test_h_delta():
    assert h_delta(pats("C3")) == 3
    assert h_delta(pats("C4")) == 4
    assert h_delta(pats("C3", "patternII")) == 5


def test_is_composite_root_examples():
    t = make_dissection(3, [])
    assert is_composite_root(t, 4)
    two = make_dissection(4, [(1, 3)])
    assert is_composite_root(two, 4)
    chain3 = make_dissection(5, [(1, 3), (3, 5)])
    assert not is_composite_root(chain3, 4)
    square_tri = make_dissection(5, [(1, 4)])  # square at the root, triangle behind
    assert not is_composite_root(square_tri, 4)
    assert is_composite_root(make_dissection(4, []), 4)
    assert not is_composite_root(make_dissection(2, []), 4)
    assert not is_composite_root(make_dissection(5, []), 4)  # big face


def test_is_composite_root_consistency_with_catalog():
    # the generated full-mode catalog is exactly the predicate's support
    for names, H in ((("C4",), 4), (("C5",), 5)):
        cat = {r.root for r in roots_of(names, "full")}
        for n in range(3, 9):
            for d in enumerate_dissections(n):
                assert (d in cat) == is_composite_root(d, H)


def test_catalog_counts():
    assert len(roots_of(("C3",), "full")) == 1
    full4 = roots_of(("C4",), "full")
    assert len(full4) == 10
    assert sum(1 for r in full4 if r.root_polygon_size == 3) == 9
    assert len(roots_of(("C5",), "avoid")) == 11
    c6 = roots_of(("C6",), "avoid")
    assert len(c6) == 25
    assert [sum(1 for r in c6 if r.root_polygon_size == s) for s in (3, 4, 5)] == [11, 13, 1]


def test_catalog_cap():
    with pytest.raises(CapExceeded):
        generate_composite_roots(pats("C7"), "avoid")
    assert generate_composite_roots(pats("C7"), "avoid", cap=7)


def test_full_mode_maximality():
    full4 = roots_of(("C4",), "full")
    maximal = {r.label for r in full4 if r.maximal}
    assert len(maximal) == 5
    # one square-rooted maximal (the bare square), four triangle-rooted ones
    shapes = {r.root for r in full4 if r.maximal}
    assert polygon(4) in shapes
    assert sum(1 for d in shapes if d.root_face.size == 3) == 4


def test_classify_edges_examples():
    by_label = {r.label: r for r in roots_of(("C4",), "full")}
    t = by_label["3[1]"]
    assert t.edge_class == [RESTRICTED, RESTRICTED]
    sq = by_label["4[1]"]
    assert sq.edge_class == [FREE, FREE, FREE]

    # triangle+square root under 6-cycle avoidance: the triangle edge can
    # still grow (restricted), the three square edges cannot (free)
    c6 = roots_of(("C6",), "avoid")
    ts = [
        r
        for r in c6
        if r.root.n == 5 and r.root_polygon_size == 3 and len(r.root.chords) == 1
    ]
    assert len(ts) == 2
    for r in ts:
        classes = sorted(r.edge_class)
        assert classes == [FREE, FREE, FREE, RESTRICTED]
        for e_pos, cls in enumerate(r.edge_class):
            face = r.root.faces[r.edge_face[e_pos]]
            assert (face.size == 3) == (cls == RESTRICTED)


def test_interaction_exponents_examples():
    r3 = roots_of(("C3",), "full")[0]
    assert interaction_exponents(r3, [None, None], pats("C3")) == (1,)

    full4 = {r.label: r for r in roots_of(("C4",), "full")}
    assert interaction_exponents(full4["3[1]"], [None, None], pats("C4")) == (0,)

    # gluing triangles on both edges of a bare triangle creates one 5-cycle
    c5 = pats("C5")
    cat5 = {r.root: r for r in generate_composite_roots(c5, "full")}
    tri_info = cat5[polygon(3)]
    p = interaction_exponents(tri_info, [polygon(3), polygon(3)], c5)
    assert p == (1,)
    assert interaction_exponents(tri_info, [polygon(3), None], c5) == (0,)


def test_interaction_decomposition():
    c5 = pats("C5")
    cat5 = {r.root: r for r in generate_composite_roots(c5, "full")}
    tri = cat5[polygon(3)]
    assignment = [polygon(3), polygon(3)]
    q = interaction_decomposition(tri, assignment, c5)
    assert q[frozenset()] == (0,)
    assert q[frozenset({0})] == (0,) and q[frozenset({1})] == (0,)
    assert q[frozenset({0, 1})] == (1,)  # genuinely pairwise
    assert reconstruct_exponents(q, frozenset({0, 1})) == interaction_exponents(
        tri, assignment, c5
    )

    # 4-cycle marking: the pair term vanishes, singletons carry the copies
    full4 = {r.label: r for r in roots_of(("C4",), "full")}
    r32 = full4["3[2]"]
    c4 = pats("C4")
    tri_att = [polygon(3) for _ in r32.outer_edges]
    q4 = interaction_decomposition(r32, tri_att, c4)
    assert q4[frozenset()] == r32.base_occurrences
    for s, val in q4.items():
        if len(s) >= 2:
            assert val == (0,)


@pytest.mark.parametrize("names", [("C3",), ("C4",), ("C5",), ("patternII",)])
def test_moebius_reconstruction_all_roots(names):
    patterns = pats(*names)
    roots = generate_composite_roots(patterns, "full")
    reps = {r.root_polygon_size: r.root for r in roots}
    for info in roots:
        m = len(info.outer_edges)
        # one full assignment mixing available representative shapes
        sizes = sorted(reps)
        assignment = [reps[sizes[i % len(sizes)]] for i in range(m)]
        q = interaction_decomposition(info, assignment, patterns)
        assert reconstruct_exponents(q, frozenset(range(m))) == interaction_exponents(
            info, assignment, patterns
        )
        # nonzero interactions involve at most H-2 edges
        for s, val in q.items():
            if any(val) and len(s) > h_delta(patterns) - 2:
                raise AssertionError(f"deep interaction {s} at {info.label}")


def test_maximal_root_extraction():
    # square root polygon with a triangle behind: maximal root is the square
    d = make_dissection(5, [(1, 4)])
    root = classify_object(d, 4)
    assert root == polygon(4)
    # big root polygon: circ object
    assert classify_object(make_dissection(5, []), 4) is None
    # the whole dissection can be its own maximal root
    two = make_dissection(4, [(1, 3)])
    assert classify_object(two, 4) == two


def test_subdissection_roundtrip():
    d = make_dissection(6, [(1, 3), (3, 5), (1, 5)])
    all_faces = list(range(4))
    assert subdissection(d, all_faces) == d


def test_partition_smoke():
    # every rooted object of size <= 7 lands in exactly one class (C4 catalog)
    cat = {r.root for r in roots_of(("C4",), "full")}
    for n in range(2, 8):
        for d in enumerate_dissections(n):
            root = classify_object(d, 4)
            assert root is None or root in cat
