"""Composite roots: the building blocks of the pattern-aware decomposition.

For a pattern set with maximum pattern size H, polygons of size <= H are
"small".  A composite root is a rooted dissection of small polygons whose
faces all sit close enough to the root edge that pattern copies crossing its
outer edges remain determined by the root and the attachment classes.

Growth rule.  A small g-gon may be glued onto an outer edge of face X of a
composite root (U = vertex count of the dual path from the root face up to
and including X) iff

    U <= H - 1  and  ( |X| + g - 2 <= H
                       or X is the root face with |X| = H - 1, g = 4 <= |X|+1 )

The boundary case keeps squares attachable to an (H-1)-gon root polygon for
H <= 5, which is exactly what the worked systems require; a plain near-side
or far-side path bound reproduces neither the H = 4 nor the H = 6 catalogs.
A dissection is a composite root iff every non-root face was glued legally;
legality is order-independent, so this is a property of the dissection.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Optional, Sequence

from .core import (
    Dissection,
    Pattern,
    _boundary_cycle,
    glue,
    make_dissection,
    occurrence_vector,
)
from .errors import CapExceeded

DEFAULT_CAP = 6

FREE = "free"
RESTRICTED = "restricted"


def h_delta(patterns: Sequence[Pattern]) -> int:
    """Largest vertex count over the pattern set."""
    if not patterns:
        raise ValueError("pattern set must be nonempty")
    return max(p.size for p in patterns)


@lru_cache(maxsize=None)
def polygon(k: int) -> Dissection:
    return Dissection(k, ())


def growth_legal(path_union: int, face_size: int, g: int, H: int, at_root_face: bool) -> bool:
    """May a g-gon be glued onto an edge of this face of a composite root?"""
    if path_union > H - 1:
        return False
    if face_size + g - 2 <= H:
        return True
    return (
        at_root_face
        and face_size == H - 1
        and face_size + g - 2 == H + 1
        and g >= face_size
    )


def _path_unions(d: Dissection) -> list[int]:
    """Vertex count of the dual path from the root face through each face."""
    st = d._structure
    unions = [0] * len(st.faces)
    for i, f in enumerate(st.faces):
        par = st.parent[i]
        unions[i] = f.size if par is None else unions[par] + f.size - 2
    return unions


def _side_faces(d: Dissection) -> dict[frozenset, int]:
    """Map each non-root polygon side to the index of its unique face."""
    side_set = {frozenset(e) for e in d.sides()}
    out: dict[frozenset, int] = {}
    for i, f in enumerate(d.faces):
        vs = f.vertices
        for u, v in zip(vs, vs[1:] + vs[:1]):
            e = frozenset((u, v))
            if e in side_set:
                out[e] = i
    return out


def is_composite_root(d: Dissection, H: int) -> bool:
    """Both conditions of the decomposition, see the module docstring."""
    if d.n < 3:
        return False
    st = d._structure
    if any(f.size > H for f in st.faces):
        return False
    unions = _path_unions(d)
    for i in range(1, len(st.faces)):
        par = st.parent[i]
        if not growth_legal(unions[par], st.faces[par].size, st.faces[i].size, H, par == 0):
            return False
    return True


def maximal_root_faces(d: Dissection, H: int) -> Optional[list[int]]:
    """Face indices of the maximal composite root of d, or None for big root.

    Faces join the root greedily along the dual tree; legality of a face only
    depends on its ancestors, so the maximal root is well defined.
    """
    st = d._structure
    if d.n < 3 or st.faces[0].size > H:
        return None
    kept = {0}
    unions = {0: st.faces[0].size}
    queue = deque([0])
    while queue:
        x = queue.popleft()
        for c in st.children[x]:
            if st.faces[c].size <= H and growth_legal(
                unions[x], st.faces[x].size, st.faces[c].size, H, x == 0
            ):
                kept.add(c)
                unions[c] = unions[x] + st.faces[c].size - 2
                queue.append(c)
    return sorted(kept)


def subdissection(d: Dissection, face_idxs: Sequence[int]) -> Dissection:
    """The rooted dissection formed by a connected face set containing the root."""
    cycle, inner = _boundary_cycle(d, face_idxs)
    m = len(cycle)
    i1 = cycle.index(1)
    if cycle[(i1 + 1) % m] == 2:
        ordered = [cycle[(i1 + k) % m] for k in range(m)]
    else:
        ordered = [cycle[(i1 - k) % m] for k in range(m)]
    assert ordered[0] == 1 and ordered[1] == 2
    relabel = {v: i + 1 for i, v in enumerate(ordered)}
    chords = sorted(tuple(sorted((relabel[u], relabel[v]))) for u, v in inner)
    return make_dissection(m, chords)


def classify_object(d: Dissection, H: int) -> Optional[Dissection]:
    """Maximal composite root of a rooted dissection, None if it is a circ object."""
    kept = maximal_root_faces(d, H)
    if kept is None:
        return None
    return subdissection(d, kept)


@dataclass
class CompositeRootInfo:
    """A composite root with its edge classification and occurrence data."""

    root: Dissection
    index: tuple[int, int]          # (root polygon size, ordinal)
    outer_edges: list[tuple[int, int]]   # non-root sides, in side order
    edge_face: list[int]            # face index carrying each outer edge
    grow_sizes: list[tuple[int, ...]]    # structural legal glue sizes per edge
    grow_sizes_chi0: list[tuple[int, ...]]  # ... leading to pattern-free roots
    edge_class: list[str]           # FREE / RESTRICTED (mode dependent)
    maximal: bool
    base_occurrences: tuple[int, ...]    # chi_i per pattern

    @property
    def label(self) -> str:
        return f"{self.index[0]}[{self.index[1]}]"

    @property
    def root_polygon_size(self) -> int:
        return self.root.root_face.size

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "n": self.root.n,
            "chords": [list(c) for c in self.root.chords],
            "outer_edges": [list(e) for e in self.outer_edges],
            "edge_class": list(self.edge_class),
            "maximal": self.maximal,
            "base_occurrences": list(self.base_occurrences),
        }


def _legal_moves(d: Dissection, H: int):
    """(side, face, legal glue sizes) for every non-root side of d."""
    unions = _path_unions(d)
    sides = _side_faces(d)
    out = []
    for e in d.sides():
        x = sides[frozenset(e)]
        sizes = tuple(
            g
            for g in range(3, H + 1)
            if growth_legal(unions[x], d.faces[x].size, g, H, x == 0)
        )
        out.append((e, x, sizes))
    return out


def generate_composite_roots(
    patterns: Sequence[Pattern],
    mode: str = "full",
    cap: int = DEFAULT_CAP,
) -> list[CompositeRootInfo]:
    """Exhaustive, duplicate-free composite root catalog.

    Breadth-first gluing of small polygons starting from the bare root
    polygons; mirror images are kept distinct.  In avoiding mode, roots with
    any pattern occurrence are pruned (occurrence counts only grow along
    gluing, so pruning during the search is exhaustive).
    """
    H = h_delta(patterns)
    if H > cap:
        raise CapExceeded(f"H = {H} exceeds the generation cap {cap}")
    if mode not in ("full", "avoid"):
        raise ValueError(f"unknown mode {mode!r}")
    prune = mode == "avoid"

    def chi(d: Dissection) -> tuple[int, ...]:
        return occurrence_vector(d, patterns)

    seen: dict[Dissection, tuple[int, ...]] = {}
    queue: deque[Dissection] = deque()
    for k in range(3, H + 1):
        d = polygon(k)
        v = chi(d)
        if prune and any(v):
            continue
        seen[d] = v
        queue.append(d)
    while queue:
        d = queue.popleft()
        for e, _x, sizes in _legal_moves(d, H):
            for g in sizes:
                child = glue(d, e, polygon(g))
                if child in seen:
                    continue
                v = chi(child)
                if prune and any(v):
                    continue
                seen[child] = v
                queue.append(child)

    ordered = sorted(seen, key=lambda d: (d.root_face.size, d.n, d.chords))
    infos: list[CompositeRootInfo] = []
    ordinal: dict[int, int] = {}
    for d in ordered:
        rsize = d.root_face.size
        ordinal[rsize] = ordinal.get(rsize, 0) + 1
        moves = _legal_moves(d, H)
        grow = [sizes for _e, _x, sizes in moves]
        grow0 = []
        for e, _x, sizes in moves:
            ok = []
            for g in sizes:
                if not any(occurrence_vector(glue(d, e, polygon(g)), patterns)):
                    ok.append(g)
            grow0.append(tuple(ok))
        eff = grow0 if prune else grow
        classes = [RESTRICTED if s else FREE for s in eff]
        infos.append(
            CompositeRootInfo(
                root=d,
                index=(rsize, ordinal[rsize]),
                outer_edges=[e for e, _x, _s in moves],
                edge_face=[x for _e, x, _s in moves],
                grow_sizes=grow,
                grow_sizes_chi0=[tuple(s) for s in grow0],
                edge_class=classes,
                maximal=all(c == FREE for c in classes),
                base_occurrences=seen[d],
            )
        )
    return infos


def classify_edges(info: CompositeRootInfo) -> list[str]:
    """Edge classes of a generated root (restricted edges can still grow)."""
    return list(info.edge_class)


def assemble(
    root: Dissection,
    assignment: Sequence[Optional[Dissection]],
) -> Dissection:
    """Glue representative dissections onto the non-root sides of a root.

    assignment[i] is glued on root.sides()[i]; None leaves the edge bare.
    Gluing proceeds from the highest side downward so earlier side labels
    stay valid.
    """
    sides = root.sides()
    if len(assignment) != len(sides):
        raise ValueError("assignment length must match the number of outer edges")
    d = root
    for e, att in sorted(zip(sides, assignment), key=lambda t: t[0], reverse=True):
        if att is not None:
            d = glue(d, e, att)
    return d


def interaction_exponents(
    info: CompositeRootInfo,
    assignment: Sequence,
    patterns: Sequence[Pattern],
) -> tuple[int, ...]:
    """New pattern copies created around a root by a tuple of attachments.

    Entries of the assignment are None (nothing glued, the circ case) or a
    class representative: a CompositeRootInfo or bare Dissection.  The result
    is the occurrence vector of the assembled dissection minus the occurrences
    inside the attachments themselves; the all-circ assignment returns the
    root's own base occurrences.
    """
    reps = [a.root if isinstance(a, CompositeRootInfo) else a for a in assignment]
    total = list(occurrence_vector(assemble(info.root, reps), patterns))
    for rep in reps:
        if rep is not None:
            for i, c in enumerate(occurrence_vector(rep, patterns)):
                total[i] -= c
    return tuple(total)


def interaction_decomposition(
    info: CompositeRootInfo,
    assignment: Sequence,
    patterns: Sequence[Pattern],
) -> dict[frozenset, tuple[int, ...]]:
    """Moebius decomposition of the interaction exponents over edge subsets.

    Returns q indexed by subsets of the occupied edge positions, so that
    p(assignment restricted to S) = sum of q over subsets of S.  The empty
    subset carries the base occurrences.
    """
    support = [i for i, a in enumerate(assignment) if a is not None]
    m = len(info.outer_edges)

    def p_of(subset: frozenset) -> tuple[int, ...]:
        restricted = [assignment[i] if i in subset else None for i in range(m)]
        return interaction_exponents(info, restricted, patterns)

    p_cache = {
        frozenset(t): p_of(frozenset(t))
        for r in range(len(support) + 1)
        for t in combinations(support, r)
    }
    q: dict[frozenset, tuple[int, ...]] = {}
    for s_tuple in sorted(p_cache, key=len):
        s = frozenset(s_tuple)
        acc = list(p_cache[s])
        for t in q:
            if t < s:
                for i, x in enumerate(q[t]):
                    acc[i] -= x
        q[s] = tuple(acc)
    return q


def reconstruct_exponents(
    q: dict[frozenset, tuple[int, ...]], subset: frozenset
) -> tuple[int, ...]:
    """Sum the Moebius terms over all subsets of the given edge set."""
    m = len(next(iter(q.values()))) if q else 0
    acc = [0] * m
    for t, val in q.items():
        if t <= subset:
            for i, x in enumerate(val):
                acc[i] += x
    return tuple(acc)
