"""Rooted polygon dissections, 2-connected patterns, and a brute-force occurrence oracle.

A dissection is a convex polygon on vertices 1..n (counterclockwise) together
with a set of pairwise non-crossing diagonals.  All dissections here are rooted
at the edge {1,2}; for n = 2 the object is the single edge.  Patterns are
2-connected graphs given up to relabelling; inside a dissection they are always
isomorphic to some dissection shape (Hamilton cycle plus chords), so subgraph
occurrences can be enumerated as boundaries of connected unions of faces plus a
choice of chords inside that boundary.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from itertools import combinations
from typing import Iterable, Iterator, Optional, Sequence

from .errors import (
    CrossingChords,
    DuplicateChord,
    NotOuterEdge,
    OracleLimitExceeded,
    OutOfRange,
    RootEdgeGlue,
)

ORACLE_LIMIT_DEFAULT = 14


@dataclass(frozen=True)
class Face:
    """A bounded face, vertices in cyclic (counterclockwise) order."""

    vertices: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.vertices)


@dataclass(frozen=True)
class Dissection:
    """A rooted polygon dissection: vertex count plus non-crossing chords.

    The root edge is implicitly {1,2}.  Chords are stored sorted, each as a
    pair (a, b) with a < b.  Instances are immutable; derived structure (faces,
    dual tree) is computed lazily and cached.
    """

    n: int
    chords: tuple[tuple[int, int], ...]

    def __str__(self) -> str:
        return f"({self.n}, {list(map(list, self.chords))})"

    @property
    def num_faces(self) -> int:
        return 0 if self.n == 2 else len(self.chords) + 1

    @cached_property
    def _structure(self) -> "_FaceStructure":
        return _build_face_structure(self.n, self.chords)

    @property
    def faces(self) -> list[Face]:
        return self._structure.faces

    @property
    def root_face(self) -> Face:
        return self._structure.faces[0]

    def sides(self) -> list[tuple[int, int]]:
        """Polygon sides other than the root edge, as (a, succ(a)) pairs."""
        if self.n == 2:
            return []
        out = [(i, i + 1) for i in range(2, self.n)]
        out.append((self.n, 1))
        return out

    def edge_set(self) -> set[frozenset[int]]:
        edges = {frozenset((1, 2))}
        for a, b in self.sides():
            edges.add(frozenset((a, b)))
        for c in self.chords:
            edges.add(frozenset(c))
        return edges


@dataclass
class _FaceStructure:
    faces: list[Face]
    parent: list[Optional[int]]          # parent face index (root face = 0)
    parent_edge: list[Optional[tuple[int, int]]]  # shared chord with parent
    children: list[list[int]]


def make_dissection(n: int, chords: Iterable[Sequence[int]]) -> Dissection:
    """Validate and build a dissection.

    Raises OutOfRange, DuplicateChord or CrossingChords, naming the offending
    pair(s).
    """
    if n < 2:
        raise OutOfRange((n,), n)
    norm: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for pair in chords:
        a, b = pair
        if not (1 <= a <= n and 1 <= b <= n):
            raise OutOfRange((a, b), n)
        a, b = min(a, b), max(a, b)
        if b - a < 2 or (a, b) == (1, n):
            raise OutOfRange((a, b), n)
        if (a, b) in seen:
            raise DuplicateChord((a, b))
        seen.add((a, b))
        norm.append((a, b))
    norm.sort()
    for (a, b), (c, d) in combinations(norm, 2):
        # crossing iff a < c < b < d after sorting the pairs
        lo, hi = ((a, b), (c, d)) if (a, b) <= (c, d) else ((c, d), (a, b))
        if lo[0] < hi[0] < lo[1] < hi[1]:
            raise CrossingChords(lo, hi)
    return Dissection(n, tuple(norm))


def _build_face_structure(n: int, chords: tuple[tuple[int, int], ...]) -> _FaceStructure:
    if n == 2:
        return _FaceStructure([], [], [], [])
    # work in position space: seq[p] is the vertex at position p, so that the
    # root edge becomes the pair of extreme positions (0, n-1)
    seq = list(range(2, n + 1)) + [1]
    pos = {v: p for p, v in enumerate(seq)}
    adj: list[list[int]] = [[] for _ in range(n)]
    for p in range(n - 1):
        adj[p].append(p + 1)
        adj[p + 1].append(p)
    adj[0].append(n - 1)
    adj[n - 1].append(0)
    for a, b in chords:
        pa, pb = pos[a], pos[b]
        adj[pa].append(pb)
        adj[pb].append(pa)

    faces: list[Face] = []
    parent: list[Optional[int]] = []
    parent_edge: list[Optional[tuple[int, int]]] = []
    children: list[list[int]] = []

    def trace(lo: int, hi: int, par: Optional[int]) -> None:
        # first step must not take the base edge (lo, hi) itself
        corners = [lo, max(q for q in adj[lo] if lo < q < hi)]
        c = corners[-1]
        while c != hi:
            c = max(q for q in adj[c] if c < q <= hi)
            corners.append(c)
        idx = len(faces)
        faces.append(Face(tuple(seq[p] for p in corners)))
        parent.append(par)
        if par is None:
            parent_edge.append(None)
        else:
            u, v = seq[lo], seq[hi]
            parent_edge.append((min(u, v), max(u, v)))
        children.append([])
        if par is not None:
            children[par].append(idx)
        for u, v in zip(corners, corners[1:]):
            if v > u + 1:
                trace(u, v, idx)

    trace(0, n - 1, None)
    return _FaceStructure(faces, parent, parent_edge, children)


def faces(d: Dissection) -> list[Face]:
    """Bounded faces of the dissection, root face first (DFS order)."""
    return d.faces


def dual_tree(d: Dissection) -> list[tuple[int, int, tuple[int, int]]]:
    """Face-adjacency edges as (face_i, face_j, shared chord) triples."""
    st = d._structure
    out = []
    for i, par in enumerate(st.parent):
        if par is not None:
            out.append((par, i, st.parent_edge[i]))
    return out


def enumerate_dissections(n: int) -> Iterator[Dissection]:
    """All dissections of the n-gon, each chord set exactly once.

    Deterministic: generated by recursively choosing the face that contains
    the base edge of each region, corner subsets in ascending bitmask order.
    """
    if n < 2:
        return
    if n == 2:
        yield Dissection(2, ())
        return
    seq = list(range(2, n + 1)) + [1]

    def to_chord(u: int, v: int) -> tuple[int, int]:
        a, b = seq[u], seq[v]
        return (min(a, b), max(a, b))

    def regions(lo: int, hi: int) -> Iterator[frozenset]:
        if hi == lo + 1:
            yield frozenset()
            return
        interior = list(range(lo + 1, hi))
        m = len(interior)
        for mask in range(1, 1 << m):
            corners = [lo] + [interior[i] for i in range(m) if mask >> i & 1] + [hi]
            gaps = [(u, v) for u, v in zip(corners, corners[1:]) if v > u + 1]
            base = frozenset(to_chord(u, v) for u, v in gaps)

            def expand(i: int, acc: frozenset) -> Iterator[frozenset]:
                if i == len(gaps):
                    yield acc
                    return
                u, v = gaps[i]
                for sub in regions(u, v):
                    yield from expand(i + 1, acc | sub)

            yield from expand(0, base)

    for chordset in regions(0, n - 1):
        yield Dissection(n, tuple(sorted(chordset)))


def glue(host: Dissection, outer_edge: Sequence[int], attachment: Dissection) -> Dissection:
    """Glue a rooted dissection onto a non-root polygon side of the host.

    The attachment's root edge {1,2} is identified with the host side; the
    result is renumbered counterclockwise from the host root.  Convention: for
    side (a, a+1) the attachment vertex 2 lands on a and vertex 1 on the image
    of a+1, so its remaining vertices are inserted between them in order.
    """
    e = frozenset(outer_edge)
    if e == frozenset((1, 2)):
        raise RootEdgeGlue("cannot glue on the root edge")
    side = None
    for a, b in host.sides():
        if frozenset((a, b)) == e:
            side = (a, b)
            break
    if side is None:
        raise NotOuterEdge(f"{tuple(outer_edge)} is not a non-root side of {host}")
    m = attachment.n
    a = side[0]  # side is (a, a+1), or (n, 1) for a = n
    shift = m - 2
    new_n = host.n + shift

    def host_map(v: int) -> int:
        return v if v <= a else v + shift

    def att_map(v: int) -> int:
        if v == 2:
            return a
        if v == 1:
            return a + m - 1 if side != (host.n, 1) else 1
        return a + v - 2

    new_chords = [tuple(sorted((host_map(x), host_map(y)))) for x, y in host.chords]
    # the glued side becomes a chord of the result
    new_chords.append(tuple(sorted((att_map(1), att_map(2)))))
    for x, y in attachment.chords:
        new_chords.append(tuple(sorted((att_map(x), att_map(y)))))
    return make_dissection(new_n, sorted(new_chords))


# ---------------------------------------------------------------------------
# patterns


def dihedral_maps(k: int) -> list[tuple[int, ...]]:
    """The 2k maps of the dihedral group acting on positions 0..k-1."""
    maps = []
    for r in range(k):
        maps.append(tuple((i + r) % k for i in range(k)))
        maps.append(tuple((r - i) % k for i in range(k)))
    return maps


def _apply_map(m: tuple[int, ...], pairs: frozenset[tuple[int, int]]) -> frozenset:
    out = set()
    for i, j in pairs:
        a, b = m[i], m[j]
        out.add((min(a, b), max(a, b)))
    return frozenset(out)


@lru_cache(maxsize=None)
def canonical_chord_key(k: int, pairs: frozenset) -> tuple:
    """Lexicographically minimal image of a chord-position set under D_k."""
    return min(tuple(sorted(_apply_map(m, pairs))) for m in dihedral_maps(k))


@dataclass(frozen=True)
class Pattern:
    """A 2-connected pattern stored via its canonical dissection shape.

    The Hamilton cycle is the polygon boundary; chords are kept both as vertex
    pairs (the shape) and as the canonical position-pair key used for
    isomorphism tests.
    """

    shape: Dissection
    name: str = ""

    @property
    def size(self) -> int:
        return self.shape.n

    @property
    def is_cycle(self) -> bool:
        return not self.shape.chords

    @cached_property
    def chord_positions(self) -> frozenset[tuple[int, int]]:
        return frozenset((a - 1, b - 1) for a, b in self.shape.chords)

    @cached_property
    def canonical_key(self) -> tuple:
        return (self.size, canonical_chord_key(self.size, self.chord_positions))

    @cached_property
    def symmetries(self) -> list[tuple[int, ...]]:
        """Dihedral maps of the k-cycle fixing the chord set."""
        return [
            m
            for m in dihedral_maps(self.size)
            if _apply_map(m, self.chord_positions) == self.chord_positions
        ]

    def __eq__(self, other) -> bool:
        return isinstance(other, Pattern) and self.canonical_key == other.canonical_key

    def __hash__(self) -> int:
        return hash(self.canonical_key)


def make_pattern(n: int, chords: Iterable[Sequence[int]], name: str = "") -> Pattern:
    shape = make_dissection(n, chords)
    if n < 3:
        raise OutOfRange((n,), n)
    return Pattern(shape, name or f"({n},{sorted(map(tuple, shape.chords))})")


_ALIASES = {
    "patternI": (4, [(1, 3)]),
    "patternII": (5, [(1, 3)]),
}


def pattern_from_name(name: str) -> Pattern:
    """Resolve a pattern alias: C<k> for cycles, patternI / patternII."""
    if name.startswith("C") and name[1:].isdigit():
        k = int(name[1:])
        if k < 3:
            raise OutOfRange((k,), k)
        return make_pattern(k, [], name)
    for alias, (n, ch) in _ALIASES.items():
        if name.lower() == alias.lower():
            return make_pattern(n, ch, alias)
    raise ValueError(f"unknown pattern name {name!r}")


def pattern_from_json(obj: dict) -> Pattern:
    """Pattern file format: {"name": "C4"} or {"n": 5, "chords": [[1,3]]}."""
    if "name" in obj:
        return pattern_from_name(obj["name"])
    return make_pattern(int(obj["n"]), [tuple(c) for c in obj.get("chords", [])])


def load_patterns(specs: Iterable) -> list[Pattern]:
    """Build a validated pattern set from names, dicts, or Pattern objects."""
    pats: list[Pattern] = []
    for s in specs:
        if isinstance(s, Pattern):
            pats.append(s)
        elif isinstance(s, str):
            if s.endswith(".json"):
                with open(s) as fh:
                    pats.append(pattern_from_json(json.load(fh)))
            else:
                pats.append(pattern_from_name(s))
        elif isinstance(s, dict):
            pats.append(pattern_from_json(s))
        else:
            raise ValueError(f"cannot interpret pattern spec {s!r}")
    if not pats:
        raise ValueError("pattern set must be nonempty")
    if len(set(pats)) != len(pats):
        raise ValueError("pattern set contains duplicates")
    return pats


# ---------------------------------------------------------------------------
# occurrence counting

# Cycles in a dissection are exactly the boundaries of connected subtrees of
# the dual tree, and the boundary length 2 + sum(face size - 2) grows strictly
# with each added face, so enumeration can be cut off at the pattern size.


def _face_weights(d: Dissection) -> list[int]:
    return [f.size - 2 for f in d.faces]


def _subtree_profile(d: Dissection, wmax: int) -> list[int]:
    """cnt[w] = number of connected dual subtrees with total weight w <= wmax."""
    if d.n == 2:
        return [0] * (wmax + 1)
    st = d._structure
    w = _face_weights(d)
    total = [0] * (wmax + 1)
    # poly[t][w] counts subtrees rooted (topmost) at t, computed bottom-up
    order = list(range(len(st.faces)))
    poly: list[list[int]] = [None] * len(order)  # type: ignore
    for t in reversed(order):
        p = [0] * (wmax + 1)
        if w[t] <= wmax:
            p[w[t]] = 1
            for c in st.children[t]:
                q = poly[c]
                nxt = p[:]
                for i in range(wmax + 1):
                    if p[i]:
                        for j in range(1, wmax + 1 - i):
                            if q[j]:
                                nxt[i + j] += p[i] * q[j]
                p = nxt
        poly[t] = p
        for i in range(1, wmax + 1):
            total[i] += p[i]
    return total


def _enumerate_subtrees(d: Dissection, wmax: int) -> Iterator[list[int]]:
    """Connected dual subtrees (face index lists) with weight <= wmax."""
    if d.n == 2:
        return
    st = d._structure
    w = _face_weights(d)

    def from_top(t: int, budget: int) -> Iterator[list[int]]:
        if w[t] > budget:
            return
        kids = st.children[t]

        def extend(i: int, acc: list[int], used: int) -> Iterator[list[int]]:
            if i == len(kids):
                yield acc
                return
            yield from extend(i + 1, acc, used)
            for sub in from_top(kids[i], budget - used):
                sw = sum(w[f] for f in sub)
                yield from extend(i + 1, acc + sub, used + sw)

        yield from extend(0, [t], w[t])

    for t in range(len(st.faces)):
        yield from from_top(t, wmax)


def _boundary_cycle(d: Dissection, face_idxs: Sequence[int]) -> tuple[list[int], list[tuple[int, int]]]:
    """Boundary vertex cycle and inner chords of a connected face union."""
    edge_count: dict[frozenset, int] = {}
    for fi in face_idxs:
        vs = d.faces[fi].vertices
        for u, v in zip(vs, vs[1:] + vs[:1]):
            e = frozenset((u, v))
            edge_count[e] = edge_count.get(e, 0) + 1
    boundary = [e for e, c in edge_count.items() if c == 1]
    inner = [tuple(sorted(e)) for e, c in edge_count.items() if c == 2]
    nbr: dict[int, list[int]] = {}
    for e in boundary:
        u, v = tuple(e)
        nbr.setdefault(u, []).append(v)
        nbr.setdefault(v, []).append(u)
    start = min(nbr)
    cycle = [start, min(nbr[start])]
    while True:
        prev, cur = cycle[-2], cycle[-1]
        nxt = nbr[cur][0] if nbr[cur][0] != prev else nbr[cur][1]
        if nxt == start:
            break
        cycle.append(nxt)
    return cycle, inner


def count_occurrences(d: Dissection, p: Pattern) -> int:
    """Number of subgraphs of d isomorphic to p (subgraph, not induced).

    Every copy of a 2-connected pattern is a cycle of d (the boundary of a
    connected union of faces) together with a set of chords lying inside it.
    """
    k = p.size
    if d.n < k:
        return 0
    if p.is_cycle:
        prof = _subtree_profile(d, k - 2)
        return prof[k - 2]
    want = len(p.shape.chords)
    target = p.canonical_key[1]
    count = 0
    for sub in _enumerate_subtrees(d, k - 2):
        if sum(d.faces[f].size - 2 for f in sub) != k - 2:
            continue
        cycle, inner = _boundary_cycle(d, sub)
        if len(inner) < want:
            continue
        posmap = {v: i for i, v in enumerate(cycle)}
        inner_pos = [tuple(sorted((posmap[u], posmap[v]))) for u, v in inner]
        for chosen in combinations(inner_pos, want):
            if canonical_chord_key(k, frozenset(chosen)) == target:
                count += 1
    return count


def occurrence_vector(d: Dissection, patterns: Sequence[Pattern]) -> tuple[int, ...]:
    """Per-pattern occurrence counts, sharing the subtree scan when possible."""
    if all(p.is_cycle for p in patterns):
        wmax = max(p.size for p in patterns) - 2
        prof = _subtree_profile(d, wmax)
        return tuple(prof[p.size - 2] for p in patterns)
    return tuple(count_occurrences(d, p) for p in patterns)


def occurrence_vector_census(
    patterns: Sequence[Pattern],
    n: int,
    limit: int = ORACLE_LIMIT_DEFAULT,
    force: bool = False,
) -> dict[tuple[int, ...], int]:
    """Aggregate occurrence vectors over all dissections of the n-gon."""
    if n > limit and not force:
        raise OracleLimitExceeded(f"n={n} exceeds oracle limit {limit}")
    counts: dict[tuple[int, ...], int] = {}
    for d in enumerate_dissections(n):
        v = occurrence_vector(d, patterns)
        counts[v] = counts.get(v, 0) + 1
    return counts


def census_to_json(n: int, counts: dict[tuple[int, ...], int]) -> dict:
    return {
        "n": n,
        "counts": [
            {"vector": list(v), "count": c} for v, c in sorted(counts.items())
        ],
    }
