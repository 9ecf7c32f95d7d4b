"""Generating-function systems for pattern-marked dissection classes.

Variables are y (all rooted dissections), y_o (big root polygon, plus the
single edge) and one variable per composite root class.  Every equation except
y_o's is a sum of products of per-edge linear forms; y_o's equation is kept in
the signed polynomial form  y_o = y^H + y*y_o - z*y + z.

Pattern copies created by attachments decompose over edge subsets.  Singleton
contributions become u-exponents inside the linear forms; the rare genuinely
pairwise interactions are handled by explicit correction summands (a positive
one with the joint exponent and a cancelling negative one without it).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from itertools import combinations
from typing import Optional, Sequence

from .core import Dissection, Pattern
from .roots import (
    CompositeRootInfo,
    _path_unions,
    generate_composite_roots,
    h_delta,
    interaction_exponents,
    subdissection,
)

Y = 0
Y_CIRC = 1

# linear form: tuple of (coeff, u-exponent tuple, variable index)
LinForm = tuple[tuple[int, tuple, int], ...]


@dataclass(frozen=True)
class Summand:
    coeff: int
    z: int
    u: tuple
    factors: tuple[tuple[int, int], ...]  # (linform index, power)


@dataclass
class ClassSystem:
    """A polynomial fixed-point system y_i = F_i(z, y, u)."""

    var_names: list[str]
    linforms: list[LinForm]
    equations: list[list[Summand]]
    u_dim: int
    H: int
    mode: str
    patterns: list[Pattern] = field(default_factory=list)
    roots: list[Optional[CompositeRootInfo]] = field(default_factory=list)
    groups: Optional[list[list[str]]] = None  # member labels after grouping

    @property
    def num_vars(self) -> int:
        return len(self.var_names)

    def zero_u(self) -> tuple:
        return (0,) * self.u_dim

    def mentions(self, i: int) -> set[int]:
        out = set()
        for s in self.equations[i]:
            for lf_idx, _p in s.factors:
                for _c, _u, v in self.linforms[lf_idx]:
                    out.add(v)
        return out

    def dependency_graph(self) -> list[set[int]]:
        return [self.mentions(i) for i in range(self.num_vars)]

    def is_strongly_connected(self) -> bool:
        n = self.num_vars
        adj = self.dependency_graph()
        radj = [set() for _ in range(n)]
        for i, outs in enumerate(adj):
            for j in outs:
                radj[j].add(i)

        def reach(start, nbrs):
            seen = {start}
            stack = [start]
            while stack:
                x = stack.pop()
                for ynb in nbrs[x]:
                    if ynb not in seen:
                        seen.add(ynb)
                        stack.append(ynb)
            return seen

        return len(reach(0, adj)) == n and len(reach(0, radj)) == n


def _zero(m: int) -> tuple:
    return (0,) * m


def _vec_add(a: tuple, b: tuple) -> tuple:
    return tuple(x + y for x, y in zip(a, b))


def _vec_sub(a: tuple, b: tuple) -> tuple:
    return tuple(x - y for x, y in zip(a, b))


def build_baseline_system() -> ClassSystem:
    """The unrestricted rooted-dissection equation  y = 2y^2 - zy + z."""
    lf_y: LinForm = ((1, (), Y),)
    eq = [
        Summand(2, 0, (), ((0, 2),)),
        Summand(-1, 1, (), ((0, 1),)),
        Summand(1, 1, (), ()),
    ]
    return ClassSystem(["y"], [lf_y], [eq], 0, 2, "baseline")


def _tree_path_union(d: Dissection, f1: int, f2: int) -> int:
    """Vertex count of the union of faces on the dual-tree path f1..f2."""
    st = d._structure
    depth = {}
    for i in range(len(st.faces)):
        depth[i] = 0 if st.parent[i] is None else depth[st.parent[i]] + 1
    a, b = f1, f2
    pa, pb = [a], [b]
    while depth[a] > depth[b]:
        a = st.parent[a]
        pa.append(a)
    while depth[b] > depth[a]:
        b = st.parent[b]
        pb.append(b)
    while a != b:
        a, b = st.parent[a], st.parent[b]
        pa.append(a)
        pb.append(b)
    nodes = set(pa) | set(pb)
    return sum(st.faces[i].size for i in nodes) - 2 * (len(nodes) - 1)


def _truncate_rep(rep: Dissection, bound: int) -> Optional[Dissection]:
    """Faces of a class representative reachable by a cycle of length <= H.

    A cycle crossing the glue edge below face X encloses at least
    |X| + (path union inside the attachment) - 2 vertices, so only faces with
    path union <= bound = H + 2 - |X| can matter.  None means not even the
    attachment's root polygon is reachable, hence no interaction at all.
    """
    if rep.root_face.size > bound:
        return None
    unions = _path_unions(rep)
    keep = [i for i, pu in enumerate(unions) if pu <= bound]
    return subdissection(rep, keep)


def build_system(
    patterns: Sequence[Pattern],
    mode: str = "full",
    cap: int = 6,
    roots: Optional[list[CompositeRootInfo]] = None,
) -> ClassSystem:
    """Emit the class system for a pattern set (full marking or avoiding)."""
    patterns = list(patterns)
    m = len(patterns)
    H = h_delta(patterns)
    if roots is None:
        roots = generate_composite_roots(patterns, mode, cap)
    k = len(roots)
    var_names = ["y", "y_o"] + [r.label for r in roots]
    size_of_class = [r.root_polygon_size for r in roots]

    linforms: list[LinForm] = []
    lf_index: dict[LinForm, int] = {}

    def intern(lf: LinForm) -> int:
        if lf not in lf_index:
            lf_index[lf] = len(linforms)
            linforms.append(lf)
        return lf_index[lf]

    zero = _zero(m)
    lf_y = intern(((1, zero, Y),))
    lf_yc = intern(((1, zero, Y_CIRC),))
    lf_all = intern(
        tuple([(1, zero, Y_CIRC)] + [(1, zero, 2 + c) for c in range(k)])
    )

    equations: list[list[Summand]] = [[] for _ in range(2 + k)]
    equations[Y] = [Summand(1, 0, zero, ((lf_all, 1),))]
    equations[Y_CIRC] = [
        Summand(1, 0, zero, ((lf_y, H),)),
        Summand(1, 0, zero, ((lf_y, 1), (lf_yc, 1))),
        Summand(-1, 1, zero, ((lf_y, 1),)),
        Summand(1, 1, zero, ()),
    ]

    for ci, info in enumerate(roots):
        d = info.root
        edges = info.outer_edges
        s = len(edges)
        chi = info.base_occurrences
        attach: list[list[int]] = []
        for e_pos in range(s):
            grow = set(info.grow_sizes[e_pos])
            attach.append([c for c in range(k) if size_of_class[c] not in grow])

        bounds = [H + 2 - d.faces[info.edge_face[e]].size for e in range(s)]
        trunc: list[dict[int, Optional[Dissection]]] = []
        for e_pos in range(s):
            trunc.append(
                {c: _truncate_rep(roots[c].root, bounds[e_pos]) for c in attach[e_pos]}
            )

        def p_of(assign_pairs) -> tuple:
            assignment = [None] * s
            for pos, c in assign_pairs:
                assignment[pos] = trunc[pos][c]
            return interaction_exponents(info, assignment, patterns)

        zero_vec = _zero(m)
        q_single: list[dict[int, tuple]] = []
        for e_pos in range(s):
            qs = {}
            memo: dict[Dissection, tuple] = {}
            for c in attach[e_pos]:
                t = trunc[e_pos][c]
                if t is None:
                    qs[c] = zero_vec
                elif t in memo:
                    qs[c] = memo[t]
                else:
                    qs[c] = memo[t] = _vec_sub(p_of([(e_pos, c)]), chi)
            q_single.append(qs)

        base_lfs: list[int] = []
        factors: dict[int, int] = {}
        for e_pos in range(s):
            entries = [(1, zero, Y_CIRC)]
            for c in attach[e_pos]:
                entries.append((1, q_single[e_pos][c], 2 + c))
            lf = intern(tuple(entries))
            base_lfs.append(lf)
            factors[lf] = factors.get(lf, 0) + 1
        summands = [Summand(1, 0, chi, tuple(sorted(factors.items())))]

        # distinct truncations per edge; interaction values only depend on them
        groups_of: list[dict[Dissection, list[int]]] = []
        for e_pos in range(s):
            g: dict[Dissection, list[int]] = {}
            for c in attach[e_pos]:
                t = trunc[e_pos][c]
                if t is not None:
                    g.setdefault(t, []).append(c)
            groups_of.append(g)

        pair_memo: dict[tuple, tuple] = {}

        def q_pair_of(e1: int, a: int, e2: int, b: int) -> tuple:
            key = (e1, trunc[e1][a], e2, trunc[e2][b])
            if key not in pair_memo:
                p_ab = p_of([(e1, a), (e2, b)])
                pair_memo[key] = _vec_sub(
                    _vec_sub(_vec_sub(p_ab, q_single[e1][a]), q_single[e2][b]), chi
                )
            return pair_memo[key]

        # pairwise interaction corrections; a copy spanning two attachments
        # needs a region at least as large as the face path plus both root
        # polygons, which rules most pairs out without assembling anything
        for e1, e2 in combinations(range(s), 2):
            if not groups_of[e1] or not groups_of[e2]:
                continue
            base = _tree_path_union(d, info.edge_face[e1], info.edge_face[e2])
            for t1, cls1 in groups_of[e1].items():
                for t2, cls2 in groups_of[e2].items():
                    a0, b0 = cls1[0], cls2[0]
                    if base + size_of_class[a0] + size_of_class[b0] - 4 > H:
                        continue
                    q_pair = q_pair_of(e1, a0, e2, b0)
                    if not any(q_pair):
                        continue
                    # q values agree across a truncation group, so the whole
                    # group enters through a single summed linear form
                    rest: dict[int, int] = {}
                    for e_pos in range(s):
                        if e_pos not in (e1, e2):
                            rest[base_lfs[e_pos]] = rest.get(base_lfs[e_pos], 0) + 1
                    for cls in (cls1, cls2):
                        lf = intern(tuple((1, zero, 2 + a) for a in cls))
                        rest[lf] = rest.get(lf, 0) + 1
                    fac = tuple(sorted(rest.items()))
                    u_min = _vec_add(
                        _vec_add(chi, q_single[e1][a0]), q_single[e2][b0]
                    )
                    summands.append(Summand(1, 0, _vec_add(u_min, q_pair), fac))
                    summands.append(Summand(-1, 0, u_min, fac))

        # interactions across three or more attachments would need a region of
        # size path-union + 3 at the very least; verify they cannot occur
        for e1, e2, e3 in combinations(range(s), 3):
            if not (groups_of[e1] and groups_of[e2] and groups_of[e3]):
                continue
            base = max(
                _tree_path_union(d, fx, fy)
                for fx, fy in combinations(
                    (info.edge_face[e1], info.edge_face[e2], info.edge_face[e3]), 2
                )
            )
            for t1, cls1 in groups_of[e1].items():
                for t2, cls2 in groups_of[e2].items():
                    for t3, cls3 in groups_of[e3].items():
                        a, b, c = cls1[0], cls2[0], cls3[0]
                        szs = [size_of_class[x] for x in (a, b, c)]
                        if base + sum(v - 2 for v in szs) > H:
                            continue
                        p3 = p_of([(e1, a), (e2, b), (e3, c)])
                        expect = _vec_add(
                            _vec_add(_vec_add(chi, q_single[e1][a]), q_single[e2][b]),
                            q_single[e3][c],
                        )
                        for (ex, cx), (ey, cy) in combinations(
                            ((e1, a), (e2, b), (e3, c)), 2
                        ):
                            expect = _vec_add(expect, q_pair_of(ex, cx, ey, cy))
                        if p3 != expect:
                            raise NotImplementedError(
                                f"three-way interaction at root {info.label}"
                            )

        equations[2 + ci] = summands

    sys = ClassSystem(
        var_names,
        linforms,
        equations,
        m,
        H,
        mode,
        patterns,
        [None, None] + list(roots),
    )
    if mode == "avoid":
        sys = specialize(sys, [0] * m)
    return sys


def specialize(sys: ClassSystem, u_values: Sequence) -> ClassSystem:
    """Substitute numeric values for the u variables.

    Exponent vectors are evaluated into the entry/summand coefficients; the
    result has u_dim 0.  Classes whose equations vanish (all terms carry a
    marked occurrence and u = 0) are removed.
    """

    def mono(exps: tuple):
        v = 1
        for e, val in zip(exps, u_values):
            if e:
                v = v * (val**e)
        return v

    new_lfs: list[LinForm] = []
    for lf in sys.linforms:
        entries = []
        for coeff, u, var in lf:
            c = coeff * mono(u)
            if c != 0:
                entries.append((c, (), var))
        new_lfs.append(tuple(entries))

    new_eqs: list[list[Summand]] = []
    for eq in sys.equations:
        out = []
        for smd in eq:
            c = smd.coeff * mono(smd.u)
            if c == 0:
                continue
            out.append(Summand(c, smd.z, (), smd.factors))
        new_eqs.append(out)

    out_sys = ClassSystem(
        list(sys.var_names),
        new_lfs,
        new_eqs,
        0,
        sys.H,
        sys.mode,
        list(sys.patterns),
        list(sys.roots),
        sys.groups,
    )
    return _gc_linforms(_prune_dead_classes(out_sys))


def _gc_linforms(sys: ClassSystem) -> ClassSystem:
    """Drop linear forms no summand references (after specialization)."""
    used = sorted(
        {lf for eq in sys.equations for s in eq for lf, _p in s.factors}
    )
    remap = {old: new for new, old in enumerate(used)}
    sys.linforms = [sys.linforms[i] for i in used]
    sys.equations = [
        [
            Summand(
                s.coeff,
                s.z,
                s.u,
                tuple((remap[lf], p) for lf, p in s.factors),
            )
            for s in eq
        ]
        for eq in sys.equations
    ]
    return sys


def _prune_dead_classes(sys: ClassSystem) -> ClassSystem:
    """Drop class variables whose right-hand side is identically zero."""
    while True:
        dead = set()
        for i in range(2, sys.num_vars):
            eq = sys.equations[i]
            if not eq or all(
                any(not sys.linforms[lf] for lf, _p in s.factors) for s in eq
            ):
                dead.add(i)
        if not dead:
            return sys
        keep = [i for i in range(sys.num_vars) if i not in dead]
        remap = {old: new for new, old in enumerate(keep)}
        lfs: list[LinForm] = []
        for lf in sys.linforms:
            lfs.append(
                tuple((c, u, remap[v]) for c, u, v in lf if v in remap)
            )
        eqs = []
        for i in keep:
            out = []
            for s in sys.equations[i]:
                if any(not lfs[lf] for lf, _p in s.factors):
                    continue
                out.append(s)
            eqs.append(out)
        sys = ClassSystem(
            [sys.var_names[i] for i in keep],
            lfs,
            eqs,
            sys.u_dim,
            sys.H,
            sys.mode,
            list(sys.patterns),
            [sys.roots[i] for i in keep],
            sys.groups,
        )


def group_classes(sys: ClassSystem) -> ClassSystem:
    """Merge class variables with structurally identical equations.

    Partition refinement: classes sharing a block must have identical
    equations after renaming variables to blocks, and every linear form must
    contain each block entirely or not at all (so block sums are well
    defined).  The solution series of y is unchanged.
    """
    classes = list(range(2, sys.num_vars))
    if not classes:
        return sys
    block = {Y: -1, Y_CIRC: -2}
    for c in classes:
        block[c] = 0

    def lf_sig(lf: LinForm):
        agg: dict[tuple, int] = {}
        for coeff, u, v in lf:
            key = (coeff, u, block[v])
            agg[key] = agg.get(key, 0) + 1
        return tuple(sorted(agg.items()))

    def eq_sig(i: int):
        out = []
        for s in sys.equations[i]:
            fac = tuple(sorted((lf_sig(sys.linforms[lf]), p) for lf, p in s.factors))
            out.append((s.coeff, s.z, s.u, fac))
        return tuple(sorted(out))

    while True:
        # split by equation signature
        changed = True
        while changed:
            changed = False
            sigs: dict[tuple, dict[tuple, list[int]]] = {}
            for c in classes:
                sigs.setdefault(block[c], {}).setdefault(eq_sig(c), []).append(c)
            nxt = 0
            newblock = {}
            for _b, by_sig in sorted(sigs.items()):
                for _sg, members in sorted(by_sig.items()):
                    for c in members:
                        newblock[c] = nxt
                    nxt += 1
            if any(newblock[c] != block[c] for c in classes):
                for c in classes:
                    block[c] = newblock[c]
                changed = True
        # split blocks that appear partially inside some linear form
        violated = False
        members_of: dict[int, set[int]] = {}
        for c in classes:
            members_of.setdefault(block[c], set()).add(c)
        for lf in sys.linforms:
            present: dict[tuple, set[int]] = {}
            for coeff, u, v in lf:
                if v in (Y, Y_CIRC):
                    continue
                present.setdefault((coeff, u, block[v]), set()).add(v)
            for (coeff, u, b), vs in present.items():
                if vs != members_of[b]:
                    # isolate the present members into a fresh block
                    nb = max(block[c] for c in classes) + 1
                    for v in vs:
                        block[v] = nb
                    violated = True
                    break
            if violated:
                break
        if not violated:
            break

    members_of = {}
    for c in classes:
        members_of.setdefault(block[c], set()).add(c)
    blocks = [sorted(members_of[b]) for b in sorted(members_of)]
    if len(blocks) == len(classes):
        out = replace(sys)
        out.groups = [[sys.var_names[c]] for c in classes]
        return out

    newvar = {Y: Y, Y_CIRC: Y_CIRC}
    names = ["y", "y_o"]
    groups = []
    reps = []
    for bi, mem in enumerate(blocks):
        for c in mem:
            newvar[c] = 2 + bi
        labels = [sys.var_names[c] for c in mem]
        groups.append(labels)
        names.append(_merge_labels(labels))
        reps.append(mem[0])

    lfs: list[LinForm] = []
    lf_map: dict[LinForm, int] = {}

    def conv_lf(lf: LinForm) -> int:
        agg: dict[tuple, int] = {}
        for coeff, u, v in lf:
            key = (coeff, u, newvar[v])
            agg[key] = agg.get(key, 0) + 1
        entries = []
        for (coeff, u, v), cnt in sorted(agg.items()):
            if v >= 2:
                size = len(blocks[v - 2])
                assert cnt == size, "partial block inside a linear form"
                entries.append((coeff, u, v))
            else:
                entries.append((coeff * cnt, u, v))
        t = tuple(entries)
        if t not in lf_map:
            lf_map[t] = len(lfs)
            lfs.append(t)
        return lf_map[t]

    def conv_eq(i: int, mult: int = 1) -> list[Summand]:
        out = []
        for s in sys.equations[i]:
            fac: dict[int, int] = {}
            for lf, p in s.factors:
                nlf = conv_lf(sys.linforms[lf])
                fac[nlf] = fac.get(nlf, 0) + p
            out.append(Summand(s.coeff * mult, s.z, s.u, tuple(sorted(fac.items()))))
        return out

    # a block variable is the sum of its members, whose equations coincide
    eqs = [conv_eq(Y), conv_eq(Y_CIRC)] + [
        conv_eq(r, len(blocks[bi])) for bi, r in enumerate(reps)
    ]
    return ClassSystem(
        names,
        lfs,
        eqs,
        sys.u_dim,
        sys.H,
        sys.mode,
        list(sys.patterns),
        [None, None] + [sys.roots[r] for r in reps],
        groups,
    )


def _merge_labels(labels: list[str]) -> str:
    sizes = {lab.split("[")[0] for lab in labels}
    if len(labels) == 1:
        return labels[0]
    if len(sizes) == 1:
        ords = sorted(int(lab.split("[")[1].rstrip("]")) for lab in labels)
        return f"{sizes.pop()}[{','.join(map(str, ords))}]"
    return "+".join(labels)


# ---------------------------------------------------------------------------
# serialization and display


def expand_terms(sys: ClassSystem, i: int) -> list[dict]:
    """Flatten equation i into monomials {coeff, z, u, vars}."""
    acc: dict[tuple, int] = {}

    def expand_factors(factors, idx, coeff, u, vars_):
        if idx == len(factors):
            key = (u, tuple(sorted(vars_.items())))
            acc[key] = acc.get(key, 0) + coeff
            return
        lf_idx, power = factors[idx]
        lf = sys.linforms[lf_idx]

        def choose(p, c2, u2, v2):
            if p == 0:
                expand_factors(factors, idx + 1, c2, u2, v2)
                return
            for coeff_e, u_e, var_e in lf:
                nv = dict(v2)
                nv[var_e] = nv.get(var_e, 0) + 1
                choose(p - 1, c2 * coeff_e, _vec_add(u2, u_e) if u_e else u2, nv)

        # expand multinomially; fine at catalog sizes
        choose(power, coeff, u, vars_)

    out: dict[tuple, dict] = {}
    for s in sys.equations[i]:
        acc.clear()
        expand_factors(s.factors, 0, s.coeff, s.u if s.u else _zero(sys.u_dim), {})
        for (u, vars_), coeff in acc.items():
            key = (s.z, u, vars_)
            if key in out:
                out[key]["coeff"] += coeff
            else:
                out[key] = {
                    "coeff": coeff,
                    "z": s.z,
                    "u": list(u),
                    "vars": {sys.var_names[v]: p for v, p in vars_},
                }
    terms = [t for t in out.values() if t["coeff"] != 0]
    terms.sort(key=lambda t: (t["z"], t["u"], sorted(t["vars"].items())))
    return terms


def system_to_json(sys: ClassSystem) -> dict:
    return {
        "variables": list(sys.var_names),
        "mode": sys.mode,
        "H": sys.H,
        "patterns": [p.name or str(p.shape) for p in sys.patterns],
        "equations": [
            {"lhs": sys.var_names[i], "terms": expand_terms(sys, i)}
            for i in range(sys.num_vars)
        ],
    }


def pretty_system(sys: ClassSystem) -> str:
    """Human-readable equations in factored form."""

    def u_str(u: tuple) -> str:
        parts = []
        for t, e in enumerate(u):
            if e == 1:
                parts.append(f"u{t + 1}" if sys.u_dim > 1 else "u")
            elif e > 1:
                parts.append((f"u{t + 1}" if sys.u_dim > 1 else "u") + f"^{e}")
        return "*".join(parts)

    def lf_str(lf: LinForm) -> str:
        parts = []
        for coeff, u, v in lf:
            bits = []
            if coeff != 1:
                bits.append(str(coeff))
            if any(u):
                bits.append(u_str(u))
            bits.append(sys.var_names[v])
            parts.append("*".join(bits))
        return " + ".join(parts)

    lines = []
    for i in range(sys.num_vars):
        pieces = []
        for s in sys.equations[i]:
            bits = []
            if s.coeff != 1 or (not s.factors and s.z == 0 and not any(s.u)):
                bits.append(str(s.coeff))
            if any(s.u):
                bits.append(u_str(s.u))
            if s.z == 1:
                bits.append("z")
            elif s.z > 1:
                bits.append(f"z^{s.z}")
            for lf, p in s.factors:
                body = lf_str(sys.linforms[lf])
                if len(sys.linforms[lf]) > 1 or p > 1:
                    body = f"({body})"
                bits.append(body if p == 1 else f"{body}^{p}")
            term = "*".join(bits) if bits else "1"
            pieces.append(term)
        rhs = " + ".join(pieces).replace("+ -", "- ")
        lines.append(f"{sys.var_names[i]} = {rhs}")
    return "\n".join(lines)


def residual_check(d_series: list, fixture: dict) -> bool:
    """Whether a defining-polynomial fixture annihilates the solved series.

    d_series: coefficients of D(z, u) (index = power of z), entries being
    ints or UPoly in one marking variable.  fixture: {(u_exp, z_exp, d_exp):
    integer coefficient}.
    """
    from .series import UPoly

    n_max = len(d_series) - 1

    def ser_mul(a, b):
        out = [0] * (n_max + 1)
        for i, ai in enumerate(a):
            if ai == 0:
                continue
            for j in range(n_max + 1 - i):
                if b[j] != 0:
                    out[i + j] = out[i + j] + ai * b[j]
        return out

    d_deg = max(dd for (_u, _z, dd) in fixture)
    powers = [[1] + [0] * n_max]
    for _ in range(d_deg):
        powers.append(ser_mul(powers[-1], list(d_series)))
    total = [0] * (n_max + 1)
    for (u_e, z_e, d_e), coeff in fixture.items():
        mono = coeff if u_e == 0 else UPoly({(u_e,): coeff})
        term = powers[d_e]
        for idx in range(z_e, n_max + 1):
            val = term[idx - z_e]
            if val != 0:
                total[idx] = total[idx] + mono * val
    return all(c == 0 for c in total)
