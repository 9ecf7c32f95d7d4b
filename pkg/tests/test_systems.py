import json

import pytest

from polydis.core import load_patterns, occurrence_vector_census
from polydis.series import UPoly, census_crosscheck, dbar_to_d, solve_series
from polydis.systems import (
    Summand,
    build_baseline_system,
    build_system,
    expand_terms,
    group_classes,
    pretty_system,
    residual_check,
    specialize,
    system_to_json,
)
from polydis.tables import DEFINING_POLY_C3, DEFINING_POLY_C4, SUPER_CATALAN


def u1(series):
    return [c.subs([1]) if isinstance(c, UPoly) else c for c in series]


def test_c3_full_shape(system_cache):
    sys = system_cache(("C3",), "full")
    assert sys.var_names == ["y", "y_o", "3[1]"]
    txt = pretty_system(sys)
    assert "y_o = (y)^3 + y*y_o - 1*z*y + z" in txt
    terms = expand_terms(sys, 2)  # 3[1] = u (y_o + 3[1])^2
    assert all(t["u"] == [1] for t in terms)
    assert {tuple(sorted(t["vars"].items())) for t in terms} == {
        (("y_o", 2),),
        (("3[1]", 1), ("y_o", 1)),
        (("3[1]", 2),),
    }


def test_c4_avoid_shape(system_cache):
    sys = system_cache(("C4",), "avoid")
    assert sys.var_names == ["y", "y_o", "3[1]"]
    txt = pretty_system(sys)
    assert "(y)^4" in txt
    assert "3[1] = (y_o)^2" in txt


def test_signed_terms_only_in_circ_equation(system_cache):
    for spec, mode in [(("C4",), "avoid"), (("C5",), "avoid"), (("C4",), "full")]:
        sys = system_cache(spec, mode)
        for i, eq in enumerate(sys.equations):
            for s in eq:
                if s.coeff < 0:
                    assert i == 1  # y_o carries the only signed term
        # non-negativity of the expanded monomials everywhere else
        for i in range(sys.num_vars):
            if i == 1:
                continue
            assert all(t["coeff"] > 0 for t in expand_terms(sys, i))


def test_elimination_identity_c3(system_cache):
    # the solved series satisfies y = y^3 (1-u) + y^2 (1+u) - z y + z
    sys = system_cache(("C3",), "full")
    N = 14
    sol = solve_series(sys, N)
    y = sol.dbar

    def mul(a, b):
        out = [0] * (N + 1)
        for i in range(N + 1):
            if a[i] == 0:
                continue
            for j in range(N + 1 - i):
                if b[j] != 0:
                    out[i + j] = out[i + j] + a[i] * b[j]
        return out

    u = UPoly.monomial((1,))
    y2 = mul(y, y)
    y3 = mul(y2, y)
    for n in range(N + 1):
        rhs = y3[n] * (1 - u) + y2[n] * (1 + u)
        rhs = rhs - (y[n - 1] if n >= 1 else 0)
        rhs = rhs + (1 if n == 1 else 0)
        assert (y[n] - rhs) == 0


def test_group_classes_merges(system_cache):
    grouped = system_cache(("C4",), "full", grouped=True)
    groups = {frozenset(g) for g in grouped.groups}
    assert frozenset({"3[2]", "3[3]"}) in groups
    merged_pairs = sum(1 for g in grouped.groups if len(g) == 2)
    assert merged_pairs == 3 and len(grouped.groups) == 7

    g5 = system_cache(("C5",), "avoid", grouped=True)
    sizes = sorted(len(g) for g in g5.groups)
    assert sizes == [1, 1, 1, 2, 3, 3]

    ungrouped = system_cache(("C5",), "avoid")
    assert solve_series(g5, 16).dbar == solve_series(ungrouped, 16).dbar


def test_group_classes_c6_shapes(system_cache):
    g6 = system_cache(("C6",), "avoid", grouped=True)
    txt = pretty_system(g6)
    # the one pentagon class and the grouped square chains of the catalog
    assert "(y_o + 5[1])^8" in txt
    assert "(y_o + 5[1])^3" in txt
    assert "+ 5[1])^4" in txt  # pentagon equation over circ + 4-rooted + itself
    sizes = sorted(len(g) for g in g6.groups)
    assert sizes == [1, 1, 1, 1, 1, 2, 2, 3, 3, 5, 5]


def test_specialize(system_cache):
    full = system_cache(("C3",), "full")
    at1 = specialize(full, [1])
    assert solve_series(at1, 8).dbar[1:9] == SUPER_CATALAN[:8]
    at0 = specialize(full, [0])
    avoid = system_cache(("C3",), "avoid")
    assert solve_series(at0, 12).dbar == solve_series(avoid, 12).dbar
    full4 = system_cache(("C4",), "full")
    assert (
        solve_series(specialize(full4, [0]), 12).dbar
        == solve_series(system_cache(("C4",), "avoid"), 12).dbar
    )


def test_strong_connectivity(system_cache):
    for spec, mode in [
        (("C3",), "full"),
        (("C4",), "full"),
        (("C3", "C4"), "full"),
        (("C5",), "avoid"),
        (("C6",), "avoid"),
        (("patternI",), "avoid"),
        (("patternII",), "avoid"),
        (("patternI", "patternII"), "avoid"),
    ]:
        assert system_cache(spec, mode).is_strongly_connected(), spec
        assert system_cache(spec, mode, grouped=True).is_strongly_connected(), spec


def test_residual_check_fixtures(system_cache):
    d3 = dbar_to_d(solve_series(system_cache(("C3",), "full"), 20).dbar)
    assert residual_check(d3, DEFINING_POLY_C3)
    d4 = dbar_to_d(solve_series(system_cache(("C4",), "full"), 16).dbar)
    assert residual_check(d4, DEFINING_POLY_C4)
    # wrong fixture leaves a residual
    assert not residual_check(d3, DEFINING_POLY_C4)
    assert not residual_check(d4, DEFINING_POLY_C3)


def test_census_crosscheck_pair_corrections(system_cache):
    # the marked 5-cycle system needs genuinely pairwise interaction terms
    sys = system_cache(("C5",), "full")
    pats = load_patterns(["C5"])
    for n in (7, 8, 9):
        census_crosscheck(sys, occurrence_vector_census(pats, n), n)
    neg = sum(1 for i, eq in enumerate(sys.equations) if i != 1 for s in eq if s.coeff < 0)
    assert neg > 0


def test_system_json_roundtrip(system_cache):
    sys = system_cache(("C4",), "avoid")
    blob = system_to_json(sys)
    text = json.dumps(blob, sort_keys=True)
    again = json.loads(text)
    assert again["variables"] == ["y", "y_o", "3[1]"]
    eq_yo = next(e for e in again["equations"] if e["lhs"] == "y_o")
    coeffs = {(t["z"], tuple(sorted(t["vars"].items()))): t["coeff"] for t in eq_yo["terms"]}
    assert coeffs[(1, ())] == 1
    assert coeffs[(1, (("y", 1),))] == -1
    assert coeffs[(0, (("y", 4),))] == 1


def test_baseline_system():
    sol = solve_series(build_baseline_system(), 12)
    assert sol.dbar[1:12] == SUPER_CATALAN[:11]
