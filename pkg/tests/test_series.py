from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from polydis.core import load_patterns, occurrence_vector_census
from polydis.errors import MismatchAt
from polydis.series import (
    TruncSeries,
    UPoly,
    census_crosscheck,
    dbar_to_d,
    outerplanar_series,
    series_subs_u,
    solve_series,
    solve_series_fixedpoint,
)
from polydis.systems import build_baseline_system
from polydis.tables import RESTRICTED_COUNTS, SUPER_CATALAN


def test_solve_series_examples(system_cache):
    c3 = solve_series(system_cache(("C3",), "avoid"), 19)
    assert dbar_to_d(c3.dbar)[2:11] == [1, 0, 1, 1, 4, 8, 25, 64, 191]
    c4 = solve_series(system_cache(("C4",), "avoid"), 19)
    assert dbar_to_d(c4.dbar)[12] == 5240
    assert solve_series(build_baseline_system(), 8).dbar[1:8] == [1, 1, 3, 11, 45, 197, 903]


def test_appendix_all_columns(system_cache):
    specs = {
        "C5": ("C5",),
        "C6": ("C6",),
        "patternI": ("patternI",),
        "patternII": ("patternII",),
        "patternI&II": ("patternI", "patternII"),
    }
    for name, spec in specs.items():
        sol = solve_series(system_cache(spec, "avoid"), 19)
        assert dbar_to_d(sol.dbar)[2:21] == RESTRICTED_COUNTS[name], name


def test_partition_identity(system_cache):
    sys = system_cache(("C4",), "full")
    sol = solve_series(sys, 12)
    for n in range(13):
        total = sol.coeffs[1][n]
        for i in range(2, sys.num_vars):
            total = total + sol.coeffs[i][n]
        assert (sol.dbar[n] - total) == 0


def test_fixedpoint_matches_recurrence(system_cache):
    sys = system_cache(("C4",), "avoid")
    a = solve_series(sys, 10)
    b = solve_series_fixedpoint(sys, 10)
    assert a.coeffs == b.coeffs


def test_fixedpoint_valuation_contract(system_cache):
    # round k never changes coefficients below order k
    sys = system_cache(("C3",), "avoid")
    N = 9
    import copy

    from polydis.series import u_monomial_value

    nv = sys.num_vars
    cur = [[0] * (N + 1) for _ in range(nv)]
    history = []
    for _ in range(N + 2):
        nxt = solve_series_fixedpoint_step(sys, cur, N)
        history.append(nxt)
        cur = nxt
    final = history[-1]
    for k, state in enumerate(history):
        for i in range(nv):
            for n in range(min(k, N) + 1):
                assert state[i][n] == final[i][n]


def solve_series_fixedpoint_step(sys, cur, N):
    """One literal iteration round (helper mirroring the reference solver)."""
    from polydis.series import u_monomial_value

    lfv = []
    for lf in sys.linforms:
        acc = [0] * (N + 1)
        for coeff, u, v in lf:
            ue = u_monomial_value(u, sys.u_dim) if sys.u_dim else 1
            for n in range(N + 1):
                if cur[v][n] != 0:
                    acc[n] = acc[n] + coeff * (ue * cur[v][n])
        lfv.append(acc)

    def trunc_mul(a, b):
        out = [0] * (N + 1)
        for i, ai in enumerate(a):
            if ai == 0:
                continue
            for j in range(N + 1 - i):
                if b[j] != 0:
                    out[i + j] = out[i + j] + ai * b[j]
        return out

    nxt = []
    for i in range(sys.num_vars):
        acc = [0] * (N + 1)
        for s in sys.equations[i]:
            term = None
            for lf, p in s.factors:
                for _ in range(p):
                    term = lfv[lf] if term is None else trunc_mul(term, lfv[lf])
            if term is None:
                term = [1] + [0] * N
            ue = u_monomial_value(s.u, sys.u_dim) if sys.u_dim else 1
            for n in range(N + 1 - s.z):
                if term[n] != 0:
                    acc[n + s.z] = acc[n + s.z] + s.coeff * (ue * term[n])
        nxt.append(acc)
    return nxt


def test_census_crosscheck_runs(system_cache):
    pats = load_patterns(["C3"])
    sys = system_cache(("C3",), "full")
    for n in (5, 7, 9):
        assert census_crosscheck(sys, occurrence_vector_census(pats, n), n)
    broken = dict(occurrence_vector_census(pats, 6))
    first = next(iter(broken))
    broken[first] += 1
    with pytest.raises(MismatchAt):
        census_crosscheck(sys, broken, 6)


def test_dbar_to_d():
    assert dbar_to_d([0, 1, 1, 3]) == [0, 0, 1, 1, 3]
    assert dbar_to_d([0]) == [0, 0]


def test_series_subs_u(system_cache):
    sol = solve_series(system_cache(("C3",), "full"), 8)
    assert series_subs_u(sol.dbar, [1])[1:8] == SUPER_CATALAN[:7]
    avoid = solve_series(system_cache(("C3",), "avoid"), 8)
    assert series_subs_u(sol.dbar, [0]) == avoid.dbar


def test_outerplanar_series():
    d = dbar_to_d(solve_series(build_baseline_system(), 12).dbar)
    bp, b, cp, c = outerplanar_series(d, 10)
    # n! [z^n] B = (n-1)!/2 [z^n] D
    for n in range(2, 11):
        assert b[n] == Fraction(d[n], 2 * n) + (Fraction(1, 4) if n == 2 else 0)
    assert b[3] == Fraction(1, 6)
    assert cp[0] == 1  # the single vertex
    # first outerplanar counts: n! [z^n] C
    from math import factorial

    counts = [c[n] * factorial(n) for n in range(1, 6)]
    assert counts[0] == 1 and counts[1] == 1
    assert all(x.denominator == 1 for x in counts)


def test_outerplanar_series_triangle_free(system_cache):
    d = dbar_to_d(solve_series(system_cache(("C3",), "avoid"), 12).dbar)
    bp, b, cp, c = outerplanar_series(d, 10)
    from math import factorial

    # labelled 2-connected triangle-free outerplanar counts: n!/(2n) d_n
    for n in range(3, 11):
        bn = b[n] * factorial(n)
        assert bn == Fraction(factorial(n - 1) * d[n], 2)


@settings(max_examples=30, deadline=None)
@given(
    st.lists(st.integers(-4, 4), min_size=3, max_size=6),
    st.lists(st.integers(-4, 4), min_size=3, max_size=6),
)
def test_exp_homomorphism(a, b):
    n = min(len(a), len(b)) - 1
    x = TruncSeries([0] + [Fraction(v) for v in a[1:]], n)
    y = TruncSeries([0] + [Fraction(v) for v in b[1:]], n)
    lhs = (x + y).exp()
    rhs = x.exp() * y.exp()
    assert lhs.c[: n + 1] == rhs.c[: n + 1]


def test_upoly_ring():
    u = UPoly.monomial((1,))
    assert (u + 1) * (u - 1) == u * u - 1
    assert (2 * u).subs([3]) == 6
    assert (u * 0) == 0
    two = UPoly.monomial((0,), 2)
    assert two == 2
