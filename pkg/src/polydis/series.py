"""Exact truncated power series and the system solver.

Coefficients live in a ring with + and *: plain ints (or Fractions) once the
u variables are fixed, UPoly (integer-coefficient polynomials in u_1..u_m)
for marked runs.  Systems are solved order by order: every product on a
right-hand side has valuation >= 2 apart from explicit z-terms, so the n-th
coefficient of each variable only needs coefficients below n.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Optional, Sequence

from .errors import MismatchAt, NonConvergence
from .systems import ClassSystem, Summand, Y, Y_CIRC


class UPoly:
    """Polynomial in the marking variables, exponent-tuple -> coefficient."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Optional[dict] = None):
        self.coeffs = {k: v for k, v in (coeffs or {}).items() if v != 0}

    @staticmethod
    def monomial(exps: tuple, coeff: int = 1) -> "UPoly":
        return UPoly({tuple(exps): coeff})

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other) -> bool:
        if isinstance(other, UPoly):
            return self.coeffs == other.coeffs
        if other == 0:
            return not self.coeffs
        return len(self.coeffs) == 1 and self.coeffs.get(self._zero_key()) == other

    def __hash__(self):
        return hash(tuple(sorted(self.coeffs.items())))

    def _zero_key(self):
        k = next(iter(self.coeffs))
        return (0,) * len(k)

    def __add__(self, other):
        if isinstance(other, UPoly):
            out = dict(self.coeffs)
            for k, v in other.coeffs.items():
                nv = out.get(k, 0) + v
                if nv:
                    out[k] = nv
                elif k in out:
                    del out[k]
            return UPoly(out)
        if other == 0:
            return self
        out = dict(self.coeffs)
        k = self._zero_key() if self.coeffs else ()
        nv = out.get(k, 0) + other
        out[k] = nv
        return UPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return UPoly({k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, UPoly):
            out: dict = {}
            for k1, v1 in self.coeffs.items():
                for k2, v2 in other.coeffs.items():
                    k = tuple(a + b for a, b in zip(k1, k2))
                    nv = out.get(k, 0) + v1 * v2
                    if nv:
                        out[k] = nv
                    elif k in out:
                        del out[k]
            return UPoly(out)
        if other == 0:
            return 0
        return UPoly({k: v * other for k, v in self.coeffs.items()})

    __rmul__ = __mul__

    def __repr__(self):
        return f"UPoly({self.coeffs!r})"

    def subs(self, values: Sequence):
        total = 0
        for k, v in self.coeffs.items():
            term = v
            for e, val in zip(k, values):
                if e:
                    term = term * val**e
            total += term
        return total


def u_monomial_value(exps: tuple, u_dim: int):
    """The ring element u^exps: 1 for the zero vector, a UPoly otherwise."""
    if not any(exps):
        return 1
    return UPoly.monomial(exps)


# ---------------------------------------------------------------------------
# system solving, one coefficient at a time


class SolvedSeries:
    """Per-variable truncated series for a solved system."""

    def __init__(self, sys: ClassSystem, order: int, coeffs: list[list]):
        self.system = sys
        self.order = order
        self.coeffs = coeffs  # coeffs[var][n]

    def var(self, name: str) -> list:
        return self.coeffs[self.system.var_names.index(name)]

    @property
    def dbar(self) -> list:
        return self.coeffs[Y]

    @property
    def d(self) -> list:
        return dbar_to_d(self.coeffs[Y])


def solve_series(sys: ClassSystem, N: int) -> SolvedSeries:
    """Solve the system as truncated series through z^N.

    Equivalent to N rounds of fixed-point iteration (each round fixes the next
    coefficient); implemented as an order recurrence with incrementally
    extended products so large truncation orders stay affordable.
    """
    nv = sys.num_vars
    var_c: list[list] = [[0] * (N + 1) for _ in range(nv)]

    # node graph: linforms, then shared power/product chains per summand
    lf_vals: list[list] = [[0] * (N + 1) for _ in sys.linforms]
    muls: list[tuple[int, int]] = []  # (left node, right node); node ids:
    # 0..len(linforms)-1 are linforms, len(linforms)+i is muls[i]
    node_vals: list[list] = list(lf_vals)
    mul_index: dict[tuple[int, int], int] = {}
    n_lf = len(sys.linforms)

    def mul_node(a: int, b: int) -> int:
        key = (a, b) if a <= b else (b, a)
        if key not in mul_index:
            mul_index[key] = n_lf + len(muls)
            muls.append(key)
            node_vals.append([0] * (N + 1))
        return mul_index[key]

    def pow_node(lf: int, p: int) -> int:
        node = lf
        for _ in range(p - 1):
            node = mul_node(node, lf)
        return node

    summand_nodes: list[list[tuple]] = []  # per var: (coeff, z, u_elem, node, linear_lf)
    for i in range(nv):
        rows = []
        for s in sys.equations[i]:
            u_elem = u_monomial_value(s.u, sys.u_dim) if sys.u_dim else 1
            if s.z == 0 and len(s.factors) == 1 and s.factors[0][1] == 1:
                # genuinely linear term: must be evaluated from the current
                # order of its variables (only y's equation does this)
                rows.append((s.coeff, 0, u_elem, None, s.factors[0][0]))
                continue
            node: Optional[int] = None
            for lf, p in s.factors:
                pn = pow_node(lf, p)
                node = pn if node is None else mul_node(node, pn)
            rows.append((s.coeff, s.z, u_elem, node, None))
        summand_nodes.append(rows)

    var_order = list(range(2, nv)) + ([Y_CIRC] if nv > 1 else []) + [Y]

    for n in range(1, N + 1):
        # products first: they only need coefficients below n
        for mi, (a, b) in enumerate(muls):
            va, vb = node_vals[a], node_vals[b]
            node_vals[n_lf + mi][n] = sum(
                va[i] * vb[n - i] for i in range(1, n) if va[i] != 0 and vb[n - i] != 0
            )
        for i in var_order:
            acc = 0
            for coeff, z_e, u_elem, node, lin_lf in summand_nodes[i]:
                if lin_lf is not None:
                    val = 0
                    for c_e, u_e, v in sys.linforms[lin_lf]:
                        vn = var_c[v][n]
                        if vn == 0:
                            continue
                        ue = u_monomial_value(u_e, sys.u_dim) if sys.u_dim else 1
                        t = vn if ue == 1 else ue * vn
                        val = val + (t if c_e == 1 else c_e * t)
                    if val != 0:
                        term = val if u_elem == 1 else u_elem * val
                        acc = acc + (term if coeff == 1 else coeff * term)
                    continue
                if node is None:
                    if n == z_e:
                        acc = acc + coeff * u_elem
                    continue
                idx = n - z_e
                if idx < 0:
                    continue
                val = node_vals[node][idx]
                if val == 0:
                    continue
                term = val if u_elem == 1 else u_elem * val
                acc = acc + (term if coeff == 1 else coeff * term)
            var_c[i][n] = acc
        for li, lf in enumerate(sys.linforms):
            acc = 0
            for coeff, u, v in lf:
                val = var_c[v][n]
                if val == 0:
                    continue
                u_elem = u_monomial_value(u, sys.u_dim) if sys.u_dim else 1
                term = val if u_elem == 1 else u_elem * val
                acc = acc + (term if coeff == 1 else coeff * term)
            lf_vals[li][n] = acc
            node_vals[li][n] = acc

    return SolvedSeries(sys, N, var_c)


def solve_series_fixedpoint(sys: ClassSystem, N: int, max_rounds: Optional[int] = None) -> SolvedSeries:
    """Literal fixed-point iteration on truncated series (reference solver).

    Each round gains at least one order of agreement; rounds never change
    already-final coefficients.  Used for cross-checking the recurrence
    engine; N rounds always suffice for a well-formed system.
    """
    nv = sys.num_vars
    cur = [[0] * (N + 1) for _ in range(nv)]

    def trunc_mul(a, b):
        out = [0] * (N + 1)
        for i, ai in enumerate(a):
            if ai == 0:
                continue
            for j in range(N + 1 - i):
                if b[j] != 0:
                    out[i + j] = out[i + j] + ai * b[j]
        return out

    rounds = max_rounds or N + 1
    for rnd in range(rounds):
        lfv = []
        for lf in sys.linforms:
            acc = [0] * (N + 1)
            for coeff, u, v in lf:
                u_elem = u_monomial_value(u, sys.u_dim) if sys.u_dim else 1
                for n in range(N + 1):
                    if cur[v][n] != 0:
                        acc[n] = acc[n] + coeff * (u_elem * cur[v][n])
            lfv.append(acc)
        nxt = []
        for i in range(nv):
            acc = [0] * (N + 1)
            for s in sys.equations[i]:
                term = None
                for lf, p in s.factors:
                    for _ in range(p):
                        term = lfv[lf] if term is None else trunc_mul(term, lfv[lf])
                if term is None:
                    term = [0] * (N + 1)
                    term[0] = 1
                u_elem = u_monomial_value(s.u, sys.u_dim) if sys.u_dim else 1
                for n in range(N + 1 - s.z):
                    if term[n] != 0:
                        acc[n + s.z] = acc[n + s.z] + s.coeff * (u_elem * term[n])
            nxt.append(acc)
        stable = all(nxt[i][n] == cur[i][n] for i in range(nv) for n in range(N + 1))
        cur = nxt
        if stable:
            return SolvedSeries(sys, N, cur)
    if max_rounds is not None:
        raise NonConvergence(f"no fixed point after {rounds} rounds")
    return SolvedSeries(sys, N, cur)


def dbar_to_d(dbar: list) -> list:
    """Shift by one power of z: [z^n] D = [z^(n-1)] Dbar."""
    return [0] + list(dbar)


def series_subs_u(series: list, values: Sequence) -> list:
    """Evaluate u-polynomial coefficients at fixed u values."""
    out = []
    for c in series:
        out.append(c.subs(values) if isinstance(c, UPoly) else c)
    return out


# ---------------------------------------------------------------------------
# plain truncated series helpers (rational coefficients)


class TruncSeries:
    """Dense truncated series with exact coefficients."""

    def __init__(self, coeffs: Sequence, order: Optional[int] = None):
        cs = list(coeffs)
        if order is not None:
            cs = cs[: order + 1] + [0] * (order + 1 - len(cs))
        self.c = cs

    @property
    def order(self) -> int:
        return len(self.c) - 1

    def __getitem__(self, n: int):
        return self.c[n] if 0 <= n <= self.order else 0

    def __eq__(self, other):
        return isinstance(other, TruncSeries) and self.c == other.c

    def __add__(self, other):
        n = min(self.order, other.order)
        return TruncSeries([self[i] + other[i] for i in range(n + 1)])

    def __sub__(self, other):
        n = min(self.order, other.order)
        return TruncSeries([self[i] - other[i] for i in range(n + 1)])

    def __mul__(self, other):
        if not isinstance(other, TruncSeries):
            return TruncSeries([x * other for x in self.c])
        n = min(self.order, other.order)
        out = [0] * (n + 1)
        for i in range(n + 1):
            if self.c[i] == 0:
                continue
            for j in range(n + 1 - i):
                if other.c[j] != 0:
                    out[i + j] += self.c[i] * other.c[j]
        return TruncSeries(out)

    __rmul__ = __mul__

    def shift(self, k: int = 1) -> "TruncSeries":
        return TruncSeries([0] * k + self.c[: max(0, len(self.c) - k)])

    def div_z(self) -> "TruncSeries":
        assert self.c[0] == 0
        return TruncSeries(self.c[1:] + [0])

    def integrate(self) -> "TruncSeries":
        out = [Fraction(0)]
        for n, cn in enumerate(self.c[:-1] if self.c else []):
            out.append(Fraction(cn, n + 1) if cn else Fraction(0))
        return TruncSeries(out)

    def exp(self) -> "TruncSeries":
        assert self.c[0] == 0, "exp needs zero constant term"
        n = self.order
        e = [Fraction(1)] + [Fraction(0)] * n
        for k in range(1, n + 1):
            acc = Fraction(0)
            for j in range(1, k + 1):
                if self.c[j]:
                    acc += j * Fraction(self.c[j]) * e[k - j]
            e[k] = acc / k
        return TruncSeries(e)

    def compose(self, inner: "TruncSeries") -> "TruncSeries":
        assert inner[0] == 0, "composition needs valuation >= 1"
        n = min(self.order, inner.order)
        out = TruncSeries([0] * (n + 1))
        # Horner from the top coefficient down
        for k in range(n, -1, -1):
            out = out * inner
            out = TruncSeries([out[0] + self.c[k]] + out.c[1:])
        return TruncSeries(out.c, n)

    def eval(self, x):
        total = 0
        for cn in reversed(self.c):
            total = total * x + cn
        return total


def outerplanar_series(d_series: Sequence, N: int):
    """(B', B, C', C) to order N from the dissection series D(z) at fixed u.

    B' = D/(2z) + z/2 exactly; B by termwise integration; zC' solves
    y = z exp(B'(y)); C by integration of C'.
    """
    d = TruncSeries([Fraction(x) for x in d_series], N + 1)
    bp = d.div_z() * Fraction(1, 2)
    bp = TruncSeries([bp[n] + (Fraction(1, 2) if n == 1 else 0) for n in range(N + 1)])
    b = bp.integrate()
    b = TruncSeries(b.c, N)
    # fixed point y = z * exp(B'(y)); gains one order per round
    yser = TruncSeries([Fraction(0)] * (N + 1))
    for _ in range(N + 1):
        yser = TruncSeries(bp.compose(yser).exp().c, N).shift(1)
        yser = TruncSeries(yser.c, N)
    cp = yser.div_z()
    c = TruncSeries(cp.c[: N] + [Fraction(0)], N).integrate()
    return bp, b, cp, TruncSeries(c.c, N)


def census_crosscheck(sys: ClassSystem, census: dict, n: int) -> bool:
    """Compare the z^n coefficient of D(z, u) with a brute-force census."""
    sol = solve_series(sys, n - 1)
    coeff = sol.dbar[n - 1]
    m = sys.u_dim
    if isinstance(coeff, UPoly):
        got = dict(coeff.coeffs)
    else:
        got = {(0,) * m: coeff} if coeff else {}
    want = {k: v for k, v in census.items() if v}
    if got != want:
        raise MismatchAt(n, f"system {got} vs census {want}")
    return True
