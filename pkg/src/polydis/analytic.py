"""Numeric pipeline: branch evaluation, singularities, asymptotic constants.

Everything runs in mpmath at a configurable working precision.  Branches are
always seeded from exact partial sums of the solved series, and the
combinatorial branch is the unique one with non-negative class values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import mpmath as mp

from .errors import (
    DegenerateKernel,
    DerivativeUnstable,
    NewtonDiverged,
    NoSingularityInRange,
    SubcriticalityViolated,
)
from .series import SolvedSeries, UPoly, dbar_to_d, solve_series
from .systems import ClassSystem, Y

DEFAULT_DPS = 30
SEED_ORDER = 40


def _as_mp(x):
    return mp.mpf(x) if not isinstance(x, mp.mpf) else x


class AnalyticSystem:
    """A class system pinned at numeric u values, with Newton machinery."""

    def __init__(
        self,
        sys: ClassSystem,
        u: Sequence = (),
        dps: int = DEFAULT_DPS,
        seed_series: Optional[SolvedSeries] = None,
    ):
        if sys.u_dim and len(u) != sys.u_dim:
            raise ValueError("u values must match the system's marking variables")
        self.sys = sys
        self.u = [_as_mp(x) for x in u]
        self.dps = dps
        self.n = sys.num_vars
        self._seed_series = seed_series

    # -- series seeding ----------------------------------------------------
    def _series(self) -> SolvedSeries:
        if self._seed_series is None:
            self._seed_series = solve_series(self.sys, SEED_ORDER)
        return self._seed_series

    def seed(self, z) -> list:
        sol = self._series()
        z = _as_mp(z)
        out = []
        for var in range(self.n):
            acc = mp.mpf(0)
            zp = mp.mpf(1)
            for nn in range(sol.order + 1):
                c = sol.coeffs[var][nn]
                if isinstance(c, UPoly):
                    c = c.subs(self.u)
                if c:
                    acc += c * zp
                zp *= z
            out.append(acc)
        return out

    # -- pointwise evaluation ----------------------------------------------
    def _u_mono(self, exps: tuple):
        v = mp.mpf(1)
        for e, val in zip(exps, self.u):
            if e:
                v *= val**e
        return v

    def _lf_values(self, yvec) -> list:
        out = []
        for lf in self.sys.linforms:
            acc = mp.mpf(0)
            for coeff, u_e, var in lf:
                acc += coeff * self._u_mono(u_e) * yvec[var]
            out.append(acc)
        return out

    def F(self, z, yvec) -> list:
        z = _as_mp(z)
        lfv = self._lf_values(yvec)
        out = []
        for i in range(self.n):
            acc = mp.mpf(0)
            for s in self.sys.equations[i]:
                term = mp.mpf(s.coeff) * self._u_mono(s.u) * z**s.z
                for lf, p in s.factors:
                    term *= lfv[lf] ** p
                acc += term
            out.append(acc)
        return out

    def Fy(self, z, yvec) -> mp.matrix:
        z = _as_mp(z)
        lfv = self._lf_values(yvec)
        dlf = []  # dlf[lf][var] coefficients
        for lf in self.sys.linforms:
            row = {}
            for coeff, u_e, var in lf:
                row[var] = row.get(var, mp.mpf(0)) + coeff * self._u_mono(u_e)
            dlf.append(row)
        J = mp.matrix(self.n, self.n)
        for i in range(self.n):
            for s in self.sys.equations[i]:
                base = mp.mpf(s.coeff) * self._u_mono(s.u) * z**s.z
                vals = [(lf, p, lfv[lf]) for lf, p in s.factors]
                for k, (lf, p, v) in enumerate(vals):
                    outer = base
                    for k2, (lf2, p2, v2) in enumerate(vals):
                        if k2 == k:
                            outer *= p * v ** (p - 1)
                        else:
                            outer *= v2**p2
                    for var, dcoef in dlf[lf].items():
                        J[i, var] += outer * dcoef
        return J

    def Fz(self, z, yvec) -> list:
        z = _as_mp(z)
        lfv = self._lf_values(yvec)
        out = []
        for i in range(self.n):
            acc = mp.mpf(0)
            for s in self.sys.equations[i]:
                if s.z == 0:
                    continue
                term = mp.mpf(s.coeff) * self._u_mono(s.u) * s.z * z ** (s.z - 1)
                for lf, p in s.factors:
                    term *= lfv[lf] ** p
                acc += term
            out.append(acc)
        return out

    def Fu(self, z, yvec) -> mp.matrix:
        """Partial derivatives with respect to each marking variable."""
        z = _as_mp(z)
        m = self.sys.u_dim
        lfv = self._lf_values(yvec)
        J = mp.matrix(self.n, m) if m else mp.matrix(self.n, 1)
        for i in range(self.n):
            for s in self.sys.equations[i]:
                zpart = mp.mpf(s.coeff) * z**s.z
                for t in range(m):
                    # product rule across the u-monomial and every linear form
                    term = zpart
                    # d(u^s.u)/du_t * rest
                    if s.u[t]:
                        du = s.u[t] * self._u_mono(
                            tuple(e - (1 if j == t else 0) for j, e in enumerate(s.u))
                        )
                        part = du
                        for lf, p in s.factors:
                            part *= lfv[lf] ** p
                        J[i, t] += term * part
                    base = self._u_mono(s.u)
                    vals = [(lf, p, lfv[lf]) for lf, p in s.factors]
                    for k, (lf, p, v) in enumerate(vals):
                        dv = mp.mpf(0)
                        for coeff, u_e, var in self.sys.linforms[lf]:
                            if u_e[t]:
                                dmono = u_e[t] * self._u_mono(
                                    tuple(
                                        e - (1 if j == t else 0)
                                        for j, e in enumerate(u_e)
                                    )
                                )
                                dv += coeff * dmono * yvec[var]
                        if dv == 0:
                            continue
                        part = base * p * v ** (p - 1) * dv
                        for k2, (lf2, p2, v2) in enumerate(vals):
                            if k2 != k:
                                part *= v2**p2
                        J[i, t] += term * part
        return J

    # -- Newton ------------------------------------------------------------
    def newton(self, z, y0, tol=None, max_iter=60) -> list:
        if mp.mp.dps < self.dps:
            with mp.workdps(self.dps):
                return self.newton(z, y0, tol, max_iter)
        z = _as_mp(z)
        tol = mp.mpf(10) ** (-(self.dps - 5)) if tol is None else mp.mpf(tol)
        y = [_as_mp(v) for v in y0]
        for _ in range(max_iter):
            f = self.F(z, y)
            res = [f[i] - y[i] for i in range(self.n)]
            err = max(abs(r) for r in res)
            if err < tol:
                return y
            J = self.Fy(z, y)
            A = mp.eye(self.n) - J
            try:
                step = mp.lu_solve(A, mp.matrix(res))
            except ZeroDivisionError as exc:
                raise NewtonDiverged(f"singular Jacobian at z={z}") from exc
            y = [y[i] + step[i] for i in range(self.n)]
            if any(abs(v) > 100 for v in y) or any(mp.isnan(v) for v in y):
                raise NewtonDiverged(f"iterates diverged at z={z}")
        raise NewtonDiverged(f"no convergence at z={z}")

    def branch(self, z, seed=None) -> list:
        """The combinatorial branch (non-negative class values) at z."""
        y = self.newton(z, self.seed(z) if seed is None else seed)
        if any(v < -mp.mpf(10) ** (-(self.dps - 10)) for v in y):
            raise NewtonDiverged(f"negative branch values at z={z}")
        return y

    def det_char(self, z, yvec):
        return mp.det(mp.eye(self.n) - self.Fy(z, yvec))

    def y_z(self, z, yvec) -> list:
        """Implicit z-derivative of the branch: (I - Fy) y' = Fz."""
        A = mp.eye(self.n) - self.Fy(z, yvec)
        sol = mp.lu_solve(A, mp.matrix(self.Fz(z, yvec)))
        return [sol[i] for i in range(self.n)]

    def y_u(self, z, yvec) -> mp.matrix:
        A = mp.eye(self.n) - self.Fy(z, yvec)
        out = mp.matrix(self.n, max(1, self.sys.u_dim))
        Fu = self.Fu(z, yvec)
        for t in range(self.sys.u_dim):
            col = mp.lu_solve(A, mp.matrix([Fu[i, t] for i in range(self.n)]))
            for i in range(self.n):
                out[i, t] = col[i]
        return out


@dataclass
class SingularExpansion:
    """Square-root expansion y(z) = y0 + c1 s + c2 s^2, s = sqrt(1 - z/rho)."""

    rho: mp.mpf
    y0: list
    c1: list
    c2: list
    var_names: list[str]

    @property
    def h(self) -> list:
        # paper-style coefficients: y = g - h sqrt(1 - z/rho) with h < 0 there
        return [c for c in self.c1]

    def y_component(self, name: str = "y") -> tuple:
        i = self.var_names.index(name)
        return self.y0[i], self.c1[i], self.c2[i]


def _null_vector(A: mp.matrix) -> list:
    """Kernel direction of a (numerically) singular square matrix.

    Gaussian elimination with full pivoting on the first n-1 steps; the
    remaining free column spans the kernel (which is one-dimensional for the
    irreducible non-negative systems handled here).
    """
    n = A.rows
    M = mp.matrix(A)
    perm = list(range(n))
    for k in range(n - 1):
        piv_r, piv_c, best = k, k, abs(M[k, k])
        for r in range(k, n):
            for c in range(k, n):
                if abs(M[r, c]) > best:
                    best, piv_r, piv_c = abs(M[r, c]), r, c
        if best == 0:
            break
        if piv_c != k:
            for r in range(n):
                M[r, k], M[r, piv_c] = M[r, piv_c], M[r, k]
            perm[k], perm[piv_c] = perm[piv_c], perm[k]
        if piv_r != k:
            for c in range(n):
                M[k, c], M[piv_r, c] = M[piv_r, c], M[k, c]
        for r in range(k + 1, n):
            f = M[r, k] / M[k, k]
            for c in range(k, n):
                M[r, c] -= f * M[k, c]
    x = [mp.mpf(0)] * n
    x[n - 1] = mp.mpf(1)
    for r in range(n - 2, -1, -1):
        acc = mp.mpf(0)
        for c in range(r + 1, n):
            acc += M[r, c] * x[c]
        if M[r, r] == 0:
            raise DegenerateKernel("kernel dimension exceeds one")
        x[r] = -acc / M[r, r]
    out = [mp.mpf(0)] * n
    for i in range(n):
        out[perm[i]] = x[i]
    norm = max(abs(v) for v in out)
    return [v / norm for v in out]


def find_singularity(asys: AnalyticSystem, z_hi: float = 1.0) -> SingularExpansion:
    """Locate the branch point of the combinatorial branch.

    Continuation with geometric steps brackets the first z where the branch
    stops existing (or det(I - Fy) crosses zero); bisection plus a Newton
    polish on the extended system pins it down, and matching the square-root
    ansatz at orders s and s^2 yields the Puiseux coefficients.
    """
    with mp.workdps(asys.dps):
        z = mp.mpf("0.02")
        y = asys.branch(z)
        z_good, y_good = z, y
        z_bad = None
        while z < z_hi:
            z_try = z * mp.mpf("1.25")
            try:
                y_try = asys.newton(z_try, y_good)
                if any(v < 0 for v in y_try) or asys.det_char(z_try, y_try) <= 0:
                    z_bad = z_try
                    break
                z_good, y_good = z_try, y_try
                z = z_try
            except NewtonDiverged:
                z_bad = z_try
                break
        if z_bad is None:
            raise NoSingularityInRange(f"no singularity below {z_hi}")

        for _ in range(44):  # Newton polish below supplies the final digits
            zm = (z_good + z_bad) / 2
            try:
                ym = asys.newton(zm, y_good)
                ok = all(v > -mp.mpf(10) ** (-15) for v in ym) and asys.det_char(zm, ym) > 0
            except NewtonDiverged:
                ok = False
            if ok:
                z_good, y_good = zm, ym
            else:
                z_bad = zm

        # Newton polish on (y - F = 0, det(I - Fy) = 0)
        rho, y0 = z_good, list(y_good)
        n = asys.n
        h = mp.mpf(10) ** (-(asys.dps // 2))

        def G(vec):
            zz, yy = vec[0], vec[1:]
            f = asys.F(zz, yy)
            out = [yy[i] - f[i] for i in range(n)]
            out.append(asys.det_char(zz, yy))
            return out

        vec = [rho] + y0
        for _ in range(8):
            g0 = G(vec)
            if max(abs(v) for v in g0) < mp.mpf(10) ** (-(asys.dps - 8)):
                break
            J = mp.matrix(n + 1, n + 1)
            for j in range(n + 1):
                pert = list(vec)
                pert[j] += h
                g1 = G(pert)
                for i in range(n + 1):
                    J[i, j] = (g1[i] - g0[i]) / h
            try:
                step = mp.lu_solve(J, mp.matrix(g0))
            except ZeroDivisionError:
                break
            vec = [vec[i] - step[i] for i in range(n + 1)]
        rho, y0 = vec[0], vec[1:]

        A = mp.eye(n) - asys.Fy(rho, y0)
        v = _null_vector(A)
        if max(v, key=abs) < 0:
            v = [-x for x in v]
        if any(x < -mp.mpf(10) ** (-10) for x in v):
            raise DegenerateKernel("kernel direction is not positive")
        w = _null_vector(A.T)

        # directional second/third differences need precision headroom
        with mp.extradps(25):
            f0 = asys.F(rho, y0)
            fz = asys.Fz(rho, y0)
            hh = mp.mpf(10) ** (-(asys.dps // 3))
            yp = [y0[i] + hh * v[i] for i in range(n)]
            ym_ = [y0[i] - hh * v[i] for i in range(n)]
            fyy = [
                (a - 2 * b + c) / hh**2
                for a, b, c in zip(asys.F(rho, yp), f0, asys.F(rho, ym_))
            ]
            num = 2 * rho * sum(w[i] * fz[i] for i in range(n))
            den = sum(w[i] * fyy[i] for i in range(n))
            if den == 0:
                raise DegenerateKernel("vanishing quadratic term")
            t2 = num / den
            if t2 < 0:
                raise DegenerateKernel("negative square in Puiseux matching")
            t = -mp.sqrt(t2)
            c1 = [t * v[i] for i in range(n)]
            rhs = [t2 / 2 * fyy[i] - rho * fz[i] for i in range(n)]
            B = mp.matrix(n + 1, n + 1)
            for i in range(n):
                for j in range(n):
                    B[i, j] = A[i, j]
                B[i, n] = v[i]
                B[n, i] = v[i]
            sol = mp.lu_solve(B, mp.matrix(list(rhs) + [0]))
            c2p = [sol[i] for i in range(n)]

            # the kernel component of c2 only shows up at order s^3:
            # (I-Fy) c3 = Fyy[c1, c2] + Fyyy[c1,c1,c1]/6 - rho Fzy[c1]
            # and the solvability condition against w fixes mu in c2 = c2p + mu v
            def dir2(a, b):
                fa = asys.F(rho, [y0[i] + hh * a[i] for i in range(n)])
                fb = asys.F(rho, [y0[i] + hh * b[i] for i in range(n)])
                fab = asys.F(rho, [y0[i] + hh * (a[i] + b[i]) for i in range(n)])
                return [(fab[i] - fa[i] - fb[i] + f0[i]) / hh**2 for i in range(n)]

            def dir3(a):
                p2 = asys.F(rho, [y0[i] + 2 * hh * a[i] for i in range(n)])
                p1 = asys.F(rho, [y0[i] + hh * a[i] for i in range(n)])
                m1 = asys.F(rho, [y0[i] - hh * a[i] for i in range(n)])
                m2 = asys.F(rho, [y0[i] - 2 * hh * a[i] for i in range(n)])
                return [
                    (p2[i] - 2 * p1[i] + 2 * m1[i] - m2[i]) / (2 * hh**3)
                    for i in range(n)
                ]

            fz_p = asys.Fz(rho, [y0[i] + hh * c1[i] for i in range(n)])
            fz_m = asys.Fz(rho, [y0[i] - hh * c1[i] for i in range(n)])
            fzy_c1 = [(fz_p[i] - fz_m[i]) / (2 * hh) for i in range(n)]
            s3 = dir2(c1, c2p)
            f3 = dir3(c1)
            resid3 = [s3[i] + f3[i] / 6 - rho * fzy_c1[i] for i in range(n)]
            fyy_c1v = dir2(c1, v)
            denom = sum(w[i] * fyy_c1v[i] for i in range(n))
            mu = -sum(w[i] * resid3[i] for i in range(n)) / denom
            c2 = [c2p[i] + mu * v[i] for i in range(n)]
            return SingularExpansion(rho, list(y0), c1, c2, list(asys.sys.var_names))


@dataclass
class AsymptoticReport:
    context: str
    restriction: str
    mode: str
    values: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        def conv(x):
            if isinstance(x, (list, tuple)):
                return [conv(v) for v in x]
            if isinstance(x, dict):
                return {k: conv(v) for k, v in x.items()}
            if isinstance(x, mp.mpf):
                return float(x)
            return x

        return {
            "context": self.context,
            "restriction": self.restriction,
            "mode": self.mode,
            "values": conv(self.values),
            "diagnostics": conv(self.diagnostics),
        }


def growth_constants(asys: AnalyticSystem) -> tuple:
    """(r, alpha) with d_n ~ alpha * n^(-3/2) * r^(-n).

    The square-root coefficient of D(z) = z * Dbar(z) at r is r*c1_y < 0;
    alpha absorbs the transfer factor 1/|Gamma(-1/2)| = 1/(2 sqrt(pi)), which
    is the normalization the reference table uses.
    """
    exp = find_singularity(asys)
    y_idx = asys.sys.var_names.index("y")
    alpha = -exp.rho * exp.c1[y_idx] / (2 * mp.sqrt(mp.pi))
    return exp.rho, alpha, exp


def _richardson_first(f: Callable, x0, steps) -> tuple:
    with mp.extradps(10):
        table = [(f(x0 + h) - f(x0 - h)) / (2 * h) for h in steps]
        vals = list(table)
        cur = table
        for lvl in range(1, len(steps)):
            fac = (steps[lvl - 1] / steps[lvl]) ** 2
            cur = [
                (fac * cur[i + 1] - cur[i]) / (fac - 1) for i in range(len(cur) - 1)
            ]
            vals.extend(cur)
        return cur[0], vals


def _richardson_second(f: Callable, x0, steps, f0=None) -> tuple:
    with mp.extradps(10):
        f0 = f(x0) if f0 is None else f0
        table = [(f(x0 + h) - 2 * f0 + f(x0 - h)) / h**2 for h in steps]
        cur = list(table)
        for lvl in range(1, len(steps)):
            fac = (steps[lvl - 1] / steps[lvl]) ** 2
            cur = [
                (fac * cur[i + 1] - cur[i]) / (fac - 1) for i in range(len(cur) - 1)
            ]
        return cur[0], table


FD_STEPS = ("1e-2", "5e-3", "2.5e-3")


def limit_law_constants(
    sys: ClassSystem,
    pattern_index: int = 0,
    dps: int = DEFAULT_DPS,
    steps: Sequence[str] = FD_STEPS,
    stability_tol: float = 1e-4,
) -> dict:
    """mu and sigma^2 for one marked pattern in dissections.

    rho(u) is located by bisection plus Newton polish on a grid around u = 1;
    derivatives use central differences with Richardson extrapolation.
    """
    m = sys.u_dim
    shared = solve_series(sys, SEED_ORDER)
    with mp.workdps(dps):
        hsteps = [mp.mpf(s) for s in steps]
        cache: dict = {}

        def rho_of(uval) -> mp.mpf:
            key = mp.nstr(uval, dps)
            if key not in cache:
                u = [mp.mpf(1)] * m
                u[pattern_index] = uval
                asys = AnalyticSystem(sys, u, dps, seed_series=shared)
                cache[key] = find_singularity(asys).rho
            return cache[key]

        one = mp.mpf(1)
        rho1 = rho_of(one)
        d1, d1_table = _richardson_first(rho_of, one, hsteps)
        d2, d2_table = _richardson_second(rho_of, one, hsteps, f0=rho1)
        spread = abs(d2_table[-1] - d2_table[0])
        if spread > abs(d2) * 0.5 + 1:
            raise DerivativeUnstable(
                "second-derivative stencil did not settle", stencil=d2_table
            )
        mu = -d1 / rho1
        sigma2 = -d2 / rho1 + mu**2 + mu
        return {
            "rho": rho1,
            "rho_prime": d1,
            "rho_pprime": d2,
            "mu": mu,
            "sigma2": sigma2,
            "stencil_first": d1_table,
            "stencil_second": d2_table,
        }


def covariance_matrix(sys: ClassSystem, dps: int = DEFAULT_DPS, steps=FD_STEPS):
    """Limit covariance matrix for up to three jointly marked patterns."""
    m = sys.u_dim
    if m > 3:
        raise ValueError("covariance supported for at most 3 patterns")
    with mp.workdps(dps):
        hsteps = [mp.mpf(s) for s in steps]
        cache: dict = {}
        shared = solve_series(sys, SEED_ORDER)

        def rho_at(uvec) -> mp.mpf:
            key = tuple(mp.nstr(v, dps) for v in uvec)
            if key not in cache:
                asys = AnalyticSystem(sys, list(uvec), dps, seed_series=shared)
                cache[key] = find_singularity(asys).rho
            return cache[key]

        one = [mp.mpf(1)] * m
        rho1 = rho_at(one)
        grad = []
        for i in range(m):
            def fi(x, i=i):
                u = list(one)
                u[i] = x
                return rho_at(u)

            grad.append(_richardson_first(fi, mp.mpf(1), hsteps)[0])
        mu = [-g / rho1 for g in grad]
        sigma = mp.matrix(m, m)
        for i in range(m):
            for j in range(i, m):
                if i == j:
                    def fii(x, i=i):
                        u = list(one)
                        u[i] = x
                        return rho_at(u)

                    dij = _richardson_second(fii, mp.mpf(1), hsteps, f0=rho1)[0]
                else:
                    def fij(h, i=i, j=j):
                        u = list(one)
                        u[i] = 1 + h
                        u[j] = 1 + h
                        a = rho_at(u)
                        u[i] = 1 + h
                        u[j] = 1 - h
                        b = rho_at(u)
                        u[i] = 1 - h
                        u[j] = 1 + h
                        c = rho_at(u)
                        u[i] = 1 - h
                        u[j] = 1 - h
                        d = rho_at(u)
                        return (a - b - c + d) / (4 * h**2)

                    vals = [fij(h) for h in hsteps]
                    cur = vals
                    for lvl in range(1, len(hsteps)):
                        fac = (hsteps[lvl - 1] / hsteps[lvl]) ** 2
                        cur = [
                            (fac * cur[k + 1] - cur[k]) / (fac - 1)
                            for k in range(len(cur) - 1)
                        ]
                    dij = cur[0]
                val = -dij / rho1 + mu[i] * mu[j] + (mu[i] if i == j else 0)
                sigma[i, j] = val
                sigma[j, i] = val
        return mu, sigma


# ---------------------------------------------------------------------------
# outerplanar transfer


class OuterplanarTransfer:
    """Evaluates B', B'' and the connected-level characteristic point.

    B'(z, u) = D(z, u)/(2z) + z/2 = (Dbar(z, u) + z)/2, so everything reduces
    to branch values and implicit derivatives of the dissection system.
    """

    def __init__(
        self,
        sys: ClassSystem,
        u: Sequence = (),
        dps: int = DEFAULT_DPS,
        seed_series: Optional[SolvedSeries] = None,
    ):
        self.asys = AnalyticSystem(sys, u, dps, seed_series=seed_series)
        self.dps = dps
        self.y_idx = sys.var_names.index("y")

    def dbar(self, z) -> mp.mpf:
        return self.asys.branch(z)[self.y_idx]

    def values(self, z) -> tuple:
        y = self.asys.branch(z)
        dz = self.asys.y_z(z, y)
        dbar = y[self.y_idx]
        dbar_z = dz[self.y_idx]
        bp = (dbar + z) / 2
        bpp = (dbar_z + 1) / 2
        return dbar, bp, bpp

    def tau(self, r_u: Optional[mp.mpf] = None) -> mp.mpf:
        """Solve tau * B''(tau, u) = 1 inside (0, r(u))."""
        with mp.workdps(self.dps):
            if r_u is None:
                r_u = find_singularity(self.asys).rho
            lo, hi = mp.mpf("0.01"), r_u * (1 - mp.mpf(10) ** (-(self.dps - 5)))

            def phi(x):
                _, _, bpp = self.values(x)
                return x * bpp - 1

            flo = phi(lo)
            while flo > 0:
                lo /= 2
                flo = phi(lo)
            fhi = phi(hi)
            if fhi < 0:
                raise SubcriticalityViolated(
                    "characteristic point at or beyond the dissection singularity"
                )
            for _ in range(40):
                mid = (lo + hi) / 2
                if phi(mid) <= 0:
                    lo = mid
                else:
                    hi = mid
            # secant refinement inside the bracket
            a, b = lo, hi
            fa, fb = phi(a), phi(b)
            for _ in range(12):
                if fb == fa:
                    break
                c = b - fb * (b - a) / (fb - fa)
                if not (lo <= c <= hi):
                    c = (a + b) / 2
                fc = phi(c)
                a, fa, b, fb = b, fb, c, fc
                if abs(fc) < mp.mpf(10) ** (-(self.dps - 3)):
                    break
            return b

    def rho_g(self, tau_val) -> mp.mpf:
        with mp.workdps(max(mp.mp.dps, self.dps)):
            _, bp, _ = self.values(tau_val)
            return tau_val * mp.exp(-bp)


def outerplanar_point(
    sys: ClassSystem,
    u: Sequence = (),
    dps: int = DEFAULT_DPS,
    seed_series: Optional[SolvedSeries] = None,
):
    """(tau, rho_G, D(tau)) for the system at fixed u."""
    tr = OuterplanarTransfer(sys, u, dps, seed_series=seed_series)
    with mp.workdps(dps):
        r = find_singularity(tr.asys).rho
        tau = tr.tau(r)
        rho = tr.rho_g(tau)
        d_at_tau = tau * tr.dbar(tau)
        return tau, rho, d_at_tau, r


def outerplanar_limit_law(
    sys: ClassSystem,
    pattern_index: int = 0,
    dps: int = DEFAULT_DPS,
    steps: Sequence[str] = FD_STEPS,
) -> dict:
    """mu and sigma^2 for a marked pattern in labelled outerplanar graphs."""
    m = sys.u_dim
    with mp.workdps(dps):
        hsteps = [mp.mpf(s) for s in steps]
        cache: dict = {}
        shared = solve_series(sys, SEED_ORDER)

        def point(uval):
            key = mp.nstr(uval, dps)
            if key not in cache:
                u = [mp.mpf(1)] * m
                u[pattern_index] = uval
                tau, rho, _d, _r = outerplanar_point(sys, u, dps, seed_series=shared)
                cache[key] = (tau, rho)
            return cache[key]

        one = mp.mpf(1)
        tau1, rho1 = point(one)
        rho_of = lambda x: point(x)[1]
        tau_of = lambda x: point(x)[0]
        d1, d1_tab = _richardson_first(rho_of, one, hsteps)
        d2, d2_tab = _richardson_second(rho_of, one, hsteps, f0=rho1)
        tau_d1, _ = _richardson_first(tau_of, one, hsteps)
        mu = -d1 / rho1
        sigma2 = -d2 / rho1 + mu**2 + mu
        # consistency of the implicit route: rho'(u) = dPsi/du at (tau(u), u)
        # rho'(u) = dPsi/du(tau(u), u) = -rho * Dbar_u(tau, u)/2
        tr = OuterplanarTransfer(sys, [one] * m, dps, seed_series=shared)
        yv = tr.asys.branch(tau1)
        du = tr.asys.y_u(tau1, yv)
        dbar_u = du[tr.y_idx, pattern_index]
        rho_prime_implicit = -rho1 * dbar_u / 2
        return {
            "tau": tau1,
            "rho": rho1,
            "tau_prime": tau_d1,
            "rho_prime": d1,
            "rho_pprime": d2,
            "mu": mu,
            "sigma2": sigma2,
            "rho_prime_implicit": rho_prime_implicit,
            "stencil_first": d1_tab,
            "stencil_second": d2_tab,
        }


def b_at(tau_val, d_counts: Sequence, dps: int = DEFAULT_DPS) -> mp.mpf:
    """B(tau) from the exact dissection counts: sum d_n tau^n/(2n) + tau^2/4."""
    with mp.workdps(dps):
        tau_val = _as_mp(tau_val)
        acc = tau_val**2 / 4
        zp = tau_val * tau_val  # tau^n for n = 2
        for n in range(2, len(d_counts)):
            if d_counts[n]:
                acc += mp.mpf(d_counts[n]) * zp / (2 * n)
            zp *= tau_val
        return acc


def _connected_constant_estimate(d_counts: Sequence, rho, n_est: int) -> mp.mpf:
    """[z^n] C * n^(5/2) * rho^n at n = n_est, via Lagrange inversion.

    Series are rescaled by rho^n so double precision suffices even at n = 700;
    the single needed coefficient of exp(B')^n comes from binary powering.
    """
    N = n_est
    rho = _as_mp(rho)
    bp = [0.0] * (N + 1)
    for n in range(1, N + 1):
        if n + 1 >= len(d_counts):
            break
        v = mp.mpf(d_counts[n + 1]) / 2 * rho**n
        if n == 1:
            v += rho / 2
        bp[n] = float(v)

    def trunc_mul(x, y):
        out = [0.0] * (N + 1)
        for i in range(N + 1):
            xi = x[i]
            if xi == 0.0:
                continue
            for j in range(N + 1 - i):
                if y[j] != 0.0:
                    out[i + j] += xi * y[j]
        return out

    phi = [0.0] * (N + 1)
    phi[0] = 1.0
    for k in range(1, N + 1):
        s = 0.0
        for j in range(1, k + 1):
            if bp[j] != 0.0:
                s += j * bp[j] * phi[k - j]
        phi[k] = s / k
    e = N
    acc = None
    base = phi
    while e:
        if e & 1:
            acc = base[:] if acc is None else trunc_mul(acc, base)
        e >>= 1
        if e:
            base = trunc_mul(base, base)
    y_n = acc[N - 1] / N          # [z^N] zC', scaled by rho^(N-1)
    c_n = y_n / N * float(rho)    # [z^N] C, scaled by rho^N
    return mp.mpf(c_n) * mp.mpf(N) ** mp.mpf("2.5")


def outerplanar_growth(
    sys: ClassSystem, d_counts: Sequence, dps: int = DEFAULT_DPS, n_est: int = 700
) -> dict:
    """(rho_G, g) for an avoiding class, with all g variants.

    g_plain is tau (log rho - log tau + 1) + B(tau), which equals C(rho);
    g_exp applies the multiplicative exp(C(rho)) correction.  Neither is the
    tabulated growth constant; g_series (the connected-level constant read
    off the exact transfer series at n = n_est) is, so it is reported as g.
    g_limit is the exact n -> infinity constant from the square-root data of
    the characteristic point.
    """
    with mp.workdps(dps):
        tau, rho, d_at_tau, r = outerplanar_point(sys, (), dps)
        if not tau < r:
            raise SubcriticalityViolated("tau >= r")
        btau = b_at(tau, d_counts, dps)
        g_plain = tau * (mp.log(rho) - mp.log(tau) + 1) + btau
        g_exp = mp.exp(g_plain) * g_plain
        g_series = _connected_constant_estimate(d_counts, rho, n_est)

        # exact limit: C has singular part h0 (1-z/rho)^(3/2) with
        # h0 = -2 y1/3 and y1^2 = -2 rho / Psi''(tau)
        tr = OuterplanarTransfer(sys, (), dps)

        def psi(x):
            yv = tr.asys.branch(x)
            return x * mp.exp(-(yv[tr.y_idx] + x) / 2)

        h = mp.mpf(10) ** (-(dps // 3))
        with mp.extradps(15):
            psi_pp = (psi(tau + h) - 2 * psi(tau) + psi(tau - h)) / h**2
        y1 = -mp.sqrt(-2 * rho / psi_pp)
        g_limit = -y1 / (2 * mp.sqrt(mp.pi))

        return {
            "tau": tau,
            "rho": rho,
            "d_at_tau": d_at_tau,
            "r": r,
            "b_at_tau": btau,
            "g_plain": g_plain,
            "g_exp": g_exp,
            "g_series": g_series,
            "g_limit": g_limit,
            "g": g_series,
            "g_variant": f"connected-series estimate at n={n_est}",
        }


def tail_ratio(d_counts: Sequence, r, alpha, n_values: Sequence[int], dps=DEFAULT_DPS):
    """actual/predicted coefficient ratios, prediction alpha n^(-3/2) r^(-n).

    alpha is normalized as in growth_constants (the transfer constant from
    Gamma(-1/2) = -2 sqrt(pi) is already inside it), so ratios drift to 1.
    """
    with mp.workdps(dps):
        r = _as_mp(r)
        alpha = _as_mp(alpha)
        out = []
        for n in n_values:
            pred = alpha * mp.mpf(n) ** mp.mpf("-1.5") * r ** (-n)
            out.append((n, float(mp.mpf(d_counts[n]) / pred)))
        return out
