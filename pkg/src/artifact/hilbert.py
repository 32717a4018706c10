"""The Hilbert modular surface for F = Q(sqrt Delta): the lattice of skew-hermitian matrices,
the diagonal CM cycle of discriminant D, the pullback of special divisors to the modular
curve, and both sides of the resulting intersection formula.

Coordinates on L are (a, b, x, y) for the matrix (a, lam; lam', b) with
lam = x + y w', w' = (Delta + sqrt Delta)/2, and Q = ab - N(lam).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import sympy
from sympy import isprime

from .errors import DomainError
from .fqm import Elem, EvenLattice, FqModule, discriminant_group, frac_mod1
from .kappa import BinaryCM, script_E
from .lattice import DefiniteLattice, SplitData, forms_equivalent, integer_kernel, orthogonal_split, theta_series
from .modcurve import HeegnerIndex, intersection_sum
from .numthy import class_data, require_fundamental
from .qseries import ZERO, FormalLog, Sublattice, tensor, tr_sublattice

Vec = tuple[Fraction, ...]


def _gram(delta: int) -> tuple[tuple[int, ...], ...]:
    c = (delta * delta - delta) // 2
    return ((0, 1, 0, 0), (1, 0, 0, 0), (0, 0, -2, -delta), (0, 0, -delta, -c))


def _vec(*xs) -> Vec:
    return tuple(Fraction(x) for x in xs)


@dataclass(frozen=True, eq=False)
class HmsContext:
    delta: int
    D: int
    L: EvenLattice
    e1: Vec
    e2: Vec
    f1: Vec
    f2: Vec
    split: SplitData
    M_basis: tuple[tuple[int, ...], ...]
    P2_basis: tuple[tuple[int, ...], ...]

    @cached_property
    def fqm(self) -> FqModule:
        return discriminant_group(self.L)

    @cached_property
    def P1_basis(self) -> tuple[tuple[int, ...], ...]:
        return (tuple(int(c) for c in self.e1),)

    @cached_property
    def pullback_sub(self) -> Sublattice:
        return Sublattice(self.L, (self.P1_basis, self.M_basis), self.fqm)

    @cached_property
    def P1(self) -> DefiniteLattice:
        return DefiniteLattice(((int(self.L.bil(self.e1, self.e1)),),))

    @cached_property
    def M_fqm(self) -> FqModule:
        return self.pullback_sub.piece_fqms[1]

    @cached_property
    def hw(self) -> Fraction:
        cd = class_data(self.D)
        return Fraction(cd.h, cd.w)

    @cached_property
    def coset_filter_ok(self) -> bool:
        """mu1 in (P1+P2)', mu2 in N' with mu1 + mu2 in L' forces mu1 in P'."""
        sub = Sublattice(self.L, (self.P1_basis, self.P2_basis, self.split.N_basis), self.fqm)
        k = len(sub.piece_fqms[0].orders) + len(sub.piece_fqms[1].orders)
        P = self.split.P_basis
        for e, img in sub.image.items():
            if img is None:
                continue
            part = e[:k] + tuple(0 for _ in sub.piece_fqms[2].orders)
            v = sub.vector_of(part)
            if any(self.L.bil(v, p).denominator != 1 for p in P):
                return False
        return True


def hms_setup(delta: int, D: int) -> HmsContext:
    if delta % 4 != 1 or not isprime(delta):
        raise DomainError(f"Delta={delta} is not a prime congruent to 1 mod 4")
    require_fundamental(D, odd=True)
    if math.gcd(D, 2 * delta) != 1:
        raise DomainError(f"gcd(D={D}, 2*Delta={2 * delta}) != 1")
    L = EvenLattice(_gram(delta))
    e1 = _vec(0, 0, -delta, 2)
    e2 = _vec(1, Fraction(D * D - D, 4), Fraction(D - delta, 2), 1)
    f1 = _vec(0, D, 1, 0)
    f2 = _vec(2, Fraction(D * D + D, 2), D, 0)
    checks = {
        "Q(e1) = Delta": L.q(e1) == delta,
        "Q(e2) = (Delta - D)/4": L.q(e2) == Fraction(delta - D, 4),
        "Q(f1) = -1": L.q(f1) == -1,
        "Q(f2) = D": L.q(f2) == D,
        "U orthogonal to P": all(L.bil(u, p) == 0 for u in (f1, f2) for p in (e1, e2)),
        "f1 orthogonal to f2": L.bil(f1, f2) == 0,
    }
    split = orthogonal_split(L, [e1, e2])
    # P = Z e1 + Z e2 and N = Z f1 + Z (f1 + f2)/2
    checks["P spanned by e1, e2"] = _same_span(split.P_basis, (e1, e2))
    checks["N spanned by f1, (f1+f2)/2"] = _same_span(split.N_basis, (f1, tuple((a + b) / 2 for a, b in zip(f1, f2))))
    pform = (split.P.gram[0][0] // 2, split.P.gram[0][1], split.P.gram[1][1] // 2)
    checks["P isometric to (Dfrak, N/Delta)"] = forms_equivalent(pform, (delta, delta, (delta - D) // 4))
    nform = (split.N.gram[0][0] // 2, split.N.gram[0][1], split.N.gram[1][1] // 2)
    checks["N isometric to (O_D, -N)"] = forms_equivalent(nform, (-1, -1, -(1 - D) // 4))
    M_basis = tuple(integer_kernel([_row(L, e1)]))
    P2_basis = tuple(integer_kernel([_row(L, e1), _row(L, f1), _row(L, f2)]))
    checks["P1 orthogonal to M"] = all(L.bil(e1, v) == 0 for v in M_basis)
    checks["P2 inside P"] = len(P2_basis) == 1 and L.q(P2_basis[0]) > 0
    ctx = HmsContext(delta, D, L, e1, e2, f1, f2, split, M_basis, P2_basis)
    Mq = ctx.M_fqm
    checks["M of level-one type"] = Mq.size == 2 and sorted(Mq.q(e) for e in Mq.elements) == [0, Fraction(3, 4)]
    checks["coset filter"] = ctx.coset_filter_ok
    bad = [k for k, ok in checks.items() if not ok]
    if bad:
        raise AssertionError("setup invariants failed: " + ", ".join(bad))
    return ctx


def _row(L: EvenLattice, v) -> list[Fraction]:
    return [sum((L.gram[i][j] * v[j] for j in range(L.rank)), Fraction(0)) for i in range(L.rank)]


def _same_span(basis, vecs) -> bool:
    """Z-spans agree: every vec is an integral combination of basis, with equal covolume."""
    A = sympy.Matrix([[sympy.Rational(x) for x in v] for v in basis]).T
    for v in vecs:
        sol, params = A.gauss_jordan_solve(sympy.Matrix([sympy.Rational(str(x)) for x in v]))
        if params.shape[0] or not all(c.is_integer for c in sol):
            return False
    B = sympy.Matrix([[sympy.Rational(str(x)) for x in v] for v in vecs]).T
    return (A.T * A).det() == (B.T * B).det()


def _is_rational_square(m: Fraction) -> bool:
    return m >= 0 and math.isqrt(m.numerator) ** 2 == m.numerator and math.isqrt(m.denominator) ** 2 == m.denominator


def _check_m(ctx: HmsContext, m, mu: Elem) -> Fraction:
    m = Fraction(m)
    if m <= 0 or _is_rational_square(m):
        raise DomainError(f"m={m} must be a positive nonsquare")
    if frac_mod1(m - ctx.fqm.q(mu)) != 0:
        raise DomainError(f"m={m} is not in Q(mu)+Z")
    return m


def hms_pullback(ctx: HmsContext, m, mu: Elem) -> list[tuple[Fraction, Elem, Fraction]]:
    """Terms (m2, mu2, sum of r_P1(m1, mu1)) of the pullback of Z(m, mu) to the modular curve."""
    m = _check_m(ctx, m, mu)
    if not ctx.coset_filter_ok:
        raise AssertionError("coset filter violated")
    sub = ctx.pullback_sub
    A1, A2 = sub.piece_fqms
    k1 = len(A1.orders)
    th = theta_series(ctx.P1, m)
    if th.fqm.orders != A1.orders or th.fqm.q_gen != A1.q_gen:
        raise AssertionError("theta series and sublattice disagree on P1'/P1")
    agg: dict[tuple[Fraction, Elem], Fraction] = {}
    for e, img in sub.image.items():
        if img != mu:
            continue
        mu1, mu2 = e[:k1], e[k1:]
        for (nu, m1), r in th.coeffs.items():
            if nu != mu1 or m1 > m:
                continue
            m2 = m - m1
            key = (m2, mu2)
            agg[key] = agg.get(key, Fraction(0)) + r
    return [(m2, mu2, c) for (m2, mu2), c in sorted(agg.items(), key=lambda t: (t[0][0], A2.index(t[0][1]))) if c]


def level_one_value(ctx: HmsContext, m2: Fraction, mu2: Elem) -> FormalLog:
    """Intersection of Z(m2, mu2) with the CM cycle of discriminant D on the level-one curve."""
    D1 = -4 * m2
    if D1.denominator != 1:
        raise AssertionError(f"m2={m2} does not give a discriminant")
    r1 = 0 if mu2 == ctx.M_fqm.zero else 1
    return intersection_sum(HeegnerIndex(1, int(D1), r1), HeegnerIndex(1, ctx.D, 1))


def hms_route_a(ctx: HmsContext, m, mu: Elem) -> FormalLog:
    total = ZERO
    for m2, mu2, c in hms_pullback(ctx, m, mu):
        total = total + level_one_value(ctx, m2, mu2) * c
    return total


def hms_route_b(ctx: HmsContext, m, mu: Elem) -> FormalLog:
    m = _check_m(ctx, m, mu)
    sp = ctx.split
    th = theta_series(sp.P, m)
    E = script_E(BinaryCM.from_lattice(sp.N), m)
    T = tr_sublattice(tensor(th, E, only={m}), Sublattice(ctx.L, (sp.P_basis, sp.N_basis), ctx.fqm))
    c = T[(mu, m)]
    return (c if c else ZERO) * (-2 * ctx.hw)


def hms_intersection(ctx: HmsContext, m, mu: Elem) -> tuple[FormalLog, FormalLog]:
    """Routes A and B.  Both carry a kappa(0,0) term when some vector of P' in the coset of mu
    has norm m, since the CM cycle then lies on Z(m, mu)."""
    return hms_route_a(ctx, m, mu), hms_route_b(ctx, m, mu)


def admissible_pairs(ctx: HmsContext, mmax) -> list[tuple[Fraction, Elem]]:
    """All (m, mu) with 0 < m <= mmax nonsquare and m in Q(mu)+Z."""
    out = []
    mmax = Fraction(mmax)
    for mu in ctx.fqm.elements:
        m = frac_mod1(ctx.fqm.q(mu))
        while m <= mmax:
            if m > 0 and not _is_rational_square(m):
                out.append((m, mu))
            m += 1
    out.sort(key=lambda t: (t[0], ctx.fqm.index(t[1])))
    return out
