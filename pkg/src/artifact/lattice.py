"""Definite lattices: short vectors, theta series, orthogonal splittings, binary reduction."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

from .errors import DomainError
from .fqm import EvenLattice, FqModule, determinant, discriminant_group, smith_form
from .qseries import Sublattice, VVSeries

MAX_RANK = 4


@dataclass(frozen=True)
class DefiniteLattice:
    gram: tuple[tuple[int, ...], ...]
    sign: int = 1

    def __post_init__(self):
        g = tuple(tuple(int(x) for x in row) for row in self.gram)
        object.__setattr__(self, "gram", g)
        for k in range(1, len(g) + 1):
            minor = determinant([row[:k] for row in g[:k]])
            if (self.sign ** k) * minor <= 0:
                raise DomainError("gram matrix is not definite with the declared sign")

    @staticmethod
    def of(gram) -> "DefiniteLattice":
        sign = 1 if gram[0][0] > 0 else -1
        return DefiniteLattice(gram, sign)

    @cached_property
    def even(self) -> EvenLattice:
        return EvenLattice(self.gram)

    @cached_property
    def fqm(self) -> FqModule:
        return discriminant_group(self.even)

    @property
    def rank(self) -> int:
        return len(self.gram)


def _fp_decomposition(gram: Sequence[Sequence[int]]) -> list[list[float]]:
    n = len(gram)
    q = [[gram[i][j] / 2.0 for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            q[j][i] = q[i][j]
            q[i][j] = q[i][j] / q[i][i]
        for k in range(i + 1, n):
            for l in range(k, n):
                q[k][l] -= q[k][i] * q[i][l]
    return q


def short_vectors(P: DefiniteLattice, bound, shift: Sequence | None = None) -> list[tuple[Fraction, ...]]:
    """All v in shift + P with |Q(v)| <= bound, in P-coordinates, sorted by (|Q|, v)."""
    n = P.rank
    if n > MAX_RANK:
        raise DomainError(f"rank {n} exceeds supported rank {MAX_RANK}")
    bound = Fraction(bound)
    if bound < 0:
        raise DomainError("bound must be nonnegative")
    shift = tuple(Fraction(s) for s in (shift or (0,) * n))
    gram = [[P.sign * x for x in row] for row in P.gram]
    q = _fp_decomposition(gram)
    T = float(bound) + 1e-9
    out = []
    x = [0.0] * n
    xe = [Fraction(0)] * n

    def rec(i: int, rem: float):
        center = -sum(q[i][j] * x[j] for j in range(i + 1, n))
        r = math.sqrt(max(rem, 0.0) / q[i][i]) + 1e-9
        s = shift[i]
        lo = math.ceil(center - r - float(s))
        hi = math.floor(center + r - float(s))
        for k in range(lo, hi + 1):
            xe[i] = s + k
            x[i] = float(xe[i])
            left = rem - q[i][i] * (x[i] - center) ** 2
            if left < -1e-9:
                continue
            if i == 0:
                out.append(tuple(xe))
            else:
                rec(i - 1, left)

    rec(n - 1, T)
    res = []
    for v in out:
        val = sum((v[i] * gram[i][j] * v[j] for i in range(n) for j in range(n)), Fraction(0)) / 2
        if val <= bound:
            res.append((val, v))
    res.sort()
    return [v for _, v in res]


def theta_series(P: DefiniteLattice, mmax) -> VVSeries:
    """r(m, mu) = #{v in mu + P : Q(v) = m} for 0 <= m <= mmax."""
    if P.sign != 1:
        raise DomainError("theta series needs a positive definite lattice")
    mmax = Fraction(mmax)
    A = P.fqm
    coeffs: dict = {}
    for mu in A.elements:
        shift = A.lift(mu) if A.orders else (0,) * P.rank
        for v in short_vectors(P, mmax, shift):
            m = P.even.q(v)
            coeffs[(mu, m)] = coeffs.get((mu, m), 0) + 1
    return VVSeries(A, A.level, mmax, {k: Fraction(c) for k, c in coeffs.items()})


# ---------------------------------------------------------------- splittings

def integer_kernel(rows: Sequence[Sequence]) -> list[tuple[int, ...]]:
    """Basis of {v in Z^n : rows . v = 0} (rational rows allowed)."""
    rows = [[Fraction(x) for x in r] for r in rows]
    ints = []
    for r in rows:
        den = math.lcm(*(x.denominator for x in r))
        ints.append([int(x * den) for x in r])
    d, _, V = smith_form(ints)
    rank = sum(1 for x in d if x)
    n = len(ints[0])
    return [tuple(V[i][j] for i in range(n)) for j in range(rank, n)]


def lagrange_reduce(basis: list[tuple[int, ...]], L: EvenLattice) -> list[tuple[int, ...]]:
    """Gauss-Lagrange reduction of a rank-2 basis of a definite sublattice."""
    if len(basis) != 2:
        return basis
    u, v = basis
    qn = lambda w: abs(L.q(w))
    while True:
        if qn(u) > qn(v):
            u, v = v, u
        t = round(L.bil(u, v) / (2 * L.q(u)))
        if t == 0:
            return [u, v]
        v = tuple(b - t * a for a, b in zip(u, v))
        if qn(v) >= qn(u):
            return [u, v]


def _primitive(v: Sequence) -> tuple[int, ...]:
    v = [Fraction(x) for x in v]
    den = math.lcm(*(x.denominator for x in v))
    w = [int(x * den) for x in v]
    g = math.gcd(*w)
    return tuple(x // g for x in w)


@dataclass(frozen=True, eq=False)
class SplitData:
    L: EvenLattice
    x: tuple[tuple[Fraction, ...], ...]
    P_basis: tuple[tuple[int, ...], ...]
    N_basis: tuple[tuple[int, ...], ...]

    def _gram(self, basis) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(int(self.L.bil(v, w)) for w in basis) for v in basis)

    @cached_property
    def P(self) -> DefiniteLattice:
        return DefiniteLattice.of(self._gram(self.P_basis))

    @cached_property
    def N(self) -> DefiniteLattice:
        return DefiniteLattice.of(self._gram(self.N_basis))

    @cached_property
    def index(self) -> int:
        return abs(int(determinant(list(self.P_basis) + list(self.N_basis))))

    @cached_property
    def sublattice(self) -> Sublattice:
        return Sublattice(self.L, (self.P_basis, self.N_basis))


def orthogonal_split(L: EvenLattice, x) -> SplitData:
    """P = L cap span(x), N = L cap x-perp; x is one vector or a list spanning the positive part."""
    xs = [tuple(Fraction(c) for c in v) for v in (x if isinstance(x[0], (tuple, list)) else [x])]
    for v in xs:
        if L.q(v) <= 0:
            raise DomainError("splitting vector must have positive norm")
    gx = [[sum((L.gram[i][j] * v[j] for j in range(L.rank)), Fraction(0)) for i in range(L.rank)] for v in xs]
    N_basis = integer_kernel(gx)
    gn = [[sum((L.gram[i][j] * w[j] for j in range(L.rank)), Fraction(0)) for i in range(L.rank)] for w in N_basis]
    P_basis = integer_kernel(gn)
    if len(P_basis) == 1:
        p = _primitive(P_basis[0])
        # orient along x
        if L.bil(p, xs[0]) < 0:
            p = tuple(-c for c in p)
        P_basis = [p]
    else:
        P_basis = lagrange_reduce(P_basis, L)
    N_basis = lagrange_reduce(N_basis, L)
    split = SplitData(L, tuple(xs), tuple(P_basis), tuple(N_basis))
    split.P, split.N  # definiteness checks
    if split.P.sign != 1 or split.N.sign != -1:
        raise DomainError("split does not separate positive and negative parts")
    return split


# ---------------------------------------------------------------- binary forms

def reduce_binary(form: tuple[int, int, int]) -> tuple[int, int, int]:
    """Reduced representative under proper equivalence; negative forms keep their sign."""
    a, b, c = map(int, form)
    if b * b - 4 * a * c >= 0:
        raise DomainError("form is not definite")
    if a < 0:
        ra, rb, rc = reduce_binary((-a, -b, -c))
        return -ra, -rb, -rc
    while True:
        if c < a:
            a, b, c = c, -b, a
        elif abs(b) > a:
            t = (a - b) // (2 * a)  # b + 2ta lands in (-a, a]
            b, c = b + 2 * t * a, a * t * t + b * t + c
        else:
            break
    if (b < 0) and (-b == a or a == c):
        b = -b
    return a, b, c


def forms_equivalent(f, g, improper: bool = True) -> bool:
    rf, rg = reduce_binary(f), reduce_binary(g)
    if rf == rg:
        return True
    return improper and rf == reduce_binary((g[0], -g[1], g[2]))


def binary_form_of(M: DefiniteLattice) -> tuple[int, int, int]:
    g = M.gram
    if len(g) != 2:
        raise DomainError("not a binary lattice")
    return g[0][0] // 2, g[0][1], g[1][1] // 2
