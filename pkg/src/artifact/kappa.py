"""Coefficients kappa(m, mu) of the incoherent Eisenstein series of a binary CM lattice,
genus-restricted ideal counts, and arithmetic degrees of the associated 0-cycles.

The lattice is (a, -N/N(a)) for a fractional ideal a of k = Q(sqrt D), D odd.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Mapping

from .errors import DomainError
from .fqm import Elem, FqModule, frac_mod1
from .lattice import DefiniteLattice
from .numthy import class_data, hilbert_symbol, kronecker, lambda_chi_1, prime_divisors, require_fundamental, rho, valuation
from .qseries import ZERO, FormalLog, VVSeries

GenusSigns = Mapping[int, int]


@dataclass(frozen=True, eq=False)
class BinaryCM:
    D: int
    norm_a: Fraction
    lattice: DefiniteLattice

    def __post_init__(self):
        require_fundamental(self.D, odd=True)
        object.__setattr__(self, "norm_a", Fraction(self.norm_a))
        if self.norm_a <= 0:
            raise DomainError("N(a) must be positive")
        g = self.lattice.gram
        if len(g) != 2 or self.lattice.sign != -1 or g[0][1] ** 2 - g[0][0] * g[1][1] != self.D:
            raise DomainError("lattice is not a negative definite binary lattice of discriminant D")

    @staticmethod
    def from_form(form: tuple[int, int, int]) -> "BinaryCM":
        """Lattice with Q = -(a x^2 + b xy + c y^2); N(a) is taken to be a."""
        a, b, c = form
        lat = DefiniteLattice(((-2 * a, -b), (-b, -2 * c)), -1)
        return BinaryCM(b * b - 4 * a * c, Fraction(a), lat)

    @staticmethod
    def from_lattice(lat: DefiniteLattice) -> "BinaryCM":
        g = lat.gram
        return BinaryCM(g[0][1] ** 2 - g[0][0] * g[1][1], Fraction(-g[0][0], 2), lat)

    @staticmethod
    def principal(D: int) -> "BinaryCM":
        require_fundamental(D, odd=True)
        return BinaryCM.from_form((1, 1, (1 - D) // 4))

    @property
    def fqm(self) -> FqModule:
        return self.lattice.fqm

    @cached_property
    def primes(self) -> tuple[int, ...]:
        return tuple(prime_divisors(self.D))

    @cached_property
    def lam(self) -> Fraction:
        return lambda_chi_1(self.D)

    def chi(self, q: int, x) -> int:
        return hilbert_symbol(self.D, x, q)

    def mu_split(self, mu: Elem) -> dict[int, Elem]:
        """Components e_q * mu under L'/L = sum over q | D of its q-parts."""
        n = -self.D
        out = {}
        for q in self.primes:
            cof = n // q
            e = cof * pow(cof, -1, q)
            out[q] = self.fqm.scale(e, mu)
        return out

    def mu_zero_at(self, mu: Elem, q: int) -> bool:
        return self.fqm.scale(-self.D // q, mu) == self.fqm.zero

    def o(self, mu: Elem) -> int:
        return sum(1 for q in self.primes if self.mu_zero_at(mu, q))

    def compatible(self, m, mu: Elem) -> bool:
        return frac_mod1(Fraction(m) - self.fqm.q(mu)) == 0


def eta_factors(m, mu: Elem, ctx: BinaryCM) -> tuple[int, dict[int, int]]:
    m = Fraction(m)
    if m <= 0:
        raise DomainError("eta factors need m > 0")
    if not ctx.compatible(m, mu):
        raise DomainError(f"m={m} is not in Q(mu)+Z")
    x = -m * ctx.norm_a
    chis = {q: ctx.chi(q, x) for q in ctx.primes}
    zero = [q for q in ctx.primes if ctx.mu_zero_at(mu, q)]
    if not zero:
        return 1, {p: 0 for p in ctx.primes}
    eta0 = math.prod(1 + chis[q] for q in zero)
    etap = {p: (1 - chis[p]) * math.prod(1 + chis[q] for q in zero if q != p) for p in ctx.primes}
    return eta0, etap


def _integral(x: Fraction) -> bool:
    return x.denominator == 1


def kappa(m, mu: Elem, ctx: BinaryCM) -> FormalLog:
    m = Fraction(m)
    mu = ctx.fqm.normalize(mu)
    if m < 0:
        return ZERO
    if m == 0:
        return FormalLog.kappa00(ctx.D) if mu == ctx.fqm.zero else ZERO
    if not ctx.compatible(m, mu):
        return ZERO
    return _kappa_pos(m, mu, ctx)


@lru_cache(maxsize=200000)
def _kappa_cached(m: Fraction, mu: Elem, D: int, norm_a: Fraction, gram) -> FormalLog:
    ctx = BinaryCM(D, norm_a, DefiniteLattice(gram, -1))
    return _kappa_compute(m, mu, ctx)


def _kappa_pos(m: Fraction, mu: Elem, ctx: BinaryCM) -> FormalLog:
    return _kappa_cached(m, mu, ctx.D, ctx.norm_a, ctx.lattice.gram)


def _kappa_compute(m: Fraction, mu: Elem, ctx: BinaryCM) -> FormalLog:
    absD = -ctx.D
    n = m * absD
    if not _integral(n):
        raise DomainError(f"m|D| = {n} is not integral")
    n = int(n)
    eta0, etap = eta_factors(m, mu, ctx)
    logs = []
    if eta0:
        for p in prime_divisors(n):
            if kronecker(ctx.D, p) == -1:
                c = eta0 * (valuation(m, p) + 1) * rho(n // p, ctx.D)
                if c:
                    logs.append((p, Fraction(c)))
    r = rho(n, ctx.D)
    if r:
        for p in ctx.primes:
            c = r * etap[p] * (valuation(m, p) + 1)
            if c:
                logs.append((p, Fraction(c)))
    return FormalLog(logs=tuple((p, -c / ctx.lam) for p, c in logs))


def script_E(ctx: BinaryCM, mmax) -> VVSeries:
    """sum kappa(m, mu) q^m phi_mu over 0 <= m <= mmax."""
    mmax = Fraction(mmax)
    A = ctx.fqm
    den = A.level
    coeffs = {}
    for mu in A.elements:
        start = frac_mod1(A.q(mu))
        m = start
        while m <= mmax:
            c = kappa(m, mu, ctx)
            if c:
                coeffs[(mu, m)] = c
            m += 1
    return VVSeries(A, den, mmax, coeffs)


# ---------------------------------------------------------------- genus classes

def genus_of_norm(n, D: int) -> dict[int, int]:
    """Genus-character values xi_q = (D, n)_q for q | D."""
    return {q: hilbert_symbol(D, n, q) for q in prime_divisors(D)}


def rho_genus(n: int, D: int, signs: GenusSigns) -> int:
    """Ideals of norm n whose genus characters equal signs."""
    require_fundamental(D, odd=True)
    if n <= 0:
        return 0
    r = rho(n, D)
    if not r:
        return 0
    local = genus_of_norm(n, D)
    return r if all(local[q] == signs[q] for q in local) else 0


def pinned_signs(m: Fraction, n: int, ctx: BinaryCM, ramified: int | None = None) -> dict[int, int]:
    """Genus of the class b singled out by xi_l(n N(b)) = (D, -m N(a))_l.

    For a ramified prime p the class carries an extra factor p^-1, which flips the
    pinned value at l = p.
    """
    x = -m * ctx.norm_a
    return {q: ctx.chi(q, x) * hilbert_symbol(ctx.D, n, q) * (-1 if q == ramified else 1)
            for q in ctx.primes}


def arithmetic_degree_n0(m, mu: Elem, ctx: BinaryCM) -> FormalLog:
    """Arithmetic degree of the 0-dimensional special cycle through genus-class ideal counts."""
    m = Fraction(m)
    mu = ctx.fqm.normalize(mu)
    if m <= 0:
        raise DomainError("arithmetic degree needs m > 0")
    if not ctx.compatible(m, mu):
        return ZERO
    n_full = m * (-ctx.D)
    if not _integral(n_full):
        raise DomainError("m|D| not integral")
    n_full = int(n_full)
    weight = 2 ** ctx.o(mu)
    logs = []
    for p in prime_divisors(n_full):
        ordp = valuation(m, p) + 1
        if kronecker(ctx.D, p) == -1:
            n = n_full // p
            c = weight * ordp * rho_genus(n, ctx.D, pinned_signs(m, n, ctx))
        elif ctx.D % p == 0 and ctx.mu_zero_at(mu, p):
            n = n_full // p
            c = weight * ordp * rho_genus(n, ctx.D, pinned_signs(m, n, ctx, ramified=p))
        else:
            continue
        if c:
            logs.append((p, Fraction(c)))
    return FormalLog(logs=tuple(logs))


def degree_factor(D: int) -> Fraction:
    """1/vol(K_T) = h/w."""
    cd = class_data(D)
    return Fraction(cd.h, cd.w)
