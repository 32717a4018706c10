"""Genus-character identities checked by ideal enumeration over reduced forms.

For each admissible (m, mu) and each prime p contributing to kappa(m, mu), the ideals in the
genus pinned by an auxiliary split prime p0 are counted directly and compared with eta * rho.
"""
from __future__ import annotations

from fractions import Fraction

from sympy import factorint

from artifact.kappa import BinaryCM, eta_factors
from artifact.numthy import class_data
from oracles import auxiliary_prime, genus_ideal_count, hilbert_symbol_local, ideal_count, kronecker_prime


def admissible(ctx: BinaryCM, mmax):
    A = ctx.fqm
    for mu in A.elements:
        m = Fraction(A.q(mu)) % 1
        while m <= mmax:
            if m > 0:
                yield m, mu
            m += 1


def genus_mismatches(D: int, mmax=30) -> tuple[int, list]:
    qs = sorted(factorint(-D))
    checks, bad = 0, []
    for form in class_data(D).forms:
        ctx = BinaryCM.from_form(form)
        Na = int(ctx.norm_a)
        for m, mu in admissible(ctx, mmax):
            eta0, etap = eta_factors(m, mu, ctx)
            o = ctx.o(mu)
            n = int(m * (-D))
            x = -m * Na
            for q in qs:
                if not ctx.mu_zero_at(mu, q):
                    checks += 1
                    if hilbert_symbol_local(D, x.numerator * x.denominator, q) != 1:
                        bad.append((form, mu, m, q, "chi"))
            for p in factorint(n):
                if kronecker_prime(D, p) == -1:
                    p0 = auxiliary_prime(D, p, False)
                    g = tuple(hilbert_symbol_local(D, p0 * (-D) * Na, q) for q in qs)
                    checks += 1
                    if 2 ** o * genus_ideal_count(n // p, D, g) != eta0 * ideal_count(n // p, D):
                        bad.append((form, mu, m, p, "inert"))
            for p in qs:
                if ctx.mu_zero_at(mu, p):
                    p0 = auxiliary_prime(D, p, True)
                    g = tuple(hilbert_symbol_local(D, p0 * (-D) * Na // p, q) for q in qs)
                    lhs, rhs = 2 ** o * genus_ideal_count(n, D, g), etap[p] * ideal_count(n, D)
                else:
                    lhs, rhs = 0, etap[p]
                checks += 1
                if lhs != rhs:
                    bad.append((form, mu, m, p, "ramified"))
    return checks, bad
