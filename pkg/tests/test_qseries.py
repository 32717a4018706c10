from __future__ import annotations

import json
import random
from fractions import Fraction

import pytest

from artifact.errors import DomainError
from artifact.fqm import EvenLattice, discriminant_group, frac_mod1
from artifact.lattice import DefiniteLattice, theta_series
from artifact.modcurve import HeegnerIndex, split
from artifact.qseries import (
    ZERO,
    FormalLog,
    HolPrincipalPart,
    VVSeries,
    constant_term,
    ct_pairing,
    pair,
    pairing_principal,
    res_sublattice,
    tensor,
    tr_sublattice,
)
from oracles import theta_bruteforce
from theta_check import library_counts, oracle_counts


def random_series(fqm, rng, terms=8, mmax=5, den=None) -> VVSeries:
    den = den or fqm.level
    coeffs = {}
    for _ in range(terms):
        mu = rng.choice(fqm.elements)
        m = frac_mod1(fqm.q(mu)) + rng.randrange(0, mmax)
        coeffs[(mu, m)] = Fraction(rng.randint(-9, 9), rng.randint(1, 5))
    return VVSeries(fqm, den, Fraction(mmax), coeffs)


def test_formal_log_arithmetic():
    a = FormalLog.log(2, 3) + FormalLog.log(7, -1) + 1
    b = FormalLog.log(2, -3) + FormalLog.kappa00(-7, 2)
    s = a + b
    assert s.logs == ((7, Fraction(-1)),) and s.rat == 1 and s.k00 == ((-7, Fraction(2)),)
    assert (a - a) == ZERO and not (a - a)
    assert 2 * a == a + a
    assert (a / 3) * 3 == a


def test_formal_log_product_rejected():
    with pytest.raises(DomainError):
        FormalLog.log(2) * FormalLog.log(3)


def test_formal_log_json_round_trip():
    a = FormalLog(Fraction(-1, 3), ((5, Fraction(2, 7)), (3, Fraction(-1))), ((-23, Fraction(1, 2)),))
    assert FormalLog.from_json(json.loads(json.dumps(a.to_json()))) == a


def test_formal_log_numeric():
    import math
    a = FormalLog.log(7, -2)
    assert abs(a.numeric() + 2 * math.log(7)) < 1e-15
    assert FormalLog.kappa00(-7).numeric(lambda D: 1.5) == 1.5


def test_vvseries_rejects_bad_exponent():
    A = discriminant_group(EvenLattice(((2,),)))
    one = next(e for e in A.elements if e != A.zero)
    with pytest.raises(DomainError):
        VVSeries(A, 4, 2, {(one, Fraction(1, 2)): Fraction(1)})
    with pytest.raises(DomainError):
        VVSeries(A, 2, 2, {(one, Fraction(1, 4)): Fraction(1)})
    s = VVSeries(A, 4, 2, {(one, Fraction(1, 4)): Fraction(1), (one, Fraction(9, 4)): Fraction(1)})
    assert len(s.coeffs) == 1
    with pytest.raises(DomainError):
        s[(one, 3)]


def test_tensor_matches_direct_sum_theta():
    t2 = theta_series(DefiniteLattice(((2,),)), 6)
    t4 = theta_series(DefiniteLattice(((4,),)), 6)
    prod = tensor(t2, t4)
    A = prod.fqm
    assert A.size == 8
    for e in A.elements:
        shift = (Fraction(e[0], 2), Fraction(e[1], 4))
        expect = theta_bruteforce(((2, 0), (0, 4)), shift, 6)
        got = {m: c for (mu, m), c in prod.coeffs.items() if mu == e}
        assert got == {m: Fraction(c) for m, c in expect.items()}


def test_tensor_only_restricts_exponents():
    t2 = theta_series(DefiniteLattice(((2,),)), 6)
    full = tensor(t2, t2)
    part = tensor(t2, t2, only={Fraction(5, 2)})
    assert part.coeffs == {k: v for k, v in full.coeffs.items() if k[1] == Fraction(5, 2)}


def test_pair_and_constant_term_against_double_loop():
    rng = random.Random(5)
    A = discriminant_group(EvenLattice(((2, 1), (1, 4))))
    f, g = random_series(A, rng), random_series(A, rng)
    s = pair(f, g)
    expect: dict = {}
    for (mu, m1), a in f.coeffs.items():
        for (nu, m2), b in g.coeffs.items():
            if mu == nu and m1 + m2 <= s.mmax:
                expect[m1 + m2] = expect.get(m1 + m2, 0) + a * b
    assert dict(s.coeffs) == {m: c for m, c in expect.items() if c}
    assert constant_term(s) == expect.get(Fraction(0), 0)


def test_pair_rejects_other_module():
    A = discriminant_group(EvenLattice(((2,),)))
    B = discriminant_group(EvenLattice(((4,),)))
    with pytest.raises(DomainError):
        pair(VVSeries(A, 4, 1, {}), VVSeries(B, 8, 1, {}))


@pytest.fixture(scope="module")
def split_11():
    return split(HeegnerIndex(11, -7, 9))


def test_adjunction(split_11):
    sub = split_11.sublattice
    rng = random.Random(11)
    for _ in range(100):
        f = random_series(sub.fqm_L, rng)
        g = random_series(sub.fqm_M, rng, terms=30)
        lhs = pair(f, tr_sublattice(g, sub))
        rhs = pair(res_sublattice(f, sub), g)
        assert lhs.coeffs == rhs.coeffs


def test_image_is_a_homomorphism_onto_the_dual(split_11):
    sub = split_11.sublattice
    img = {e: mu for e, mu in sub.image.items() if mu is not None}
    assert len(img) == sub.fqm_M.size // sub.index == sub.fqm_L.size * sub.index
    assert set(img.values()) == set(sub.fqm_L.elements)
    for e, mu in list(img.items())[:50]:
        assert sub.fqm_M.q(e) == sub.fqm_L.q(mu)


def test_theta_decomposes_at_cm_point(split_11):
    assert library_counts(split_11, 5) == oracle_counts(split_11, 5)


def test_principal_part_symmetry_required():
    A = discriminant_group(EvenLattice(((2, 1), (1, 4))))
    mu = next(e for e in A.elements if A.neg(e) != e)
    m = frac_mod1(A.q(mu)) + 1
    with pytest.raises(DomainError):
        HolPrincipalPart(A, {(m, mu): Fraction(1)})
    with pytest.raises(DomainError):
        HolPrincipalPart(A, {(m + Fraction(1, 7), mu): 1, (m + Fraction(1, 7), A.neg(mu)): 1})
    pp = HolPrincipalPart.f_m_mu(A, m, mu, c00=3)
    assert pp.c_plus[(m, mu)] == pp.c_plus[(m, A.neg(mu))] == Fraction(1, 2)
    assert pp.c00 == 3


def test_pairing_principal_examples():
    A = discriminant_group(EvenLattice(((2, 1), (1, 4))))
    mu = next(e for e in A.elements if A.neg(e) != e)
    m = frac_mod1(A.q(mu)) + 1
    pp = HolPrincipalPart.f_m_mu(A, m, mu, c00=5)
    b = {(m, mu): Fraction(2), (m, A.neg(mu)): Fraction(4)}
    assert pairing_principal(b, pp) == 3
    assert pairing_principal(lambda mm, nu: 1, pp) == 1
    with pytest.raises(DomainError):
        pairing_principal({}, pp)


def test_ct_pairing_reads_principal_part_coefficients():
    P = DefiniteLattice(((2, 1), (1, 4)))
    th = theta_series(P, 3)
    A = th.fqm
    mu = next(e for e in A.elements if A.neg(e) != e)
    m = frac_mod1(A.q(mu)) + 1
    pp = HolPrincipalPart.f_m_mu(A, m, mu, c00=2)
    expect = (th[(mu, m)] + th[(A.neg(mu), m)]) / 2 + 2 * th[(A.zero, 0)]
    assert ct_pairing(pp, th) == expect
    with pytest.raises(DomainError):
        ct_pairing(pp, th.truncate(m - 1))
