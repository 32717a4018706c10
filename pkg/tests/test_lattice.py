from __future__ import annotations

import math
from fractions import Fraction

import pytest

from artifact.errors import DomainError
from artifact.lattice import (
    DefiniteLattice,
    binary_form_of,
    forms_equivalent,
    integer_kernel,
    orthogonal_split,
    reduce_binary,
    short_vectors,
    theta_series,
)
from artifact.modcurve import HeegnerIndex, heegner_form, split, x0n_lattice
from artifact.numthy import is_fundamental
from oracles import theta_bruteforce


def test_short_vectors_examples():
    assert len(short_vectors(DefiniteLattice(((2,),)), 4)) == 5
    assert len(short_vectors(DefiniteLattice(((-2, 0), (0, -2)), -1), 1)) == 5
    assert short_vectors(DefiniteLattice(((2,),)), 0) == [(Fraction(0),)]


def test_short_vectors_bad_input():
    with pytest.raises(DomainError):
        short_vectors(DefiniteLattice(((2,),)), -1)
    with pytest.raises(DomainError):
        short_vectors(DefiniteLattice(tuple(tuple(2 if i == j else 0 for j in range(5)) for i in range(5))), 1)
    with pytest.raises(DomainError):
        DefiniteLattice(((2, 3), (3, 2)))


@pytest.mark.parametrize("gram,mmax", [(((2,),), 4), (((2, 1), (1, 4)), 4), (((4, 1), (1, 6)), 4),
                                       (((2, 1, 0), (1, 2, 1), (0, 1, 2)), 4),
                                       (((2, 0, 0, 1), (0, 2, 0, 1), (0, 0, 2, 1), (1, 1, 1, 4)), 3)])
def test_theta_matches_bruteforce(gram, mmax):
    P = DefiniteLattice(gram)
    th = theta_series(P, mmax)
    A = P.fqm
    for mu in A.elements:
        shift = A.lift(mu) if A.orders else (0,) * P.rank
        expect = theta_bruteforce(gram, shift, mmax)
        got = {m: c for (nu, m), c in th.coeffs.items() if nu == mu}
        assert got == {m: Fraction(c) for m, c in expect.items()}


def test_theta_needs_positive_lattice():
    with pytest.raises(DomainError):
        theta_series(DefiniteLattice(((-2,),), -1), 2)


def test_integer_kernel():
    ker = integer_kernel([[1, 2, 3]])
    assert len(ker) == 2
    assert all(v[0] + 2 * v[1] + 3 * v[2] == 0 for v in ker)


def cm_indices(N_max=12, D_max=100):
    out = []
    for N in range(1, N_max + 1):
        for D in range(-3, -D_max - 1, -1):
            if not is_fundamental(D) or D % 2 == 0 or math.gcd(D, 2 * N) != 1:
                continue
            for r in range(2 * N):
                if (r * r - D) % (4 * N) == 0:
                    out.append(HeegnerIndex(N, D, r))
                    break
    return out


def test_split_invariants():
    for idx in cm_indices(6, 60):
        sp = split(idx)
        L = sp.L
        assert sp.N.even.det == -idx.D
        assert sp.P.even.det * sp.N.even.det == L.det * sp.index ** 2
        for v in sp.P_basis:
            assert all(L.bil(v, w) == 0 for w in sp.N_basis)
        standard = sp.x[0]
        assert L.q(standard) == idx.m


def test_heegner_form():
    count = 0
    for idx in cm_indices():
        assert forms_equivalent(binary_form_of(split(idx).N), heegner_form(idx))
        count += 1
    assert count > 100


def test_orthogonal_split_rejects_nonpositive():
    with pytest.raises(DomainError):
        orthogonal_split(x0n_lattice(3), (0, 1, 0))


def test_reduce_binary_examples():
    assert reduce_binary((2, 3, 2)) == reduce_binary((1, 1, 2))
    assert reduce_binary((1, 1, 2)) == (1, 1, 2)
    assert reduce_binary((3, -3, 1)) == (1, 1, 1)
    assert reduce_binary((-2, -3, -2)) == (-1, -1, -2)
    assert reduce_binary((2, -1, 3)) == (2, -1, 3)
    assert reduce_binary((2, 1, 3)) == (2, 1, 3)
    assert forms_equivalent((2, -1, 3), (2, 1, 3))
    assert not forms_equivalent((2, -1, 3), (2, 1, 3), improper=False)
    with pytest.raises(DomainError):
        reduce_binary((1, 3, 1))
