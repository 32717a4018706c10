"""The ten acceptance criteria, each timed against its budget.

Every test records one PASS/FAIL line; the lines are repeated in the terminal summary.
"""
from __future__ import annotations

import random
import time
from contextlib import contextmanager
from fractions import Fraction
from pathlib import Path


import conftest
from artifact.fqm import EvenLattice, WeilRep, discriminant_group, gauss_sum_check, weil_word
from artifact.hilbert import _gram as hms_gram
from artifact.hilbert import admissible_pairs, hms_intersection, hms_setup
from artifact.kappa import BinaryCM, arithmetic_degree_n0, degree_factor, kappa
from artifact.modcurve import (
    HeegnerIndex,
    admissible_grid,
    intersection_coeff,
    intersection_prop714,
    l_gU_closed,
    l_gU_dirichlet,
    read_newform,
    shimura_lift,
    split,
    x0n_lattice,
)
from artifact.numthy import class_data, kappa00, kappa00_continued, lfun_weight2
from artifact.qseries import pair, res_sublattice, tr_sublattice
from cli_check import COMMANDS, deterministic
from genus_check import admissible, genus_mismatches
from oracles import chi_table, dirichlet_convolve, lprime_quadrature
from synthetic import INSTANCES, convolved_newform, line_table, random_table
from test_qseries import random_series
from theta_check import library_counts, oracle_counts

DATA = Path(__file__).parent / "data"

CORPUS = [((2,),)] + [x0n_lattice(N).gram for N in (1, 2, 3, 5, 11, 37)] + [hms_gram(5)]


@contextmanager
def criterion(k: int, title: str, budget: float | None):
    t0 = time.perf_counter()
    detail = {"ok": False, "note": ""}
    try:
        yield detail
    finally:
        dt = time.perf_counter() - t0
        in_time = budget is None or dt < budget
        status = "PASS" if detail["ok"] and in_time else "FAIL"
        limit = f" (budget {budget:g} s)" if budget else ""
        line = f"criterion {k:2d} {status}: {title}; {detail['note']}; {dt:.1f} s{limit}"
        conftest.ACCEPTANCE[k] = line
        print(line)
    assert in_time, line


def test_criterion_01_weil_relations():
    with criterion(1, "Weil relations on the 8-lattice corpus", 5) as d:
        ok = 0
        for gram in CORPUS:
            L = EvenLattice(gram)
            A = discriminant_group(L)
            assert gauss_sum_check(A, L.signature)
            rep = WeilRep(A, L.signature)
            primes = rep.primes_for_length(8)
            one = weil_word(rep, "", primes)
            assert weil_word(rep, "STSTST", primes) == weil_word(rep, "SS", primes)
            assert weil_word(rep, "SSSSSSSS", primes) == one
            ok += 1
        d["ok"] = ok == 8
        d["note"] = f"{ok}/8 lattices"


def test_criterion_02_adjunction_and_theta():
    with criterion(2, "adjunction and theta decomposition on the (11, -7, 9) split", 30) as d:
        sp = split(HeegnerIndex(11, -7, 9))
        sub = sp.sublattice
        rng = random.Random(2)
        for _ in range(100):
            f = random_series(sub.fqm_L, rng)
            g = random_series(sub.fqm_M, rng, terms=30)
            assert pair(f, tr_sublattice(g, sub)).coeffs == pair(res_sublattice(f, sub), g).coeffs
        lib, orc = library_counts(sp, 5), oracle_counts(sp, 5)
        assert lib == orc
        d["ok"] = True
        d["note"] = f"100 random pairs, {len(lib)} theta coefficients"


def test_criterion_03_genus_identities():
    with criterion(3, "genus identities against ideal enumeration", 60) as d:
        total = 0
        for D in (-7, -11, -15, -23):
            checks, bad = genus_mismatches(D, 30)
            assert bad == [], bad[:5]
            total += checks
        d["ok"] = True
        d["note"] = f"{total} checks"


def test_criterion_04_arithmetic_degree():
    with criterion(4, "arithmetic degree = -2(h/w) kappa", 10) as d:
        n = 0
        for D in (-7, -11, -15, -23):
            hw = degree_factor(D)
            for form in class_data(D).forms:
                ctx = BinaryCM.from_form(form)
                for m, mu in admissible(ctx, 30):
                    assert arithmetic_degree_n0(m, mu, ctx) == kappa(m, mu, ctx) * (-2 * hw)
                    n += 1
        d["ok"] = True
        d["note"] = f"{n} (m, mu) pairs"


def test_criterion_05_reindexing():
    with criterion(5, "intersection_prop714 = intersection_coeff", 120) as d:
        grid = admissible_grid(7, [-3, -7, -11, -15, -19, -23], 200)
        step = max(1, len(grid) // 60)
        sample = grid[::step]
        levels = {i0.N for _, i0 in sample}
        for idx1, idx0 in sample:
            assert intersection_prop714(idx1, idx0) == intersection_coeff(idx1, idx0), (idx1, idx0)
        assert len(sample) >= 50
        d["ok"] = True
        d["note"] = f"{len(sample)} instances, levels {sorted(levels)}, max |D1| {max(-i1.D for i1, _ in sample)}"


def test_criterion_06_shimura_dirichlet():
    with criterion(6, "Shimura lift = Dirichlet convolution up to n = 200", 5) as d:
        for seed in range(20):
            N, D0, r0 = INSTANCES[seed % len(INSTANCES)]
            idx0 = HeegnerIndex(N, D0, r0)
            b = random_table(idx0, random.Random(100 + seed), 200)
            chi = chi_table(D0, 200)
            line = lambda k: b[(idx0.m * k * k, r0 * k % (2 * N))]
            assert shimura_lift(b, idx0, 200) == dirichlet_convolve(lambda t: chi[t], line, 200)
        d["ok"] = True
        d["note"] = "20 tables"


def test_criterion_07_rankin_routes():
    with criterion(7, "Rankin L-series routes and level-37 L-values", 30) as d:
        worst = 0.0
        for inst in INSTANCES:
            idx0 = HeegnerIndex(*inst)
            b, c = line_table(idx0, idx0.N)
            C = float(sum(abs(v) for v in c.values()))
            G = convolved_newform(idx0, c, int(C * 2e6) + 10)
            sp = split(idx0)
            for s in (1.0, 2.0):
                val, tail = l_gU_dirichlet(b, sp, s, idx0.m * 81, support_max=idx0.m * 64)
                cl, err = l_gU_closed(Fraction(2, 3), G, idx0, s)
                assert tail + err <= 1e-6
                assert abs(val - cl) <= tail + err
                worst = max(worst, abs(val - cl))
        G37 = read_newform(DATA / "37a.txt")
        lp = lfun_weight2(G37.coeffs, 37, "derivative", -1)
        lq = lprime_quadrature(G37.coeffs, 37)
        l1 = lfun_weight2(G37.coeffs, 37, "value", -1)
        assert abs(lp - lq) < 1e-6 and abs(l1) < 1e-6
        d["ok"] = True
        d["note"] = f"max route gap {worst:.1e}, L'(G,1) = {lp:.10f} vs {lq:.10f}, |L(G,1)| = {abs(l1):.1e}"


def test_criterion_08_kappa00():
    with criterion(8, "kappa(0,0) log-Gamma vs finite difference", 5) as d:
        gap = max(abs(kappa00(D) - kappa00_continued(D)) for D in (-3, -4, -7, -11, -23))
        assert gap < 1e-9
        d["ok"] = True
        d["note"] = f"max gap {gap:.1e}"


def test_criterion_09_hilbert():
    with criterion(9, "Hilbert modular surface routes A = B", 120) as d:
        n = 0
        for D in (-7, -11, -23):
            ctx = hms_setup(5, D)
            for m, mu in admissible_pairs(ctx, 10):
                a, b = hms_intersection(ctx, m, mu)
                assert a == b, (D, m, mu)
                n += 1
        d["ok"] = True
        d["note"] = f"{n} instances"


def test_criterion_10_determinism():
    with criterion(10, "CLI byte-identical across runs and thread counts 1, 8", None) as d:
        bad = [name for name in COMMANDS if not deterministic(name)]
        assert bad == []
        d["ok"] = True
        d["note"] = f"{len(COMMANDS)} command lines"
