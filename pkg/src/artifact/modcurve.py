"""Heegner data on X_0(N): lattices, Shimura lifts, the Rankin L-series of a CM point,
both sides of the finite intersection formula, and height right-hand sides."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.special import gamma as gamma_fn
from scipy.special import zeta as hurwitz_zeta

from .errors import DomainError, InputFormatError
from .fqm import Elem, EvenLattice, FqModule, discriminant_group
from .kappa import BinaryCM, kappa, script_E
from .lattice import SplitData, orthogonal_split, theta_series
from .numthy import class_data, is_fundamental, kronecker, lfun_weight2, require_fundamental
from .qseries import ZERO, FormalLog, HolPrincipalPart, VVSeries, ct_pairing, tensor, tr_sublattice

# ---------------------------------------------------------------- lattice and Heegner indices


@lru_cache(maxsize=None)
def x0n_lattice(N: int) -> EvenLattice:
    """Matrices (b, -a/N; c, -b) with Q = N det, in coordinates (a, b, c)."""
    if N < 1:
        raise DomainError("level must be positive")
    return EvenLattice(((0, 0, 1), (0, -2 * N, 0), (1, 0, 0)))


@lru_cache(maxsize=None)
def x0n_module(N: int) -> FqModule:
    return discriminant_group(x0n_lattice(N))


def mu_r(N: int, r: int) -> Elem:
    """The class of diag(r/2N, -r/2N)."""
    return x0n_module(N).reduce_vector((0, Fraction(r, 2 * N), 0))


@lru_cache(maxsize=None)
def r_of(N: int) -> dict[Elem, int]:
    return {mu_r(N, r): r for r in range(2 * N)}


@dataclass(frozen=True)
class HeegnerIndex:
    N: int
    D: int
    r: int

    def __post_init__(self):
        if self.N < 1 or self.D > 0:
            raise DomainError("need N >= 1 and D <= 0")
        if (self.D - self.r * self.r) % (4 * self.N):
            raise DomainError(f"D={self.D} is not r^2 mod 4N for r={self.r}, N={self.N}")
        object.__setattr__(self, "r", self.r % (2 * self.N))

    @property
    def m(self) -> Fraction:
        return Fraction(-self.D, 4 * self.N)

    @property
    def mu(self) -> Elem:
        return mu_r(self.N, self.r)


def standard_vector(idx: HeegnerIndex) -> tuple[Fraction, ...]:
    """(r/2N, 1/N; (D - r^2)/4N, -r/2N) in (a, b, c) coordinates."""
    N, D, r = idx.N, idx.D, idx.r
    x = (Fraction(-1), Fraction(r, 2 * N), Fraction(D - r * r, 4 * N))
    L = x0n_lattice(N)
    if L.q(x) != idx.m or x0n_module(N).reduce_vector(x) != idx.mu:
        raise DomainError("standard vector failed its defining checks")
    return x


def split(idx: HeegnerIndex) -> SplitData:
    return orthogonal_split(x0n_lattice(idx.N), standard_vector(idx))


def heegner_form(idx: HeegnerIndex) -> tuple[int, int, int]:
    N, D, r = idx.N, idx.D, idx.r
    return -N, -r, -(r * r - D) // (4 * N)


def _check_cm(idx: HeegnerIndex) -> None:
    require_fundamental(idx.D, odd=True)
    if math.gcd(idx.D, 2 * idx.N) != 1:
        raise DomainError(f"gcd(D={idx.D}, 2N={2 * idx.N}) != 1")


def heegner_degree(idx: HeegnerIndex) -> Fraction:
    """deg Z(U) = 4 h / w."""
    require_fundamental(idx.D)
    if math.gcd(idx.D, 2 * idx.N) != 1:
        raise DomainError(f"gcd(D={idx.D}, 2N={2 * idx.N}) != 1")
    cd = class_data(idx.D)
    return Fraction(4 * cd.h, cd.w)


def _hw(D: int) -> Fraction:
    cd = class_data(D)
    return Fraction(cd.h, cd.w)


# ---------------------------------------------------------------- Shimura lift

CoeffTable = Mapping[tuple[Fraction, int], Fraction]


def _lookup(b, m: Fraction, r: int, N: int) -> Fraction:
    key = (m, r % (2 * N))
    try:
        return Fraction(b(*key) if callable(b) else b[key])
    except KeyError:
        raise DomainError(f"missing coefficient b({m}, {key[1]})") from None


def shimura_lift(b: CoeffTable, idx0: HeegnerIndex, n_max: int) -> list[Fraction]:
    """B(n) = sum_{d|n} (D0/d) b(m0 n^2/d^2, r0 n/d), for n = 1..n_max."""
    out = []
    for n in range(1, n_max + 1):
        total = Fraction(0)
        for d in range(1, n + 1):
            if n % d:
                continue
            chi = kronecker(idx0.D, d)
            if chi:
                k = n // d
                total += chi * _lookup(b, idx0.m * k * k, idx0.r * k, idx0.N)
        out.append(total)
    return out


# ---------------------------------------------------------------- Rankin L-series of the CM cycle


@dataclass(frozen=True)
class NewformData:
    level: int
    coeffs: tuple  # a_1, a_2, ...
    sign: int | None = None  # None: coefficients not attached to a genuine newform
    coeff_bound: tuple[float, float] | None = None  # |a_n| <= C n^alpha
    label: str = ""

    def __post_init__(self):
        if self.coeffs and self.coeffs[0] != 1 and any(self.coeffs):
            raise DomainError("a_1 must be 1")


def dirichlet_l(D: int, s: float) -> float:
    """L(chi_D, s) for real s > 1 through Hurwitz zeta values."""
    q = abs(D)
    return sum(kronecker(D, a) * hurwitz_zeta(s, a / q) for a in range(1, q + 1)) / q ** s


def l_gU_dirichlet(b, sp: SplitData, s: float, mmax, coeff_bound: tuple[float, float] | None = None,
                   support_max=None) -> tuple[float, float]:
    """Truncated Dirichlet series for L(g, U, s) over lambda in P' cap L', with a tail bound.

    Returns (value, tail).  The tail is 0 when b is known to vanish beyond mmax
    (support_max <= mmax); otherwise it uses |b(m, mu)| <= C m^alpha.  A mapping b
    is read as zero off its keys.
    """
    mmax = Fraction(mmax)
    N = -sp.L.gram[1][1] // 2
    th = theta_series(sp.P, mmax)
    sub = sp.sublattice
    zeroN = tuple(0 for _ in sub.piece_fqms[1].orders)
    sigma = (s + 1) / 2
    total = 0.0
    rmap = r_of(N)
    for (mu, m), r in th.coeffs.items():
        if m == 0:
            continue
        img = sub.image[mu + zeroN]
        if img is None:
            continue
        val = Fraction(b.get((m, rmap[img]), 0)) if isinstance(b, Mapping) else _lookup(b, m, rmap[img], N)
        if val:
            total += float(r * val) * float(m) ** (-sigma)
    pref = (4 * math.pi) ** (-sigma) * math.gamma(sigma)
    tail = 0.0
    if support_max is None or Fraction(support_max) > mmax:
        if coeff_bound is None:
            raise DomainError("a coefficient bound is needed to bound the tail")
        C, alpha = coeff_bound
        if sp.P.rank != 1:
            raise DomainError("tail bound assumes a rank-one positive part")
        # lambda = k y with y generating P', Q(y) = 1/(2 g); two vectors per k
        q1 = 1 / (2 * sp.P.gram[0][0])
        K = math.floor(math.sqrt(float(mmax) / q1))
        ex = 2 * (sigma - alpha)
        if ex <= 1:
            raise DomainError("tail does not converge for this coefficient bound")
        tail = pref * 2 * C * q1 ** (alpha - sigma) * max(K, 1) ** (1 - ex) / (ex - 1)
    return pref * total, tail


def _lg_direct(G: NewformData, sigma: float) -> tuple[float, float]:
    a = np.asarray(G.coeffs, dtype=float)
    n = np.arange(1, len(a) + 1, dtype=float)
    val = float(np.sum(a * n ** (-sigma)))
    if G.coeff_bound is None:
        raise DomainError("direct Dirichlet evaluation needs a coefficient bound")
    C, alpha = G.coeff_bound
    if sigma - alpha <= 1:
        raise DomainError("Dirichlet series does not converge absolutely here")
    M = len(a)
    return val, C * M ** (1 + alpha - sigma) / (sigma - alpha - 1)


def l_G(G: NewformData, sigma: float) -> tuple[float, float]:
    """L(G, sigma) with an error bound."""
    if G.sign in (1, -1):
        return lfun_weight2(G.coeffs, G.level, "value", G.sign, s=sigma), 1e-10
    return _lg_direct(G, sigma)


def l_gU_closed(b_m0mu0, G: NewformData, idx0: HeegnerIndex, s: float) -> tuple[float, float]:
    """2^-s (pi m0)^(-(s+1)/2) Gamma((s+1)/2) L(chi_D0, s+1)^-1 b(m0, mu0) L(G, s+1)."""
    b0 = float(Fraction(b_m0mu0))
    if b0 == 0:
        return 0.0, 0.0
    sigma = (s + 1) / 2
    m0 = float(idx0.m)
    lg, err = l_G(G, s + 1)
    pref = 2 ** (-s) * (math.pi * m0) ** (-sigma) * gamma_fn(sigma) / dirichlet_l(idx0.D, s + 1)
    return pref * b0 * lg, abs(pref * b0) * err


def l_gU_closed_derivative(b_m0mu0, G: NewformData, idx0: HeegnerIndex) -> float:
    """d/ds L(g, U, s) at s = 0 for an odd-sign newform (so that L(G, 1) = 0)."""
    b0 = float(Fraction(b_m0mu0))
    if b0 == 0 or not any(G.coeffs):
        return 0.0
    if G.sign != -1:
        raise DomainError("derivative at the centre needs an odd-sign newform")
    lp = lfun_weight2(G.coeffs, G.level, "derivative", -1)
    return (math.pi * float(idx0.m)) ** -0.5 * math.sqrt(math.pi) / dirichlet_l_at_1(idx0.D) * b0 * lp


def dirichlet_l_at_1(D: int) -> float:
    """L(chi_D, 1) = 2 pi h / (w sqrt|D|)."""
    cd = class_data(D)
    return 2 * math.pi * cd.h / (cd.w * math.sqrt(abs(D)))


# ---------------------------------------------------------------- finite intersections


def cm_context(idx0: HeegnerIndex) -> BinaryCM:
    """(n0, -N/N(n0)) for n0 = [N, (r0 + sqrt D0)/2]."""
    N, D, r = idx0.N, idx0.D, idx0.r
    return BinaryCM.from_form((N, r, (r * r - D) // (4 * N)))


def nu_class(ctx: BinaryCM, idx0: HeegnerIndex, a: int) -> Elem:
    """Class of N a / sqrt(D0) in n0'/n0, coordinates on the basis (N, (r0 + sqrt D0)/2)."""
    D, r, N = idx0.D, idx0.r, idx0.N
    v = (Fraction(-a * r, D), Fraction(2 * N * a, D))
    return ctx.fqm.reduce_vector(v)


def _gate(idx1: HeegnerIndex, idx0: HeegnerIndex) -> None:
    if idx1.N != idx0.N:
        raise DomainError("Heegner indices must share the level")
    _check_cm(idx0)
    prod = idx0.D * idx1.D
    if prod > 0 and math.isqrt(prod) ** 2 == prod:
        raise DomainError(f"D0*D1 = {prod} is a square")


def intersection_terms(idx1: HeegnerIndex, idx0: HeegnerIndex) -> list[tuple[int, Fraction, Elem]]:
    """(n, t, mu) with t = (D0 D1 - n^2)/(4N|D0|) and mu the class of 2~ n / sqrt(D0)."""
    N, D0 = idx0.N, idx0.D
    ctx = cm_context(idx0)
    prod = D0 * idx1.D
    inv2 = pow(2, -1, -D0)
    invN = pow(N, -1, -D0)
    out = []
    bound = math.isqrt(prod) if prod >= 0 else -1
    for n in range(-bound, bound + 1):
        if (n - idx0.r * idx1.r) % (2 * N):
            continue
        t = Fraction(prod - n * n, 4 * N * (-D0))
        a = (inv2 * n * invN) % (-D0)
        mu = nu_class(ctx, idx0, a)
        if not ctx.compatible(t, mu):
            raise DomainError(f"term n={n}: t={t} not in Q(mu)+Z")
        out.append((n, t, mu))
    return out


def intersection_sum(idx1: HeegnerIndex, idx0: HeegnerIndex) -> FormalLog:
    """-(2h/w) sum_n kappa(t_n, mu_n), without the nonsquare gate."""
    if idx1.N != idx0.N:
        raise DomainError("Heegner indices must share the level")
    _check_cm(idx0)
    ctx = cm_context(idx0)
    total = ZERO
    for _, t, mu in intersection_terms(idx1, idx0):
        total = total + kappa(t, mu, ctx)
    return total * (-2 * _hw(idx0.D))


def intersection_prop714(idx1: HeegnerIndex, idx0: HeegnerIndex) -> FormalLog:
    _gate(idx1, idx0)
    return intersection_sum(idx1, idx0)


def theta_eis_series(idx0: HeegnerIndex, mmax, only=None) -> VVSeries:
    """tr of theta_P (x) E_N to L'/L for the CM split attached to idx0."""
    sp = split(idx0)
    th = theta_series(sp.P, mmax)
    ctx = BinaryCM.from_lattice(sp.N)
    E = script_E(ctx, mmax)
    return tr_sublattice(tensor(th, E, only=only), sp.sublattice)


def intersection_coeff(idx1: HeegnerIndex, idx0: HeegnerIndex) -> FormalLog:
    _gate(idx1, idx0)
    m1 = idx1.m
    T = theta_eis_series(idx0, m1, only={m1})
    c = T[(idx1.mu, m1)]
    return (c if c else ZERO) * (-2 * _hw(idx0.D))


# ---------------------------------------------------------------- heights


def archimedean_value(pp: HolPrincipalPart, idx0: HeegnerIndex, lderiv: float) -> tuple[FormalLog, float]:
    """(4h/w) (CT <f+, theta_P (x) E_N> + L'(xi f, U, 0)): exact part and numeric total."""
    _check_cm(idx0)
    need = max([Fraction(0)] + [m for m, _ in pp.c_plus])
    T = theta_eis_series(idx0, need)
    ct = ct_pairing(pp, T)
    exact = (ct if ct else ZERO) * (4 * _hw(idx0.D))
    return exact, exact.numeric() + float(4 * _hw(idx0.D)) * lderiv


def faltings_rhs(pp: HolPrincipalPart, idx0: HeegnerIndex, lderiv: float,
                 kappa00_value: Callable[[int], float] | None = None) -> float:
    """(2h/w) (c+(0,0) kappa(0,0) + L'(xi f, U, 0))."""
    _check_cm(idx0)
    val = FormalLog.kappa00(idx0.D, pp.c00).numeric(kappa00_value) if pp.c00 else 0.0
    return float(2 * _hw(idx0.D)) * (val + lderiv)


# ---------------------------------------------------------------- files and grids


def read_newform(path) -> NewformData:
    """Parse '# level N sign s' followed by contiguous lines 'n a_n'."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise InputFormatError(f"{path}: {exc.strerror}") from None
    if not lines:
        raise InputFormatError(f"{path}: empty newform file")
    head = lines[0].split()
    if len(head) != 5 or head[:2] != ["#", "level"] or head[3] != "sign" or head[4] not in ("1", "-1", "+1"):
        raise InputFormatError(f"{path}:1: expected '# level N sign +-1'")
    try:
        level = int(head[2])
    except ValueError:
        raise InputFormatError(f"{path}:1: bad level") from None
    coeffs = []
    for no, line in enumerate(lines[1:], 2):
        if not line.strip():
            continue
        parts = line.split()
        try:
            n, a = (int(x) for x in parts)
        except ValueError:
            raise InputFormatError(f"{path}:{no}: expected 'n a_n'") from None
        if n != len(coeffs) + 1:
            raise InputFormatError(f"{path}:{no}: index {n} breaks the contiguous numbering")
        coeffs.append(a)
    if coeffs and any(coeffs) and coeffs[0] != 1:
        raise InputFormatError(f"{path}:2: a_1 must be 1")
    return NewformData(level, tuple(coeffs), int(head[4]), label=str(path))


def multiplicativity_ok(G: NewformData, limit: int = 60) -> bool:
    a = G.coeffs
    n = min(limit, len(a))
    return all(a[i * j - 1] == a[i - 1] * a[j - 1]
               for i in range(2, n + 1) for j in range(2, n + 1)
               if i * j <= len(a) and math.gcd(i, j) == 1)


def admissible_grid(N_max: int, D0s: Sequence[int], D1_max: int) -> list[tuple[HeegnerIndex, HeegnerIndex]]:
    """Admissible (idx1, idx0) pairs in a fixed order: N, D0, |D1|, r1 ascending, r0 smallest."""
    out = []
    for N in range(1, N_max + 1):
        for D0 in D0s:
            if not is_fundamental(D0) or D0 % 2 == 0 or math.gcd(D0, 2 * N) != 1:
                continue
            r0s = [r for r in range(2 * N) if (D0 - r * r) % (4 * N) == 0]
            if not r0s:
                continue
            idx0 = HeegnerIndex(N, D0, r0s[0])
            for D1 in range(-3, -D1_max - 1, -1):
                prod = D0 * D1
                if math.isqrt(prod) ** 2 == prod:
                    continue
                for r1 in range(2 * N):
                    if (D1 - r1 * r1) % (4 * N) == 0:
                        out.append((HeegnerIndex(N, D1, r1), idx0))
    return out
