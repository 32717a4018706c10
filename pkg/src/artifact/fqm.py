"""Discriminant forms of even lattices and the Weil representation on C[L'/L].

Roots of unity live in the cyclotomic field of order n = lcm(8, level).  Single
entries are exact `ScaledCyclotomic` numbers.  Products of whole matrices go
through `CycloMatrix`, which evaluates every entry at all primitive n-th roots of
unity modulo a few primes p = 1 (mod n); an identity is accepted only when the
product of the primes exceeds twice a proven bound on the coefficients of the
difference, so the verdict is exact.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache, reduce
from typing import Iterable, Sequence

import numpy as np
from sympy import isprime

from .errors import DomainError

Elem = tuple[int, ...]


# ---------------------------------------------------------------- integer linear algebra

def smith_form(mat: Sequence[Sequence[int]]):
    """Return (d, U, V) with U*mat*V = diag(d), U and V unimodular."""
    A = [list(map(int, row)) for row in mat]
    n, m = len(A), len(A[0]) if A else 0
    U = [[int(i == j) for j in range(n)] for i in range(n)]
    V = [[int(i == j) for j in range(m)] for i in range(m)]

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for M in (A, V):
            for row in M:
                row[i], row[j] = row[j], row[i]

    def add_row(dst, src, q):  # row_dst -= q*row_src
        A[dst] = [a - q * b for a, b in zip(A[dst], A[src])]
        U[dst] = [a - q * b for a, b in zip(U[dst], U[src])]

    def add_col(dst, src, q):
        for M in (A, V):
            for row in M:
                row[dst] -= q * row[src]

    for t in range(min(n, m)):
        while True:
            piv = [(abs(A[i][j]), i, j) for i in range(t, n) for j in range(t, m) if A[i][j]]
            if not piv:
                break
            _, i, j = min(piv)
            swap_rows(t, i)
            swap_cols(t, j)
            clean = True
            for i in range(t + 1, n):
                add_row(i, t, A[i][t] // A[t][t])
                clean &= A[i][t] == 0
            for j in range(t + 1, m):
                add_col(j, t, A[t][j] // A[t][t])
                clean &= A[t][j] == 0
            if clean:
                bad = [i for i in range(t + 1, n) for j in range(t + 1, m) if A[i][j] % A[t][t]]
                if not bad:
                    break
                add_row(t, bad[0], -1)
        if A[t][t] < 0:
            A[t] = [-a for a in A[t]]
            U[t] = [-a for a in U[t]]
    d = [A[i][i] for i in range(min(n, m))]
    return d, U, V


def rational_inverse(mat: Sequence[Sequence]) -> list[list[Fraction]]:
    n = len(mat)
    M = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(mat)]
    for c in range(n):
        p = next((r for r in range(c, n) if M[r][c] != 0), None)
        if p is None:
            raise DomainError("singular matrix")
        M[c], M[p] = M[p], M[c]
        inv = 1 / M[c][c]
        M[c] = [x * inv for x in M[c]]
        for r in range(n):
            if r != c and M[r][c]:
                f = M[r][c]
                M[r] = [a - f * b for a, b in zip(M[r], M[c])]
    return [row[n:] for row in M]


def mat_vec(M, v):
    return tuple(sum((a * b for a, b in zip(row, v)), Fraction(0)) for row in M)


def frac_mod1(x) -> Fraction:
    x = Fraction(x)
    return x - math.floor(x)


def determinant(mat) -> Fraction:
    n = len(mat)
    M = [[Fraction(x) for x in row] for row in mat]
    det = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if M[r][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            M[c], M[p] = M[p], M[c]
            det = -det
        det *= M[c][c]
        for r in range(c + 1, n):
            f = M[r][c] / M[c][c]
            if f:
                M[r] = [a - f * b for a, b in zip(M[r], M[c])]
    return det


# ---------------------------------------------------------------- lattices

@dataclass(frozen=True)
class EvenLattice:
    gram: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        g = tuple(tuple(int(x) for x in row) for row in self.gram)
        object.__setattr__(self, "gram", g)
        n = len(g)
        if any(len(row) != n for row in g) or any(g[i][j] != g[j][i] for i in range(n) for j in range(n)):
            raise DomainError("gram matrix must be square and symmetric")
        if any(g[i][i] % 2 for i in range(n)):
            raise DomainError("gram matrix must have even diagonal")
        if self.det == 0:
            raise DomainError("degenerate gram matrix")

    @property
    def rank(self) -> int:
        return len(self.gram)

    @cached_property
    def det(self) -> int:
        return int(determinant(self.gram))

    @cached_property
    def signature(self) -> tuple[int, int]:
        ev = np.linalg.eigvalsh(np.array(self.gram, dtype=float))
        return int((ev > 0).sum()), int((ev < 0).sum())

    def bil(self, v, w) -> Fraction:
        return sum((Fraction(v[i]) * self.gram[i][j] * w[j]
                    for i in range(self.rank) for j in range(self.rank)), Fraction(0))

    def q(self, v) -> Fraction:
        return self.bil(v, v) / 2

    def in_dual(self, v) -> bool:
        return all(Fraction(x).denominator == 1 for x in mat_vec(self.gram, v))

    def direct_sum(self, other: "EvenLattice") -> "EvenLattice":
        n, m = self.rank, other.rank
        g = [[0] * (n + m) for _ in range(n + m)]
        for i in range(n):
            for j in range(n):
                g[i][j] = self.gram[i][j]
        for i in range(m):
            for j in range(m):
                g[n + i][n + j] = other.gram[i][j]
        return EvenLattice(tuple(map(tuple, g)))


# ---------------------------------------------------------------- finite quadratic modules

@dataclass(frozen=True, eq=False)
class FqModule:
    """Finite quadratic module presented as a product of cyclic groups Z/d_i."""

    orders: tuple[int, ...]
    q_gen: tuple[Fraction, ...]
    b_gen: tuple[tuple[Fraction, ...], ...]
    lattice: EvenLattice | None = None
    gens: tuple[tuple[Fraction, ...], ...] = ()
    coord: tuple[tuple[int, ...], ...] = ()  # integer matrix: L' coordinates -> k_i/d_i

    @cached_property
    def size(self) -> int:
        return math.prod(self.orders)

    @cached_property
    def elements(self) -> tuple[Elem, ...]:
        return tuple(itertools.product(*(range(d) for d in self.orders)))

    @cached_property
    def _index(self) -> dict[Elem, int]:
        return {e: i for i, e in enumerate(self.elements)}

    def index(self, e: Elem) -> int:
        return self._index[self.normalize(e)]

    @property
    def zero(self) -> Elem:
        return tuple(0 for _ in self.orders)

    def normalize(self, e) -> Elem:
        return tuple(int(k) % d for k, d in zip(e, self.orders))

    def add(self, a: Elem, b: Elem) -> Elem:
        return tuple((x + y) % d for x, y, d in zip(a, b, self.orders))

    def neg(self, a: Elem) -> Elem:
        return tuple((-x) % d for x, d in zip(a, self.orders))

    def scale(self, k: int, a: Elem) -> Elem:
        return tuple((k * x) % d for x, d in zip(a, self.orders))

    def q(self, a: Elem) -> Fraction:
        n = len(a)
        val = sum((a[i] * a[i] * self.q_gen[i] for i in range(n)), Fraction(0))
        val += sum((a[i] * a[j] * self.b_gen[i][j] for i in range(n) for j in range(i + 1, n)), Fraction(0))
        return frac_mod1(val)

    def bil(self, a: Elem, b: Elem) -> Fraction:
        n = len(a)
        return frac_mod1(sum((a[i] * b[j] * self.b_gen[i][j] for i in range(n) for j in range(n)), Fraction(0)))

    @cached_property
    def level(self) -> int:
        dens = [x.denominator for x in self.q_gen] + [x.denominator for row in self.b_gen for x in row]
        return reduce(math.lcm, dens, 1)

    def order_of(self, a: Elem) -> int:
        return reduce(math.lcm, (d // math.gcd(d, x) for x, d in zip(a, self.orders)), 1)

    def reduce_vector(self, v) -> Elem:
        """Class in L'/L of a dual-lattice vector given in lattice coordinates."""
        if self.lattice is None:
            raise DomainError("module is not attached to a lattice")
        if not self.lattice.in_dual(v):
            raise DomainError(f"{v} is not in the dual lattice")
        w = mat_vec(self.coord, v)
        out = []
        for x, d in zip(w, self.orders):
            k = x * d
            if k.denominator != 1:
                raise DomainError("inconsistent discriminant coordinates")
            out.append(int(k) % d)
        return tuple(out)

    def lift(self, e: Elem) -> tuple[Fraction, ...]:
        """Deterministic lift: sum of k_i * g_i with 0 <= k_i < d_i."""
        n = self.lattice.rank
        return tuple(sum((k * g[i] for k, g in zip(e, self.gens)), Fraction(0)) for i in range(n))

    def direct_sum(self, other: "FqModule") -> "FqModule":
        n, m = len(self.orders), len(other.orders)
        b = [[Fraction(0)] * (n + m) for _ in range(n + m)]
        for i in range(n):
            for j in range(n):
                b[i][j] = self.b_gen[i][j]
        for i in range(m):
            for j in range(m):
                b[n + i][n + j] = other.b_gen[i][j]
        return FqModule(self.orders + other.orders, self.q_gen + other.q_gen, tuple(map(tuple, b)))

    def split(self, e: Elem, left: int) -> tuple[Elem, Elem]:
        return e[:left], e[left:]


def discriminant_group(L: EvenLattice) -> FqModule:
    """L'/L via the Smith form of the gram matrix."""
    d, U, V = smith_form(L.gram)
    if any(x == 0 for x in d):
        raise DomainError("degenerate lattice")
    Vinv = [[int(x) for x in row] for row in rational_inverse(V)]
    n = L.rank
    keep = [i for i in range(n) if d[i] > 1]
    gens = tuple(tuple(Fraction(V[r][i], d[i]) for r in range(n)) for i in keep)
    q_gen = tuple(frac_mod1(L.q(g)) for g in gens)
    b_gen = tuple(tuple(frac_mod1(L.bil(g, h)) for h in gens) for g in gens)
    coord = tuple(tuple(Vinv[i]) for i in keep)
    return FqModule(tuple(d[i] for i in keep), q_gen, b_gen, L, gens, coord)


def cyclic_module(order: int, q_gen) -> FqModule:
    q_gen = frac_mod1(q_gen)
    return FqModule((order,), (q_gen,), ((frac_mod1(2 * q_gen),),))


# ---------------------------------------------------------------- cyclotomic numbers

@lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> tuple[int, ...]:
    """Coefficients of Phi_n, lowest degree first."""
    num = [-1] + [0] * (n - 1) + [1]
    for d in range(1, n):
        if n % d == 0:
            num = _poly_divexact(num, cyclotomic_poly(d))
    return tuple(num)


def _poly_divexact(a: list[int], b: Sequence[int]) -> list[int]:
    a = list(a)
    db = len(b) - 1
    q = [0] * (len(a) - db)
    for k in range(len(a) - 1, db - 1, -1):
        c = a[k] // b[-1]
        q[k - db] = c
        for j in range(db + 1):
            a[k - db + j] -= c * b[j]
    return q


@lru_cache(maxsize=None)
def _power_reductions(n: int) -> tuple[tuple[int, ...], ...]:
    """x^k mod Phi_n for 0 <= k < n, as integer coefficient tuples."""
    phi = cyclotomic_poly(n)
    deg = len(phi) - 1
    rows = []
    cur = [0] * deg
    cur[0] = 1
    for _ in range(n):
        rows.append(tuple(cur))
        top = cur[-1]
        cur = [0] + cur[:-1]
        if top:
            cur = [c - top * p for c, p in zip(cur, phi[:-1])]
    return tuple(rows)


def reduction_bound(n: int) -> int:
    """max over k of the sup-norm of x^k mod Phi_n."""
    return max(max(abs(c) for c in row) for row in _power_reductions(n))


@dataclass(frozen=True)
class CycloContext:
    """Cyclotomic field of order n together with |A| and the element sqrt|A|."""

    n: int
    A: int
    sqrt_coeffs: tuple[Fraction, ...]

    @property
    def degree(self) -> int:
        return len(cyclotomic_poly(self.n)) - 1


@dataclass(frozen=True, eq=False)
class ScaledCyclotomic:
    """z * |A|^(-k/2) with z in Q(zeta_n) in the reduced power basis."""

    ctx: CycloContext
    z: tuple[Fraction, ...]
    k: int = 0

    @staticmethod
    def root(ctx: CycloContext, exponent: int, k: int = 0) -> "ScaledCyclotomic":
        row = _power_reductions(ctx.n)[exponent % ctx.n]
        return ScaledCyclotomic(ctx, tuple(Fraction(c) for c in row), k)

    @staticmethod
    def zero(ctx: CycloContext) -> "ScaledCyclotomic":
        return ScaledCyclotomic(ctx, tuple(Fraction(0) for _ in range(ctx.degree)), 0)

    def _unscaled(self) -> tuple[Fraction, ...]:
        if self.k == 0:
            return self.z
        # |A|^(-1/2) = sqrt|A| / |A|
        prod = _cmul(self.z, self.ctx.sqrt_coeffs, self.ctx.n)
        return tuple(c / self.ctx.A for c in prod)

    def __add__(self, other: "ScaledCyclotomic") -> "ScaledCyclotomic":
        if self.k == other.k:
            return ScaledCyclotomic(self.ctx, tuple(a + b for a, b in zip(self.z, other.z)), self.k)
        return ScaledCyclotomic(self.ctx, tuple(a + b for a, b in zip(self._unscaled(), other._unscaled())), 0)

    def __mul__(self, other: "ScaledCyclotomic") -> "ScaledCyclotomic":
        z = _cmul(self.z, other.z, self.ctx.n)
        k = self.k + other.k
        if k == 2:
            z = tuple(c / self.ctx.A for c in z)
            k = 0
        return ScaledCyclotomic(self.ctx, z, k)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ScaledCyclotomic):
            return NotImplemented
        if self.k == other.k:
            return self.z == other.z
        return self._unscaled() == other._unscaled()

    __hash__ = None

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.z)

    def conjugate(self) -> "ScaledCyclotomic":
        red = _power_reductions(self.ctx.n)
        out = [Fraction(0)] * self.ctx.degree
        for j, c in enumerate(self.z):
            if c:
                for i, r in enumerate(red[(-j) % self.ctx.n]):
                    out[i] += c * r
        return ScaledCyclotomic(self.ctx, tuple(out), self.k)

    def to_complex(self) -> complex:
        n = self.ctx.n
        val = sum(complex(float(c)) * complex(math.cos(2 * math.pi * j / n), math.sin(2 * math.pi * j / n))
                  for j, c in enumerate(self.z))
        return val * self.ctx.A ** (-self.k / 2)


def _cmul(a: Sequence[Fraction], b: Sequence[Fraction], n: int) -> tuple[Fraction, ...]:
    red = _power_reductions(n)
    deg = len(a)
    out = [Fraction(0)] * deg
    for i, x in enumerate(a):
        if not x:
            continue
        for j, y in enumerate(b):
            if y:
                c = x * y
                for t, r in enumerate(red[i + j]):
                    if r:
                        out[t] += c * r
    return tuple(out)


# ---------------------------------------------------------------- Weil representation

def gauss_sum_check(fqm: FqModule, signature: tuple[int, int]) -> bool:
    """Milgram: sum_mu e(Q(mu)) = sqrt|A| e((b+ - b-)/8), checked numerically."""
    s = sum(complex(math.cos(2 * math.pi * fqm.q(e)), math.sin(2 * math.pi * fqm.q(e))) for e in fqm.elements)
    sig = signature[0] - signature[1]
    target = math.sqrt(fqm.size) * complex(math.cos(2 * math.pi * sig / 8), math.sin(2 * math.pi * sig / 8))
    return abs(s - target) < 1e-12 * max(1.0, math.sqrt(fqm.size))


def gauss_sum_exact(fqm: FqModule, signature: tuple[int, int]) -> bool:
    """Exact Milgram check when |A| is a perfect square."""
    r = math.isqrt(fqm.size)
    if r * r != fqm.size:
        raise DomainError("exact Milgram check needs a square group order")
    ctx = cyclo_context(fqm, signature)
    n = ctx.n
    total = ScaledCyclotomic.zero(ctx)
    for e in fqm.elements:
        total = total + ScaledCyclotomic.root(ctx, int(fqm.q(e) * n))
    sig = signature[0] - signature[1]
    target = ScaledCyclotomic.root(ctx, sig * n // 8)
    target = ScaledCyclotomic(ctx, tuple(c * r for c in target.z))
    return total == target


@lru_cache(maxsize=None)
def _ctx_cached(n: int, A: int, sqrt_coeffs: tuple[Fraction, ...]) -> CycloContext:
    return CycloContext(n, A, sqrt_coeffs)


def cyclo_context(fqm: FqModule, signature: tuple[int, int]) -> CycloContext:
    n = math.lcm(8, fqm.level)
    sig = signature[0] - signature[1]
    red = _power_reductions(n)
    deg = len(red[0])
    acc = [Fraction(0)] * deg
    # sqrt|A| = e(-sig/8) * sum_mu e(Q(mu))
    for e in fqm.elements:
        expo = (int(fqm.q(e) * n) - sig * n // 8) % n
        for i, c in enumerate(red[expo]):
            acc[i] += c
    return _ctx_cached(n, fqm.size, tuple(acc))


def _check_signature(fqm: FqModule, signature: tuple[int, int]) -> None:
    if not gauss_sum_check(fqm, signature):
        raise DomainError(f"signature {signature} fails the Milgram check for this module")


def weil_T(fqm: FqModule, signature: tuple[int, int] = (0, 0)) -> list[list[ScaledCyclotomic]]:
    ctx = cyclo_context(fqm, signature)
    els = fqm.elements
    zero = ScaledCyclotomic.zero(ctx)
    return [[ScaledCyclotomic.root(ctx, int(fqm.q(a) * ctx.n)) if i == j else zero
             for j, a in enumerate(els)] for i, _ in enumerate(els)]


def weil_S(fqm: FqModule, signature: tuple[int, int]) -> list[list[ScaledCyclotomic]]:
    """Entries e((b- - b+)/8) e(-(mu,nu)) / sqrt|A|."""
    _check_signature(fqm, signature)
    ctx = cyclo_context(fqm, signature)
    n = ctx.n
    phase = (signature[1] - signature[0]) * n // 8
    els = fqm.elements
    return [[ScaledCyclotomic.root(ctx, phase - int(fqm.bil(a, b) * n), 1) for b in els] for a in els]


# multi-modular evaluation engine --------------------------------------------------------

_PRIME_CEILING = 1 << 22  # keeps dim * p^2 exact in float64 for dim <= 512


@lru_cache(maxsize=None)
def _primes_for(n: int, count: int) -> tuple[int, ...]:
    out = []
    p = (_PRIME_CEILING // n) * n + 1
    while len(out) < count:
        p -= n
        if p < 3 * n:
            raise DomainError("ran out of evaluation primes")
        if isprime(p):
            out.append(p)
    return tuple(out)


def _primitive_root_of_order(n: int, p: int) -> int:
    fac = [q for q in range(2, n + 1) if n % q == 0 and isprime(q)]
    for g in range(2, p):
        r = pow(g, (p - 1) // n, p)
        if all(pow(r, n // q, p) != 1 for q in fac):
            return r
    raise DomainError("no primitive root found")


@lru_cache(maxsize=None)
def _eval_tables(n: int, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Powers r^e for e < n, and the unit exponents u with r^u the primitive roots."""
    r = _primitive_root_of_order(n, p)
    pw = np.array([pow(r, e, p) for e in range(n)], dtype=np.int64)
    units = np.array([u for u in range(1, n) if math.gcd(u, n) == 1] or [0], dtype=np.int64)
    return pw, units


def _fmod(x: np.ndarray, p: int) -> np.ndarray:
    # exact for nonnegative integers below 2^53; the quotient guess is off by at most one
    r = x - p * np.floor(x * (1.0 / p))
    r[r < 0] += p
    r[r >= p] -= p
    return r.astype(np.int64)


@dataclass(eq=False)
class CycloMatrix:
    """Square matrix X * |A|^(-scale/2) with X over Z[zeta_n], stored by residues.

    residues[t] has shape (phi(n), d, d): X evaluated at each primitive root mod primes[t].
    l1 bounds the sum of absolute coefficients of any entry of X written in powers of zeta.
    """

    n: int
    A: int
    primes: tuple[int, ...]
    residues: list[np.ndarray]
    scale: int
    l1: int
    sqrt_res: list[np.ndarray] = field(default_factory=list)  # sqrt|A| at each root

    @property
    def dim(self) -> int:
        return self.residues[0].shape[-1]

    def __matmul__(self, other: "CycloMatrix") -> "CycloMatrix":
        res = []
        for p, a, b in zip(self.primes, self.residues, other.residues):
            prod = np.matmul(a.astype(np.float64), b.astype(np.float64))
            res.append(_fmod(prod, p))
        return CycloMatrix(self.n, self.A, self.primes, res, self.scale + other.scale,
                           self.dim * self.l1 * other.l1, self.sqrt_res)

    def _even(self) -> tuple[list[np.ndarray], int, int]:
        if self.scale % 2 == 0:
            return self.residues, self.scale, self.l1
        # 1/sqrt|A| = sqrt|A| / |A|
        res = [np.mod(r * s[:, None, None], p) for r, s, p in zip(self.residues, self.sqrt_res, self.primes)]
        return res, self.scale + 1, self.l1 * self.A

    def __eq__(self, other) -> bool:
        if not isinstance(other, CycloMatrix):
            return NotImplemented
        ra, sa, la = self._even()
        rb, sb, lb = other._even()
        top = max(sa, sb)
        fa = self.A ** ((top - sa) // 2)
        fb = self.A ** ((top - sb) // 2)
        bound = (la * fa + lb * fb) * reduction_bound(self.n)
        if math.prod(self.primes) <= 2 * bound:
            raise DomainError("not enough evaluation primes to decide equality exactly")
        return all(np.array_equal(np.mod(x * (fa % p), p), np.mod(y * (fb % p), p))
                   for x, y, p in zip(ra, rb, self.primes))

    def identity_like(self) -> "CycloMatrix":
        eye = np.eye(self.dim, dtype=np.int64)
        res = [np.broadcast_to(eye, r.shape).copy() for r in self.residues]
        return CycloMatrix(self.n, self.A, self.primes, res, 0, 1, self.sqrt_res)

    def matches(self, exact: list[list[ScaledCyclotomic]]) -> bool:
        """Compare with an explicitly computed matrix of ScaledCyclotomic entries."""
        ctx = exact[0][0].ctx
        den = 1
        rows = []
        for row in exact:
            for z in row:
                zz = z._unscaled()
                den = math.lcm(den, *(c.denominator for c in zz))
                rows.append(zz)
        ra, sa, _ = self._even()
        for p, r in zip(self.primes, ra):
            pw, units = _eval_tables(self.n, p)
            red_pows = np.array([[pw[(u * j) % self.n] for j in range(ctx.degree)] for u in units], dtype=object)
            vals = []
            for zz in rows:
                coeff = np.array([int(c * den) % p for c in zz], dtype=object)
                vals.append((red_pows @ coeff) % p)
            exact_res = np.array(vals, dtype=object).T.reshape(r.shape)
            lhs = (r.astype(object) * den) % p
            rhs = (exact_res * pow(self.A, sa // 2, p)) % p
            if not np.array_equal(lhs, rhs):
                return False
        return True


@dataclass(frozen=True, eq=False)
class WeilRep:
    fqm: FqModule
    signature: tuple[int, int]

    def __post_init__(self):
        _check_signature(self.fqm, self.signature)

    @cached_property
    def mat_T(self) -> list[list[ScaledCyclotomic]]:
        return weil_T(self.fqm, self.signature)

    @cached_property
    def mat_S(self) -> list[list[ScaledCyclotomic]]:
        return weil_S(self.fqm, self.signature)

    @cached_property
    def n(self) -> int:
        return math.lcm(8, self.fqm.level)

    @cached_property
    def _exponents(self):
        n = self.n
        els = self.fqm.elements
        qexp = np.array([int(self.fqm.q(a) * n) for a in els], dtype=np.int64)
        phase = (self.signature[1] - self.signature[0]) * n // 8
        bexp = np.array([[int(self.fqm.bil(a, b) * n) for b in els] for a in els], dtype=np.int64)
        return qexp, phase, bexp

    def _letter(self, letter: str, primes: tuple[int, ...]) -> CycloMatrix:
        n = self.n
        qexp, phase, bexp = self._exponents
        d = self.fqm.size
        res, sq = [], []
        for p in primes:
            pw, units = _eval_tables(n, p)
            if letter in ("T", "t"):
                sgn = 1 if letter == "T" else -1
                diag = pw[(units[:, None] * (sgn * qexp)[None, :]) % n]
                m = np.zeros((len(units), d, d), dtype=np.int64)
                idx = np.arange(d)
                m[:, idx, idx] = diag
                scale = 0
            else:
                expo = phase - bexp if letter == "S" else bexp - phase
                m = pw[(units[:, None, None] * expo[None, :, :]) % n]
                if letter == "s":
                    m = np.transpose(m, (0, 2, 1)).copy()
                scale = 1
            res.append(m)
            sig = self.signature[0] - self.signature[1]
            gexp = (qexp - sig * n // 8) % n
            sq.append(np.mod(pw[(units[:, None] * gexp[None, :]) % n].sum(axis=1), p))
        return CycloMatrix(n, d, primes, res, scale, 1, sq)

    def primes_for_length(self, length: int) -> tuple[int, ...]:
        d = self.fqm.size
        # entry l1-norm <= d^(length-1); equality may rescale by |A|^(length/2 + 1)
        bound = 2 * reduction_bound(self.n) * d ** (length - 1) * d ** (length // 2 + 2)
        count, prod = 0, 1
        for p in _primes_for(self.n, 64):
            count += 1
            prod *= p
            if prod > bound:
                break
        return _primes_for(self.n, count)


def weil_word(rep: WeilRep, word: str | Iterable[str], primes: tuple[int, ...] | None = None) -> CycloMatrix:
    """rho(g) for a word over T, S and their inverses (written t, s), as an exact matrix."""
    letters = _parse_word(word)
    if primes is None:
        primes = rep.primes_for_length(max(len(letters), 1))
    cache: dict[str, CycloMatrix] = {}
    out = None
    for ch in letters:
        if ch not in cache:
            cache[ch] = rep._letter(ch, primes)
        out = cache[ch] if out is None else out @ cache[ch]
    if out is None:
        out = rep._letter("T", primes).identity_like()
    return out


def _parse_word(word) -> list[str]:
    if isinstance(word, str):
        word = word.replace("T^-1", "t").replace("S^-1", "s").replace("T⁻¹", "t").replace("S⁻¹", "s")
        letters = [c for c in word if not c.isspace()]
    else:
        alias = {"T": "T", "S": "S", "T^-1": "t", "S^-1": "s", "T⁻¹": "t", "S⁻¹": "s", "t": "t", "s": "s"}
        letters = [alias[w] for w in word]
    if any(c not in "TSts" for c in letters):
        raise DomainError(f"bad word {word!r}")
    return letters


def exact_product(rep: WeilRep, word) -> list[list[ScaledCyclotomic]]:
    """Slow direct product in ScaledCyclotomic arithmetic, for small modules."""
    letters = _parse_word(word)
    ctx = cyclo_context(rep.fqm, rep.signature)
    d = rep.fqm.size
    mats = {"T": rep.mat_T, "S": rep.mat_S,
            "t": [[z.conjugate() for z in row] for row in rep.mat_T],
            "s": [[rep.mat_S[j][i].conjugate() for j in range(d)] for i in range(d)]}
    one, zero = ScaledCyclotomic.root(ctx, 0), ScaledCyclotomic.zero(ctx)
    out = [[one if i == j else zero for j in range(d)] for i in range(d)]
    for ch in letters:
        m = mats[ch]
        new = []
        for i in range(d):
            row = []
            for j in range(d):
                acc = zero
                for l in range(d):
                    if not out[i][l].is_zero() and not m[l][j].is_zero():
                        acc = acc + out[i][l] * m[l][j]
                row.append(acc)
            new.append(row)
        out = new
    return out
