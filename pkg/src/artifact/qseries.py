"""Truncated vector-valued q-series and the exact value ring of log-coefficients."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable, Mapping, Union

from .errors import DomainError
from .fqm import Elem, EvenLattice, FqModule, discriminant_group, frac_mod1


def _clean(items: Iterable[tuple[int, Fraction]]) -> tuple[tuple[int, Fraction], ...]:
    acc: dict[int, Fraction] = {}
    for k, v in items:
        acc[k] = acc.get(k, Fraction(0)) + Fraction(v)
    return tuple(sorted((k, v) for k, v in acc.items() if v))


@dataclass(frozen=True)
class FormalLog:
    """rat + sum_p logs[p] * log p + sum_D k00[D] * kappa00(D)."""

    rat: Fraction = Fraction(0)
    logs: tuple[tuple[int, Fraction], ...] = ()
    k00: tuple[tuple[int, Fraction], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "rat", Fraction(self.rat))
        object.__setattr__(self, "logs", _clean(self.logs))
        object.__setattr__(self, "k00", _clean(self.k00))

    @staticmethod
    def log(p: int, coeff=1) -> "FormalLog":
        return FormalLog(logs=((p, Fraction(coeff)),))

    @staticmethod
    def kappa00(D: int, coeff=1) -> "FormalLog":
        return FormalLog(k00=((D, Fraction(coeff)),))

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = FormalLog(Fraction(other))
        if not isinstance(other, FormalLog):
            return NotImplemented
        return FormalLog(self.rat + other.rat, self.logs + other.logs, self.k00 + other.k00)

    __radd__ = __add__

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        if isinstance(c, FormalLog):
            raise DomainError("product of two log-valued quantities is not defined")
        if not isinstance(c, (int, Fraction)):
            return NotImplemented
        c = Fraction(c)
        return FormalLog(self.rat * c, tuple((p, v * c) for p, v in self.logs),
                         tuple((D, v * c) for D, v in self.k00))

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1 / Fraction(c))

    def __bool__(self) -> bool:
        return bool(self.rat or self.logs or self.k00)

    def numeric(self, kappa00_value: Callable[[int], float] | None = None) -> float:
        total = math.fsum([float(self.rat)] + [float(v) * math.log(p) for p, v in self.logs])
        if self.k00:
            if kappa00_value is None:
                from .numthy import kappa00 as kappa00_value
            total += math.fsum(float(v) * kappa00_value(D) for D, v in self.k00)
        return total

    def to_json(self) -> dict:
        return {"rat": [self.rat.numerator, self.rat.denominator],
                "logs": [[p, v.numerator, v.denominator] for p, v in self.logs],
                "k00": [[D, v.numerator, v.denominator] for D, v in self.k00]}

    @staticmethod
    def from_json(obj: Mapping) -> "FormalLog":
        rat = obj.get("rat", 0)
        rat = Fraction(*rat) if isinstance(rat, list) else Fraction(rat)
        return FormalLog(rat, tuple((p, Fraction(a, b)) for p, a, b in obj.get("logs", [])),
                         tuple((D, Fraction(a, b)) for D, a, b in obj.get("k00", [])))

    def __str__(self) -> str:
        parts = [str(self.rat)] if self.rat else []
        parts += [f"{v}*log({p})" for p, v in self.logs]
        parts += [f"{v}*k00({D})" for D, v in self.k00]
        return " + ".join(parts) or "0"


ZERO = FormalLog()
Coeff = Union[Fraction, FormalLog, float]


def _mul(a, b):
    if isinstance(a, FormalLog) and isinstance(b, FormalLog):
        raise DomainError("product of two log-valued quantities is not defined")
    if isinstance(b, FormalLog):
        return b * a
    return a * b


def _is_zero(c) -> bool:
    return not c


@dataclass(frozen=True, eq=False)
class ScalarSeries:
    coeffs: tuple[tuple[Fraction, Coeff], ...]
    mmax: Fraction

    def __getitem__(self, m) -> Coeff:
        m = Fraction(m)
        for e, c in self.coeffs:
            if e == m:
                return c
        return 0


def constant_term(s: ScalarSeries) -> Coeff:
    if s.mmax < 0:
        raise DomainError("constant term lies beyond the truncation")
    return s[0]


@dataclass(frozen=True, eq=False)
class VVSeries:
    """sum_mu sum_m c(mu, m) q^m phi_mu, known for exponents m <= mmax.

    sign=+1 means exponents satisfy m = Q(mu) mod 1, sign=-1 means m = -Q(mu).
    """

    fqm: FqModule
    den: int
    mmax: Fraction
    coeffs: Mapping[tuple[Elem, Fraction], Coeff]
    sign: int = 1

    def __post_init__(self):
        mmax = Fraction(self.mmax)
        object.__setattr__(self, "mmax", mmax)
        clean = {}
        for (mu, m), c in self.coeffs.items():
            m = Fraction(m)
            mu = self.fqm.normalize(mu)
            if _is_zero(c):
                continue
            if m > mmax:
                continue
            if (m * self.den).denominator != 1:
                raise DomainError(f"exponent {m} not in (1/{self.den})Z")
            if frac_mod1(m - self.sign * self.fqm.q(mu)) != 0:
                raise DomainError(f"exponent {m} incompatible with Q({mu})")
            clean[(mu, m)] = clean[(mu, m)] + c if (mu, m) in clean else c
        object.__setattr__(self, "coeffs", {k: clean[k] for k in sorted(clean, key=_key(self.fqm))})

    def __getitem__(self, key) -> Coeff:
        mu, m = key
        if Fraction(m) > self.mmax:
            raise DomainError(f"exponent {m} beyond truncation {self.mmax}")
        return self.coeffs.get((self.fqm.normalize(mu), Fraction(m)), 0)

    @cached_property
    def low(self) -> Fraction:
        return min([Fraction(0)] + [m for _, m in self.coeffs])

    def truncate(self, mmax) -> "VVSeries":
        mmax = min(Fraction(mmax), self.mmax)
        return VVSeries(self.fqm, self.den, mmax, {k: v for k, v in self.coeffs.items() if k[1] <= mmax}, self.sign)

    def __add__(self, other: "VVSeries") -> "VVSeries":
        _same_module(self.fqm, other.fqm)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out[k] + v if k in out else v
        return VVSeries(self.fqm, math.lcm(self.den, other.den), min(self.mmax, other.mmax), out, self.sign)

    def scale(self, c) -> "VVSeries":
        return VVSeries(self.fqm, self.den, self.mmax, {k: _mul(v, c) for k, v in self.coeffs.items()}, self.sign)

    def to_json(self) -> dict:
        entries = []
        for (mu, m), c in self.coeffs.items():
            entries.append([self.fqm.index(mu), m.numerator, m.denominator, *_coeff_json(c)])
        return {"den": self.den, "mmax": [self.mmax.numerator, self.mmax.denominator], "entries": entries}


def _key(fqm: FqModule):
    return lambda k: (k[1], fqm.index(k[0]))


def _coeff_json(c) -> list:
    if isinstance(c, FormalLog):
        return [c.to_json()]
    if isinstance(c, float):
        return [c]
    c = Fraction(c)
    return [c.numerator, c.denominator]


def _same_module(a: FqModule, b: FqModule) -> None:
    if a is b:
        return
    if (a.orders, a.q_gen, a.b_gen) != (b.orders, b.q_gen, b.b_gen):
        raise DomainError("series live on different discriminant forms")


def tensor(f: VVSeries, g: VVSeries, only=None) -> VVSeries:
    """f (x) g on the direct sum of the index modules; only restricts the exponents kept."""
    if f.sign != g.sign:
        raise DomainError("tensor of series with opposite conventions")
    A = f.fqm.direct_sum(g.fqm)
    mmax = min(f.mmax + g.low, g.mmax + f.low)
    out: dict = {}
    if only is not None:
        only = {Fraction(m) for m in only}
        by_m: dict[Fraction, list] = {}
        for (nu, m2), b in g.coeffs.items():
            by_m.setdefault(m2, []).append((nu, b))
    for (mu, m1), a in f.coeffs.items():
        if only is None:
            pairs = list(g.coeffs.items())
        else:
            pairs = [((nu, t - m1), b) for t in only for nu, b in by_m.get(t - m1, ())]
        for (nu, m2), b in pairs:
            m = m1 + m2
            if m > mmax:
                continue
            key = (mu + nu, m)
            c = _mul(a, b)
            out[key] = out[key] + c if key in out else c
    return VVSeries(A, math.lcm(f.den, g.den), mmax, out, f.sign)


def pair(f: VVSeries, g: VVSeries) -> ScalarSeries:
    """<f, g> = sum_mu f_mu g_mu, truncated where both factors are known."""
    _same_module(f.fqm, g.fqm)
    mmax = min(f.mmax + g.low, g.mmax + f.low)
    by_mu: dict[Elem, list] = {}
    for (nu, m2), b in g.coeffs.items():
        by_mu.setdefault(nu, []).append((m2, b))
    out: dict[Fraction, Coeff] = {}
    for (mu, m1), a in f.coeffs.items():
        for m2, b in by_mu.get(mu, ()):
            m = m1 + m2
            if m <= mmax:
                c = _mul(a, b)
                out[m] = out[m] + c if m in out else c
    return ScalarSeries(tuple((m, c) for m, c in sorted(out.items()) if not _is_zero(c)), mmax)


# ---------------------------------------------------------------- sublattices

@dataclass(frozen=True, eq=False)
class Sublattice:
    """A finite-index sublattice M = M_1 + ... + M_k of L with mutually orthogonal pieces.

    pieces[i] lists basis vectors of M_i in the coordinates of L.  The module of M
    is the direct sum of the discriminant forms of the pieces, in that order.
    """

    L: EvenLattice
    pieces: tuple[tuple[tuple[int, ...], ...], ...]
    fqm_L: FqModule | None = None

    def __post_init__(self):
        basis = [v for piece in self.pieces for v in piece]
        if len(basis) != self.L.rank:
            raise DomainError("sublattice must have full rank")
        for i, P in enumerate(self.pieces):
            for Q in self.pieces[i + 1:]:
                if any(self.L.bil(v, w) for v in P for w in Q):
                    raise DomainError("pieces are not orthogonal")
        from .fqm import determinant
        if determinant([list(col) for col in basis]) == 0:
            raise DomainError("sublattice has infinite index")
        if self.fqm_L is None:
            object.__setattr__(self, "fqm_L", discriminant_group(self.L))

    @cached_property
    def piece_lattices(self) -> tuple[EvenLattice, ...]:
        return tuple(EvenLattice(tuple(tuple(int(self.L.bil(v, w)) for w in P) for v in P)) for P in self.pieces)

    @cached_property
    def piece_fqms(self) -> tuple[FqModule, ...]:
        return tuple(discriminant_group(M) for M in self.piece_lattices)

    @cached_property
    def fqm_M(self) -> FqModule:
        mods = self.piece_fqms
        out = mods[0]
        for m in mods[1:]:
            out = out.direct_sum(m)
        return out

    @cached_property
    def index(self) -> int:
        from .fqm import determinant
        basis = [v for piece in self.pieces for v in piece]
        return abs(int(determinant(basis)))

    def vector_of(self, e: Elem) -> tuple[Fraction, ...]:
        """Lift of an element of M'/M to a vector of L (x) Q in L-coordinates."""
        out = [Fraction(0)] * self.L.rank
        pos = 0
        for P, A in zip(self.pieces, self.piece_fqms):
            k = len(A.orders)
            part = e[pos:pos + k]
            pos += k
            if not A.orders:
                continue
            w = A.lift(part)
            for coeff, v in zip(w, P):
                for i in range(self.L.rank):
                    out[i] += coeff * v[i]
        return tuple(out)

    @cached_property
    def image(self) -> dict[Elem, Elem | None]:
        """gamma in M'/M maps to its class in L'/L when gamma lies in L'/M, else None."""
        out = {}
        for e in self.fqm_M.elements:
            v = self.vector_of(e)
            out[e] = self.fqm_L.reduce_vector(v) if self.L.in_dual(v) else None
        return out


def res_sublattice(f: VVSeries, sub: Sublattice) -> VVSeries:
    _same_module(f.fqm, sub.fqm_L)
    out = {}
    for gamma, mu in sub.image.items():
        if mu is None:
            continue
        for (nu, m), c in f.coeffs.items():
            if nu == mu:
                out[(gamma, m)] = c
    return VVSeries(sub.fqm_M, f.den, f.mmax, out, f.sign)


def tr_sublattice(g: VVSeries, sub: Sublattice) -> VVSeries:
    _same_module(g.fqm, sub.fqm_M)
    out: dict = {}
    for (gamma, m), c in g.coeffs.items():
        mu = sub.image[gamma]
        if mu is None:
            continue
        key = (mu, m)
        out[key] = out[key] + c if key in out else c
    return VVSeries(sub.fqm_L, g.den, g.mmax, out, g.sign)


# ---------------------------------------------------------------- principal parts

@dataclass(frozen=True, eq=False)
class HolPrincipalPart:
    """Coefficients c+(-m, mu) for m >= 0 of a harmonic weak Maass form."""

    fqm: FqModule
    c_plus: Mapping[tuple[Fraction, Elem], Fraction]

    def __post_init__(self):
        clean = {}
        for (m, mu), c in self.c_plus.items():
            m, c = Fraction(m), Fraction(c)
            if m < 0:
                raise DomainError("principal part index must be >= 0")
            if c:
                key = (m, self.fqm.normalize(mu))
                clean[key] = clean.get(key, Fraction(0)) + c
        for (m, mu), c in clean.items():
            if clean.get((m, self.fqm.neg(mu)), Fraction(0)) != c:
                raise DomainError(f"principal part not symmetric at (m={m}, mu={mu})")
            if m and frac_mod1(m - self.fqm.q(mu)) != 0:
                raise DomainError(f"c+(-{m}, {mu}) violates m = Q(mu) mod 1")
        object.__setattr__(self, "c_plus", dict(sorted(clean.items(), key=lambda kv: (kv[0][0], self.fqm.index(kv[0][1])))))

    @staticmethod
    def f_m_mu(fqm: FqModule, m, mu, c00=0) -> "HolPrincipalPart":
        """Principal part 1/2 (q^-m phi_mu + q^-m phi_-mu) plus a constant term c00 phi_0."""
        cp: dict = {}
        for nu in (fqm.normalize(mu), fqm.neg(fqm.normalize(mu))):
            cp[(Fraction(m), nu)] = cp.get((Fraction(m), nu), Fraction(0)) + Fraction(1, 2)
        if c00:
            cp[(Fraction(0), fqm.zero)] = cp.get((Fraction(0), fqm.zero), Fraction(0)) + Fraction(c00)
        return HolPrincipalPart(fqm, cp)

    def __add__(self, other: "HolPrincipalPart") -> "HolPrincipalPart":
        _same_module(self.fqm, other.fqm)
        out = dict(self.c_plus)
        for k, v in other.c_plus.items():
            out[k] = out.get(k, Fraction(0)) + v
        return HolPrincipalPart(self.fqm, out)

    @property
    def c00(self) -> Fraction:
        return self.c_plus.get((Fraction(0), self.fqm.zero), Fraction(0))

    def as_series(self) -> VVSeries:
        den = math.lcm(1, *(m.denominator for m, _ in self.c_plus))
        return VVSeries(self.fqm, den, Fraction(0), {(mu, -m): c for (m, mu), c in self.c_plus.items()}, -1)


def pairing_principal(b: Mapping[tuple[Fraction, Elem], Fraction] | Callable, pp: HolPrincipalPart) -> Fraction:
    """{g, f} = sum c+(-m, mu) b(m, mu) for a cusp form g with coefficients b."""
    total = Fraction(0)
    for (m, mu), c in pp.c_plus.items():
        if m == 0:
            continue  # cusp forms have no constant term
        try:
            val = b(m, mu) if callable(b) else b[(m, mu)]
        except KeyError:
            raise DomainError(f"missing cusp-form coefficient b({m}, {mu})") from None
        total += c * Fraction(val)
    return total


def ct_pairing(pp: HolPrincipalPart, g: VVSeries) -> Coeff:
    """CT <f+, g> for nonnegative-exponent g, as a finite exact sum."""
    if g.low < 0:
        raise DomainError("second factor must have nonnegative exponents")
    need = max([Fraction(0)] + [m for m, _ in pp.c_plus])
    if g.mmax < need:
        raise DomainError(f"series truncated at {g.mmax}, need {need}")
    s = pair(pp.as_series(), g.truncate(need))
    return constant_term(s)
