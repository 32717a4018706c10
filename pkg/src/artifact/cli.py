"""Batch command-line frontend.

    artifact kappa -D -7 --mmax 10
    artifact intersect --N 1 --D0 -7 --r0 1 --D1 -8 --r1 0
    artifact intersect --grid --N-max 7 --D0s=-7,-11 --D1-max 60 --threads 8
    artifact height --N 37 --D0 -3 --r0 ... --pp pp.txt --newform 37a.txt
    artifact hms --delta 5 -D -7 --mmax 10

Exit codes: 0 success, 2 domain error, 3 malformed input.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Sequence

from .errors import DomainError, InputFormatError
from .qseries import FormalLog, HolPrincipalPart

EXIT_OK, EXIT_DOMAIN, EXIT_FORMAT = 0, 2, 3

_KEYS = {
    "kappa": {"D", "norm_a", "mmax"},
    "intersect": {"N", "D0", "r0", "D1", "r1", "grid", "N_max", "D0s", "D1_max"},
    "height": {"N", "D0", "r0", "pp", "newform", "b0"},
    "hms": {"delta", "D", "mmax"},
}


@dataclass(frozen=True)
class JobConfig:
    command: str
    params: dict[str, Any] = field(default_factory=dict)
    fmt: str = "json"
    threads: int = 1

    def __post_init__(self):
        if self.command not in _KEYS:
            raise DomainError(f"unknown command {self.command!r}")
        extra = set(self.params) - _KEYS[self.command]
        if extra:
            raise DomainError(f"unknown parameters for {self.command}: {sorted(extra)}")
        if self.fmt not in ("json", "csv"):
            raise DomainError(f"unknown format {self.fmt!r}")
        if self.threads < 1:
            raise DomainError("threads must be positive")


# ---------------------------------------------------------------- helpers


def _frac(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise DomainError(f"not a rational number: {text!r}") from None


def _pmap(fn: Callable, items: Sequence, threads: int) -> list:
    """Ordered map; results do not depend on the worker count."""
    if threads == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * threads))))


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def _csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _log_rows(prefix: Sequence, v: FormalLog) -> list[list]:
    rows = []
    if v.rat:
        rows.append([*prefix, "rat", 0, v.rat.numerator, v.rat.denominator])
    rows += [[*prefix, "log", p, c.numerator, c.denominator] for p, c in v.logs]
    rows += [[*prefix, "k00", D, c.numerator, c.denominator] for D, c in v.k00]
    return rows


# ---------------------------------------------------------------- kappa


def _context_for(D: int, norm_a: int):
    from .kappa import BinaryCM
    if norm_a < 1:
        raise DomainError("norm_a must be a positive integer")
    for b in range(-norm_a + 1, norm_a + 1):
        if (b * b - D) % (4 * norm_a) == 0:
            return BinaryCM.from_form((norm_a, b, (b * b - D) // (4 * norm_a)))
    raise DomainError(f"no ideal of norm {norm_a} in discriminant {D}")


def cmd_kappa(cfg: JobConfig) -> str:
    from .kappa import script_E
    from .numthy import require_fundamental
    D, mmax = cfg.params["D"], _frac(cfg.params["mmax"])
    require_fundamental(D, odd=True)
    ctx = _context_for(D, cfg.params.get("norm_a", 1))
    E = script_E(ctx, mmax)
    A = ctx.fqm
    if cfg.fmt == "json":
        out = {"D": D, "norm_a": str(ctx.norm_a), "gram": [list(r) for r in ctx.lattice.gram],
               "series": E.to_json()}
        return _dump_json(out)
    rows = []
    for (mu, m), c in E.coeffs.items():
        for p, q in c.logs:
            rows.append([m.numerator, m.denominator, A.index(mu), p, q.numerator, q.denominator, 0])
        for _, q in c.k00:
            rows.append([m.numerator, m.denominator, A.index(mu), 0, 0, 1, str(q)])
    return _csv(["m_num", "m_den", "mu", "prime", "coeff_num", "coeff_den", "k00_coeff"], rows)


# ---------------------------------------------------------------- intersect


def _intersect_one(pair) -> tuple:
    from .modcurve import intersection_coeff, intersection_prop714
    idx1, idx0 = pair
    a, b = intersection_prop714(idx1, idx0), intersection_coeff(idx1, idx0)
    return a, b


def cmd_intersect(cfg: JobConfig) -> str:
    from .modcurve import HeegnerIndex, admissible_grid
    p = cfg.params
    if p.get("grid"):
        pairs = admissible_grid(p.get("N_max", 7), p.get("D0s") or (-7, -11, -23), p.get("D1_max", 60))
        results = _pmap(_intersect_one, pairs, cfg.threads)
        rows = [(i1.N, i0.D, i0.r, i1.D, i1.r, a == b, a, b) for (i1, i0), (a, b) in zip(pairs, results)]
        agree = sum(1 for r in rows if r[5])
        if cfg.fmt == "json":
            return _dump_json({"instances": len(rows), "agree": agree,
                               "rows": [[*r[:5], r[5], r[6].to_json()] for r in rows]})
        return _csv(["N", "D0", "r0", "D1", "r1", "equal", "value"],
                    [[*r[:5], int(r[5]), str(r[6])] for r in rows])
    for k in ("N", "D0", "r0", "D1", "r1"):
        if p.get(k) is None:
            raise DomainError(f"missing --{k}")
    idx0 = HeegnerIndex(p["N"], p["D0"], p["r0"])
    idx1 = HeegnerIndex(p["N"], p["D1"], p["r1"])
    a, b = _intersect_one((idx1, idx0))
    if cfg.fmt == "json":
        return _dump_json({"prop714": a.to_json(), "coeff": b.to_json(), "equal": a == b})
    return _csv(["route", "kind", "key", "num", "den"],
                _log_rows(["prop714"], a) + _log_rows(["coeff"], b) + [["equal", "flag", int(a == b), 0, 1]])


# ---------------------------------------------------------------- height


def read_principal_part(path, N: int) -> HolPrincipalPart:
    """Lines 'm_num m_den mu c_num c_den' (mu = r mod 2N) and optionally 'const c_num c_den'."""
    from .modcurve import mu_r, x0n_module
    fqm = x0n_module(N)
    cp: dict = {}
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise InputFormatError(f"{path}: {exc.strerror}") from None
    with fh:
        for no, line in enumerate(fh, 1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            parts = text.split()
            try:
                if parts[0] == "const":
                    if len(parts) != 3:
                        raise ValueError
                    key = (Fraction(0), fqm.zero)
                    c = Fraction(int(parts[1]), int(parts[2]))
                else:
                    if len(parts) != 5:
                        raise ValueError
                    mn, md, r, cn, cd = (int(x) for x in parts)
                    if mn <= 0:
                        raise ValueError
                    key = (Fraction(mn, md), mu_r(N, r))
                    c = Fraction(cn, cd)
            except (ValueError, ZeroDivisionError):
                raise InputFormatError(f"{path}:{no}: expected 'm_num m_den mu c_num c_den' or 'const c_num c_den'") from None
            cp[key] = cp.get(key, Fraction(0)) + c
    return HolPrincipalPart(fqm, cp)


def cmd_height(cfg: JobConfig) -> str:
    from .modcurve import HeegnerIndex, archimedean_value, faltings_rhs, l_gU_closed_derivative, read_newform
    p = cfg.params
    idx0 = HeegnerIndex(p["N"], p["D0"], p["r0"])
    pp = read_principal_part(p["pp"], idx0.N)
    G = read_newform(p["newform"])
    if G.level != idx0.N:
        raise DomainError(f"newform level {G.level} differs from N={idx0.N}")
    lderiv = l_gU_closed_derivative(_frac(p.get("b0", "1")), G, idx0)
    exact, total = archimedean_value(pp, idx0, lderiv)
    rhs = faltings_rhs(pp, idx0, lderiv)
    k00 = sum((c for D, c in exact.k00 if D == idx0.D), Fraction(0))
    report = {
        "exact_logs": [[q, c.numerator, c.denominator] for q, c in exact.logs],
        "k00_coeff": [k00.numerator, k00.denominator],
        "numeric_total": float(f"{total:.12e}"),
        "lderiv": float(f"{lderiv:.12e}"),
        "faltings_rhs": float(f"{rhs:.12e}"),
    }
    if cfg.fmt == "json":
        return _dump_json(report)
    rows = [["log", q, n, d] for q, n, d in report["exact_logs"]]
    rows += [["k00", idx0.D, *report["k00_coeff"]],
             ["numeric_total", "", repr(report["numeric_total"]), ""],
             ["lderiv", "", repr(report["lderiv"]), ""],
             ["faltings_rhs", "", repr(report["faltings_rhs"]), ""]]
    return _csv(["field", "key", "num", "den"], rows)


# ---------------------------------------------------------------- hms


def _hms_one(job) -> tuple:
    from .hilbert import hms_intersection, hms_setup
    delta, D, m, mu = job
    a, b = hms_intersection(hms_setup(delta, D), m, mu)
    return a, b


def cmd_hms(cfg: JobConfig) -> str:
    from .hilbert import admissible_pairs, hms_setup
    p = cfg.params
    ctx = hms_setup(p["delta"], p["D"])
    pairs = admissible_pairs(ctx, _frac(p["mmax"]))
    jobs = [(ctx.delta, ctx.D, m, mu) for m, mu in pairs]
    results = _pmap(_hms_one, jobs, cfg.threads)
    rows = [(m, ctx.fqm.index(mu), a == b, a) for (m, mu), (a, b) in zip(pairs, results)]
    agree = sum(1 for r in rows if r[2])
    if cfg.fmt == "json":
        return _dump_json({"delta": ctx.delta, "D": ctx.D, "instances": len(rows), "agree": agree,
                           "rows": [[str(m), mu, eq, v.to_json()] for m, mu, eq, v in rows]})
    return _csv(["m", "mu", "equal", "value"], [[str(m), mu, int(eq), str(v)] for m, mu, eq, v in rows])


# ---------------------------------------------------------------- entry point

_COMMANDS = {"kappa": cmd_kappa, "intersect": cmd_intersect, "height": cmd_height, "hms": cmd_hms}


class _Parser(argparse.ArgumentParser):
    """Malformed command lines are input-format errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_FORMAT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="artifact", description=__doc__.split("\n")[0])
    common = _Parser(add_help=False)
    common.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("-o", "--output", default="-")
    sub = ap.add_subparsers(dest="command", required=True)

    k = sub.add_parser("kappa", parents=[common], help="kappa(m, mu) table of a binary CM lattice")
    k.add_argument("-D", type=int, required=True)
    k.add_argument("--norm-a", dest="norm_a", type=int, default=1)
    k.add_argument("--mmax", required=True)

    i = sub.add_parser("intersect", parents=[common], help="finite intersection on X_0(N), two routes")
    for name in ("N", "D0", "r0", "D1", "r1"):
        i.add_argument(f"--{name}", type=int)
    i.add_argument("--grid", action="store_true")
    i.add_argument("--N-max", dest="N_max", type=int, default=7)
    i.add_argument("--D0s", type=lambda s: tuple(int(x) for x in s.split(",")), default=None)
    i.add_argument("--D1-max", dest="D1_max", type=int, default=60)

    h = sub.add_parser("height", parents=[common], help="archimedean height report")
    for name in ("N", "D0", "r0"):
        h.add_argument(f"--{name}", type=int, required=True)
    h.add_argument("--pp", required=True, help="principal part file")
    h.add_argument("--newform", required=True, help="newform coefficient file")
    h.add_argument("--b0", default="1", help="coefficient b(m0, mu0) of xi(f)")

    s = sub.add_parser("hms", parents=[common], help="Hilbert modular surface grid")
    s.add_argument("--delta", type=int, required=True)
    s.add_argument("-D", type=int, required=True)
    s.add_argument("--mmax", default="10")
    return ap


def run(argv: Sequence[str] | None = None) -> tuple[int, str]:
    args = vars(build_parser().parse_args(argv))
    command, fmt, threads, output = args.pop("command"), args.pop("fmt"), args.pop("threads"), args.pop("output")
    try:
        cfg = JobConfig(command, args, fmt, threads)
        text = _COMMANDS[command](cfg)
    except InputFormatError as exc:
        return EXIT_FORMAT, f"error: {exc}\n"
    except DomainError as exc:
        return EXIT_DOMAIN, f"error: {exc}\n"
    if output != "-":
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
        return EXIT_OK, ""
    return EXIT_OK, text


def main(argv: Sequence[str] | None = None) -> int:
    code, text = run(argv)
    (sys.stdout if code == EXIT_OK else sys.stderr).write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
