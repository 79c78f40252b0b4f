"""Classical ground truth for lattice periods, point periods, returns and periodic points."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from .dynamics import (
    LatticeMapSpec,
    LatticePoint,
    UnimodularMatrix2,
    _as_point,
    involution_factors,
    iterate,
    mat_mul_mod,
    mat_pow_mod,
)

FACTORIZATION_BOUND = 10**6


class FactorizationError(ValueError):
    pass


class PercivalError(ValueError):
    pass


@dataclass(frozen=True)
class AlphaResult:
    g: int
    alpha: int
    method: str
    witness: tuple | None = None

    def to_record(self) -> dict:
        return {"g": self.g, "alpha": self.alpha, "method": self.method}


def _check_det(matrix: UnimodularMatrix2, g: int) -> None:
    a, b, c, d = matrix.entries
    if (a * d - b * c - 1) % g:
        raise ValueError(f"matrix determinant is not 1 mod {g}")


def alpha_bruteforce(matrix: UnimodularMatrix2, g: int) -> AlphaResult:
    """Smallest t >= 1 with ``matrix**t = I (mod g)`` by sequential multiplication."""
    if g < 2:
        raise ValueError("modulus must be at least 2")
    _check_det(matrix, g)
    base = matrix.reduce(g)
    cur, t = base, 1
    while not cur.is_identity():
        cur = mat_mul_mod(cur, base, g)
        t += 1
    return AlphaResult(g, t, "bruteforce")


def _squarefree_part(n: int) -> int:
    out, f = 1, 2
    while f * f <= n:
        e = 0
        while n % f == 0:
            n //= f
            e += 1
        if e % 2:
            out *= f
        f += 1
    return out * n


def discriminant_of(matrix: UnimodularMatrix2) -> int:
    """Fundamental discriminant of the quadratic field holding the eigenvalues."""
    tr = matrix.trace
    if abs(tr) <= 2:
        raise ValueError("matrix is not hyperbolic (|trace| <= 2)")
    s = _squarefree_part(tr * tr - 4)
    return s if s % 4 == 1 else 4 * s


def kronecker_symbol(d: int, p: int) -> int:
    """Kronecker symbol ``(d/p)`` for a prime ``p``."""
    if p == 2:
        if d % 2 == 0:
            return 0
        return 1 if d % 8 in (1, 7) else -1
    r = pow(d % p, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


def divisors(n: int) -> list[int]:
    small, large = [], []
    i = 1
    while i * i <= n:
        if n % i == 0:
            small.append(i)
            if i * i != n:
                large.append(n // i)
        i += 1
    return small + large[::-1]


def factorize(n: int, bound: int = FACTORIZATION_BOUND) -> dict[int, int]:
    if n > bound:
        raise FactorizationError(f"{n} exceeds the trial-division bound {bound}")
    out: dict[int, int] = {}
    f = 2
    while f * f <= n:
        while n % f == 0:
            out[f] = out.get(f, 0) + 1
            n //= f
        f += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def _is_prime(n: int) -> bool:
    return n >= 2 and all(n % f for f in range(2, math.isqrt(n) + 1))


def alpha_percival(matrix: UnimodularMatrix2, p: int) -> AlphaResult:
    """Order mod a prime as ``(p - (d/p)) / m``, trying every divisor m."""
    if not _is_prime(p):
        raise PercivalError(f"{p} is not prime")
    tr = matrix.trace
    if (tr * tr - 4) % p == 0:
        raise PercivalError(f"p={p} divides trace^2 - 4; eigenvalues are degenerate mod p")
    d = discriminant_of(matrix)
    D = p - kronecker_symbol(d, p)
    for alpha in divisors(D):  # ascending alpha = D/m from m = D down to m = 1
        if mat_pow_mod(matrix, alpha, p).is_identity():
            return AlphaResult(p, alpha, "percival", witness=(D, D // alpha))
    raise AssertionError(f"no divisor of {D} is the order of the matrix mod {p}")


def _order_mod_prime(matrix: UnimodularMatrix2, p: int) -> int:
    try:
        return alpha_percival(matrix, p).alpha
    except PercivalError:
        return alpha_bruteforce(matrix, p).alpha


def alpha_composite(
    matrix: UnimodularMatrix2, g: int, bound: int = FACTORIZATION_BOUND
) -> AlphaResult:
    """lcm over prime powers; each prime-power order lifted by explicit verification."""
    if g < 2:
        raise ValueError("modulus must be at least 2")
    _check_det(matrix, g)
    total = 1
    trail = []
    for p, k in sorted(factorize(g, bound).items()):
        a = _order_mod_prime(matrix, p)
        for j in range(2, k + 1):
            while not mat_pow_mod(matrix, a, p**j).is_identity():
                a *= p
        trail.append((p, k, a))
        total = math.lcm(total, a)
    return AlphaResult(g, total, "composite", witness=tuple(trail))


def alpha(matrix: UnimodularMatrix2, g: int, method: str = "bruteforce") -> AlphaResult:
    if method == "bruteforce":
        return alpha_bruteforce(matrix, g)
    if method == "composite":
        return alpha_composite(matrix, g)
    if method == "percival":
        return alpha_percival(matrix, g)
    raise ValueError(f"unknown method {method!r}")


# --------------------------------------------------------------------------
# point periods, returns, periodic points
# --------------------------------------------------------------------------


def point_period_bruteforce(spec: LatticeMapSpec, p, t_max: int) -> int | None:
    if t_max < 1:
        raise ValueError("t_max must be at least 1")
    p0 = _as_point(p)
    spec.check_point(p0)
    X, Y = np.int64(p0.X), np.int64(p0.Y)
    for t in range(1, t_max + 1):
        X, Y = spec._apply_arrays(X, Y)
        if X == p0.X and Y == p0.Y:
            return t
    return None


def minimal_period(spec: LatticeMapSpec, p, t: int) -> int:
    """Minimal period of a point known to satisfy ``iterate(p, t) == p``."""
    r = point_period_bruteforce(spec, p, t)
    if r is None:
        raise ValueError(f"{p} is not periodic with period dividing {t}")
    return r


@dataclass(frozen=True)
class Domain:
    """Square ``[X0, X0 + P) x [Y0, Y0 + P)`` (mod N) with ``P = 2**p``."""

    P: int
    offset: tuple[int, int] = (0, 0)

    def __post_init__(self):
        if self.P < 1 or self.P & (self.P - 1):
            raise ValueError("domain side must be a power of two")

    @property
    def p(self) -> int:
        return self.P.bit_length() - 1

    @classmethod
    def parse(cls, text: str) -> "Domain":
        """Parse ``PxP`` or ``PxP@X,Y``."""
        size, _, off = text.partition("@")
        a, _, b = size.lower().partition("x")
        if a != b:
            raise ValueError("only square domains are supported")
        offset = tuple(int(v) for v in off.split(",")) if off else (0, 0)
        return cls(int(a), offset)

    def points(self, N: int) -> tuple[np.ndarray, np.ndarray]:
        i, j = np.meshgrid(np.arange(self.P), np.arange(self.P), indexing="ij")
        return (i.ravel() + self.offset[0]) % N, (j.ravel() + self.offset[1]) % N

    def contains(self, X, Y, N: int):
        return (((X - self.offset[0]) % N) < self.P) & (((Y - self.offset[1]) % N) < self.P)

    def __str__(self) -> str:
        return f"{self.P}x{self.P}@{self.offset[0]},{self.offset[1]}"


def _points_to_set(X, Y) -> frozenset:
    return frozenset(LatticePoint(int(x), int(y)) for x, y in zip(X, Y))


@dataclass(frozen=True)
class ReturnSet:
    spec: LatticeMapSpec
    domain: Domain
    t: int
    members: frozenset = field(repr=False)

    @property
    def M(self) -> int:
        return len(self.members)

    def to_record(self) -> dict:
        return {
            "N": self.spec.modulus,
            "t": self.t,
            "domain": str(self.domain),
            "M": self.M,
            "members": [list(p.as_tuple()) for p in sorted(self.members)],
        }


@dataclass(frozen=True)
class PeriodicSet:
    spec: LatticeMapSpec
    t: int
    members: frozenset = field(repr=False)
    restricted_to_line: str | None = None

    @property
    def M(self) -> int:
        return len(self.members)

    def minimal_periods(self) -> dict:
        return {p: minimal_period(self.spec, p, self.t) for p in sorted(self.members)}

    def to_record(self) -> dict:
        return {
            "N": self.spec.modulus,
            "t": self.t,
            "line": self.restricted_to_line,
            "M": self.M,
            "members": [list(p.as_tuple()) for p in sorted(self.members)],
        }


def enumerate_returns(spec: LatticeMapSpec, domain: Domain, t: int) -> ReturnSet:
    N = spec.modulus
    if domain.P > N:
        raise ValueError("domain larger than lattice")
    X, Y = domain.points(N)
    Xt, Yt = spec.apply_arrays(X, Y, t) if t else (X, Y)
    hit = domain.contains(Xt, Yt, N)
    members = _points_to_set(X[hit], Y[hit])
    for p in members:
        q = iterate(spec, p, t)
        assert domain.contains(q.X, q.Y, N), "membership re-verification failed"
    return ReturnSet(spec, domain, t, members)


def enumerate_periodic(spec: LatticeMapSpec, t: int, line: str | None = None) -> PeriodicSet:
    """Points with ``iterate(p, t) == p`` (period dividing t)."""
    if t < 1:
        raise ValueError("t must be at least 1")
    if line is None:
        from .dynamics import all_points

        X, Y = all_points(spec.modulus)
    else:
        pts = involution_factors(spec).line(line)
        X, Y = pts[:, 0], pts[:, 1]
    Xt, Yt = spec.apply_arrays(X, Y, t)
    hit = (Xt == X) & (Yt == Y)
    members = _points_to_set(X[hit], Y[hit])
    for p in members:
        assert iterate(spec, p, t) == p, "membership re-verification failed"
    return PeriodicSet(spec, t, members, line)


# --------------------------------------------------------------------------
# continued fractions
# --------------------------------------------------------------------------


def cf_expansion(k: int, D: int) -> list[int]:
    terms = []
    while D:
        q, r = divmod(k, D)
        terms.append(q)
        k, D = D, r
    return terms


def cf_convergents(k: int, D: int) -> list[Fraction]:
    """All convergents of ``k / D`` in lowest terms, ascending denominators."""
    if not 0 <= k < D:
        raise ValueError("need 0 <= k < D")
    out = []
    h0, h1 = 0, 1
    q0, q1 = 1, 0
    for a in cf_expansion(k, D):
        h0, h1 = h1, a * h1 + h0
        q0, q1 = q1, a * q1 + q0
        out.append(Fraction(h1, q1))
    return out


# --------------------------------------------------------------------------
# export
# --------------------------------------------------------------------------


def rows_to_csv(rows: Iterable[dict]) -> str:
    rows = list(rows)
    buf = io.StringIO()
    if not rows:
        return ""
    fields = list(dict.fromkeys(k for r in rows for k in r))
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({k: (" ".join(f"{a},{b}" for a, b in v) if k == "members" else v) for k, v in r.items()})
    return buf.getvalue()
