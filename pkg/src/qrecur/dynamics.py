"""Exact classical dynamics: cat maps, discretized twist maps and their symmetries.

Lattice maps act on integer points ``(X, Y)`` of a ``modulus x modulus``
lattice. ``X`` plays the role of position (angle) and ``Y`` of momentum.
All lattice arithmetic is exact; floating point only enters the standard-map
kick, whose integer part is certified with interval arithmetic.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Sequence

import mpmath
import numpy as np

PRINTED = "printed"
CONTINUOUS = "continuous"
SIGN_CONVENTIONS = (PRINTED, CONTINUOUS)
POTENTIALS = ("standard", "sawtooth")


class LatticeError(ValueError):
    """Point or parameter incompatible with a lattice map."""


class UnsupportedMapError(ValueError):
    """The requested operation is not available for this kind of map."""


class NewtonPreconditionError(ValueError):
    """Seed orbit does not close well enough for Newton refinement."""


# --------------------------------------------------------------------------
# 2x2 integer matrices
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class UnimodularMatrix2:
    """Integer 2x2 matrix ``(a b; c d)`` of determinant one.

    When ``modulus`` is given the matrix is a residue matrix and only
    ``det = 1 (mod modulus)`` is required.
    """

    a: int
    b: int
    c: int
    d: int
    modulus: int | None = None

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if self.modulus is None:
            if det != 1:
                raise ValueError(f"determinant is {det}, expected 1")
        elif (det - 1) % self.modulus:
            raise ValueError(f"determinant {det} is not 1 mod {self.modulus}")

    @classmethod
    def identity(cls, modulus: int | None = None) -> "UnimodularMatrix2":
        if modulus is None:
            return cls(1, 0, 0, 1)
        return cls(1 % modulus, 0, 0, 1 % modulus, modulus)

    @property
    def entries(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    @property
    def trace(self) -> int:
        return self.a + self.d

    def is_identity(self) -> bool:
        m = self.modulus or 0
        if m:
            return self.entries == (1 % m, 0, 0, 1 % m)
        return self.entries == (1, 0, 0, 1)

    def reduce(self, g: int) -> "UnimodularMatrix2":
        return UnimodularMatrix2(self.a % g, self.b % g, self.c % g, self.d % g, g)

    def inverse(self) -> "UnimodularMatrix2":
        inv = UnimodularMatrix2(self.d, -self.b, -self.c, self.a, self.modulus)
        return inv.reduce(self.modulus) if self.modulus else inv

    def __matmul__(self, other: "UnimodularMatrix2") -> "UnimodularMatrix2":
        a, b, c, d = self.entries
        e, f, g_, h = other.entries
        return UnimodularMatrix2(a * e + b * g_, a * f + b * h, c * e + d * g_, c * f + d * h)

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=np.int64)


CAT_MATRIX = UnimodularMatrix2(2, 1, 1, 1)


def _check_modulus(g: int) -> None:
    if not isinstance(g, (int, np.integer)) or g < 1:
        raise ValueError(f"modulus must be a positive integer, got {g!r}")


def mat_mul_mod(A: UnimodularMatrix2, B: UnimodularMatrix2, g: int) -> UnimodularMatrix2:
    _check_modulus(g)
    a, b, c, d = A.entries
    e, f, h, k = B.entries
    return UnimodularMatrix2(
        (a * e + b * h) % g, (a * f + b * k) % g, (c * e + d * h) % g, (c * f + d * k) % g, g
    )


def mat_pow_mod(A: UnimodularMatrix2, t: int, g: int) -> UnimodularMatrix2:
    """``A**t mod g`` by square-and-multiply."""
    _check_modulus(g)
    if t < 0:
        raise ValueError("exponent must be non-negative")
    result = UnimodularMatrix2.identity(g)
    base = A.reduce(g)
    while t:
        if t & 1:
            result = mat_mul_mod(result, base, g)
        t >>= 1
        if t:
            base = mat_mul_mod(base, base, g)
    return result


def precompute_squarings(A: UnimodularMatrix2, g: int, n_q: int) -> list[UnimodularMatrix2]:
    """Return ``[A^2, A^4, ..., A^(2^n_q)] mod g`` by sequential squaring.

    The time-register construction uses ``[A] + precompute_squarings(A, g, p - 1)``.
    """
    if n_q < 1:
        raise ValueError("n_q must be at least 1")
    _check_modulus(g)
    out = []
    cur = A.reduce(g)
    for _ in range(n_q):
        cur = mat_mul_mod(cur, cur, g)
        out.append(cur)
    return out


def lyapunov_estimate(matrix: UnimodularMatrix2) -> float:
    """Largest Lyapunov exponent ``ln lambda_max`` of a hyperbolic toral automorphism."""
    tr = abs(matrix.trace)
    if tr <= 2:
        raise ValueError(f"matrix with |trace| = {tr} is not hyperbolic")
    return math.log((tr + math.sqrt(tr * tr - 4)) / 2)


# --------------------------------------------------------------------------
# points
# --------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class LatticePoint:
    X: int
    Y: int

    def as_tuple(self) -> tuple[int, int]:
        return (self.X, self.Y)


@dataclass(frozen=True)
class TorusPoint:
    x: float
    y: float

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x) % 1.0)
        object.__setattr__(self, "y", float(self.y) % 1.0)


def _as_point(p) -> LatticePoint:
    if isinstance(p, LatticePoint):
        return p
    X, Y = p
    return LatticePoint(int(X), int(Y))


# --------------------------------------------------------------------------
# exact integer part of the standard-map kick
# --------------------------------------------------------------------------


def _certified_floor(build: Callable[[object], object]) -> int:
    """Floor of a real quantity evaluated with mpmath interval arithmetic.

    ``build`` receives the ``mpmath.iv`` context and returns an interval.
    Precision is raised until the interval does not straddle an integer.
    """
    iv = mpmath.iv
    for dps in (30, 60, 120, 240):
        iv.dps = dps
        val = build(iv)
        lo = math.floor(mpmath.mpf(val.a))
        hi = math.floor(mpmath.mpf(val.b))
        if lo == hi:
            return int(lo)
    raise ArithmeticError("could not certify integer part")


def _to_fraction(K) -> Fraction:
    if isinstance(K, Fraction):
        return K
    if isinstance(K, str):
        return Fraction(K.strip())
    if isinstance(K, float):
        raise TypeError("K must be exact: pass an int, Fraction or 'num/den' string")
    return Fraction(K)


# --------------------------------------------------------------------------
# lattice maps
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class LatticeMapSpec:
    """An invertible map on a ``modulus x modulus`` integer lattice.

    ``kind`` is ``"cat"`` (``matrix`` acting mod ``modulus``), ``"twist"``
    (discretized standard or sawtooth map on ``N = modulus = 2**n_q``) or
    ``"affine"`` (``matrix @ p + shift``). Sawtooth maps with integer ``K`` are
    canonicalized to affine kind by :func:`twist_map` but keep ``potential``
    and ``K`` so their involution structure stays available.

    Twist maps follow ``Y' = Y + floor(s N K F(2 pi X / N) / (2 pi))`` and
    ``X' = X + Y'`` (mod N), with ``F = -sin`` (standard) or ``F = theta - pi``
    (sawtooth), and ``s = +1`` for the printed convention, ``-1`` for the
    continuous-form convention.
    """

    kind: str
    modulus: int
    matrix: UnimodularMatrix2 | None = None
    shift: tuple[int, int] = (0, 0)
    potential: str | None = None
    K: Fraction | None = None
    sign_convention: str = PRINTED

    def __post_init__(self):
        if self.modulus < 2:
            raise LatticeError("modulus must be at least 2")
        if self.kind not in ("cat", "twist", "affine"):
            raise LatticeError(f"unknown map kind {self.kind!r}")
        if self.sign_convention not in SIGN_CONVENTIONS:
            raise LatticeError(f"unknown sign convention {self.sign_convention!r}")
        if self.kind in ("cat", "affine"):
            if self.matrix is None:
                raise LatticeError(f"{self.kind} map needs a matrix")
            object.__setattr__(self, "matrix", self.matrix.reduce(self.modulus))
            object.__setattr__(
                self, "shift", (self.shift[0] % self.modulus, self.shift[1] % self.modulus)
            )
        if self.kind == "twist" or self.potential is not None:
            if self.potential not in POTENTIALS:
                raise LatticeError(f"unknown potential {self.potential!r}")
            if self.modulus & (self.modulus - 1):
                raise LatticeError("twist maps need a power-of-two lattice size")
            object.__setattr__(self, "K", _to_fraction(self.K))

    # -- descriptive helpers ------------------------------------------------

    @property
    def N(self) -> int:
        return self.modulus

    @property
    def n_bits(self) -> int:
        """Qubits needed for one coordinate register."""
        return max(1, (self.modulus - 1).bit_length())

    @property
    def sign(self) -> int:
        return 1 if self.sign_convention == PRINTED else -1

    @property
    def label(self) -> str:
        if self.potential is not None:
            return self.potential
        return self.kind

    @property
    def supports_fast_iterate(self) -> bool:
        return self.kind in ("cat", "affine")

    @cached_property
    def kick_table(self) -> np.ndarray:
        """Momentum kick ``floor(...)`` for every X (twist family only)."""
        if self.potential is None:
            raise UnsupportedMapError("kick table only exists for twist maps")
        N, K, s = self.modulus, self.K, self.sign
        out = np.empty(N, dtype=np.int64)
        for X in range(N):
            if self.potential == "sawtooth":
                # N K (2 pi X/N - pi) / (2 pi) = K (X - N/2), exact in rationals
                out[X] = math.floor(s * K * (X - Fraction(N, 2)))
            elif K == 0 or (2 * X) % N == 0:
                out[X] = 0
            else:
                num, den = K.numerator, K.denominator
                out[X] = _certified_floor(
                    lambda iv, X=X: -s * num * N * iv.sin(2 * iv.pi * X / N) / (2 * iv.pi * den)
                )
        return out

    def config(self) -> dict:
        """Structured description used for JSON configuration files."""
        d: dict = {"sign_convention": self.sign_convention}
        if self.potential is not None:
            d.update(kind=self.potential, N=self.modulus, K=f"{self.K.numerator}/{self.K.denominator}")
        elif self.kind == "cat":
            d.update(kind="cat", g=self.modulus, matrix=list(self.matrix.entries))
        else:
            d.update(
                kind="affine", g=self.modulus, matrix=list(self.matrix.entries), shift=list(self.shift)
            )
        return d

    def to_json(self) -> str:
        return json.dumps(self.config(), sort_keys=True)

    # -- vectorized core ----------------------------------------------------

    def _apply_arrays(self, X: np.ndarray, Y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        m = self.modulus
        if self.kind == "twist":
            Y2 = (Y + self.kick_table[X]) % m
            return (X + Y2) % m, Y2
        a, b, c, d = self.matrix.entries
        return (a * X + b * Y + self.shift[0]) % m, (c * X + d * Y + self.shift[1]) % m

    def _invert_arrays(self, X: np.ndarray, Y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        m = self.modulus
        if self.kind == "twist":
            X0 = (X - Y) % m
            return X0, (Y - self.kick_table[X0]) % m
        a, b, c, d = self.matrix.inverse().entries
        U, V = (X - self.shift[0]) % m, (Y - self.shift[1]) % m
        return (a * U + b * V) % m, (c * U + d * V) % m

    def apply_arrays(self, X, Y, power: int = 1):
        """Apply the map ``power`` times to coordinate arrays (negative = inverse)."""
        X = np.asarray(X, dtype=np.int64)
        Y = np.asarray(Y, dtype=np.int64)
        if power < 0:
            for _ in range(-power):
                X, Y = self._invert_arrays(X, Y)
            return X, Y
        if power > 1 and self.supports_fast_iterate:
            return fast_power(self, power)._apply_arrays(X, Y)
        for _ in range(power):
            X, Y = self._apply_arrays(X, Y)
        return X, Y

    def check_point(self, p: LatticePoint) -> None:
        if not (0 <= p.X < self.modulus and 0 <= p.Y < self.modulus):
            raise LatticeError(f"{p} lies outside the {self.modulus}x{self.modulus} lattice")


def cat_map(g: int, matrix: UnimodularMatrix2 = CAT_MATRIX) -> LatticeMapSpec:
    return LatticeMapSpec("cat", g, matrix=matrix)


def affine_map(g: int, matrix: UnimodularMatrix2, shift=(0, 0)) -> LatticeMapSpec:
    return LatticeMapSpec("affine", g, matrix=matrix, shift=tuple(shift))


def twist_map(potential: str, K, N: int, sign_convention: str = PRINTED) -> LatticeMapSpec:
    """Discretized standard or sawtooth map; integer-K sawtooth becomes affine."""
    K = _to_fraction(K)
    if potential == "sawtooth" and K.denominator == 1:
        k = int(K) * (1 if sign_convention == PRINTED else -1)
        if N % 2:
            raise LatticeError("sawtooth lattice size must be even")
        # Y' = Y + k X - k N/2 ;  X' = X + Y'
        c = -k * (N // 2)
        return LatticeMapSpec(
            "affine",
            N,
            matrix=UnimodularMatrix2(1 + k, 1, k, 1),
            shift=(c, c),
            potential="sawtooth",
            K=K,
            sign_convention=sign_convention,
        )
    return LatticeMapSpec("twist", N, potential=potential, K=K, sign_convention=sign_convention)


def standard_map(K, N: int, sign_convention: str = PRINTED) -> LatticeMapSpec:
    return twist_map("standard", K, N, sign_convention)


def sawtooth_map(K, N: int, sign_convention: str = PRINTED) -> LatticeMapSpec:
    return twist_map("sawtooth", K, N, sign_convention)


def spec_from_config(cfg: dict | str) -> LatticeMapSpec:
    if isinstance(cfg, str):
        cfg = json.loads(cfg)
    kind = cfg["kind"]
    sign = cfg.get("sign_convention", PRINTED)
    if kind in POTENTIALS:
        return twist_map(kind, cfg["K"], int(cfg["N"]), sign)
    g = int(cfg.get("g", cfg.get("N")))
    matrix = UnimodularMatrix2(*(int(v) for v in cfg.get("matrix", CAT_MATRIX.entries)))
    if kind == "cat":
        return cat_map(g, matrix)
    if kind == "affine":
        return affine_map(g, matrix, tuple(cfg.get("shift", (0, 0))))
    raise LatticeError(f"unknown map kind {kind!r}")


def apply_map(spec: LatticeMapSpec, p) -> LatticePoint:
    p = _as_point(p)
    spec.check_point(p)
    X, Y = spec._apply_arrays(np.int64(p.X), np.int64(p.Y))
    return LatticePoint(int(X), int(Y))


def invert_map(spec: LatticeMapSpec, p) -> LatticePoint:
    p = _as_point(p)
    spec.check_point(p)
    X, Y = spec._invert_arrays(np.int64(p.X), np.int64(p.Y))
    return LatticePoint(int(X), int(Y))


def iterate(spec: LatticeMapSpec, p, t: int) -> LatticePoint:
    if t < 0:
        raise ValueError("t must be non-negative")
    p = _as_point(p)
    spec.check_point(p)
    X, Y = np.int64(p.X), np.int64(p.Y)
    for _ in range(t):
        X, Y = spec._apply_arrays(X, Y)
    return LatticePoint(int(X), int(Y))


def _affine_compose(outer, inner, m):
    """(A1, b1) after (A2, b2) -> (A1 A2, A1 b2 + b1)."""
    A1, b1 = outer
    A2, b2 = inner
    a, b, c, d = A1.entries
    return (
        mat_mul_mod(A1, A2, m),
        ((a * b2[0] + b * b2[1] + b1[0]) % m, (c * b2[0] + d * b2[1] + b1[1]) % m),
    )


def fast_power(spec: LatticeMapSpec, t: int) -> LatticeMapSpec:
    """The t-th iterate of a cat/affine map as a single affine map."""
    if not spec.supports_fast_iterate:
        raise UnsupportedMapError(
            "iterates of this map cannot be computed efficiently; use iterate()"
        )
    if t < 0:
        raise ValueError("t must be non-negative")
    m = spec.modulus
    result = (UnimodularMatrix2.identity(m), (0, 0))
    base = (spec.matrix, spec.shift)
    while t:
        if t & 1:
            result = _affine_compose(result, base, m)
        t >>= 1
        if t:
            base = _affine_compose(base, base, m)
    return LatticeMapSpec("affine", m, matrix=result[0], shift=result[1])


def fast_iterate(spec: LatticeMapSpec, p, t: int) -> LatticePoint:
    p = _as_point(p)
    spec.check_point(p)
    power = fast_power(spec, t)
    X, Y = power._apply_arrays(np.int64(p.X), np.int64(p.Y))
    return LatticePoint(int(X), int(Y))


def all_points(modulus: int) -> tuple[np.ndarray, np.ndarray]:
    X, Y = np.meshgrid(np.arange(modulus), np.arange(modulus), indexing="ij")
    return X.ravel(), Y.ravel()


# --------------------------------------------------------------------------
# involution symmetry
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class InvolutionPair:
    """``map = I1 o I2`` with ``I2(X, Y) = (X, -Y - f(X))`` and ``I1(X, Y) = (X - Y, -Y)``.

    ``f`` is the momentum kick. ``fixed_lines`` maps a line id to the array
    of lattice points (shape ``(n, 2)``) fixed by the corresponding factor.
    """

    spec: LatticeMapSpec
    fixed_lines: dict = field(repr=False)

    def I1(self, X, Y):
        m = self.spec.modulus
        X, Y = np.asarray(X, dtype=np.int64), np.asarray(Y, dtype=np.int64)
        return (X - Y) % m, (-Y) % m

    def I2(self, X, Y):
        m = self.spec.modulus
        X, Y = np.asarray(X, dtype=np.int64), np.asarray(Y, dtype=np.int64)
        return X % m, (-Y - _kick(self.spec, X)) % m

    def line(self, line_id: str) -> np.ndarray:
        try:
            return self.fixed_lines[line_id]
        except KeyError:
            raise LatticeError(
                f"unknown line {line_id!r}; available: {sorted(self.fixed_lines)}"
            ) from None

    def line_y(self, line_id: str) -> int:
        """Constant momentum of a full-length I1 line."""
        if not line_id.startswith("I1:"):
            raise LatticeError("only I1 lines are constant-momentum lines")
        return int(self.line(line_id)[0, 1])


def _kick(spec: LatticeMapSpec, X):
    if spec.kind == "twist":
        return spec.kick_table[X]
    # affine canonical sawtooth: Y' - Y = c X + (d - 1) Y + shift, with d = 1
    a, b, c, d = spec.matrix.entries
    return (c * X + spec.shift[1]) % spec.modulus


def involution_factors(spec: LatticeMapSpec) -> InvolutionPair:
    if spec.potential is None:
        raise UnsupportedMapError("involution decomposition is implemented for twist maps only")
    N = spec.modulus
    X = np.arange(N, dtype=np.int64)
    f = np.asarray(_kick(spec, X)) % N
    lines = {
        "I1:Y=0": np.stack([X, np.zeros(N, dtype=np.int64)], axis=1),
    }
    even = f % 2 == 0
    Xe = X[even]
    y0 = ((-f[even]) // 2) % N
    lines["I2:a"] = np.stack([Xe, y0], axis=1)
    lines["I2:b"] = np.stack([Xe, (y0 + N // 2) % N], axis=1)
    return InvolutionPair(spec, lines)


# --------------------------------------------------------------------------
# Newton refinement of continuous periodic orbits
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ContinuousTwistMap:
    """Twist map on the torus ``theta, n in [0, 2 pi)``; points are stored in units of 2 pi.

    ``n' = n + s K F(theta)``, ``theta' = theta + n'`` with the same ``F`` and
    sign convention as the lattice version.
    """

    potential: str = "standard"
    K: float = 1.0
    sign_convention: str = PRINTED

    @property
    def _s(self) -> float:
        return 1.0 if self.sign_convention == PRINTED else -1.0

    def force(self, theta):
        if self.potential == "standard":
            return -np.sin(theta)
        return np.mod(theta, 2 * np.pi) - np.pi

    def dforce(self, theta):
        if self.potential == "standard":
            return -np.cos(theta)
        return np.ones_like(theta)

    def step(self, z: np.ndarray) -> np.ndarray:
        """One iterate of unreduced ``(theta, n)`` pairs (shape ``(..., 2)``)."""
        theta, n = z[..., 0], z[..., 1]
        n2 = n + self._s * self.K * self.force(theta)
        return np.stack([theta + n2, n2], axis=-1)

    def jacobian(self, z: np.ndarray) -> np.ndarray:
        k = self._s * self.K * self.dforce(z[..., 0])
        J = np.empty(z.shape[:-1] + (2, 2))
        J[..., 0, 0] = 1 + k
        J[..., 0, 1] = 1
        J[..., 1, 0] = k
        J[..., 1, 1] = 1
        return J


@dataclass
class NewtonResult:
    orbit: list[TorusPoint]
    residual: float
    iterations: int
    converged: bool
    message: str = ""


def _wrap(v):
    """Reduce angle differences to (-pi, pi]."""
    return v - 2 * np.pi * np.round(v / (2 * np.pi))


def _closure(fmap: ContinuousTwistMap, z: np.ndarray) -> np.ndarray:
    return _wrap(fmap.step(z) - np.roll(z, -1, axis=0))


def newton_refine_periodic(
    fmap: ContinuousTwistMap,
    seed: Sequence[TorusPoint],
    t: int | None = None,
    capture_radius: float = 1e-2,
    tol: float = 1e-12,
    max_iter: int = 50,
) -> NewtonResult:
    """Damped multiple-shooting Newton iteration for a period-``t`` orbit.

    Residuals are the max-norm closure error in torus units (fractions of a
    full turn).
    """
    t = len(seed) if t is None else t
    if t < 1 or len(seed) != t:
        raise ValueError("seed orbit must contain exactly t points")
    z = 2 * np.pi * np.array([[p.x, p.y] for p in seed], dtype=float)

    def residual(z):
        return float(np.max(np.abs(_closure(fmap, z)))) / (2 * np.pi)

    res = residual(z)
    if res > capture_radius:
        raise NewtonPreconditionError(
            f"seed closure residual {res:.3g} exceeds capture radius {capture_radius:g}"
        )
    it = 0
    while res >= tol and it < max_iter:
        it += 1
        F = _closure(fmap, z).ravel()
        J = np.zeros((2 * t, 2 * t))
        Jb = fmap.jacobian(z)
        for i in range(t):
            j = (i + 1) % t
            J[2 * i : 2 * i + 2, 2 * i : 2 * i + 2] += Jb[i]
            J[2 * i : 2 * i + 2, 2 * j : 2 * j + 2] -= np.eye(2)
        step = np.linalg.lstsq(J, -F, rcond=None)[0].reshape(t, 2)
        lam = 1.0
        while lam > 1e-6:
            trial = z + lam * step
            r_trial = residual(trial)
            if r_trial < res:
                break
            lam /= 2
        else:
            break
        z, res = trial, r_trial
    orbit = [TorusPoint(*(row / (2 * np.pi))) for row in z]
    converged = res < tol
    msg = "" if converged else f"no convergence after {it} iterations (residual {res:.3g})"
    return NewtonResult(orbit, res, it, converged, msg)
