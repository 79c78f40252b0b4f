"""Explicit NOT/CNOT/Toffoli circuits for lattice-map steps.

Used to ground the cost model: the sawtooth step with ``K = 2**-s`` is
emitted gate by gate and checked against its :class:`BasisPermutation`.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations

from ..dynamics import PRINTED, LatticeMapSpec
from . import costs
from .gates import FlipX, MultiControlledX


def _cx(controls, target):
    return MultiControlledX(tuple(controls), (1,) * len(controls), target)


def adder_gates(y, x, work) -> list:
    """``y += x mod 2**n`` for qubit lists ``y`` (target) and ``x`` (source).

    ``x`` may contain ``None`` for bits known to be zero. Carries into bits
    ``1 .. n-2`` are held in ``work`` (clean ancillas, returned clean); the
    top carry is folded straight into the top target bit.
    """
    n = len(y)
    x = list(x) + [None] * (n - len(x))
    gates: list = []
    carry: list = [None] * n  # carry[i] = qubit holding carry into bit i, or None if zero
    carry_src: list = [None] * n
    wi = iter(work)

    def maj_terms(i):
        # majority(a, b, c) = ab ^ ac ^ bc over the bits that can be nonzero
        present = [q for q in (x[i], y[i], carry[i]) if q is not None]
        return list(combinations(present, 2))

    def emit(pairs, target):
        for pair in pairs:
            gates.append(_cx(pair, target))

    for i in range(n - 2):
        terms = maj_terms(i)
        if terms:
            q = next(wi)
            emit(terms, q)
            carry[i + 1] = q
            carry_src[i + 1] = terms
    top = n - 1
    if x[top] is not None:
        gates.append(_cx((x[top],), y[top]))
    if n >= 2:
        emit(maj_terms(top - 1), y[top])
    for i in range(n - 2, -1, -1):
        if i + 1 <= n - 2 and carry[i + 1] is not None:
            emit(carry_src[i + 1], carry[i + 1])
        if x[i] is not None:
            gates.append(_cx((x[i],), y[i]))
        if carry[i] is not None:
            gates.append(_cx((carry[i],), y[i]))
    return gates


def const_adder_gates(y, c: int) -> list:
    """``y += c mod 2**n`` as increment cascades, one per set bit of ``c``."""
    n = len(y)
    c %= 1 << n
    gates: list = []
    for j in range(n):
        if c >> j & 1:
            for i in range(n - 1, j - 1, -1):
                ctrl = tuple(y[j:i])
                gates.append(_cx(ctrl, y[i]) if ctrl else FlipX(y[i]))
    return gates


def dyadic_shift(spec: LatticeMapSpec) -> int | None:
    """``s`` when the map's kick is ``(X >> s) - N / 2**(s+1)``; otherwise None."""
    if spec.potential != "sawtooth" or spec.sign_convention != PRINTED:
        return None
    K = spec.K
    if K.numerator != 1 or K.denominator & (K.denominator - 1):
        return None
    s = K.denominator.bit_length() - 1
    if 2 ** (s + 1) > spec.modulus:
        return None
    return s


def twist_step_gates(spec: LatticeMapSpec, xq, yq, work) -> list | None:
    """Gate list for one step ``Y += kick(X); X += Y``, or None if not synthesizable."""
    s = dyadic_shift(spec)
    if s is None:
        return None
    n = len(xq)
    N = spec.modulus
    const = -(N >> (s + 1))
    gates = const_adder_gates(yq, const)
    shifted = [xq[i + s] if i + s < n else None for i in range(n)]
    gates += adder_gates(yq, shifted, work)
    gates += adder_gates(xq, yq, work)
    return gates


def twist_step_length(spec: LatticeMapSpec) -> int | None:
    n = spec.n_bits
    xq, yq = list(range(n)), list(range(n, 2 * n))
    work = list(range(2 * n, 2 * n + max(0, n - 2)))
    g = twist_step_gates(spec, xq, yq, work)
    return None if g is None else sum(op.cost() for op in g)


def twist_step_estimate(spec: LatticeMapSpec) -> int:
    """Formula cost when no explicit circuit is emitted.

    Sawtooth kicks ``floor(K (X - N/2))`` cost one shifted adder per set bit
    of the numerator, a divider (n adders) for non-dyadic denominators, and
    a constant adder. The standard-map kick is charged ``n**3``, the cost
    of evaluating the sine table reversibly.
    """
    n = spec.n_bits
    if spec.potential == "standard":
        kick = n**3
    else:
        K = Fraction(spec.K)
        num, den = abs(K.numerator), K.denominator
        kick = bin(num).count("1") * costs.adder_cost(n)
        if den & (den - 1):
            kick += n * costs.adder_cost(n)
        kick += costs.const_adder_cost(n, (1 << n) - 1)
    return kick + costs.adder_cost(n)
