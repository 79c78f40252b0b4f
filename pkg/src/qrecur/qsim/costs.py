"""Elementary-gate cost model.

One elementary gate is any of: H, X, Z, controlled phase, swap, CNOT, CZ,
Toffoli/CCZ. Larger primitives are charged by the formulas below.

Two adder families are used. Lattice map steps (addition mod ``2**n``) use
the carry-ancilla adder emitted by :mod:`qrecur.qsim.synthesis`, so
:func:`adder_cost` is exactly the length of that circuit. Arithmetic modulo
an arbitrary ``g`` follows the Vedral-Barenco-Ekert construction
(plain adder, modular adder, controlled multiplier).
"""
from __future__ import annotations


def mcz_cost(k: int, zeros: int = 0) -> int:
    """Z controlled on ``k`` qubits (target included), no work qubit.

    Up to CCZ it is a single gate; beyond that the ancilla-free construction
    is quadratic. Bits required to be 0 cost two X gates each.
    """
    if k == 0:
        return 0
    base = 1 if k <= 3 else (k - 2) ** 2
    return base + 2 * zeros


def mcx_cost(controls: int, zeros: int = 0) -> int:
    return mcz_cost(controls + 1, zeros)


def adder_cost(n: int) -> int:
    """``y += x mod 2**n`` with ``n - 2`` carry ancillas (exact synthesized length)."""
    if n == 1:
        return 1
    if n == 2:
        return 3
    return 8 * n - 15


def const_adder_cost(n: int, c: int) -> int:
    """``y += c mod 2**n``: one increment cascade per set bit of ``c``."""
    c %= 1 << n
    total = 0
    for j in range(n):
        if c >> j & 1:
            total += sum(mcx_cost(i) for i in range(n - j))
    return total


def vbe_adder_cost(n: int) -> int:
    """Plain VBE adder: n CARRY (3 gates), n-1 inverse CARRY, n SUM (2 gates), one CNOT."""
    return 3 * n + 3 * (n - 1) + 2 * n + 1


def modadd_cost(n: int) -> int:
    """VBE modular adder: five plain adders plus overflow-bit bookkeeping."""
    return 5 * vbe_adder_cost(n) + 2 * n + 2


def cmodmuladd_cost(n: int) -> int:
    """Controlled ``w += k v mod g``: n doubly-controlled modular additions of ``2**j k``."""
    return n * (modadd_cost(n) + 2 * n)


def cmodmul_cost(n: int) -> int:
    """Controlled in-place ``v -> k v mod g``: multiply into workspace, swap, uncompute."""
    return 2 * cmodmuladd_cost(n) + 3 * n


def matrix_step_cost(n: int) -> int:
    """Controlled right-multiplication of a residue matrix by a constant matrix.

    Per row: four multiply-adds into workspace, four to clear the source
    (using the inverse matrix), then a controlled register swap (Fredkin gates).
    """
    return 2 * (8 * cmodmuladd_cost(n) + 6 * n)


def affine_step_cost(n: int, shift=(0, 0), controlled: bool = True) -> int:
    """Constant affine map on two n-bit coordinate registers, out of place."""
    mul = cmodmuladd_cost(n) if controlled else n * vbe_adder_cost(n)
    return 8 * mul + 3 * n + sum(const_adder_cost(n, s) for s in shift)


def xor_copy_cost(n: int) -> int:
    return n


def qft_cost(w: int) -> int:
    return w * (w + 1) // 2 + w // 2
