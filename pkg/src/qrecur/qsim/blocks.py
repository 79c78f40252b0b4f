"""Reversible classical blocks realized as verified basis permutations.

Every factory returns a :class:`BasisPermutation` whose ``kind``/``params``
are enough to rebuild it (see :func:`build_block`). Codes outside the
modulus (``v >= m``) are left untouched so blocks are unitary on the whole
register space.
"""
from __future__ import annotations

from math import gcd

import numpy as np

from ..dynamics import LatticeMapSpec, fast_power, spec_from_config
from . import costs
from .gates import BasisPermutation, MultiControlledX


class BlockError(ValueError):
    pass


def _controls(control) -> tuple[int, ...]:
    if control is None:
        return ()
    if isinstance(control, (int, np.integer)):
        return (int(control),)
    return tuple(int(c) for c in control)


def _bits(m: int) -> int:
    return max(1, (m - 1).bit_length())


def controlled_modmul_block(target: str, k: int, m: int, control=None) -> BasisPermutation:
    """``|v> -> |k v mod m>`` on ``target`` (identity for ``v >= m``)."""
    if m < 2:
        raise BlockError("modulus must be at least 2")
    if gcd(k, m) != 1:
        raise BlockError(f"multiplier {k} is not invertible mod {m}")
    kinv = pow(k, -1, m)

    def fwd(v):
        return (np.where(v < m, (k * v) % m, v),)

    def bwd(v):
        return (np.where(v < m, (kinv * v) % m, v),)

    return BasisPermutation(
        "modmul",
        (target,),
        fwd,
        bwd,
        {"k": k, "m": m},
        _controls(control),
        costs.cmodmul_cost(_bits(m)),
    )


def _row_valid(m, *vals):
    ok = vals[0] < m
    for v in vals[1:]:
        ok = ok & (v < m)
    return ok


def rowmul_block(registers, entries, m: int, control=None) -> BasisPermutation:
    """``(a, b, w1, w2) -> (a, b, w1 + a a_i + b c_i, w2 + a b_i + b d_i) mod m``."""
    ai, bi, ci, di = (int(e) % m for e in entries)

    def fwd(a, b, w1, w2):
        ok = _row_valid(m, a, b, w1, w2)
        return (
            a,
            b,
            np.where(ok, (w1 + a * ai + b * ci) % m, w1),
            np.where(ok, (w2 + a * bi + b * di) % m, w2),
        )

    def bwd(a, b, w1, w2):
        ok = _row_valid(m, a, b, w1, w2)
        return (
            a,
            b,
            np.where(ok, (w1 - a * ai - b * ci) % m, w1),
            np.where(ok, (w2 - a * bi - b * di) % m, w2),
        )

    return BasisPermutation(
        "rowmul",
        tuple(registers),
        fwd,
        bwd,
        {"entries": [ai, bi, ci, di], "m": m},
        _controls(control),
        4 * costs.cmodmuladd_cost(_bits(m)),
    )


def rowclear_block(registers, entries, m: int, control=None) -> BasisPermutation:
    """Clears ``(a, b)`` given ``(w1, w2) = (a, b) L_i`` using ``L_i^-1``."""
    ai, bi, ci, di = (int(e) % m for e in entries)

    def fwd(a, b, w1, w2):
        ok = _row_valid(m, a, b, w1, w2)
        return (
            np.where(ok, (a - (di * w1 - ci * w2)) % m, a),
            np.where(ok, (b - (ai * w2 - bi * w1)) % m, b),
            w1,
            w2,
        )

    def bwd(a, b, w1, w2):
        ok = _row_valid(m, a, b, w1, w2)
        return (
            np.where(ok, (a + (di * w1 - ci * w2)) % m, a),
            np.where(ok, (b + (ai * w2 - bi * w1)) % m, b),
            w1,
            w2,
        )

    return BasisPermutation(
        "rowclear",
        tuple(registers),
        fwd,
        bwd,
        {"entries": [ai, bi, ci, di], "m": m},
        _controls(control),
        4 * costs.cmodmuladd_cost(_bits(m)),
    )


def register_swap_block(registers, control=None, width: int | None = None) -> BasisPermutation:
    """Swap register pairs ``(r0, r_half), (r1, r_half+1), ...``; Fredkin gates when controlled."""
    regs = tuple(registers)
    if len(regs) % 2:
        raise BlockError("register swap needs an even number of registers")
    h = len(regs) // 2

    def fwd(*vals):
        return vals[h:] + vals[:h]

    n = width or 1
    per = 3 if control is not None else 1
    return BasisPermutation("regswap", regs, fwd, fwd, {"width": n}, _controls(control), per * n * h)


def matrix_step_block(entries, m: int, registers, work, control=None) -> list[BasisPermutation]:
    """Controlled ``(A B; C D) -> (A B; C D) L_i mod m`` with the workspace returned to zero.

    ``registers`` are the four entry registers ``(A, B, C, D)`` and ``work``
    two scratch registers. Each row is multiplied out of place into the
    workspace, the source is cleared with the inverse matrix, and the rows
    are swapped back.
    """
    a_i, b_i, c_i, d_i = (int(e) for e in entries)
    if (a_i * d_i - b_i * c_i - 1) % m:
        raise BlockError("step matrix is not invertible with determinant 1")
    A, B, C, D = registers
    W1, W2 = work
    n = _bits(m)
    blocks = []
    for row in ((A, B), (C, D)):
        regs = row + (W1, W2)
        blocks.append(rowmul_block(regs, entries, m, control))
        blocks.append(rowclear_block(regs, entries, m, control))
        blocks.append(register_swap_block(regs, control, n))
    return blocks


def map_step_cost(spec: LatticeMapSpec, controlled: bool) -> int:
    from . import synthesis

    n = spec.n_bits
    power2 = spec.modulus == 1 << n
    if spec.kind == "twist" or (spec.potential is not None and not controlled):
        syn = synthesis.twist_step_length(spec)
        if syn is not None:
            return syn
        return synthesis.twist_step_estimate(spec)
    if not controlled and spec.matrix.entries == (2, 1, 1, 1) and spec.shift == (0, 0):
        # cat map as two shears: Y += X ; X += Y
        return 2 * (costs.adder_cost(n) if power2 else costs.modadd_cost(n))
    return costs.affine_step_cost(n, spec.shift, controlled)


def map_step_block(
    spec: LatticeMapSpec, registers=("X", "Y"), power: int = 1, control=None
) -> BasisPermutation:
    """One (or ``power``) iterate(s) of a lattice map on two coordinate registers."""
    m = spec.modulus
    if power < 0:
        return map_step_block(spec, registers, -power, control).inverse()
    if power != 1 and not spec.supports_fast_iterate:
        raise BlockError("only cat/affine maps have efficiently computable powers")
    step = fast_power(spec, power) if power != 1 else spec

    def fwd(X, Y):
        ok = (X < m) & (Y < m)
        Xs, Ys = np.where(ok, X, 0), np.where(ok, Y, 0)
        X2, Y2 = step._apply_arrays(Xs, Ys)
        return np.where(ok, X2, X), np.where(ok, Y2, Y)

    def bwd(X, Y):
        ok = (X < m) & (Y < m)
        Xs, Ys = np.where(ok, X, 0), np.where(ok, Y, 0)
        X2, Y2 = step._invert_arrays(Xs, Ys)
        return np.where(ok, X2, X), np.where(ok, Y2, Y)

    ctl = _controls(control)
    cost = map_step_cost(spec if power == 1 else step, bool(ctl))
    return BasisPermutation(
        "mapstep", tuple(registers), fwd, bwd, {"spec": spec.config(), "power": power}, ctl, cost
    )


def translate_block(registers, shift, m: int, control=None) -> BasisPermutation:
    dx, dy = (int(s) % m for s in shift)

    def fwd(X, Y):
        ok = (X < m) & (Y < m)
        return np.where(ok, (X + dx) % m, X), np.where(ok, (Y + dy) % m, Y)

    def bwd(X, Y):
        ok = (X < m) & (Y < m)
        return np.where(ok, (X - dx) % m, X), np.where(ok, (Y - dy) % m, Y)

    n = _bits(m)
    return BasisPermutation(
        "translate",
        tuple(registers),
        fwd,
        bwd,
        {"shift": [dx, dy], "m": m},
        _controls(control),
        costs.const_adder_cost(n, dx) + costs.const_adder_cost(n, dy),
    )


def xor_copy_gates(layout, src: str, dst: str) -> list[MultiControlledX]:
    """``dst ^= src`` as one CNOT per bit."""
    s, d = layout[src], layout[dst]
    if s.width > d.width:
        raise BlockError("xor copy needs a destination at least as wide as the source")
    return [MultiControlledX((s.qubit(j),), (1,), d.qubit(j)) for j in range(s.width)]


def build_block(kind: str, registers, params: dict, controls=(), inverted: bool = False):
    """Rebuild a block from its netlist description."""
    registers = tuple(registers)
    control = tuple(controls) or None
    if kind == "modmul":
        blk = controlled_modmul_block(registers[0], params["k"], params["m"], control)
    elif kind == "rowmul":
        blk = rowmul_block(registers, params["entries"], params["m"], control)
    elif kind == "rowclear":
        blk = rowclear_block(registers, params["entries"], params["m"], control)
    elif kind == "regswap":
        blk = register_swap_block(registers, control, params.get("width"))
    elif kind == "mapstep":
        blk = map_step_block(spec_from_config(params["spec"]), registers, params["power"], control)
    elif kind == "translate":
        blk = translate_block(registers, params["shift"], params["m"], control)
    else:
        raise BlockError(f"unknown block kind {kind!r}")
    return blk.inverse() if inverted else blk
