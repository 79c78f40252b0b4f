"""Line-based text netlist.

::

    QRECUR-NETLIST 1
    LAYOUT t:4 A:2 B:2
    META {"algorithm": "qalpha"}
    H 0
    CP 1.5707963267948966 0 1
    MCZ 4,5 0,0
    MCX 0,1 1,1 2
    QFT t inv
    PERM mapstep inv X,Y 7 12 {"power": 1, "spec": {...}}
    CTRL 3 4
    ...
    END

``PERM`` fields are: kind, ``fwd``/``inv``, registers, controls (``-`` if
none), elementary cost, JSON parameters. ``CTRL control power`` opens a
controlled body closed by ``END``.
"""
from __future__ import annotations

import json
from pathlib import Path

from .blocks import build_block
from .circuit import Circuit, ControlledBlock, QFTBlock
from .gates import (
    BasisPermutation,
    ControlledPhase,
    FlipX,
    Hadamard,
    MultiControlledX,
    MultiControlledZ,
    PhaseZ,
    Swap,
)
from .layout import RegisterLayout

MAGIC = "QRECUR-NETLIST 1"


class NetlistError(ValueError):
    pass


def _ints(field: str) -> tuple[int, ...]:
    return () if field == "-" else tuple(int(v) for v in field.split(","))


def _join(vals) -> str:
    return ",".join(str(v) for v in vals) if vals else "-"


def _op_lines(op, indent: str = "") -> list[str]:
    if isinstance(op, Hadamard):
        return [f"{indent}H {op.qubit}"]
    if isinstance(op, FlipX):
        return [f"{indent}X {op.qubit}"]
    if isinstance(op, PhaseZ):
        return [f"{indent}Z {op.qubit}"]
    if isinstance(op, ControlledPhase):
        return [f"{indent}CP {op.angle!r} {op.control} {op.target}"]
    if isinstance(op, Swap):
        return [f"{indent}SWAP {op.q1} {op.q2}"]
    if isinstance(op, MultiControlledZ):
        return [f"{indent}MCZ {_join(op.qubits_)} {_join(op.values)}"]
    if isinstance(op, MultiControlledX):
        return [f"{indent}MCX {_join(op.controls)} {_join(op.values)} {op.target}"]
    if isinstance(op, QFTBlock):
        return [f"{indent}QFT {op.register} {'inv' if op.inverse_ else 'fwd'}"]
    if isinstance(op, BasisPermutation):
        params = json.dumps(op.params, sort_keys=True, separators=(",", ":"))
        direction = "inv" if op.inverted else "fwd"
        return [
            f"{indent}PERM {op.kind} {direction} {','.join(op.registers)} "
            f"{_join(op.controls)} {op.elementary} {params}"
        ]
    if isinstance(op, ControlledBlock):
        lines = [f"{indent}CTRL {op.control} {op.power}"]
        for sub in op.body.ops:
            lines.extend(_op_lines(sub, indent + "  "))
        lines.append(f"{indent}END")
        return lines
    raise NetlistError(f"cannot export {op!r}")


def dumps(circuit: Circuit) -> str:
    lines = [MAGIC, "LAYOUT " + " ".join(f"{n}:{w}" for n, w in circuit.layout.spec())]
    if circuit.meta:
        lines.append("META " + json.dumps(circuit.meta, sort_keys=True, separators=(",", ":")))
    for op in circuit.ops:
        lines.extend(_op_lines(op))
    return "\n".join(lines) + "\n"


def write_netlist(circuit: Circuit, path) -> Path:
    path = Path(path)
    path.write_text(dumps(circuit))
    return path


def _parse_op(parts: list[str], lineno: int):
    tag = parts[0]
    try:
        if tag == "H":
            return Hadamard(int(parts[1]))
        if tag == "X":
            return FlipX(int(parts[1]))
        if tag == "Z":
            return PhaseZ(int(parts[1]))
        if tag == "CP":
            return ControlledPhase(float(parts[1]), int(parts[2]), int(parts[3]))
        if tag == "SWAP":
            return Swap(int(parts[1]), int(parts[2]))
        if tag == "MCZ":
            return MultiControlledZ(_ints(parts[1]), _ints(parts[2]))
        if tag == "MCX":
            return MultiControlledX(_ints(parts[1]), _ints(parts[2]), int(parts[3]))
        if tag == "QFT":
            return QFTBlock(parts[1], parts[2] == "inv")
        if tag == "PERM":
            kind, direction, regs, ctrl, cost, params = parts[1:7]
            blk = build_block(kind, regs.split(","), json.loads(params), _ints(ctrl), direction == "inv")
            if blk.elementary != int(cost):
                raise NetlistError(f"line {lineno}: cost {cost} does not match rebuilt block ({blk.elementary})")
            return blk
    except (IndexError, ValueError, KeyError) as exc:
        if isinstance(exc, NetlistError):
            raise
        raise NetlistError(f"line {lineno}: malformed {tag} entry ({exc})") from exc
    raise NetlistError(f"line {lineno}: unknown gate tag {tag!r}")


def loads(text: str) -> Circuit:
    lines = text.splitlines()
    if not lines or lines[0].strip() != MAGIC:
        raise NetlistError("missing netlist header")
    if len(lines) < 2 or not lines[1].startswith("LAYOUT "):
        raise NetlistError("missing LAYOUT line")
    regs = []
    for item in lines[1].split()[1:]:
        name, _, width = item.rpartition(":")
        regs.append((name, int(width)))
    layout = RegisterLayout(regs)
    meta: dict = {}
    stack: list[tuple[list, int, int]] = []  # (ops, control, power) of open CTRL bodies
    ops: list = []
    for lineno, raw in enumerate(lines[2:], start=3):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("META "):
            meta = json.loads(line[5:])
            continue
        parts = line.split(" ", 6) if line.startswith("PERM ") else line.split()
        if parts[0] == "CTRL":
            stack.append((ops, int(parts[1]), int(parts[2])))
            ops = []
        elif parts[0] == "END":
            if not stack:
                raise NetlistError(f"line {lineno}: END without CTRL")
            outer, control, power = stack.pop()
            outer.append(ControlledBlock(Circuit(layout, ops), control, power))
            ops = outer
        else:
            op = _parse_op(parts, lineno)
            try:
                Circuit(layout, [op])
            except ValueError as exc:
                raise NetlistError(f"line {lineno}: {exc}") from exc
            ops.append(op)
    if stack:
        raise NetlistError("unterminated CTRL block")
    return Circuit(layout, ops, meta)


def read_netlist(path) -> Circuit:
    return loads(Path(path).read_text())
