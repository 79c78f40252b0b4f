from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

from . import costs
from .gates import (
    BasisPermutation,
    ControlledPhase,
    Hadamard,
    MultiControlledZ,
    Swap,
)
from .layout import RegisterLayout


@dataclass(frozen=True)
class QFTBlock:
    """Quantum Fourier transform of one register; expands to H, controlled-phase and swaps."""

    register: str
    inverse_: bool = False

    def inverse(self) -> "QFTBlock":
        return QFTBlock(self.register, not self.inverse_)

    def qubits(self, layout):
        return layout[self.register].qubits

    def expand(self, layout) -> list:
        q = layout[self.register].qubits
        w = len(q)
        gates: list = []
        for j in range(w - 1, -1, -1):
            gates.append(Hadamard(q[j]))
            for m in range(j - 1, -1, -1):
                gates.append(ControlledPhase(math.pi / 2 ** (j - m), q[m], q[j]))
        for i in range(w // 2):
            gates.append(Swap(q[i], q[w - 1 - i]))
        if self.inverse_:
            gates = [g.inverse() for g in reversed(gates)]
        return gates


@dataclass(frozen=True, eq=False)
class ControlledBlock:
    """``body ** power`` applied only where ``control`` is 1."""

    body: "Circuit"
    control: int
    power: int = 1

    def inverse(self) -> "ControlledBlock":
        return ControlledBlock(self.body.inverse(), self.control, self.power)

    def qubits(self, layout):
        qs = set()
        for op in self.body.ops:
            qs.update(op.qubits(layout))
        if self.control in qs:
            raise ValueError("control qubit is used inside the controlled body")
        return tuple(sorted(qs)) + (self.control,)


@dataclass
class GateStats:
    counts: Counter = field(default_factory=Counter)
    blocks: Counter = field(default_factory=Counter)
    elementary: int = 0

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def merge(self, other: "GateStats", times: int = 1) -> None:
        for k, v in other.counts.items():
            self.counts[k] += v * times
        for k, v in other.blocks.items():
            self.blocks[k] += v * times
        self.elementary += other.elementary * times

    def to_record(self) -> dict:
        return {
            "counts": dict(sorted(self.counts.items())),
            "blocks": dict(sorted(self.blocks.items())),
            "total": self.total,
            "elementary": self.elementary,
        }


def _variant(op) -> str:
    return type(op).__name__


class Circuit:
    """Ordered gate sequence over a register layout."""

    def __init__(self, layout: RegisterLayout, ops=None, meta: dict | None = None):
        self.layout = layout
        self.ops: list = []
        self.meta: dict = dict(meta or {})
        for op in ops or ():
            self.append(op)

    def append(self, op) -> "Circuit":
        if isinstance(op, Circuit):
            if op.layout != self.layout:
                raise ValueError("cannot append a circuit with a different layout")
            self.ops.extend(op.ops)
            return self
        qs = op.qubits(self.layout)
        bad = [q for q in qs if not 0 <= q < self.layout.width]
        if bad:
            raise ValueError(f"gate {op} references invalid qubits {bad}")
        self.ops.append(op)
        return self

    def extend(self, ops) -> "Circuit":
        for op in ops:
            self.append(op)
        return self

    def __len__(self) -> int:
        return len(self.ops)

    def copy(self) -> "Circuit":
        return Circuit(self.layout, list(self.ops), self.meta)

    # -- builders ------------------------------------------------------------

    def hadamard_register(self, name: str, width: int | None = None) -> "Circuit":
        qs = self.layout[name].qubits[: width if width is not None else None]
        return self.extend(Hadamard(q) for q in qs)

    def qft(self, name: str) -> "Circuit":
        return self.append(QFTBlock(name))

    def iqft(self, name: str) -> "Circuit":
        return self.append(QFTBlock(name, True))

    def phase_flip(self, qubits, values) -> "Circuit":
        return self.append(MultiControlledZ(tuple(qubits), tuple(values)))

    def inverse(self) -> "Circuit":
        return Circuit(self.layout, [op.inverse() for op in reversed(self.ops)], self.meta)

    # -- inspection ----------------------------------------------------------

    def elementary_gates(self):
        """Flattened elementary gates and permutation blocks (controlled bodies not expanded)."""
        for op in self.ops:
            if isinstance(op, QFTBlock):
                yield from op.expand(self.layout)
            else:
                yield op

    def permutation_blocks(self):
        for op in self.ops:
            if isinstance(op, BasisPermutation):
                yield op
            elif isinstance(op, ControlledBlock):
                yield from op.body.permutation_blocks()

    def stats(self) -> GateStats:
        st = GateStats()
        for op in self.elementary_gates():
            if isinstance(op, ControlledBlock):
                inner = op.body.stats()
                st.merge(inner, op.power)
                st.blocks["ControlledBlock"] += 1
                continue
            st.counts[_variant(op)] += 1
            if isinstance(op, BasisPermutation):
                st.blocks[op.kind] += 1
            st.elementary += op.cost()
        return st

    def verify_permutations(self) -> None:
        for block in self.permutation_blocks():
            block.verify_bijection(self.layout)


def gate_count(circuit: Circuit) -> GateStats:
    return circuit.stats()


def qft_elementary_count(w: int) -> int:
    return costs.qft_cost(w)
