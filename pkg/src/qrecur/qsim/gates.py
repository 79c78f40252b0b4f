"""Gate operations.

Elementary gates reference global qubit indices. :class:`BasisPermutation`
references registers by name and carries a vectorized classical bijection on
their values together with its inverse.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import costs


@dataclass(frozen=True)
class Hadamard:
    qubit: int

    def qubits(self, layout=None):
        return (self.qubit,)

    def inverse(self):
        return self

    def cost(self) -> int:
        return 1


@dataclass(frozen=True)
class FlipX:
    qubit: int

    def qubits(self, layout=None):
        return (self.qubit,)

    def inverse(self):
        return self

    def cost(self) -> int:
        return 1


@dataclass(frozen=True)
class PhaseZ:
    qubit: int

    def qubits(self, layout=None):
        return (self.qubit,)

    def inverse(self):
        return self

    def cost(self) -> int:
        return 1


@dataclass(frozen=True)
class ControlledPhase:
    angle: float
    control: int
    target: int

    def qubits(self, layout=None):
        return (self.control, self.target)

    def inverse(self):
        return ControlledPhase(-self.angle, self.control, self.target)

    def cost(self) -> int:
        return 1


@dataclass(frozen=True)
class Swap:
    q1: int
    q2: int

    def qubits(self, layout=None):
        return (self.q1, self.q2)

    def inverse(self):
        return self

    def cost(self) -> int:
        return 1


@dataclass(frozen=True)
class MultiControlledZ:
    """Phase -1 on basis states whose ``qubits`` carry exactly ``values``.

    An empty pattern is a global phase of -1.
    """

    qubits_: tuple[int, ...]
    values: tuple[int, ...]

    def __post_init__(self):
        if len(self.qubits_) != len(self.values):
            raise ValueError("pattern qubits and values differ in length")
        if len(set(self.qubits_)) != len(self.qubits_):
            raise ValueError("pattern qubits must be distinct")

    def qubits(self, layout=None):
        return self.qubits_

    def inverse(self):
        return self

    def cost(self) -> int:
        return costs.mcz_cost(len(self.qubits_), sum(1 for v in self.values if v == 0))


@dataclass(frozen=True)
class MultiControlledX:
    """NOT on ``target`` when ``controls`` carry ``values`` (CNOT/Toffoli family)."""

    controls: tuple[int, ...]
    values: tuple[int, ...]
    target: int

    def qubits(self, layout=None):
        return self.controls + (self.target,)

    def inverse(self):
        return self

    def cost(self) -> int:
        return costs.mcx_cost(len(self.controls), sum(1 for v in self.values if v == 0))


PermFn = Callable[..., tuple]


@dataclass(frozen=True, eq=False)
class BasisPermutation:
    """Classical bijection on the joint values of ``registers``.

    ``forward``/``inverse`` take and return tuples of int64 arrays, one per
    register. Values that the block does not act on must map to
    themselves. ``controls`` are qubits that must all be 1 for the block to
    act. ``kind``/``params`` identify the block for netlist round trips.
    """

    kind: str
    registers: tuple[str, ...]
    forward: PermFn = field(repr=False)
    backward: PermFn = field(repr=False)
    params: dict = field(default_factory=dict)
    controls: tuple[int, ...] = ()
    elementary: int = 0
    inverted: bool = False

    def qubits(self, layout):
        return layout.qubits(self.registers) + self.controls

    def inverse(self) -> "BasisPermutation":
        return BasisPermutation(
            self.kind,
            self.registers,
            self.backward,
            self.forward,
            self.params,
            self.controls,
            self.elementary,
            not self.inverted,
        )

    def cost(self) -> int:
        return self.elementary

    @property
    def label(self) -> str:
        return self.kind + ("^-1" if self.inverted else "")

    def map_indices(self, layout, idx: np.ndarray) -> np.ndarray:
        """Image of basis indices under the block."""
        idx = np.asarray(idx, dtype=np.int64)
        vals = tuple(layout.extract(idx, r) for r in self.registers)
        new = self.forward(*vals)
        out = idx
        for r, v in zip(self.registers, new):
            out = layout.insert(out, r, v)
        if self.controls:
            on = np.ones(idx.shape, dtype=bool)
            for q in self.controls:
                on &= ((idx >> q) & 1).astype(bool)
            out = np.where(on, out, idx)
        return out

    def verify_bijection(self, layout, samples: int = 10_000, seed: int = 0) -> None:
        """Exhaustive check up to 12 qubits on the block's subspace, random round trips above."""
        qs = self.qubits(layout)
        width = len(qs)
        if width <= 12:
            sub = np.arange(1 << width, dtype=np.int64)
        else:
            sub = np.random.default_rng(seed).integers(0, 1 << width, size=samples, dtype=np.int64)
        idx = np.zeros(sub.shape, dtype=np.int64)
        for j, q in enumerate(qs):
            idx |= ((sub >> j) & 1) << q
        img = self.map_indices(layout, idx)
        back = self.inverse().map_indices(layout, img)
        if not np.array_equal(back, idx):
            raise AssertionError(f"block {self.label} fails its inverse round trip")
        if width <= 12 and len(np.unique(img)) != len(img):
            raise AssertionError(f"block {self.label} is not injective")
        outside = np.int64(0)
        for q in qs:
            outside |= np.int64(1) << q
        if np.any((img ^ idx) & ~outside):
            raise AssertionError(f"block {self.label} touches qubits outside its registers")


ELEMENTARY_TYPES = (Hadamard, FlipX, PhaseZ, ControlledPhase, Swap, MultiControlledZ, MultiControlledX)
