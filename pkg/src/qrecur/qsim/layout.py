from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np


@dataclass(frozen=True)
class Register:
    name: str
    width: int
    offset: int

    @property
    def mask(self) -> int:
        return (1 << self.width) - 1

    @property
    def qubits(self) -> tuple[int, ...]:
        return tuple(range(self.offset, self.offset + self.width))

    def qubit(self, j: int) -> int:
        if not 0 <= j < self.width:
            raise IndexError(f"register {self.name} has no qubit {j}")
        return self.offset + j


class RegisterLayout:
    """Ordered named registers packed little-endian into one basis index.

    The first register occupies the lowest qubits; qubit ``offset + j`` of a
    register carries bit ``j`` of its value.
    """

    def __init__(self, registers: Iterable[tuple[str, int]]):
        regs = []
        offset = 0
        for name, width in registers:
            if width < 1:
                raise ValueError(f"register {name!r} must have width >= 1")
            regs.append(Register(name, int(width), offset))
            offset += width
        names = [r.name for r in regs]
        if len(set(names)) != len(names):
            raise ValueError("register names must be unique")
        self._regs = tuple(regs)
        self._by_name = {r.name: r for r in regs}
        self.width = offset

    @property
    def registers(self) -> tuple[Register, ...]:
        return self._regs

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self._regs)

    def __getitem__(self, name: str) -> Register:
        try:
            return self._by_name[name]
        except KeyError:
            raise KeyError(f"no register named {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def __eq__(self, other) -> bool:
        return isinstance(other, RegisterLayout) and self.spec() == other.spec()

    def __hash__(self):
        return hash(self.spec())

    def __repr__(self) -> str:
        return "RegisterLayout(" + ", ".join(f"{n}:{w}" for n, w in self.spec()) + ")"

    def spec(self) -> tuple[tuple[str, int], ...]:
        return tuple((r.name, r.width) for r in self._regs)

    def qubits(self, names: str | Sequence[str]) -> tuple[int, ...]:
        if isinstance(names, str):
            names = [names]
        return tuple(q for n in names for q in self[n].qubits)

    def encode(self, values: Mapping[str, int] | Sequence[int]) -> int:
        if not isinstance(values, Mapping):
            if len(values) != len(self._regs):
                raise ValueError("need one value per register")
            values = dict(zip(self.names, values))
        idx = 0
        for name, v in values.items():
            r = self[name]
            v = int(v)
            if not 0 <= v <= r.mask:
                raise ValueError(f"value {v} does not fit in {r.width}-qubit register {name!r}")
            idx |= v << r.offset
        return idx

    def extract(self, indices, name: str):
        r = self[name]
        return (np.asarray(indices, dtype=np.int64) >> r.offset) & r.mask

    def decode(self, index: int) -> dict[str, int]:
        return {r.name: (int(index) >> r.offset) & r.mask for r in self._regs}

    def insert(self, indices, name: str, values):
        r = self[name]
        cleared = np.asarray(indices, dtype=np.int64) & ~np.int64(r.mask << r.offset)
        return cleared | (np.asarray(values, dtype=np.int64) << r.offset)
