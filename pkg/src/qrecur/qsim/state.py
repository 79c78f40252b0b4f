"""Pure states with a dense statevector or a compressed (sparse) amplitude table."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

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

DENSE_MAX_QUBITS = 24
COMPRESSED_MAX_STATES = 1 << 20
COMPRESSED_MAX_QUBITS = 62
AUTO_DENSE_QUBITS = 20
PRUNE = 1e-14
_SQRT1_2 = 1 / math.sqrt(2)


class ResourceError(RuntimeError):
    """A simulation would exceed a backend's hard limit."""


def choose_backend(backend: str, width: int) -> str:
    if backend == "auto":
        return "dense" if width <= AUTO_DENSE_QUBITS else "compressed"
    if backend not in ("dense", "compressed"):
        raise ValueError(f"unknown backend {backend!r}")
    return backend


@dataclass
class MeasurementRecord:
    register: str
    shots: int
    outcomes: dict
    seed: int | None

    def __post_init__(self):
        assert sum(self.outcomes.values()) == self.shots

    def most_common(self, n: int | None = None):
        return Counter(self.outcomes).most_common(n)

    def to_record(self) -> dict:
        return {
            "register": self.register,
            "shots": self.shots,
            "seed": self.seed,
            "outcomes": {str(k): v for k, v in sorted(self.outcomes.items())},
        }


def _bit_mask(idx, qubits, values):
    m = np.ones(idx.shape, dtype=bool)
    for q, v in zip(qubits, values):
        m &= ((idx >> q) & 1) == v
    return m


class PureState:
    """Normalized amplitude table over the basis of a :class:`RegisterLayout`.

    Dense states hold the full ``2**W`` vector. Compressed states keep sorted
    arrays of nonzero basis indices and their amplitudes; every algorithm circuit here
    outside Hadamard/QFT layers is a basis permutation, so these stay small.
    """

    def __init__(self, layout: RegisterLayout, backend: str = "dense"):
        self.layout = layout
        self.backend = choose_backend(backend, layout.width)
        W = layout.width
        if self.backend == "dense" and W > DENSE_MAX_QUBITS:
            raise ResourceError(f"dense backend is limited to {DENSE_MAX_QUBITS} qubits (need {W})")
        if self.backend == "compressed" and W > COMPRESSED_MAX_QUBITS:
            raise ResourceError(f"compressed backend indexes at most {COMPRESSED_MAX_QUBITS} qubits")
        self.vec: np.ndarray | None = None
        self.idx: np.ndarray | None = None
        self.amp: np.ndarray | None = None

    # -- construction --------------------------------------------------------

    @classmethod
    def basis(cls, layout: RegisterLayout, values=None, backend: str = "dense") -> "PureState":
        st = cls(layout, backend)
        index = layout.encode(values) if values is not None else 0
        if st.backend == "dense":
            st.vec = np.zeros(1 << layout.width, dtype=np.complex128)
            st.vec[index] = 1.0
        else:
            st.idx = np.array([index], dtype=np.int64)
            st.amp = np.array([1.0], dtype=np.complex128)
        return st

    @classmethod
    def from_amplitudes(cls, layout, amplitudes: dict, backend: str = "dense") -> "PureState":
        st = cls(layout, backend)
        keys = np.array(sorted(amplitudes), dtype=np.int64)
        vals = np.array([amplitudes[k] for k in sorted(amplitudes)], dtype=np.complex128)
        if st.backend == "dense":
            st.vec = np.zeros(1 << layout.width, dtype=np.complex128)
            st.vec[keys] = vals
        else:
            st._set_sparse(keys, vals, presorted=True)
        return st

    def copy(self) -> "PureState":
        st = PureState(self.layout, self.backend)
        if self.backend == "dense":
            st.vec = self.vec.copy()
        else:
            st.idx, st.amp = self.idx.copy(), self.amp.copy()
        return st

    # -- views -----------------------------------------------------------------

    @property
    def width(self) -> int:
        return self.layout.width

    @property
    def n_nonzero(self) -> int:
        if self.backend == "dense":
            return int(np.count_nonzero(np.abs(self.vec) > PRUNE))
        return len(self.idx)

    def sparse(self) -> tuple[np.ndarray, np.ndarray]:
        """Sorted nonzero basis indices and their amplitudes."""
        if self.backend == "dense":
            nz = np.flatnonzero(np.abs(self.vec) > PRUNE)
            return nz.astype(np.int64), self.vec[nz]
        return self.idx, self.amp

    def amplitudes(self) -> dict[int, complex]:
        idx, amp = self.sparse()
        return {int(i): complex(a) for i, a in zip(idx, amp)}

    def to_dense(self) -> np.ndarray:
        if self.backend == "dense":
            return self.vec.copy()
        if self.width > DENSE_MAX_QUBITS:
            raise ResourceError("state too wide for a dense vector")
        v = np.zeros(1 << self.width, dtype=np.complex128)
        v[self.idx] = self.amp
        return v

    def norm(self) -> float:
        a = self.vec if self.backend == "dense" else self.amp
        return float(np.sqrt(np.sum(np.abs(a) ** 2)))

    def amplitude(self, values) -> complex:
        index = self.layout.encode(values)
        if self.backend == "dense":
            return complex(self.vec[index])
        pos = np.searchsorted(self.idx, index)
        if pos < len(self.idx) and self.idx[pos] == index:
            return complex(self.amp[pos])
        return 0j

    def register_values(self, name: str) -> np.ndarray:
        """Values of a register over all nonzero-amplitude components."""
        idx, _ = self.sparse()
        return self.layout.extract(idx, name)

    def registers_clear(self, names) -> bool:
        idx, _ = self.sparse()
        return all(np.all(self.layout.extract(idx, n) == 0) for n in names)

    # -- internals -------------------------------------------------------------

    def _set_sparse(self, idx, amp, presorted=False):
        if not presorted:
            order = np.argsort(idx, kind="stable")
            idx, amp = idx[order], amp[order]
        keep = np.abs(amp) > PRUNE
        if not keep.all():
            idx, amp = idx[keep], amp[keep]
        if len(idx) > COMPRESSED_MAX_STATES:
            raise ResourceError(
                f"compressed backend is limited to {COMPRESSED_MAX_STATES} basis states (need {len(idx)})"
            )
        self.idx, self.amp = idx, amp

    def _permute(self, mapper):
        if self.backend == "dense":
            src = np.arange(self.vec.size, dtype=np.int64)
            dst = mapper(src)
            new = np.empty_like(self.vec)
            new[dst] = self.vec
            self.vec = new
        else:
            self._set_sparse(mapper(self.idx), self.amp)

    def _phase(self, mask_fn, factor):
        if self.backend == "dense":
            src = np.arange(self.vec.size, dtype=np.int64)
            self.vec[mask_fn(src)] *= factor
        else:
            self.amp[mask_fn(self.idx)] *= factor

    def _hadamard(self, q: int):
        if self.backend == "dense":
            v = self.vec.reshape(-1, 2, 1 << q)
            a0, a1 = v[:, 0, :].copy(), v[:, 1, :].copy()
            v[:, 0, :] = (a0 + a1) * _SQRT1_2
            v[:, 1, :] = (a0 - a1) * _SQRT1_2
            return
        bit = np.int64(1) << q
        b = (self.idx >> q) & 1
        base = self.idx & ~bit
        idx = np.concatenate([base, base | bit])
        amp = np.concatenate([self.amp, np.where(b == 1, -self.amp, self.amp)]) * _SQRT1_2
        uniq, inv = np.unique(idx, return_inverse=True)
        summed = np.zeros(len(uniq), dtype=np.complex128)
        np.add.at(summed, inv, amp)
        self._set_sparse(uniq, summed, presorted=True)

    def _dft_register(self, name: str, inverse: bool):
        reg = self.layout[name]
        n = 1 << reg.width
        sign = 1 if inverse else -1  # numpy fft has exp(-2 pi i ...)
        if self.backend == "dense":
            v = self.vec.reshape(-1, n, 1 << reg.offset)
            if inverse:
                out = np.fft.fft(v, axis=1) / math.sqrt(n)
            else:
                out = np.fft.ifft(v, axis=1) * math.sqrt(n)
            self.vec = out.reshape(-1)
            return
        vals = (self.idx >> reg.offset) & reg.mask
        rest = self.idx & ~np.int64(reg.mask << reg.offset)
        groups, inv = np.unique(rest, return_inverse=True)
        if len(groups) * n > COMPRESSED_MAX_STATES:
            raise ResourceError(
                f"QFT would populate {len(groups) * n} basis states (limit {COMPRESSED_MAX_STATES})"
            )
        table = np.zeros((len(groups), n), dtype=np.complex128)
        table[inv, vals] = self.amp
        if sign > 0:
            table = np.fft.fft(table, axis=1) / math.sqrt(n)
        else:
            table = np.fft.ifft(table, axis=1) * math.sqrt(n)
        ks = np.arange(n, dtype=np.int64) << reg.offset
        idx = (groups[:, None] | ks[None, :]).ravel()
        self._set_sparse(idx, table.ravel())

    # -- gate application --------------------------------------------------------

    def apply(self, op) -> "PureState":
        lay = self.layout
        if isinstance(op, Circuit):
            for sub in op.ops:
                self.apply(sub)
            return self
        if isinstance(op, Hadamard):
            self._check_qubits((op.qubit,))
            self._hadamard(op.qubit)
        elif isinstance(op, FlipX):
            self._check_qubits((op.qubit,))
            bit = np.int64(1) << op.qubit
            self._permute(lambda i: i ^ bit)
        elif isinstance(op, PhaseZ):
            self._check_qubits((op.qubit,))
            self._phase(lambda i: ((i >> op.qubit) & 1).astype(bool), -1)
        elif isinstance(op, ControlledPhase):
            self._check_qubits((op.control, op.target))
            self._phase(
                lambda i: (((i >> op.control) & (i >> op.target)) & 1).astype(bool),
                np.exp(1j * op.angle),
            )
        elif isinstance(op, Swap):
            self._check_qubits((op.q1, op.q2))
            a, b = op.q1, op.q2

            def sw(i):
                x = ((i >> a) ^ (i >> b)) & 1
                return i ^ ((x << a) | (x << b))

            self._permute(sw)
        elif isinstance(op, MultiControlledZ):
            self._check_qubits(op.qubits_)
            self._phase(lambda i: _bit_mask(i, op.qubits_, op.values), -1)
        elif isinstance(op, MultiControlledX):
            self._check_qubits(op.qubits())
            bit = np.int64(1) << op.target
            self._permute(
                lambda i: np.where(_bit_mask(i, op.controls, op.values), i ^ bit, i)
            )
        elif isinstance(op, BasisPermutation):
            self._check_qubits(op.qubits(lay))
            self._permute(lambda i: op.map_indices(lay, i))
        elif isinstance(op, QFTBlock):
            self._dft_register(op.register, op.inverse_)
        elif isinstance(op, ControlledBlock):
            self._apply_controlled(op)
        else:
            raise TypeError(f"unsupported operation {op!r}")
        return self

    def _check_qubits(self, qubits):
        for q in qubits:
            if not 0 <= q < self.width:
                raise ValueError(f"invalid qubit {q} for a {self.width}-qubit layout")

    def _apply_controlled(self, op: ControlledBlock):
        op.qubits(self.layout)  # validates that the body leaves the control alone
        c = op.control
        if self.backend == "dense":
            on = ((np.arange(self.vec.size, dtype=np.int64) >> c) & 1).astype(bool)
            sub = PureState(self.layout, "dense")
            sub.vec = np.where(on, self.vec, 0)
            for _ in range(op.power):
                sub.apply(op.body)
            self.vec = np.where(on, 0, self.vec) + sub.vec
        else:
            on = ((self.idx >> c) & 1).astype(bool)
            sub = PureState(self.layout, "compressed")
            sub.idx, sub.amp = self.idx[on], self.amp[on]
            if len(sub.idx):
                for _ in range(op.power):
                    sub.apply(op.body)
            self._set_sparse(
                np.concatenate([self.idx[~on], sub.idx]), np.concatenate([self.amp[~on], sub.amp])
            )

    def run(self, circuit: Circuit) -> "PureState":
        return self.apply(circuit)

    # -- measurement -------------------------------------------------------------

    def probabilities(self, name: str) -> dict[int, float]:
        idx, amp = self.sparse()
        vals = self.layout.extract(idx, name)
        p = np.abs(amp) ** 2
        uniq, inv = np.unique(vals, return_inverse=True)
        tot = np.zeros(len(uniq))
        np.add.at(tot, inv, p)
        s = tot.sum()
        return {int(u): float(t / s) for u, t in zip(uniq, tot)}

    def fourier_marginal(self, name: str, inverse: bool = False) -> np.ndarray:
        """Exact distribution of ``name`` after a (inverse) QFT on it, state left untouched.

        Components are grouped by the values of all other registers; each group
        is transformed independently and the probabilities summed, so the
        post-QFT state never has to be stored.
        """
        reg = self.layout[name]
        n = 1 << reg.width
        if self.backend == "dense":
            st = self.copy()
            st._dft_register(name, inverse)
            full = np.zeros(n)
            np.add.at(full, self.layout.extract(np.arange(st.vec.size), name), np.abs(st.vec) ** 2)
            return full / full.sum()
        vals = (self.idx >> reg.offset) & reg.mask
        rest = self.idx & ~np.int64(reg.mask << reg.offset)
        groups, inv = np.unique(rest, return_inverse=True)
        chunk = max(1, COMPRESSED_MAX_STATES // n)
        total = np.zeros(n)
        for lo in range(0, len(groups), chunk):
            sel = (inv >= lo) & (inv < lo + chunk)
            table = np.zeros((min(chunk, len(groups) - lo), n), dtype=np.complex128)
            table[inv[sel] - lo, vals[sel]] = self.amp[sel]
            table = np.fft.fft(table, axis=1) if inverse else np.fft.ifft(table, axis=1)
            total += (np.abs(table) ** 2).sum(axis=0)
        return total / total.sum()

    def joint_probabilities(self, names) -> dict[tuple, float]:
        idx, amp = self.sparse()
        cols = np.stack([self.layout.extract(idx, n) for n in names], axis=1)
        p = np.abs(amp) ** 2
        uniq, inv = np.unique(cols, axis=0, return_inverse=True)
        tot = np.zeros(len(uniq))
        np.add.at(tot, inv.ravel(), p)
        s = tot.sum()
        return {tuple(int(v) for v in u): float(t / s) for u, t in zip(uniq, tot)}


def alloc_state(layout: RegisterLayout, values=None, backend: str = "dense") -> PureState:
    return PureState.basis(layout, values, backend)


def apply(state: PureState, gate) -> PureState:
    return state.apply(gate)


def hadamard_register(state: PureState, register: str) -> PureState:
    for q in state.layout[register].qubits:
        state.apply(Hadamard(q))
    return state


def qft(state: PureState, register: str) -> PureState:
    return state.apply(QFTBlock(register))


def iqft(state: PureState, register: str) -> PureState:
    return state.apply(QFTBlock(register, True))


def phase_flip_on_pattern(state: PureState, qubits, values) -> PureState:
    return state.apply(MultiControlledZ(tuple(qubits), tuple(values)))


def diffusion_ops(qubits) -> list:
    """Inversion about the mean on ``qubits`` (equal to ``I - 2|s><s|``, a global phase from ``2|s><s| - I``)."""
    qubits = tuple(qubits)
    ops: list = [Hadamard(q) for q in qubits]
    ops.append(MultiControlledZ(qubits, (0,) * len(qubits)))
    ops.extend(Hadamard(q) for q in qubits)
    return ops


def grover_diffusion(state: PureState, search_registers) -> PureState:
    qubits = state.layout.qubits(search_registers)
    for op in diffusion_ops(qubits):
        state.apply(op)
    return state


def measure(state: PureState, register: str, shots: int, seed: int | None = None) -> MeasurementRecord:
    """Sample a register's marginal distribution ``shots`` times."""
    if shots < 1:
        raise ValueError("shots must be at least 1")
    probs = state.probabilities(register)
    keys = np.array(list(probs))
    p = np.array(list(probs.values()))
    rng = np.random.default_rng(seed)
    draws = rng.choice(len(keys), size=shots, p=p / p.sum())
    hist = Counter(int(keys[d]) for d in draws)
    return MeasurementRecord(register, shots, dict(sorted(hist.items())), seed)


def measure_joint(state: PureState, registers, shots: int, seed: int | None = None):
    probs = state.joint_probabilities(registers)
    keys = list(probs)
    p = np.array([probs[k] for k in keys])
    rng = np.random.default_rng(seed)
    draws = rng.choice(len(keys), size=shots, p=p / p.sum())
    return Counter(keys[d] for d in draws)
