"""Quantum period finding: lattice period of a matrix and periods of single points."""
from __future__ import annotations

import math
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..dynamics import (
    CAT_MATRIX,
    LatticeMapSpec,
    UnimodularMatrix2,
    UnsupportedMapError,
    fast_iterate,
    mat_pow_mod,
    precompute_squarings,
)
from ..oracles import cf_convergents, factorize
from ..qsim import Circuit, PureState, RegisterLayout, map_step_block, matrix_step_block
from ..qsim.state import choose_backend
from .results import PeriodResult

MULTIPLE_BOUND = 8
LATTICE_REGISTERS = ("A", "B", "C", "D")
WORK_REGISTERS = ("W1", "W2", "W3", "W4")


def default_time_width(g: int) -> int:
    """``2 ceil(log2 g) + 1`` time qubits."""
    return 2 * math.ceil(math.log2(g)) + 1


@dataclass
class Extraction:
    period: int | None
    outcome: int | None = None
    rejected: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.period is not None


def _reduce_order(r: int, verifier: Callable[[int], bool]) -> int:
    """Smallest divisor of a verified ``r`` that still verifies (order semantics)."""
    for q in sorted(factorize(r)):
        while r % q == 0 and verifier(r // q):
            r //= q
    return r


def extract_period(
    outcomes, p: int, verifier: Callable[[int], bool], bound: int = MULTIPLE_BOUND
) -> Extraction:
    """Classical post-processing of measured time-register values.

    ``outcomes`` is an iterable of values or a histogram; outcomes are tried
    in order of decreasing frequency. For each, the convergent denominators
    of ``k / 2**p`` and their multiples up to ``bound`` are offered to
    ``verifier``. The zero-numerator convergent only offers 1.
    """
    hist = Counter(outcomes)
    if not hist:
        raise ValueError("no outcomes to process")
    D = 1 << p
    rejected: list = []
    tried: set = set()
    for k, _ in sorted(hist.items(), key=lambda kv: (-kv[1], kv[0])):
        for conv in cf_convergents(int(k) % D, D):
            q = conv.denominator
            mults = (1,) if conv.numerator == 0 else range(1, bound + 1)
            for m in mults:
                r = q * m
                if r in tried:
                    continue
                tried.add(r)
                if verifier(r):
                    return Extraction(_reduce_order(r, verifier), int(k), rejected)
                rejected.append(r)
    return Extraction(None, None, rejected)


# ---------------------------------------------------------------------------
# lattice period alpha(g)
# ---------------------------------------------------------------------------


def lattice_period_layout(g: int, p: int) -> RegisterLayout:
    n = max(1, (g - 1).bit_length())
    return RegisterLayout([("t", p)] + [(r, n) for r in LATTICE_REGISTERS + WORK_REGISTERS])


def lattice_period_circuit(matrix: UnimodularMatrix2, g: int, p: int) -> Circuit:
    """Hadamards on ``t``, one controlled matrix step per time qubit, QFT on ``t``.

    The initial state (identity matrix in the value registers) is prepared
    separately by :func:`lattice_period_initial_values`.
    """
    if g < 2:
        raise ValueError("modulus must be at least 2")
    if p < 1:
        raise ValueError("time register needs at least one qubit")
    layout = lattice_period_layout(g, p)
    L = matrix.reduce(g)
    mats = [L] + (precompute_squarings(L, g, p - 1) if p > 1 else [])
    circ = Circuit(layout, meta={"algorithm": "qalpha", "g": g, "p": p, "matrix": list(matrix.entries)})
    circ.hadamard_register("t")
    for i, Li in enumerate(mats[:p]):
        circ.extend(
            matrix_step_block(Li.entries, g, LATTICE_REGISTERS, WORK_REGISTERS[:2], layout["t"].qubit(i))
        )
    circ.qft("t")
    return circ


def lattice_period_initial_values() -> dict:
    return {"t": 0, "A": 1, "B": 0, "C": 0, "D": 1}


def _run_until_qft(circ: Circuit, init: dict, backend: str) -> tuple[PureState, str]:
    """Simulate everything except the final QFT; return the state."""
    bk = choose_backend(backend, circ.layout.width)
    state = PureState.basis(circ.layout, init, bk)
    for op in circ.ops[:-1]:
        state.apply(op)
    return state, bk


def _sample(probs: np.ndarray, shots: int, seed) -> dict:
    rng = np.random.default_rng(seed)
    draws = rng.choice(len(probs), size=shots, p=probs)
    return dict(sorted(Counter(int(d) for d in draws).items()))


def lattice_period_distribution(
    matrix: UnimodularMatrix2, g: int, p: int, backend: str = "compressed"
) -> np.ndarray:
    """Exact time-register distribution at the end of the circuit."""
    circ = lattice_period_circuit(matrix, g, p)
    state, _ = _run_until_qft(circ, lattice_period_initial_values(), backend)
    return state.fourier_marginal("t")


def q_lattice_period(
    matrix: UnimodularMatrix2 = CAT_MATRIX,
    g: int = 2,
    p: int | None = None,
    backend: str = "compressed",
    shots: int = 16,
    seed: int | None = 0,
    bound: int = MULTIPLE_BOUND,
) -> PeriodResult:
    """Order of ``matrix`` modulo ``g`` by simulated quantum period finding."""
    start = time.perf_counter()
    p = default_time_width(g) if p is None else p
    circ = lattice_period_circuit(matrix, g, p)
    state, bk = _run_until_qft(circ, lattice_period_initial_values(), backend)
    regs = LATTICE_REGISTERS + WORK_REGISTERS
    workspace_clean = state.registers_clear(WORK_REGISTERS)
    # the final QFT acts on t alone, so the t marginal is computed group-wise
    probs = state.fourier_marginal("t")
    outcomes = _sample(probs, shots, seed)
    L = matrix.reduce(g)

    def verifier(r: int) -> bool:
        return r >= 1 and mat_pow_mod(L, r, g).is_identity()

    ext = extract_period(outcomes, p, verifier, bound)
    stats = circ.stats().to_record()
    return PeriodResult(
        target={"g": g, "matrix": list(matrix.entries)},
        p=p,
        outcomes=outcomes,
        period=ext.period,
        verified=ext.ok and workspace_clean,
        shots=shots,
        gate_counts=stats,
        seed=seed,
        backend=bk,
        config={"algorithm": "qalpha", "g": g, "p": p, "bound": bound, "registers": list(regs)},
        diagnostics={
            "accepted_outcome": ext.outcome,
            "rejected_candidates": sorted(set(ext.rejected)),
            "workspace_clean": workspace_clean,
            "basis_states_before_qft": state.n_nonzero,
            "wall_time": time.perf_counter() - start,
        },
    )


def lattice_period_gate_count(g: int, p: int | None = None, matrix: UnimodularMatrix2 = CAT_MATRIX) -> dict:
    p = default_time_width(g) if p is None else p
    return lattice_period_circuit(matrix, g, p).stats().to_record()


# ---------------------------------------------------------------------------
# single-point periods
# ---------------------------------------------------------------------------


def point_period_circuit(spec: LatticeMapSpec, point, p: int) -> Circuit:
    if not spec.supports_fast_iterate:
        raise UnsupportedMapError(
            "point period finding needs every power L^(2^k) to be cheap to apply; "
            f"{spec.label} maps only allow step-by-step iteration"
        )
    n = spec.n_bits
    layout = RegisterLayout([("t", p), ("X", n), ("Y", n)])
    circ = Circuit(layout, meta={"algorithm": "qperiod", "spec": spec.config(), "p": p})
    circ.hadamard_register("t")
    for i in range(p):
        circ.append(map_step_block(spec, ("X", "Y"), 1 << i, layout["t"].qubit(i)))
    circ.qft("t")
    return circ


def q_point_period(
    spec: LatticeMapSpec,
    point,
    p: int | None = None,
    backend: str = "auto",
    shots: int = 16,
    seed: int | None = 0,
    bound: int = MULTIPLE_BOUND,
) -> PeriodResult:
    """Period of one lattice point under a cat/affine map."""
    start = time.perf_counter()
    X0, Y0 = (int(v) for v in (point.as_tuple() if hasattr(point, "as_tuple") else point))
    p = default_time_width(spec.modulus) if p is None else p
    circ = point_period_circuit(spec, (X0, Y0), p)
    state, bk = _run_until_qft(circ, {"t": 0, "X": X0 % spec.modulus, "Y": Y0 % spec.modulus}, backend)
    probs = state.fourier_marginal("t")
    outcomes = _sample(probs, shots, seed)
    origin = (X0 % spec.modulus, Y0 % spec.modulus)

    def verifier(r: int) -> bool:
        return r >= 1 and fast_iterate(spec, origin, r).as_tuple() == origin

    ext = extract_period(outcomes, p, verifier, bound)
    return PeriodResult(
        target={"point": list(origin), "spec": spec.config()},
        p=p,
        outcomes=outcomes,
        period=ext.period,
        verified=ext.ok,
        shots=shots,
        gate_counts=circ.stats().to_record(),
        seed=seed,
        backend=bk,
        config={"algorithm": "qperiod", "p": p, "bound": bound},
        diagnostics={
            "accepted_outcome": ext.outcome,
            "rejected_candidates": sorted(set(ext.rejected)),
            "wall_time": time.perf_counter() - start,
        },
    )
