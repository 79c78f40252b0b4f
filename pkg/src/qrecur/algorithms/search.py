"""Grover search for returning trajectories and periodic points."""
from __future__ import annotations

import math
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..dynamics import LatticeMapSpec, LatticePoint, involution_factors, iterate
from ..oracles import Domain, minimal_period
from ..qsim import (
    Circuit,
    PureState,
    RegisterLayout,
    diffusion_ops,
    map_step_block,
    translate_block,
    xor_copy_gates,
)
from ..qsim.gates import FlipX, Hadamard, MultiControlledZ
from ..qsim.state import choose_backend
from ..qsim.synthesis import twist_step_gates
from .results import SearchResult

SCHEDULE_GROWTH = 8 / 7
SCHEDULE_MAX_ROUNDS = 200


class SearchError(ValueError):
    pass


# ---------------------------------------------------------------------------
# iteration counts
# ---------------------------------------------------------------------------


def grover_angle(S: int, M: int) -> float:
    return math.asin(math.sqrt(M / S))


def optimal_iterations(S: int, M: int) -> int:
    """``round(pi / (4 theta) - 1/2)`` with ``sin(theta) = sqrt(M / S)``."""
    if M < 1:
        raise SearchError("M = 0 has no optimal iteration count; use the unknown-M schedule")
    if M > S:
        raise SearchError("M cannot exceed S")
    return max(0, round(math.pi / (4 * grover_angle(S, M)) - 0.5))


def predicted_success(S: int, M: int, k: int) -> float:
    if M == 0:
        return 0.0
    return math.sin((2 * k + 1) * grover_angle(S, M)) ** 2


# ---------------------------------------------------------------------------
# problem construction
# ---------------------------------------------------------------------------


@dataclass
class GroverProblem:
    """A phase oracle over a register layout plus the classical condition it encodes.

    ``decode`` maps basis indices to the lattice points they represent;
    ``condition`` is the vectorized classical check of those points.
    """

    name: str
    spec: LatticeMapSpec
    t: int
    layout: RegisterLayout
    registers: tuple[str, ...]
    search_qubits: tuple[int, ...]
    oracle: Circuit
    decode: Callable = field(repr=False)
    condition: Callable = field(repr=False)
    description: dict = field(default_factory=dict)

    @property
    def S(self) -> int:
        return 1 << len(self.search_qubits)

    @property
    def ancilla_mask(self) -> int:
        mask = 0
        for q in self.layout.qubits(self.registers):
            mask |= 1 << q
        for q in self.search_qubits:
            mask &= ~(1 << q)
        return mask

    def prepare_ops(self) -> list:
        return [Hadamard(q) for q in self.search_qubits]

    def diffusion_ops(self) -> list:
        return diffusion_ops(self.search_qubits)

    def iteration(self) -> Circuit:
        circ = self.oracle.copy()
        circ.extend(self.diffusion_ops())
        return circ

    def verify_point(self, point) -> bool:
        X, Y = point
        return bool(self.condition(np.array([X]), np.array([Y]))[0])


def _step_ops(spec: LatticeMapSpec, layout: RegisterLayout, registers, explicit: bool) -> list:
    if explicit:
        X, Y = registers
        work = layout.qubits("work") if "work" in layout else ()
        gates = twist_step_gates(spec, layout.qubits(X), layout.qubits(Y), work)
        if gates is not None:
            return gates
    return [map_step_block(spec, tuple(registers))]


def _high_qubits(layout, reg: str, p: int) -> tuple[int, ...]:
    return layout[reg].qubits[p:]


def return_problem(
    spec: LatticeMapSpec,
    domain: Domain,
    t: int,
    extra=(),
    explicit: bool = False,
) -> GroverProblem:
    """Oracle flipping domain points whose ``t``-th iterate lies in the domain.

    Search qubits are the low ``p`` bits of the coordinate registers; a
    point at ``offset + (u, v)`` is encoded as ``(u, v)``. The domain is moved
    to the corner by constant additions around the map steps, so the flip
    only needs the high bits of both registers to vanish.
    """
    N = spec.modulus
    n = spec.n_bits
    if t < 0:
        raise SearchError("t must be non-negative")
    if domain.P > N:
        raise SearchError("domain is larger than the lattice")
    p = domain.p
    regs = ("X", "Y", "work")
    layout = RegisterLayout(list(extra) + [("X", n), ("Y", n), ("work", max(1, n - 1))])
    off = tuple(v % N for v in domain.offset)
    shifted = off != (0, 0)
    pre = Circuit(layout)
    if shifted:
        pre.append(translate_block(("X", "Y"), off, N))
    for _ in range(t):
        pre.extend(_step_ops(spec, layout, ("X", "Y"), explicit))
    if shifted:
        pre.append(translate_block(("X", "Y"), (-off[0], -off[1]), N))
    high = _high_qubits(layout, "X", p) + _high_qubits(layout, "Y", p)
    oracle = pre.copy()
    oracle.append(MultiControlledZ(high, (0,) * len(high)))
    oracle.append(pre.inverse())
    search = layout["X"].qubits[:p] + layout["Y"].qubits[:p]

    def decode(idx):
        X = (layout.extract(idx, "X") + off[0]) % N
        Y = (layout.extract(idx, "Y") + off[1]) % N
        return X, Y

    def condition(X, Y):
        if t == 0:
            Xt, Yt = X, Y
        else:
            Xt, Yt = spec.apply_arrays(np.asarray(X, dtype=np.int64), np.asarray(Y, dtype=np.int64), t)
        return domain.contains(Xt, Yt, N) & domain.contains(np.asarray(X), np.asarray(Y), N)

    return GroverProblem(
        "returns", spec, t, layout, regs, search, oracle, decode, condition,
        {"kind": "returns", "domain": str(domain), "t": t, "explicit_gates": explicit},
    )


def periodic_problem(
    spec: LatticeMapSpec, t: int, line: str | None = None, extra=()
) -> GroverProblem:
    """Oracle flipping points with ``T^t p = p`` (over the lattice or one symmetry line)."""
    N = spec.modulus
    n = spec.n_bits
    if t < 1:
        raise SearchError("t must be at least 1")
    if N != 1 << n:
        raise SearchError("periodic search needs a power-of-two lattice for a uniform superposition")
    if line is None:
        regs = ("X0", "Y0", "X", "Y")
        layout = RegisterLayout(list(extra) + [(r, n) for r in regs])
        load = xor_copy_gates(layout, "X0", "X") + xor_copy_gates(layout, "Y0", "Y")
        search = layout.qubits(["X0", "Y0"])

        def decode(idx):
            return layout.extract(idx, "X0"), layout.extract(idx, "Y0")

        desc = {"kind": "periodic", "t": t, "line": None}
    else:
        pair = involution_factors(spec)
        y0 = pair.line_y(line)
        regs = ("S", "X", "Y")
        layout = RegisterLayout(list(extra) + [(r, n) for r in regs])
        load = xor_copy_gates(layout, "S", "X")
        load += [FlipX(layout["Y"].qubit(j)) for j in range(n) if y0 >> j & 1]
        search = layout.qubits("S")

        def decode(idx):
            X = layout.extract(idx, "S")
            return X, np.full(X.shape, y0, dtype=np.int64)

        desc = {"kind": "periodic", "t": t, "line": line, "line_y": y0}
    pre = Circuit(layout, load)
    for _ in range(t):
        pre.append(map_step_block(spec, ("X", "Y")))
    pre.extend(load)  # bitwise comparison with the retained initial point
    flip = layout.qubits(["X", "Y"])
    oracle = pre.copy()
    oracle.append(MultiControlledZ(flip, (0,) * len(flip)))
    oracle.append(pre.inverse())

    def condition(X, Y):
        X = np.asarray(X, dtype=np.int64)
        Y = np.asarray(Y, dtype=np.int64)
        Xt, Yt = spec.apply_arrays(X, Y, t)
        return (Xt == X) & (Yt == Y)

    return GroverProblem(
        "periodic" if line is None else "periodic-line",
        spec, t, layout, regs, search, oracle, decode, condition, desc,
    )


# ---------------------------------------------------------------------------
# simulation helpers
# ---------------------------------------------------------------------------


def _fresh_state(problem: GroverProblem, backend: str) -> PureState:
    st = PureState.basis(problem.layout, None, backend)
    for op in problem.prepare_ops():
        st.apply(op)
    return st


def ancilla_clean(problem: GroverProblem, state: PureState) -> bool:
    idx, _ = state.sparse()
    return not np.any(idx & np.int64(problem.ancilla_mask))


def oracle_marked_set(problem: GroverProblem, backend: str = "auto") -> tuple[frozenset, bool]:
    """Points whose amplitude sign the oracle flips, and whether all ancillas returned to zero."""
    st = _fresh_state(problem, choose_backend(backend, problem.layout.width))
    st.apply(problem.oracle)
    idx, amp = st.sparse()
    X, Y = problem.decode(idx)
    neg = amp.real < 0
    marked = frozenset(LatticePoint(int(x), int(y)) for x, y in zip(X[neg], Y[neg]))
    return marked, ancilla_clean(problem, st)


def run_grover(problem: GroverProblem, k: int, backend: str = "auto") -> PureState:
    st = _fresh_state(problem, choose_backend(backend, problem.layout.width))
    it = problem.iteration()
    for _ in range(k):
        st.apply(it)
    return st


def success_probability(problem: GroverProblem, state: PureState) -> float:
    """Exact probability that a measurement yields a point satisfying the classical condition."""
    idx, amp = state.sparse()
    X, Y = problem.decode(idx)
    ok = problem.condition(X, Y)
    return float(np.sum(np.abs(amp[ok]) ** 2))


def sample_points(problem: GroverProblem, state: PureState, shots: int, rng) -> Counter:
    idx, amp = state.sparse()
    p = np.abs(amp) ** 2
    draws = rng.choice(len(idx), size=shots, p=p / p.sum())
    X, Y = problem.decode(idx[draws])
    return Counter((int(x), int(y)) for x, y in zip(X, Y))


def _schedule(problem: GroverProblem, backend: str, rng) -> tuple[int | None, list]:
    """Exponentially growing random iteration counts until a sample verifies."""
    m = 1.0
    rounds = []
    budget = math.ceil(8 * math.sqrt(problem.S))
    spent = 0
    while len(rounds) < SCHEDULE_MAX_ROUNDS and spent <= budget:
        k = int(rng.integers(0, math.ceil(m)))
        st = run_grover(problem, k, backend)
        point = next(iter(sample_points(problem, st, 1, rng)))
        ok = problem.verify_point(point)
        rounds.append({"k": k, "sample": list(point), "verified": ok})
        spent += k
        if ok:
            return k, rounds
        m = min(SCHEDULE_GROWTH * m, math.sqrt(problem.S))
    return None, rounds


def _classical_check(problem: GroverProblem, point) -> bool:
    """Pointwise re-verification with the scalar iterator."""
    spec, t = problem.spec, problem.t
    q = iterate(spec, point, t) if t else LatticePoint(*point)
    if problem.name == "returns":
        dom = Domain.parse(problem.description["domain"])
        N = spec.modulus
        return bool(dom.contains(point[0], point[1], N) and dom.contains(q.X, q.Y, N))
    return q.as_tuple() == tuple(point)


def _search(
    problem: GroverProblem,
    k,
    shots: int,
    seed,
    backend: str,
    M: int | None,
    count: bool,
    c: int,
) -> SearchResult:
    from .counting import count_problem

    start = time.perf_counter()
    bk = choose_backend(backend, problem.layout.width)
    S = problem.S
    ss = np.random.SeedSequence(seed)
    sched_seq, count_seq, sample_seq = ss.spawn(3)
    flags: dict = {}
    diagnostics: dict = {}
    M_est = None
    if count:
        cres = count_problem(problem, c, seed=int(count_seq.generate_state(1)[0]), backend=backend)
        M_est = cres.M_estimate
        M = cres.M_rounded
        diagnostics["count"] = cres.to_record()
    if k == "auto" or k is None:
        if M is not None:
            if M == 0:
                flags["no_marked"] = True
                k = 0
            elif M == S:
                flags["all_marked"] = True
                k = 0
            else:
                k = optimal_iterations(S, M)
        else:
            k_found, rounds = _schedule(problem, bk, np.random.default_rng(sched_seq))
            diagnostics["schedule"] = rounds
            if k_found is None:
                flags["no_marked_found"] = True
                k = 0
            else:
                k = k_found
    k = int(k)
    if k < 0:
        raise SearchError("iteration count must be non-negative")
    state = run_grover(problem, k, bk)
    exact = success_probability(problem, state)
    flags["ancilla_clean"] = ancilla_clean(problem, state)
    hist = sample_points(problem, state, shots, np.random.default_rng(sample_seq))
    found = []
    hits = 0
    for point, freq in sorted(hist.items()):
        if not problem.verify_point(point) or not _classical_check(problem, point):
            continue
        hits += freq
        entry = {"point": list(point), "count": freq, "verified": True}
        if problem.name != "returns":
            entry["minimal_period"] = minimal_period(problem.spec, point, problem.t)
        found.append(entry)
    diagnostics["rejected_samples"] = shots - hits
    per_iter = problem.iteration().stats()
    prep = Circuit(problem.layout, problem.prepare_ops()).stats()
    gate_counts = {
        "per_iteration": per_iter.to_record(),
        "prepare": prep.to_record(),
        "total_elementary": prep.elementary + k * per_iter.elementary,
        "layout": [list(r) for r in problem.layout.spec()],
        "width": problem.layout.width,
        "search_qubits": len(problem.search_qubits),
    }
    diagnostics["wall_time"] = time.perf_counter() - start
    return SearchResult(
        search=problem.name,
        spec=problem.spec.config(),
        t=problem.t,
        condition=problem.description,
        found=found,
        shots=shots,
        hits=hits,
        k=k,
        predicted_success=None if M is None else predicted_success(S, M, k),
        exact_success=exact,
        gate_counts=gate_counts,
        seed=seed,
        backend=bk,
        M_estimate=M_est,
        flags=flags,
        diagnostics=diagnostics,
    )


def grover_return_search(
    spec: LatticeMapSpec,
    domain: Domain | str,
    t: int,
    k="auto",
    shots: int = 256,
    seed: int | None = 0,
    backend: str = "auto",
    M: int | None = None,
    count: bool = False,
    c: int = 5,
    explicit: bool = False,
) -> SearchResult:
    """Amplify domain points that return to the domain after ``t`` steps.

    ``k="auto"`` uses the optimal count when ``M`` is given (or estimated by
    quantum counting with ``count=True``) and the randomized growing
    schedule otherwise.
    """
    if isinstance(domain, str):
        domain = Domain.parse(domain)
    problem = return_problem(spec, domain, t, explicit=explicit)
    return _search(problem, k, shots, seed, backend, M, count, c)


def grover_periodic_search(
    spec: LatticeMapSpec,
    t: int,
    k="auto",
    shots: int = 256,
    seed: int | None = 0,
    backend: str = "auto",
    line: str | None = None,
    M: int | None = None,
    count: bool = False,
    c: int = 5,
) -> SearchResult:
    """Amplify points with period dividing ``t``, optionally restricted to a symmetry line."""
    problem = periodic_problem(spec, t, line)
    return _search(problem, k, shots, seed, backend, M, count, c)
