"""Quantum counting: phase estimation on the Grover operator."""
from __future__ import annotations

import math
from collections import Counter

import numpy as np

from ..dynamics import LatticeMapSpec
from ..oracles import Domain
from ..qsim import Circuit, ControlledBlock, PureState
from ..qsim.gates import FlipX, PhaseZ
from ..qsim.state import choose_backend
from .results import CountResult
from .search import GroverProblem, periodic_problem, return_problem

COUNT_REGISTER = "C"


def grover_operator(problem: GroverProblem) -> Circuit:
    """Oracle then diffusion, with a global sign so that ``G = (2|s><s| - I) O``.

    The phase estimation is sensitive to the global phase of ``G``; our
    diffusion equals ``I - 2|s><s|`` and is corrected by ``(XZ)^2 = -I`` on
    one search qubit.
    """
    G = problem.iteration()
    q = problem.search_qubits[0]
    G.extend([PhaseZ(q), FlipX(q), PhaseZ(q), FlipX(q)])
    return G


def counting_circuit(problem: GroverProblem) -> Circuit:
    layout = problem.layout
    creg = layout[COUNT_REGISTER]
    G = grover_operator(problem)
    circ = Circuit(layout, meta={"algorithm": "count", "condition": problem.description})
    circ.extend(problem.prepare_ops())
    circ.hadamard_register(COUNT_REGISTER)
    for j in range(creg.width):
        circ.append(ControlledBlock(G, creg.qubit(j), 1 << j))
    circ.iqft(COUNT_REGISTER)
    return circ


def estimate_from_index(S: int, c: int, index: int) -> tuple[float, tuple[float, float]]:
    """``S sin^2(pi k / 2^c)`` and the interval for a phase error of ``pi / 2^c``."""
    D = 1 << c
    k = min(index % D, D - index % D)
    phi = math.pi * k / D
    est = S * math.sin(phi) ** 2
    lo = S * math.sin(max(0.0, phi - math.pi / D)) ** 2
    hi = S * math.sin(min(math.pi / 2, phi + math.pi / D)) ** 2
    return est, (lo, hi)


def count_problem(
    problem: GroverProblem, c: int, shots: int = 256, seed: int | None = 0, backend: str = "auto"
) -> CountResult:
    """Run counting on a problem whose layout begins with the counting register."""
    if c < 3:
        raise ValueError("counting register needs at least 3 qubits")
    if COUNT_REGISTER not in problem.layout:
        problem = _with_counter(problem, c)
    circ = counting_circuit(problem)
    bk = choose_backend(backend, circ.layout.width)
    st = PureState.basis(circ.layout, None, bk)
    st.apply(circ)
    probs = st.probabilities(COUNT_REGISTER)
    keys = np.array(sorted(probs))
    rng = np.random.default_rng(seed)
    draws = rng.choice(keys, size=shots, p=np.array([probs[k] for k in keys]))
    raw = Counter(int(d) for d in draws)
    D = 1 << c
    folded = Counter()
    for k, v in raw.items():
        folded[min(k, D - k) % D] += v
    index = sorted(folded.items(), key=lambda kv: (-kv[1], kv[0]))[0][0]
    est, interval = estimate_from_index(problem.S, c, index)
    return CountResult(
        S=problem.S,
        c=c,
        observed_index=index,
        M_estimate=est,
        interval=interval,
        shots=shots,
        seed=seed,
        backend=bk,
        histogram=dict(sorted(raw.items())),
        gate_counts=circ.stats().to_record(),
        config={"condition": problem.description, "spec": problem.spec.config()},
    )


def _with_counter(problem: GroverProblem, c: int) -> GroverProblem:
    d = problem.description
    extra = [(COUNT_REGISTER, c)]
    if d["kind"] == "returns":
        return return_problem(problem.spec, Domain.parse(d["domain"]), d["t"], extra, d.get("explicit_gates", False))
    return periodic_problem(problem.spec, d["t"], d.get("line"), extra)


def quantum_count(
    spec: LatticeMapSpec,
    condition: dict,
    c: int = 5,
    seed: int | None = 0,
    shots: int = 256,
    backend: str = "auto",
) -> CountResult:
    """Estimate the number of marked points for ``{"kind": "returns", "domain", "t"}``
    or ``{"kind": "periodic", "t", "line"}``."""
    kind = condition.get("kind")
    extra = [(COUNT_REGISTER, c)]
    if kind == "returns":
        dom = condition["domain"]
        dom = Domain.parse(dom) if isinstance(dom, str) else dom
        problem = return_problem(spec, dom, int(condition["t"]), extra)
    elif kind == "periodic":
        problem = periodic_problem(spec, int(condition["t"]), condition.get("line"), extra)
    else:
        raise ValueError(f"unknown counting condition {kind!r}")
    return count_problem(problem, c, shots, seed, backend)
