"""Acceptance criteria, each at its stated tolerance.

The outcome of every criterion is printed as one ``CRITERION n PASS/FAIL``
line in the pytest terminal summary. Run alone with
``pytest -v tests/test_acceptance.py`` or ``python3 tests/test_acceptance.py``.
"""
import math
import time

import numpy as np
import pytest

from qrecur.algorithms import (
    grover_periodic_search,
    grover_return_search,
    lattice_period_distribution,
    lattice_period_gate_count,
    oracle_marked_set,
    periodic_problem,
    q_lattice_period,
    quantum_count,
    return_problem,
)
from qrecur.dynamics import (
    CAT_MATRIX,
    ContinuousTwistMap,
    TorusPoint,
    all_points,
    cat_map,
    fast_power,
    lyapunov_estimate,
    newton_refine_periodic,
    sawtooth_map,
    standard_map,
)
from qrecur.oracles import Domain, alpha_bruteforce, alpha_composite, alpha_percival
from qrecur.qsim import (
    Circuit,
    ControlledPhase,
    FlipX,
    Hadamard,
    MultiControlledX,
    MultiControlledZ,
    PureState,
    QFTBlock,
    RegisterLayout,
    Swap,
    controlled_modmul_block,
    map_step_block,
    matrix_step_block,
    translate_block,
)
from qrecur.qsim.costs import qft_cost

SIX = {(0, 0), (0, 1), (0, 2), (0, 3), (1, 0), (1, 1)}


def _primes(limit):
    return [p for p in range(2, limit + 1) if all(p % q for q in range(2, int(p**0.5) + 1))]


@pytest.mark.criterion(1, "classical alpha(g) oracles agree")
def test_criterion_1_alpha_oracles(detail):
    start = time.perf_counter()
    brute = {g: alpha_bruteforce(CAT_MATRIX, g).alpha for g in range(2, 257)}
    assert all(alpha_composite(CAT_MATRIX, g).alpha == brute[g] for g in brute)
    for p in _primes(997):
        if p != 5:
            a = brute[p] if p <= 256 else alpha_bruteforce(CAT_MATRIX, p).alpha
            assert alpha_percival(CAT_MATRIX, p).alpha == a
    assert (brute[2], brute[3], brute[5], brute[10]) == (3, 4, 10, 30)
    elapsed = time.perf_counter() - start
    detail(f"{elapsed:.2f} s")
    assert elapsed < 10


@pytest.mark.criterion(2, "quantum alpha(g) equals brute force for 2 <= g <= 64")
def test_criterion_2_quantum_alpha(detail):
    start = time.perf_counter()
    bad = []
    for g in range(2, 65):
        res = q_lattice_period(CAT_MATRIX, g, None, "compressed", 16, seed=g)
        if not (res.verified and res.period == alpha_bruteforce(CAT_MATRIX, g).alpha):
            bad.append(g)
    elapsed = time.perf_counter() - start
    detail(f"{63 - len(bad)}/63 moduli, {elapsed:.1f} s")
    assert not bad, f"mismatched moduli {bad}"
    assert elapsed < 120


@pytest.mark.criterion(3, "QFT peaks {0,5,11} carry >= 85% for g=2, p=4")
def test_criterion_3_qft_peaks(detail):
    dense = lattice_period_distribution(CAT_MATRIX, 2, 4, "dense")
    probs = lattice_period_distribution(CAT_MATRIX, 2, 4, "compressed")
    assert np.max(np.abs(dense - probs)) < 1e-12
    mass = float(probs[[0, 5, 11]].sum())
    detail(f"mass {mass:.5f}")
    assert set(np.argsort(probs)[-3:]) == {0, 5, 11}
    assert mass >= 0.85, f"peak mass {mass:.5f} below 0.85"


@pytest.mark.criterion(4, "Grover returns on cat N=8, 4x4, t=1")
def test_criterion_4_grover_returns(detail):
    spec = cat_map(8)
    marked, clean = oracle_marked_set(return_problem(spec, Domain(4), 1))
    assert clean and {p.as_tuple() for p in marked} == SIX
    res = grover_return_search(spec, "4x4", 1, k=1, shots=1000, seed=0)
    target = math.sin(3 * math.asin(math.sqrt(6 / 16))) ** 2
    assert abs(res.exact_success - target) < 1e-9
    p = res.exact_success
    sigma = math.sqrt(1000 * p * (1 - p))
    detail(f"exact {p:.9f}, hits {res.hits}/1000, expected {1000 * p:.1f} +- {3 * sigma:.1f}")
    assert abs(res.hits - 1000 * p) <= 3 * sigma
    assert res.points <= SIX and res.verified


@pytest.mark.criterion(5, "sawtooth K=1/2, N=8 instance on 8 qubits, <= 80 gates per iteration")
def test_criterion_5_sawtooth_instance(detail):
    res = grover_return_search(sawtooth_map("1/2", 8), "4x4", 1, shots=64, seed=0)
    width = res.gate_counts["width"]
    per_iter = res.gate_counts["per_iteration"]
    detail(f"width {width}, {per_iter['elementary']} elementary gates, {per_iter['total']} ops")
    assert width == 8
    assert per_iter["elementary"] <= 80
    assert res.verified


@pytest.mark.criterion(6, "Grover periodic points on cat N=8, t=1")
def test_criterion_6_grover_periodic(detail):
    spec = cat_map(8)
    marked, clean = oracle_marked_set(periodic_problem(spec, 1))
    assert clean and {p.as_tuple() for p in marked} == {(0, 0)}
    res = grover_periodic_search(spec, 1, k=6, shots=100, seed=0)
    target = math.sin(13 * math.asin(1 / 8)) ** 2
    detail(f"exact {res.exact_success:.9f}, closed form {target:.9f}")
    assert abs(res.exact_success - target) < 1e-9
    assert res.found and res.verified and res.points == {(0, 0)}


@pytest.mark.criterion(7, "quantum counting estimates M=6 with c=5")
def test_criterion_7_counting(detail):
    res = quantum_count(cat_map(8), {"kind": "returns", "domain": "4x4", "t": 1}, c=5)
    lo, hi = res.interval
    detail(f"index {res.observed_index}, estimate {res.M_estimate:.4f}, interval [{lo:.3f}, {hi:.3f}]")
    assert res.M_rounded == 6
    assert lo <= 6 <= hi


@pytest.mark.criterion(8, "gate-count scaling: alpha circuits ~ n_q^3, QFT exact")
def test_criterion_8_scaling(detail):
    nq = list(range(2, 7))
    counts = [lattice_period_gate_count((1 << n) - 1)["elementary"] for n in nq]
    slope = float(np.polyfit(np.log(nq), np.log(counts), 1)[0])
    for w in range(2, 11):
        assert Circuit(RegisterLayout([("r", w)])).qft("r").stats().elementary == w * (w + 1) // 2 + w // 2 == qft_cost(w)
    detail(f"exponent {slope:.3f}")
    assert 2.5 <= slope <= 3.5


def _random_ops(layout, rng, n_ops):
    W = layout.width
    ops = []
    for _ in range(n_ops):
        q = [int(v) for v in rng.permutation(W)[:3]]
        kind = int(rng.integers(0, 7))
        if kind == 0:
            ops.append(Hadamard(q[0]))
        elif kind == 1:
            ops.append(FlipX(q[0]))
        elif kind == 2:
            ops.append(ControlledPhase(float(rng.uniform(-3, 3)), q[0], q[1]))
        elif kind == 3:
            ops.append(Swap(q[0], q[1]))
        elif kind == 4:
            ops.append(MultiControlledZ((q[0], q[1]), (1, 0)))
        elif kind == 5:
            ops.append(MultiControlledX((q[0], q[1]), (1, 1), q[2]))
        else:
            ops.append(QFTBlock(layout.names[0], bool(rng.integers(0, 2))))
    return ops


@pytest.mark.criterion(9, "property suites: norm, bijectivity, uncompute, qft/iqft, backends, fast_iterate")
def test_criterion_9_properties(detail):
    rng = np.random.default_rng(9)
    # norm conservation and backend agreement at width 14
    lay = RegisterLayout([("a", 4), ("X", 3), ("Y", 3), ("b", 4)])
    worst_norm, worst_diff = 0.0, 0.0
    for trial in range(4):
        ops = [Hadamard(q) for q in lay.qubits("a")]
        ops += [map_step_block(cat_map(8), ("X", "Y"), 1 << i, lay["a"].qubit(i)) for i in range(4)]
        ops += _random_ops(lay, rng, 40)
        init = {"X": int(rng.integers(8)), "Y": int(rng.integers(8)), "b": int(rng.integers(16))}
        d = PureState.basis(lay, init, "dense")
        c = PureState.basis(lay, init, "compressed")
        for op in ops:
            d.apply(op)
            c.apply(op)
            worst_norm = max(worst_norm, abs(d.norm() - 1), abs(c.norm() - 1))
        worst_diff = max(worst_diff, float(np.max(np.abs(d.to_dense() - c.to_dense()))))
    assert worst_norm < 1e-12 and worst_diff < 1e-10

    # qft . iqft on every width up to 10
    for w in range(1, 11):
        vec = rng.normal(size=2**w) + 1j * rng.normal(size=2**w)
        vec /= np.linalg.norm(vec)
        for bk in ("dense", "compressed"):
            s = PureState.from_amplitudes(RegisterLayout([("r", w)]), dict(enumerate(vec)), bk)
            s.apply(QFTBlock("r")).apply(QFTBlock("r", True))
            assert np.max(np.abs(s.to_dense() - vec)) < 1e-10

    # exhaustive bijectivity of permutation blocks (subspaces of at most 12 qubits)
    blay = RegisterLayout([("c", 1), ("X", 3), ("Y", 3)] + [(r, 2) for r in ("A", "B", "C", "D", "W1", "W2")])
    blocks = [
        map_step_block(cat_map(8), ("X", "Y"), 1, 0),
        map_step_block(cat_map(7), ("X", "Y"), 9),
        map_step_block(sawtooth_map("1/2", 8), ("X", "Y")),
        map_step_block(standard_map(1, 8), ("X", "Y")),
        translate_block(("X", "Y"), (5, 2), 8, 0),
        controlled_modmul_block("X", 3, 7, 0),
    ]
    blocks += matrix_step_block(CAT_MATRIX.entries, 3, ("A", "B", "C", "D"), ("W1", "W2"), 0)
    for blk in blocks:
        blk.verify_bijection(blay)
        blk.inverse().verify_bijection(blay)

    # uncompute-to-zero on every oracle construction
    n_oracles = 0
    for N in (4, 8, 16):
        for t in range(1, 9):
            for prob in (return_problem(cat_map(N), Domain(2), t), periodic_problem(cat_map(N), t)):
                marked, clean = oracle_marked_set(prob)
                assert clean
                n_oracles += 1
    for spec in (sawtooth_map("1/2", 8), standard_map(1, 8)):
        for prob in (
            return_problem(spec, Domain(4), 2),
            return_problem(sawtooth_map("1/2", 8), Domain(4), 2, explicit=True),
            periodic_problem(spec, 2),
            periodic_problem(spec, 2, "I1:Y=0"),
        ):
            assert oracle_marked_set(prob)[1]
            n_oracles += 1

    # fast_iterate against step-by-step iteration, every modulus up to 32, t up to 2048
    checkpoints = {1, 2, 3, 5, 8, 64, 100, 511, 1000, 1024, 2047, 2048}
    for g in range(2, 33):
        spec = cat_map(g)
        X, Y = all_points(g)
        X0, Y0 = X.copy(), Y.copy()
        for t in range(1, 2049):
            X, Y = spec._apply_arrays(X, Y)
            if t in checkpoints:
                FX, FY = fast_power(spec, t)._apply_arrays(X0, Y0)
                assert np.array_equal(FX, X) and np.array_equal(FY, Y)
    detail(f"norm err {worst_norm:.1e}, backend diff {worst_diff:.1e}, {len(blocks)} blocks, {n_oracles} oracles")


@pytest.mark.criterion(10, "dynamics anchors: Lyapunov exponent and Newton refinement")
def test_criterion_10_dynamics(detail):
    h = lyapunov_estimate(CAT_MATRIX)
    assert abs(h - 0.9624) <= 1e-3
    worst = 0.0
    fmap = ContinuousTwistMap("standard", 1.0)
    radians = 1e-3 / (2 * math.pi)  # 10^-3 in angle units, expressed as a fraction of a turn
    for dx, dy in [(radians, 0), (0, radians), (-radians, radians), (radians, -radians), (1e-3, 0), (0, -1e-3)]:
        res = newton_refine_periodic(fmap, [TorusPoint(0.5 + dx, dy)], 1)
        assert res.converged
        worst = max(worst, res.residual)
        x, y = res.orbit[0].x, res.orbit[0].y
        assert abs(x - 0.5) < 1e-10 and min(y, 1 - y) < 1e-10
    detail(f"h = {h:.6f}, worst Newton residual {worst:.1e}")
    assert worst < 1e-12


if __name__ == "__main__":
    raise SystemExit(pytest.main(["-v", __file__]))
