import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qrecur.dynamics import (
    CAT_MATRIX,
    CONTINUOUS,
    ContinuousTwistMap,
    LatticeError,
    LatticePoint,
    NewtonPreconditionError,
    TorusPoint,
    UnimodularMatrix2,
    UnsupportedMapError,
    affine_map,
    all_points,
    apply_map,
    cat_map,
    fast_iterate,
    fast_power,
    involution_factors,
    invert_map,
    iterate,
    lyapunov_estimate,
    mat_mul_mod,
    mat_pow_mod,
    newton_refine_periodic,
    precompute_squarings,
    sawtooth_map,
    spec_from_config,
    standard_map,
)
from qrecur.oracles import point_period_bruteforce

L = CAT_MATRIX


def M(a, b, c, d):
    return UnimodularMatrix2(a, b, c, d)


def det_mod(A, g):
    a, b, c, d = A.entries
    return (a * d - b * c) % g


# -- matrices -----------------------------------------------------------------


def test_matrix_rejects_bad_determinant():
    with pytest.raises(ValueError):
        UnimodularMatrix2(2, 0, 0, 1)


def test_mat_mul_examples():
    assert mat_mul_mod(L, L, 5).entries == (0, 3, 3, 2)
    assert mat_mul_mod(UnimodularMatrix2.identity(), L, 7).entries == (2, 1, 1, 1)
    assert mat_mul_mod(L, L, 1).entries == (0, 0, 0, 0)
    with pytest.raises(ValueError):
        mat_mul_mod(L, L, 0)


def test_mat_pow_examples():
    assert mat_pow_mod(L, 3, 4).is_identity()
    assert mat_pow_mod(L, 0, 9).is_identity()
    assert mat_pow_mod(L, 10, 5).is_identity()
    assert not mat_pow_mod(L, 5, 5).is_identity()
    # L^5 = -I mod 5
    assert mat_pow_mod(L, 5, 5).entries == (4, 0, 0, 4)


def test_precompute_squarings():
    # L^8 = (1597 987; 987 610) over the integers
    assert [A.entries for A in precompute_squarings(L, 5, 3)] == [(0, 3, 3, 2), (4, 1, 1, 3), (2, 2, 2, 0)]
    assert [A.entries for A in precompute_squarings(L, 2, 2)] == [(1, 1, 1, 0), (0, 1, 1, 1)]
    assert all(A.is_identity() for A in precompute_squarings(UnimodularMatrix2.identity(), 7, 4))


def test_fibonacci_structure():
    fib = [0, 1]
    for _ in range(70):
        fib.append(fib[-1] + fib[-2])
    P = UnimodularMatrix2.identity()
    for t in range(1, 31):
        P = L @ P
        assert P.entries == (fib[2 * t + 1], fib[2 * t], fib[2 * t], fib[2 * t - 1])


@settings(max_examples=60, deadline=None)
@given(
    st.integers(2, 200),
    st.integers(0, 10_000),
    st.sampled_from([L, M(1, 1, 0, 1), M(3, 2, 1, 1), M(5, 2, 2, 1)]),
)
def test_powers_keep_determinant(g, t, A):
    P = mat_pow_mod(A, t, g)
    assert det_mod(P, g) == 1 % g
    # agrees with square-and-multiply-free reference on small exponents
    if t < 60:
        ref = UnimodularMatrix2.identity()
        for _ in range(t):
            ref = mat_mul_mod(ref, A, g)
        assert ref.entries == P.entries


def test_lyapunov():
    assert lyapunov_estimate(L) == pytest.approx(math.log((3 + math.sqrt(5)) / 2), abs=1e-12)
    assert abs(lyapunov_estimate(L) - 0.9624) < 1e-3
    assert lyapunov_estimate(L @ L) == pytest.approx(2 * lyapunov_estimate(L), rel=1e-12)
    with pytest.raises(ValueError):
        lyapunov_estimate(M(1, 1, 0, 1))


# -- lattice maps -------------------------------------------------------------


def test_cat_step_and_inverse():
    spec = cat_map(8)
    assert apply_map(spec, (1, 0)) == LatticePoint(2, 1)
    assert invert_map(spec, (2, 1)) == LatticePoint(1, 0)
    assert iterate(spec, (1, 0), 6) == LatticePoint(1, 0)
    assert iterate(spec, (3, 5), 0) == LatticePoint(3, 5)
    for p in [(0, 0), (0, 1), (1, 0), (1, 1)]:
        assert iterate(cat_map(2), p, 3) == LatticePoint(*p)
    with pytest.raises(LatticeError):
        apply_map(spec, (8, 0))


def test_sawtooth_printed_formula():
    spec = sawtooth_map(1, 8)
    # Y' = floor(8 * 1 * (0 - pi) / (2 pi)) = -4 = 4 mod 8, X' = 4
    assert apply_map(spec, (0, 0)) == LatticePoint(4, 4)
    assert invert_map(spec, (4, 4)) == LatticePoint(0, 0)
    assert spec.kind == "affine"  # integer K is canonicalized
    assert iterate(spec, (0, 0), 2) == fast_iterate(spec, (0, 0), 2)


def test_sawtooth_half_kick_table():
    spec = sawtooth_map("1/2", 8)
    # floor((X - 4) / 2) for X = 0..7
    assert list(spec.kick_table % 8) == [x % 8 for x in (-2, -2, -1, -1, 0, 0, 1, 1)]


def test_continuous_convention_flips_kick():
    a = sawtooth_map("1/2", 16)
    b = sawtooth_map("1/2", 16, CONTINUOUS)
    for X in range(16):
        ka = int(a.kick_table[X])
        kb = int(b.kick_table[X])
        exact_a = Fraction(X - 8, 2)
        assert ka == math.floor(exact_a)
        assert kb == math.floor(-exact_a)


def test_standard_map_kicks_are_floors():
    spec = standard_map("3/2", 32)
    for X in range(32):
        val = 32 * 1.5 * (-math.sin(2 * math.pi * X / 32)) / (2 * math.pi)
        if abs(val - round(val)) > 1e-9:
            assert spec.kick_table[X] == math.floor(val)


def test_twist_needs_power_of_two():
    with pytest.raises(LatticeError):
        sawtooth_map("1/2", 12)
    with pytest.raises(TypeError):
        standard_map(0.5, 8)


SPECS = [
    cat_map(7),
    cat_map(8),
    cat_map(12),
    affine_map(9, M(3, 2, 1, 1), (2, 5)),
    sawtooth_map(1, 16),
    sawtooth_map(2, 8),
    sawtooth_map("1/2", 8),
    sawtooth_map("3/4", 16),
    standard_map(1, 16),
    standard_map("1/3", 32, CONTINUOUS),
]


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: f"{s.label}-{s.modulus}-{s.K}")
def test_bijection_and_inverse(spec):
    X, Y = all_points(spec.modulus)
    X2, Y2 = spec.apply_arrays(X, Y)
    codes = X2 * spec.modulus + Y2
    assert len(np.unique(codes)) == spec.modulus**2
    Xb, Yb = spec.apply_arrays(X2, Y2, -1)
    assert np.array_equal(Xb, X) and np.array_equal(Yb, Y)


def test_bijection_up_to_64():
    for spec in (cat_map(64), sawtooth_map("1/2", 64), standard_map("5/2", 64), cat_map(63)):
        X, Y = all_points(spec.modulus)
        X2, Y2 = spec.apply_arrays(X, Y)
        assert len(np.unique(X2 * spec.modulus + Y2)) == spec.modulus**2


def test_spec_config_round_trip():
    for spec in SPECS:
        again = spec_from_config(spec.to_json())
        X, Y = all_points(spec.modulus)
        assert all(np.array_equal(a, b) for a, b in zip(spec.apply_arrays(X, Y), again.apply_arrays(X, Y)))


# -- fast iteration -------------------------------------------------------------


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 32), st.integers(0, 2048), st.integers(0, 3))
def test_fast_iterate_matches_iterate(m, t, which):
    spec = [cat_map(m), affine_map(m, M(3, 2, 1, 1), (1, m - 1)), affine_map(m, M(1, 1, 0, 1), (0, 1)),
            cat_map(m, M(5, 2, 2, 1))][which]
    X, Y = all_points(m)
    fast = fast_power(spec, t)._apply_arrays(X, Y) if t else (X, Y)
    Xs, Ys = X.copy(), Y.copy()
    for _ in range(t):
        Xs, Ys = spec._apply_arrays(Xs, Ys)
    assert np.array_equal(fast[0], Xs) and np.array_equal(fast[1], Ys)


def test_fast_iterate_huge_exponent():
    spec = cat_map(8)
    assert fast_iterate(spec, (1, 0), 2**40 + 6) == iterate(spec, (1, 0), (2**40 + 6) % 6)
    assert fast_iterate(spec, (1, 0), 6 * 2**40) == LatticePoint(1, 0)
    assert fast_iterate(spec, (3, 2), 1) == apply_map(spec, (3, 2))


def test_fast_iterate_rejects_noninteger_twist():
    with pytest.raises(UnsupportedMapError):
        fast_iterate(sawtooth_map("1/2", 8), (0, 0), 3)
    with pytest.raises(UnsupportedMapError):
        fast_iterate(standard_map(1, 8), (0, 0), 3)


# -- involutions ----------------------------------------------------------------


@pytest.mark.parametrize(
    "spec",
    [sawtooth_map(1, 8), sawtooth_map("1/2", 8), sawtooth_map("3/2", 16), standard_map(1, 16),
     standard_map("1/2", 4, CONTINUOUS)],
    ids=lambda s: f"{s.label}-{s.modulus}-{s.K}-{s.sign_convention}",
)
def test_involutions(spec):
    pair = involution_factors(spec)
    X, Y = all_points(spec.modulus)
    for inv in (pair.I1, pair.I2):
        a, b = inv(*inv(X, Y))
        assert np.array_equal(a, X) and np.array_equal(b, Y)
    a, b = pair.I1(*pair.I2(X, Y))
    c, d = spec.apply_arrays(X, Y)
    assert np.array_equal(a, c) and np.array_equal(b, d)
    for line_id, pts in pair.fixed_lines.items():
        inv = pair.I1 if line_id.startswith("I1") else pair.I2
        a, b = inv(pts[:, 0], pts[:, 1])
        assert np.array_equal(a, pts[:, 0]) and np.array_equal(b, pts[:, 1])


def test_involution_fixed_set_is_small():
    spec = sawtooth_map(1, 8)
    pair = involution_factors(spec)
    X, Y = all_points(8)
    a, b = pair.I1(X, Y)
    fixed = int(np.sum((a == X) & (b == Y)))
    assert fixed == 8  # the momentum-zero line
    assert sum(len(v) for k, v in pair.fixed_lines.items() if k.startswith("I1")) == fixed


def test_symmetry_line_recrossing_implies_periodic():
    for spec in (sawtooth_map(1, 8), sawtooth_map("1/2", 8), standard_map(1, 8)):
        pair = involution_factors(spec)
        lines = pair.fixed_lines
        on_I1 = {tuple(p) for k, v in lines.items() if k.startswith("I1") for p in v}
        on_I2 = {tuple(p) for k, v in lines.items() if k.startswith("I2") for p in v}
        for p in on_I1:
            for n in range(1, 9):
                q = iterate(spec, p, n).as_tuple()
                if q in on_I1:
                    assert iterate(spec, p, 2 * n).as_tuple() == p
                    assert (2 * n) % point_period_bruteforce(spec, p, 16) == 0
                if q in on_I2:
                    assert iterate(spec, p, 2 * n + 1).as_tuple() == p


def test_involutions_require_twist():
    with pytest.raises(UnsupportedMapError):
        involution_factors(cat_map(8))


# -- Newton refinement ---------------------------------------------------------------


@pytest.mark.parametrize("convention", ["printed", "continuous"])
@pytest.mark.parametrize("delta", [(1e-3, 0.0), (0.0, 1e-3), (-1e-3, 1e-3), (1e-3 / (2 * math.pi), -1e-3 / (2 * math.pi))])
def test_newton_converges_at_standard_fixed_point(delta, convention):
    fmap = ContinuousTwistMap("standard", 1.0, convention)
    seed = [TorusPoint(0.5 + delta[0], delta[1])]
    res = newton_refine_periodic(fmap, seed, 1)
    assert res.converged and res.residual < 1e-12
    assert abs(res.orbit[0].x - 0.5) < 1e-10
    assert min(res.orbit[0].y, 1 - res.orbit[0].y) < 1e-10


def test_newton_exact_seed_needs_no_steps():
    res = newton_refine_periodic(ContinuousTwistMap("standard", 0.7), [TorusPoint(0.5, 0.0)], 1)
    assert res.iterations == 0 and res.converged


def test_newton_period_two_orbit():
    # (0, 1/2) -> (1/2, 1/2) -> (0, 1/2) for the standard map: sin vanishes on both points
    fmap = ContinuousTwistMap("standard", 0.9)
    seed = [TorusPoint(0.0 + 2e-3, 0.5), TorusPoint(0.5, 0.5 - 1e-3)]
    res = newton_refine_periodic(fmap, seed, 2)
    assert res.converged and res.residual < 1e-12


def test_newton_capture_radius():
    with pytest.raises(NewtonPreconditionError):
        newton_refine_periodic(ContinuousTwistMap("standard", 1.0), [TorusPoint(0.3, 0.2)], 1)
