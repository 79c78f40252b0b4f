import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qrecur.dynamics import CAT_MATRIX, LatticePoint, UnimodularMatrix2, cat_map, iterate, sawtooth_map
from qrecur.oracles import (
    Domain,
    FactorizationError,
    PercivalError,
    alpha,
    alpha_bruteforce,
    alpha_composite,
    alpha_percival,
    cf_convergents,
    discriminant_of,
    divisors,
    enumerate_periodic,
    enumerate_returns,
    factorize,
    kronecker_symbol,
    minimal_period,
    point_period_bruteforce,
    rows_to_csv,
)

L = CAT_MATRIX
PRIMES = [p for p in range(2, 1000) if all(p % q for q in range(2, int(p**0.5) + 1))]

# alpha(g) for g = 2..30, computed once by multiplying L mod g until the identity appears
ALPHA_TABLE = {
    2: 3, 3: 4, 4: 3, 5: 10, 6: 12, 7: 8, 8: 6, 9: 12, 10: 30, 11: 5, 12: 12, 13: 14, 14: 24,
    15: 20, 16: 12, 17: 18, 18: 12, 19: 9, 20: 30, 21: 8, 22: 15, 23: 24, 24: 12, 25: 50,
    26: 42, 27: 36, 28: 24, 29: 7, 30: 60,
}


def _slow_order(g):
    a, b, c, d = 1, 0, 0, 1
    for t in range(1, 10 * g):
        a, b, c, d = (2 * a + c) % g, (2 * b + d) % g, (a + c) % g, (b + d) % g
        if (a, b, c, d) == (1 % g, 0, 0, 1 % g):
            return t


def test_alpha_table_frozen():
    for g, a in ALPHA_TABLE.items():
        assert _slow_order(g) == a
        assert alpha_bruteforce(L, g).alpha == a


def test_alpha_examples():
    assert alpha_bruteforce(UnimodularMatrix2.identity(), 9).alpha == 1
    assert alpha_percival(L, 7).alpha == 8 and alpha_percival(L, 7).witness == (8, 1)
    assert alpha_percival(L, 11).alpha == 5 and alpha_percival(L, 11).witness == (10, 2)
    assert alpha_percival(L, 3).alpha == 4 and alpha_percival(L, 3).witness == (4, 1)
    assert alpha_composite(L, 10).alpha == 30
    assert alpha_composite(L, 4).alpha == 3
    assert alpha_composite(L, 64).alpha == 48


def test_alpha_dispatch_and_errors():
    assert alpha(L, 12, "composite").alpha == 12
    with pytest.raises(ValueError):
        alpha(L, 12, "nope")
    with pytest.raises(ValueError):
        alpha_bruteforce(L, 1)
    with pytest.raises(PercivalError):
        alpha_percival(L, 9)
    with pytest.raises(PercivalError):
        alpha_percival(L, 5)
    with pytest.raises(FactorizationError):
        factorize(10**6 + 3, bound=10**6)


def test_discriminant_and_kronecker():
    assert discriminant_of(L) == 5
    assert discriminant_of(L.inverse()) == 5
    assert discriminant_of(UnimodularMatrix2(3, 2, 1, 1)) == 12  # tr 4
    with pytest.raises(ValueError):
        discriminant_of(UnimodularMatrix2(1, 1, 0, 1))
    assert kronecker_symbol(5, 11) == 1
    assert kronecker_symbol(5, 7) == -1
    assert kronecker_symbol(5, 5) == 0


@pytest.mark.parametrize("p", [p for p in PRIMES if p not in (2, 5)])
def test_percival_divisibility(p):
    a = alpha_bruteforce(L, p).alpha
    assert (p - kronecker_symbol(5, p)) % a == 0
    assert alpha_percival(L, p).alpha == a


def test_composite_matches_bruteforce_to_256():
    assert all(alpha_composite(L, g).alpha == alpha_bruteforce(L, g).alpha for g in range(2, 257))


def test_alpha_over_g_statistic():
    ratios = [alpha_bruteforce(L, g).alpha / g for g in range(2, 257)]
    assert 0 < sum(ratios) / len(ratios) <= 3
    assert max(ratios) <= 3


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 3000))
def test_other_matrix_orders_agree(g):
    A = UnimodularMatrix2(3, 2, 1, 1)
    if g > 400:
        g = g % 400 + 2
    assert alpha_composite(A, g).alpha == alpha_bruteforce(A, g).alpha


def test_factorize_and_divisors():
    assert factorize(360) == {2: 3, 3: 2, 5: 1}
    assert divisors(12) == [1, 2, 3, 4, 6, 12]
    assert divisors(1) == [1]


def test_point_periods():
    spec = cat_map(8)
    assert point_period_bruteforce(spec, (1, 0), 10) == 6
    assert point_period_bruteforce(spec, (0, 0), 1) == 1
    assert point_period_bruteforce(spec, (1, 0), 5) is None
    assert minimal_period(spec, (1, 0), 12) == 6
    with pytest.raises(ValueError):
        minimal_period(spec, (1, 0), 5)


def test_domain_parse():
    d = Domain.parse("4x4@1,6")
    assert d.P == 4 and d.offset == (1, 6) and d.p == 2 and str(d) == "4x4@1,6"
    assert Domain.parse("2x2").offset == (0, 0)
    with pytest.raises(ValueError):
        Domain.parse("3x3")
    with pytest.raises(ValueError):
        Domain.parse("2x4")


def test_enumerate_returns_examples():
    spec = cat_map(8)
    rs = enumerate_returns(spec, Domain(4), 1)
    assert rs.M == 6
    assert {p.as_tuple() for p in rs.members} == {(0, 0), (0, 1), (0, 2), (0, 3), (1, 0), (1, 1)}
    assert enumerate_returns(spec, Domain(4), 0).M == 16
    assert enumerate_returns(spec, Domain(8), 5).M == 64
    assert enumerate_returns(spec, Domain.parse("2x2@0,2"), 1).M == 0
    assert enumerate_returns(sawtooth_map("1/2", 8), Domain(4), 1).M == 7


def test_enumerate_returns_wraps_offsets():
    spec = cat_map(8)
    d = Domain.parse("4x4@6,6")
    rs = enumerate_returns(spec, d, 2)
    for x in range(8):
        for y in range(8):
            inside = (x - 6) % 8 < 4 and (y - 6) % 8 < 4
            q = iterate(spec, (x, y), 2)
            back = (q.X - 6) % 8 < 4 and (q.Y - 6) % 8 < 4
            assert (LatticePoint(x, y) in rs.members) == (inside and back)


def test_enumerate_periodic_examples():
    assert {p.as_tuple() for p in enumerate_periodic(cat_map(8), 1).members} == {(0, 0)}
    assert enumerate_periodic(cat_map(2), 3).M == 4
    assert enumerate_periodic(cat_map(8), 6).M == 64
    line = enumerate_periodic(sawtooth_map("1/2", 8), 2, "I1:Y=0")
    assert {p.as_tuple() for p in line.members} == {(4, 0), (5, 0)}
    with pytest.raises(Exception):
        enumerate_periodic(sawtooth_map("1/2", 8), 2, "I1:Y=9")


@pytest.mark.parametrize("N", [4, 8, 16])
def test_periodic_sets_nest(N):
    for spec in (cat_map(N), sawtooth_map("1/2", N)):
        for t in range(1, 9):
            small = enumerate_periodic(spec, t).members
            for k in (2, 3):
                assert small <= enumerate_periodic(spec, k * t).members


def test_convergents():
    assert cf_convergents(5, 16) == [Fraction(0), Fraction(1, 3), Fraction(5, 16)]
    assert cf_convergents(0, 16) == [Fraction(0)]
    assert cf_convergents(8, 16) == [Fraction(0), Fraction(1, 2)]
    with pytest.raises(ValueError):
        cf_convergents(16, 16)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 12).flatmap(lambda p: st.tuples(st.just(p), st.integers(0, 2**p - 1))))
def test_convergents_approximate(pk):
    p, k = pk
    D = 2**p
    convs = cf_convergents(k, D)
    assert convs[-1] == Fraction(k, D)
    for c in convs:
        # best-approximation property of convergents
        assert abs(Fraction(k, D) - c) <= Fraction(1, c.denominator**2)
    dens = [c.denominator for c in convs]
    assert dens == sorted(dens)


def test_csv_rows():
    text = rows_to_csv([{"g": 2, "alpha": 3}, {"g": 3, "alpha": 4, "method": "x"}])
    assert text.splitlines() == ["g,alpha,method", "2,3,", "3,4,x"]
    assert rows_to_csv([]) == ""
    rec = enumerate_returns(cat_map(8), Domain(2), 1).to_record()
    assert "0,0" in rows_to_csv([rec])
    assert math.isclose(len(rec["members"]), rec["M"])
