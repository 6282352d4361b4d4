import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cpdiff import cps
from cpdiff.cps import TAU, GoldenInteger, LatticePoint, fibonacci_scheme, golden_sign
from cpdiff.errors import ResourceCapError, ValidationError

from oracles import brute_fibonacci

FIB = fibonacci_scheme()
ints = st.integers(-10**6, 10**6)


def test_fibonacci_covolume():
    assert FIB.covolume == pytest.approx(math.sqrt(5), abs=1e-12)
    assert FIB.certified and FIB.golden


@pytest.mark.parametrize("coords,direct,internal", [
    ((0, 0), 0.0, 0.0),
    ((1, 0), 1.0, 1.0),
    ((0, 1), TAU, 1 - TAU),
    ((2, 1), 2 + TAU, 3 - TAU),
    ((-1, 1), TAU - 1, -TAU),
])
def test_projections(coords, direct, internal):
    assert cps.project_direct(coords, FIB)[0] == pytest.approx(direct, abs=1e-15)
    assert cps.star(coords, FIB)[0] == pytest.approx(internal, abs=1e-15)


def test_star_of_lattice_point():
    p = LatticePoint((2, 1))
    assert cps.star(p, FIB)[0] == pytest.approx(1.3819660112501051)
    assert (p + (-p)).coords == (0, 0)


@given(ints, ints, ints, ints)
def test_projections_are_additive(a, b, c, d):
    lhs = cps.star((a + c, b + d), FIB)
    rhs = cps.star((a, b), FIB) + cps.star((c, d), FIB)
    assert lhs[0] == pytest.approx(rhs[0], rel=1e-12, abs=1e-6)


def test_star_exact_matches_float():
    c = np.array([[3, -2], [7, 5], [-4, 9]])
    a, b = FIB.star_exact(c)
    assert np.allclose(a + b * TAU, FIB.internal(c)[:, 0])


def test_non_integer_coords_rejected():
    with pytest.raises(ValidationError):
        FIB.positions((0.5, 1))
    with pytest.raises(ValidationError):
        FIB.positions((1, 2, 3))


def test_dual_gram_identity():
    dual = FIB.dual()
    assert np.allclose(dual.basis.T @ FIB.basis, np.eye(2), atol=1e-12)
    assert dual.covolume == pytest.approx(1 / math.sqrt(5), abs=1e-12)
    assert dual.dual() is not None and np.allclose(dual.dual().basis, FIB.basis)


@given(st.lists(st.floats(-3, 3), min_size=9, max_size=9))
@settings(max_examples=40)
def test_dual_involution_and_gram(vals):
    B = np.array(vals).reshape(3, 3) + 4 * np.eye(3)
    s = cps.from_basis(B, 1, 2)
    assert not s.certified
    assert np.allclose(s.dual().basis.T @ s.basis, np.eye(3), atol=1e-10)
    assert np.allclose(s.dual().dual().basis, s.basis, atol=1e-10)


def test_covolume_cases():
    assert cps.from_basis(np.eye(2), 1, 1).covolume == 1.0
    assert cps.from_basis(3 * FIB.basis, 1, 1).covolume == pytest.approx(9 * math.sqrt(5))


def test_singular_basis_rejected():
    with pytest.raises(ValidationError):
        cps.from_basis([[1, 2], [2, 4]], 1, 1)
    with pytest.raises(ValidationError):
        cps.from_basis(np.eye(3), 1, 1)


def test_enumeration_matches_brute_force():
    got = {tuple(c) for c in cps.enumerate_points(FIB, (0.0, 2.0), (0.0, 10.0))}
    assert got == brute_fibonacci(2.0, 10.0)
    assert {(0, 0), (1, 0), (-1, 1), (0, 1), (2, 0), (1, -1)} <= got


@pytest.mark.parametrize("a,u,r,t", [(0.3, -0.2, 3.0, 4.0), (-5.5, 1.7, 2.5, 6.0)])
def test_enumeration_shifted_balls(a, u, r, t):
    got = {tuple(c) for c in cps.enumerate_points(FIB, (a, r), (u, t))}
    assert got == brute_fibonacci(r, t, a, u)


def test_enumeration_only_origin():
    # r * t * 4 / sqrt5 < 1: the origin is the only point (|x| < 0.1 needs |x*| > 6)
    pts = cps.enumerate_points(FIB, (0.0, 0.1), (0.0, 5.0))
    assert pts.tolist() == [[0, 0]]
    assert brute_fibonacci(0.1, 5.0) == {(0, 0)}


def test_enumeration_sorted_and_deterministic():
    p1 = cps.enumerate_points(FIB, (0.0, 100.0), (0.0, 3.0))
    p2 = cps.enumerate_points(FIB, (0.0, 100.0), (0.0, 3.0))
    assert np.array_equal(p1, p2)
    assert np.array_equal(p1, cps.sort_coords(p1[::-1].copy()))


def test_enumeration_count_grows_with_area():
    # expected count vol(B_r) vol(B_t) / det = 4 r t / sqrt5
    for r, t in [(100.0, 5.0), (2000.0, 2.0)]:
        n = len(cps.enumerate_points(FIB, (0.0, r), (0.0, t)))
        assert n == pytest.approx(4 * r * t / math.sqrt(5), rel=0.02)


def test_enumeration_monotone_in_radius():
    small = {tuple(c) for c in cps.enumerate_points(FIB, (0.0, 10.0), (0.0, 2.0))}
    big = {tuple(c) for c in cps.enumerate_points(FIB, (0.0, 20.0), (0.0, 2.0))}
    assert small <= big


def test_enumeration_cap():
    with pytest.raises(ResourceCapError):
        cps.enumerate_points(FIB, (0.0, 1e6), (0.0, 10.0), cap=1000)


def test_enumeration_rejects_bad_radius():
    with pytest.raises(ValidationError):
        cps.enumerate_points(FIB, (0.0, -1.0), (0.0, 1.0))


def test_enumeration_three_dimensional():
    rng = np.random.default_rng(4)
    B = rng.normal(size=(3, 3)) + 2 * np.eye(3)
    s = cps.from_basis(B, 1, 2)
    pts = cps.enumerate_points(s, (0.0, 3.0), (np.zeros(2), 2.0))
    grid = np.stack(np.meshgrid(*[np.arange(-30, 31)] * 3, indexing="ij"), -1).reshape(-1, 3)
    pos = grid @ B.T
    keep = (np.abs(pos[:, 0]) <= 3.0) & (np.linalg.norm(pos[:, 1:], axis=1) <= 2.0)
    assert {tuple(c) for c in pts} == {tuple(c) for c in grid[keep]}


@given(st.integers(-2**28, 2**28), st.integers(-2**28, 2**28))
def test_golden_sign_exact(a, b):
    import mpmath

    with mpmath.workdps(40):
        v = a + b * mpmath.phi
        expected = (v > 0) - (v < 0)
    assert int(golden_sign(a, b)) == expected


def test_golden_integer_parse():
    assert GoldenInteger.parse("tau-1") == GoldenInteger(-1, 1)
    assert GoldenInteger.parse("2-3*tau") == GoldenInteger(2, -3)
    assert GoldenInteger.parse("-1") == GoldenInteger(-1, 0)
    assert float(GoldenInteger(-1, 1)) == pytest.approx(TAU - 1)
    assert GoldenInteger(-1, 1).sign() == 1


def test_scheme_round_trip(tmp_path):
    path = tmp_path / "fib.json"
    cps.save_scheme(FIB, path)
    assert cps.load_scheme(path) is not None
    assert np.array_equal(cps.load_scheme(path).basis, FIB.basis)
    assert cps.load_scheme(path).certified


def test_certified_custom_scheme_refused(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"name": "mine", "d": 1, "m": 1, "basis": ["1", "0", "0", "2"], '
                    '"certified": true}')
    with pytest.raises(ValidationError):
        cps.load_scheme(path)


def test_shortest_vector():
    # (1, 0) has length sqrt2, (-1, 1) is (tau-1, -tau), length sqrt(3)
    assert cps.shortest_vector_length(FIB) == pytest.approx(math.sqrt(2))
