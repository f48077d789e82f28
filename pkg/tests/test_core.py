import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import integer_det, span_coordinates

from gonlab.core import scalar as sc
from gonlab.core.intlat import (
    complete_primitive,
    enumerate_short,
    hnf_rows,
    int_inverse,
    integer_kernel,
)
from gonlab.core.linalg import (
    Dims,
    LatticeBasis,
    apply_flow,
    det,
    dual_basis,
    f_value,
    lattice_from_matrix,
    scmp,
    sup_norm,
    torus_distance,
)

SQRT2 = sc.sqrt_int(2)
fractions = st.fractions(min_value=-50, max_value=50, max_denominator=50)


# -- scalars -------------------------------------------------------------------------

def test_parse_literals():
    assert sc.parse_scalar("rat:3/4") == Fraction(3, 4)
    assert sc.parse_scalar("sqrt:2") == SQRT2
    assert sc.parse_scalar("1+2*sqrt(2)") == 1 + 2 * SQRT2
    assert sc.parse_scalar("sqrt:4") == 2
    with pytest.raises(ValueError):
        sc.parse_scalar(0.5)
    with pytest.raises(ValueError):
        sc.parse_scalar("banana")


def test_render_symbolic():
    assert sc.render(Fraction(3, 4)) == "3/4"
    assert sc.render(1 + 2 * SQRT2) == "1+2*sqrt(2)"
    assert sc.parse_scalar(sc.render(3 - SQRT2 / 5)) == 3 - SQRT2 / 5


def test_quadratic_exact_arithmetic():
    assert SQRT2 * SQRT2 == 2
    assert (1 + SQRT2) * (SQRT2 - 1) == 1
    assert math.floor(1000 * SQRT2) == 1414
    assert scmp(SQRT2, Fraction(141421, 100000)) > 0
    assert scmp(SQRT2, Fraction(141422, 100000)) < 0


@given(fractions, fractions, fractions, fractions)
def test_quadratic_field_properties(a, b, c, e):
    x, y = a + b * SQRT2, c + e * SQRT2
    assert x + y - y == x
    if y != 0:
        assert (x * y) / y == x
    assert scmp(x, y) == -scmp(y, x)
    assert abs(sc.to_float(x * y) - sc.to_float(x) * sc.to_float(y)) < 1e-6 * (1 + abs(sc.to_float(x * y)))


def test_bigreal_encloses_value():
    x = sc.BigReal.from_decimal("0.1")
    assert x.contains(Fraction(1, 10))
    assert sc.exp(Fraction(0)) == 1
    assert sc.exp(Fraction(1)).contains(mpmath.e)


# -- norms, products, flow --------------------------------------------------------------

def test_sup_norm_examples():
    assert sup_norm((1, -3, 2)) == 3
    assert sup_norm((0, 0, 0)) == 0
    assert sup_norm((Fraction(1, 2), Fraction(-1, 2))) == Fraction(1, 2)


def test_torus_distance_examples():
    assert torus_distance((Fraction(3, 4),)) == Fraction(1, 4)
    assert torus_distance((Fraction(1, 3), Fraction(2, 3))) == Fraction(1, 3)
    assert torus_distance((5, -2)) == 0


def test_product_form_examples():
    h = Fraction(1, 2)
    assert f_value((h, h, h), Dims(2, 1)) == Fraction(1, 8)
    assert f_value((0, 0, 0), Dims(2, 1)) == 0
    assert f_value((3, 2), Dims(1, 1)) == 6


def test_flow_examples():
    assert apply_flow(0, (Fraction(1, 3), 5), Dims(1, 1)) == [Fraction(1, 3), 5]
    u = apply_flow(None, (1, 1), Dims(1, 1), exp_t=Fraction(2))
    assert list(u) == [2, Fraction(1, 2)]
    assert f_value(u, Dims(1, 1)) == 1


@given(st.lists(fractions, min_size=3, max_size=3), st.fractions(min_value=Fraction(1, 9), max_value=9))
def test_flow_preserves_product_form(u, s):
    dims = Dims(2, 1)
    assert f_value(apply_flow(None, u, dims, exp_t=s), dims) == f_value(u, dims)


def test_flow_preserves_product_form_transcendental():
    dims = Dims(2, 1)
    v = apply_flow(1, (1, 0, 1), dims)
    assert abs(sc.to_float(f_value(v, dims)) - 1.0) < 1e-12


# -- lattices -------------------------------------------------------------------------------

def test_lattice_from_matrix():
    b = lattice_from_matrix([[0]], Dims(1, 1))
    assert b.rows() == [[1, 0], [0, 1]]
    b = lattice_from_matrix([[SQRT2]], Dims(1, 1))
    assert b.rows() == [[1, SQRT2], [0, 1]]
    assert b.det == 1


def test_dual_basis():
    ident = LatticeBasis(Dims(1, 1), [[1, 0], [0, 1]])
    assert dual_basis(ident).rows() == [[1, 0], [0, 1]]
    diag = LatticeBasis(Dims(1, 1), [[2, 0], [0, Fraction(1, 2)]])
    assert dual_basis(diag).rows() == [[Fraction(1, 2), 0], [0, 2]]
    xa = lattice_from_matrix([[Fraction(1, 3)]], Dims(1, 1))
    assert dual_basis(xa).rows() == [[1, 0], [Fraction(-1, 3), 1]]


def test_singular_basis_rejected():
    with pytest.raises(ValueError):
        LatticeBasis(Dims(1, 1), [[1, 2], [2, 4]])


# -- integer lattices ---------------------------------------------------------------------------

def test_integer_kernel_examples():
    rows = [(l, 1, 1) for l in range(1, 6)]
    assert [tuple(abs(x) for x in v) for v in integer_kernel(rows, 3)] == [(0, 1, 1)]
    (v,) = integer_kernel(rows, 3)
    assert v[1] == -v[2]
    assert integer_kernel([(1, 0), (0, 1)], 2) == []
    assert len(integer_kernel([], 3)) == 3


def test_complete_primitive_examples():
    assert complete_primitive((0, 1)) == [[1, 0], [0, 1]]
    g = complete_primitive((2, 3))
    assert g[-1] == [2, 3]
    assert integer_det(g) == 1
    assert g == [[1, 1], [2, 3]]


@given(st.lists(st.integers(-30, 30), min_size=2, max_size=4).filter(lambda v: math.gcd(*v) == 1))
def test_complete_primitive_unimodular(v):
    g = complete_primitive(tuple(v))
    assert g[-1] == list(v)
    assert abs(integer_det(g)) == 1


@given(st.lists(st.lists(st.integers(-9, 9), min_size=3, max_size=3), min_size=1, max_size=3))
def test_integer_kernel_annihilates(rows):
    for v in integer_kernel(rows, 3):
        assert all(sum(a * b for a, b in zip(v, r)) == 0 for r in rows)


@given(st.lists(st.lists(st.integers(-9, 9), min_size=3, max_size=3), min_size=1, max_size=4))
def test_hnf_spans_same_lattice(rows):
    h = hnf_rows(rows)
    # every input row is an integer combination of the HNF rows
    for r in rows:
        if any(r):
            c = span_coordinates(r, h)
            assert c is not None and all(x.denominator == 1 for x in c)


def test_int_inverse():
    m = [[2, 3], [1, 2]]
    assert int_inverse(m) == [[2, -3], [-1, 2]]


def test_enumerate_short_matches_brute_force():
    gram = mpmath.matrix([[2, 1], [1, 3]])
    found = {tuple(v) for v in enumerate_short(gram, mpmath.sqrt(6))}
    found |= {tuple(-x for x in v) for v in found}
    brute = set()
    for a in range(-5, 6):
        for b in range(-5, 6):
            if (a or b) and 2 * a * a + 2 * a * b + 3 * b * b <= 6 + 1e-9:
                brute.add((a, b))
    assert found - {(0, 0)} == brute


def test_det_exact():
    assert det([[1, SQRT2], [0, 1]]) == 1
    assert det([[Fraction(1, 2), 3], [1, 4]]) == -1
