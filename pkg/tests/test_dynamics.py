import math
import random
from fractions import Fraction as F
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import integer_det, rational_rank, span_coordinates, wedge_zero_degrees

from gonlab import dynamics
from gonlab.core import scalar as sc
from gonlab.core.linalg import Dims, Grid, LatticeBasis, scmp
from gonlab.dynamics import RationalSubspace

SQRT2 = sc.sqrt_int(2)
Z2 = LatticeBasis(Dims(1, 1), [[1, 0], [0, 1]])


# -- systoles --------------------------------------------------------------------------------

def test_systole_of_integer_lattice_diverges():
    curve = dynamics.systole_curve(Z2, [F(k, 2) for k in range(11)], Dims(1, 1))
    for p in curve.points:
        assert abs(sc.to_float(p.systole) - math.exp(-sc.to_float(p.t))) < 1e-12
        assert p.coefficients == (0, 1)
    assert curve.trend == dynamics.DIVERGING


def test_systole_of_pell_lattice_bounded():
    basis = LatticeBasis(Dims(1, 1), [[1, SQRT2], [1, -SQRT2]])
    curve = dynamics.systole_curve(basis, list(range(21)), Dims(1, 1))
    assert all(scmp(p.systole, 1) >= 0 for p in curve.points)
    assert curve.trend == dynamics.RECURRENT


def test_systole_witness_is_a_lattice_vector():
    basis = LatticeBasis(Dims(1, 1), [[1, SQRT2], [0, 1]])
    sv = dynamics.shortest_vector(basis)
    brute = min(max(abs(a + b * sc.to_float(SQRT2)), abs(b)) for a, b in product(range(-5, 6), repeat=2) if a or b)
    assert abs(sc.to_float(sv[0]) - brute) < 1e-12


def test_classify_trend():
    assert dynamics.classify_trend([math.exp(-t) for t in range(20)])[0] == dynamics.DIVERGING
    assert dynamics.classify_trend([1.0] * 20)[0] == dynamics.RECURRENT


# -- wedge weights -----------------------------------------------------------------------------

def test_weights_examples():
    tab = dynamics.wedge_weights(Dims(2, 1), 1)
    assert [e for _, e in tab.rows] == [1, 1, -2]
    tab = dynamics.wedge_weights(Dims(2, 2), 2)
    assert sorted(I.indices for I in tab.zero_rows) == [(1, 3), (1, 4), (2, 3), (2, 4)]


@pytest.mark.parametrize("m,n", [(m, n) for m in range(1, 7) for n in range(1, 7)])
def test_zero_weight_degrees_match_oracle(m, n):
    d = m + n
    found = {k for k in range(1, d + 1) if dynamics.wedge_weights(Dims(m, n), k).has_zero}
    assert found == wedge_zero_degrees(m, n)
    if math.gcd(m, n) == 1:
        assert found == {d}


# -- rational subspaces and flows ---------------------------------------------------------------

def test_rational_subspace_canonical():
    a = RationalSubspace(3, [(1, 1, 0), (0, 1, 0)])
    b = RationalSubspace(3, [(2, 0, 0), (0, 3, 0)])
    assert a == b and a.dim == 2
    assert a.contains((5, -7, 0)) and not a.contains((0, 0, 1))
    assert len(a.annihilator()) == 1


def test_subspace_flow_norms():
    grid = [F(k) for k in range(6)]
    up = dynamics.subspace_flow_norm(RationalSubspace(2, [(1, 0)]), grid, Dims(1, 1))
    assert up.classification == "to-infinity"
    assert all(abs(sc.to_float(v) - math.exp(k)) < 1e-9 * math.exp(k) for k, v in enumerate(up.norms))
    down = dynamics.subspace_flow_norm(RationalSubspace(2, [(0, 1)]), grid, Dims(1, 1))
    assert down.classification == "to-zero"
    flat = dynamics.subspace_flow_norm(RationalSubspace(4, [(1, 0, 0, 0), (0, 0, 1, 0)]), grid, Dims(2, 2))
    assert all(abs(sc.to_float(v) - 1) < 1e-12 for v in flat.norms)
    assert not flat.bug


# -- value sets ------------------------------------------------------------------------------------

def test_value_set_of_half_shift():
    y = Grid(Z2, (F(1, 2), F(1, 2)))
    sample = dynamics.value_set_sample(y, 10, Dims(1, 1))
    assert sample.report.infimum == F(1, 4)
    brute = {abs(p + F(1, 2)) * abs(q + F(1, 2)) for p in range(-10, 11) for q in range(-10, 11)}
    assert set(sample.values) <= brute
    assert min(brute) == F(1, 4)


def test_value_set_of_lattice_contains_zero():
    sample = dynamics.value_set_sample(Grid(Z2, (0, 0)), 3, Dims(1, 1))
    assert sample.report.infimum == 0


def test_value_set_flow_invariant():
    y = Grid(LatticeBasis(Dims(1, 1), [[1, F(1, 3)], [0, 1]]), (F(1, 2), F(1, 5)))
    flowed = Grid(LatticeBasis(Dims(1, 1), [[2, F(2, 3)], [0, F(1, 2)]]), (1, F(1, 10)))
    a = dynamics.value_set_sample(y, 6, Dims(1, 1), window=F(1, 2))
    b = dynamics.value_set_sample(flowed, 6, Dims(1, 1), window=F(1, 2))
    assert a.values == b.values


@pytest.mark.parametrize("d", [3, 4])
def test_nondegeneracy_floor(d):
    rep = dynamics.nondegeneracy_floor_check(d, Q=50)
    assert rep.passed and rep.minimum == F(1, 2**d)


# -- Fourier coefficients -----------------------------------------------------------------------------

def _quadrature(base, direction, b, samples=100_000):
    s = (np.arange(samples) + 0.5) / samples
    cw = float(sum(x * y for x, y in zip(b, base)))
    cu = float(sum(x * y for x, y in zip(b, direction)))
    phase = 2 * np.pi * (cw + s * cu)
    return complex(np.exp(1j * phase).mean())


def test_fourier_trivial_character():
    meas = dynamics.LineMeasure((0, 0), (1, 0))
    assert dynamics.pushforward_fourier(meas, 0, (0, 0), Dims(1, 1)).value == 1
    assert dynamics.pushforward_fourier(meas, 0, (0, 1), Dims(1, 1)).value == 1


def test_fourier_half_frequency():
    meas = dynamics.LineMeasure((0, 0), (F(1, 2), 0))
    coef = dynamics.pushforward_fourier(meas, 0, (1, 0), Dims(1, 1))
    assert abs(abs(coef.value) - 2 / math.pi) < 1e-12
    assert abs(coef.value - _quadrature((0, 0), (0.5, 0), (1, 0))) < 1e-6


def test_fourier_matches_quadrature_under_flow():
    meas = dynamics.LineMeasure((F(1, 3), F(1, 7)), (F(2, 5), F(1, 3)))
    coef = dynamics.pushforward_fourier(meas, [[2, 0], [0, F(1, 2)]], (1, 2))
    # pushforward by the matrix: pair b with M u and M w
    assert abs(coef.value - _quadrature((F(2, 3), F(1, 14)), (F(4, 5), F(1, 6)), (1, 2))) < 1e-6


def test_fourier_haar_rational():
    assert dynamics.pushforward_fourier("haar-fundamental-domain", 0, (1, 0), Dims(1, 1)).value == 0
    assert dynamics.pushforward_fourier("haar-fundamental-domain", 0, (0, 0), Dims(1, 1)).value == 1


def test_fourier_rejects_non_dual():
    with pytest.raises(dynamics.NotDualVector):
        dynamics.pushforward_fourier(dynamics.LineMeasure((0, 0), (1, 0)), 0, (F(1, 2), 0), Dims(1, 1))


# -- character survival ----------------------------------------------------------------------------------

def test_character_survival_examples():
    dims = Dims(1, 1)
    assert dynamics.character_survival(F(3), (0, 0), (0, 0), dims).is_zero
    rep = dynamics.character_survival(2, (F(1, 2), 0), (1, 0), dims)
    assert not rep.is_zero and abs(sc.to_float(rep.vector[0]) - (math.exp(2) + 0.5)) < 1e-12
    rep = dynamics.character_survival(1, (0, -1), (0, 1), dims)
    assert not rep.is_zero and abs(sc.to_float(rep.vector[1]) - (math.exp(-1) - 1)) < 1e-12


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(-3, 3), min_size=3, max_size=3).filter(any))
def test_survival_direction(b):
    rep = dynamics.survival_trend(b, Dims(2, 1), [F(k, 2) for k in range(101)])
    assert rep.direction == ("grows" if any(b[:2]) else "decays")
    assert rep.monotone and rep.exit_time is not None


# -- coset extraction --------------------------------------------------------------------------------------

def test_coset_arithmetic_progression():
    rep = dynamics.coset_extract([(l, 1) for l in range(1, 8)])
    assert rep.rank == 1
    assert [tuple(abs(x) for x in r) for r in rep.relations] == [(0, 1, 1)]
    assert rep.subtorus == RationalSubspace(2, [(1, 0)])
    assert rep.constants in ((1,), (-1,))


def test_coset_constant_second_coordinate():
    rep = dynamics.coset_extract([(l, 5) for l in range(-3, 4)])
    (rel,) = rep.relations
    assert rel[0] == 0 and rel[2] == -5 * rel[1]


def test_coset_random_vectors_have_no_relation():
    rng = random.Random(3)
    gammas = [(rng.randint(-1000, 1000), rng.randint(-1000, 1000)) for _ in range(20)]
    rep = dynamics.coset_extract(gammas)
    rows = [g + (1,) for g in gammas]
    assert rep.rank == 3 - rational_rank(rows) == 0
    for v in product(range(-4, 5), repeat=3):
        assert not any(v) or any(sum(a * b for a, b in zip(v, r)) for r in rows)


def test_complete_sublattice_unimodular():
    g = dynamics.complete_sublattice([(1, 2, 3), (0, 1, 4)], 3)
    assert integer_det(g) == 1
    for r in [(1, 2, 3), (0, 1, 4)]:
        c = span_coordinates(r, g[1:])
        assert c is not None and all(x.denominator == 1 for x in c)


# -- tail spans --------------------------------------------------------------------------------------------

def test_tail_span_constant():
    U = RationalSubspace(3, [(1, 2, 0)])
    rep = dynamics.tail_span_limit([U] * 5)
    assert rep.limit == U and rep.stabilization_index == 0


def test_tail_span_alternating():
    e1, e2 = RationalSubspace(3, [(1, 0, 0)]), RationalSubspace(3, [(0, 1, 0)])
    rep = dynamics.tail_span_limit([e1, e2] * 4)
    assert rep.limit_dim == 2 and rep.limsup_dim == 1


def test_tail_span_rotating_line():
    Vs = [RationalSubspace(2, [(1, l)]) for l in range(6)]
    rep = dynamics.tail_span_limit(Vs)
    assert rep.limit == RationalSubspace(2, [(1, 0), (0, 1)])
