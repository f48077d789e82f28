import math
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gonlab import badlab
from gonlab.bestapprox import BestApproxSequence, best_approx_sequence
from gonlab.core import scalar as sc
from gonlab.core.linalg import Dims, scmp

SQRT2, SQRT3 = sc.sqrt_int(2), sc.sqrt_int(3)
PHI = sc.GOLDEN_RATIO


def _brute_score(theta: float, eta: float, Q0: int, Q: int) -> float:
    """``min |q| * dist(q theta - eta, Z)`` over ``Q0 <= |q| <= Q`` in floats."""
    best = math.inf
    for q in range(Q0, Q + 1):
        for s in (q, -q):
            x = s * theta - eta
            best = min(best, q * abs(x - round(x)))
    return best


# -- scores ----------------------------------------------------------------------------------

def test_score_examples():
    r = badlab.badness_score([[0]], [F(1, 2)], (1, 100))
    assert r.score == F(1, 2) and r.q == (1,)
    assert badlab.badness_score([[0]], [0], (1, 100)).score == 0
    assert badlab.badness_score([[F(2, 7)]], [0], (1, 10)).score == 0


def test_sqrt2_homogeneous_score():
    # over the full shell the minimum sits at q = 2: 2 * (3 - 2 sqrt 2)
    r = badlab.badness_score([[SQRT2]], [0], (1, 10**4))
    assert r.score == 6 - 4 * SQRT2 and r.q == (2,)
    # far out the scores approach 1 / (2 sqrt 2)
    r = badlab.badness_score([[SQRT2]], [0], (100, 10**4))
    assert abs(sc.to_float(r.score) - 1 / (2 * math.sqrt(2))) < 1e-4


@pytest.mark.parametrize("eta", [F(1, 3), F(1, 7), F(5, 11)])
def test_score_matches_float_brute_force(eta):
    r = badlab.badness_score([[SQRT2]], [eta], (1, 2000))
    assert abs(sc.to_float(r.score) - _brute_score(math.sqrt(2), float(eta), 1, 2000)) < 1e-9


@settings(max_examples=20, deadline=None)
@given(st.fractions(min_value=0, max_value=1, max_denominator=97), st.integers(2, 200))
def test_enlarging_shell_never_increases_score(eta, Q):
    a = badlab.badness_score([[SQRT3]], [eta], (1, Q)).score
    b = badlab.badness_score([[SQRT3]], [eta], (1, 2 * Q)).score
    assert scmp(b, a) <= 0


def test_batch_matches_single():
    etas = [(F(k, 9),) for k in range(9)]
    powered = badlab.batch_scores([[SQRT2]], etas, (1, 300))
    single = [badlab.badness_score([[SQRT2]], e, (1, 300)).score for e in etas]
    assert powered == single  # m = 1: the powered value is the score


def test_shell_profile():
    prof = badlab.shell_profile([[SQRT2]], [0], 12)
    assert all(scmp(b, a) <= 0 for a, b in zip(prof.running_min, prof.running_min[1:]))
    assert abs(sc.to_float(prof.running_min[-1]) - 1 / (2 * math.sqrt(2))) < 0.04
    rat = badlab.shell_profile([[F(3, 5)]], [0], 4)
    assert rat.running_min[-1] == 0 and rat.last_decrease == (4, 8)


def test_doubling_inequality():
    assert badlab.doubling_inequality_check([[SQRT2]], [F(1, 3)], 500).holds
    assert badlab.doubling_inequality_check([[0]], [F(1, 2)], 20).holds
    rng = random.Random(5)
    for _ in range(100):
        A = [[F(rng.randint(1, 999), rng.randint(1, 999)) + SQRT2 * rng.randint(0, 2)]]
        eta = [F(rng.randint(0, 99), 100)]
        assert badlab.doubling_inequality_check(A, eta, rng.randint(2, 60)).holds


# -- scans -----------------------------------------------------------------------------------------

def test_coset_scan_singular_matrix():
    rep = badlab.coset_scan([[0]], [1], [F(1, 2)], range(5), (1, 50), F(1, 10))
    assert len(set(rep.scores)) == 1 and rep.fraction_above == 1.0


def test_coset_scan_fraction_nonincreasing():
    A = [[SQRT2], [SQRT3]]
    grid = [F(k, 200) for k in range(200)]
    fr = [badlab.coset_scan(A, [1, 0], [0, 0], grid, (1, Q), F(1, 50)).fraction_above for Q in (30, 100, 300)]
    assert fr[0] >= fr[1] >= fr[2]


def test_measure_estimate_negative_control():
    rep = badlab.bad_measure_estimate([[0]], 100, (1, 1000), F(1, 20))
    # with A = 0 the score is the distance to Z; 11 of the 100 grid targets lie within 1/20
    assert rep.fraction_above == 0.89


def test_measure_fraction_decreases():
    fr = [badlab.bad_measure_estimate([[SQRT2]], 200, (1, Q), F(1, 20)).fraction_above for Q in (100, 1000)]
    assert fr[1] <= fr[0] < 0.5


# -- Pell certificate --------------------------------------------------------------------------------

def test_pell_certificate_small():
    cert = badlab.pell_certificate(2, 500, range(6))
    assert cert.passed and cert.identity_ok
    assert cert.bound == F(1, 16) and cert.enumerated_min == F(1, 16)
    assert scmp(cert.box_min, F(1, 16)) >= 0


def test_pell_basis_is_lattice_basis():
    b = badlab.pell_basis(2)
    assert b.d == 4


# -- box covering ------------------------------------------------------------------------------------

@pytest.mark.parametrize("A", [[[SQRT2]], [[PHI]], [[SQRT2], [SQRT3]]])
def test_box_cover(A):
    m = len(A)
    etas = badlab.eta_grid(m, 10 if m == 1 else 5)
    seq = best_approx_sequence(A, 10**5)
    for l in range(4):
        assert badlab.box_cover_check(A, l, etas, seq=seq).passed


def test_box_cover_zero_target():
    rep = badlab.box_cover_check([[SQRT2]], 3, [(0,)])
    assert rep.passed


# -- covering plan -----------------------------------------------------------------------------------

def test_covering_plan_sqrt2_disjoint_and_counts():
    plan = badlab.covering_plan_build([[SQRT2]], F(1, 10), 4, subsequence=[3, 6, 9, 12],
                                      on_ff2_failure="record")
    assert all(lv.disjoint for lv in plan.levels)
    for k, k1, worst, sharp0, sharp in plan.intersections:
        assert worst <= sharp0


def test_covering_plan_truncates_by_default():
    plan = badlab.covering_plan_build([[SQRT2]], F(1, 10), 4, subsequence=[3, 6, 9, 12])
    assert plan.truncated is not None


def test_covering_measure_band_synthetic():
    dims = Dims(1, 1)
    L = 40
    M = [4**l for l in range(L + 1)]
    zeta = [F(1, 3) / M[l + 1] for l in range(L)] + [F(1, 3) / M[L] / 16]
    seq = BestApproxSequence.synthetic(dims, M, zeta)
    plan = badlab.covering_plan_build(None, F(1, 10), 6, seq=seq, subsequence=[2, 10, 18, 26, 34, 38],
                                      on_ff2_failure="record")
    scaled = [float(r) * dims.d**dims.d * 3**dims.m for r in plan.measure_ratios]
    assert all(1 / 8 <= x <= 8 for x in scaled)
    assert all(lv.ff2_ok for lv in plan.levels[:-1])


def test_covering_single_box_level():
    dims = Dims(1, 1)
    seq = BestApproxSequence.synthetic(dims, [1, 2, 4, 8, 16], [F(1, 4), F(1, 8), F(1, 32), F(1, 128), F(1, 1024)])
    plan = badlab.covering_plan_build(None, F(1, 10), 2, seq=seq, subsequence=[0, 2], on_ff2_failure="record")
    assert all(lv.disjoint in (True, None) for lv in plan.levels)


def test_covering_rejects_bad_epsilon():
    with pytest.raises(ValueError):
        badlab.covering_plan_build([[SQRT2]], F(1, 2))


def test_covering_rejects_subsequence_past_sequence():
    with pytest.raises(ValueError):
        badlab.covering_plan_build([[SQRT2]], F(1, 10), subsequence=[3, 40])


# -- slab audits -------------------------------------------------------------------------------------

def test_aux_count_example():
    rep = badlab.aux_count_audit(3, F(1, 10), [1])
    assert rep.count == 30 and rep.bound == 324 and rep.passed


def test_aux_count_matches_brute_force():
    # exact count by direct search over (a0, a1, a2) and the reachable interval
    t1, t2 = math.sqrt(2), math.sqrt(3)
    for M, delta, a in [(4, 0.1, (2,)), (3, 0.3, (1, -2))]:
        pos = sum(x for x in a if x > 0)
        neg = sum(x for x in a if x < 0)
        count = 0
        for a1 in range(-M + 1, M):
            for a2 in range(-M + 1, M):
                c = a1 * t1 + a2 * t2
                for a0 in range(-50, 51):
                    if a0 + c + neg - delta <= 0 <= a0 + c + pos + delta:
                        count += 1
        assert badlab.aux_count_audit(M, F(delta).limit_denominator(100), a).count == count


def test_aux_count_single_box():
    rep = badlab.aux_count_audit(1, F(1, 10), [2, -1])
    assert rep.count <= 2 * (3 + 1)


def test_slab_measure_below_bound():
    rng = random.Random(11)
    for _ in range(20):
        M = rng.randint(2, 6)
        a = [rng.randint(-M + 1, M - 1) for _ in range(3)] + [rng.choice([-2, -1, 1, 2])]
        assert badlab.slab_measure(a, M=M, epsilon=F(1, 10)) <= badlab.slab_bound(a, M, F(1, 10)) + 1e-15


def test_bme_audit_and_shrinking():
    big = badlab.bme_measure_audit(5, F(1, 10), 3, samples=20_000, seed=1)
    small = badlab.bme_measure_audit(5, F(1, 100), 3, samples=20_000, seed=1)
    assert big.passed and small.passed
    assert small.estimate < big.estimate


def test_bme_audit_is_reproducible():
    a = badlab.bme_measure_audit(4, F(1, 10), 3, samples=5000, seed=42)
    b = badlab.bme_measure_audit(4, F(1, 10), 3, samples=5000, seed=42)
    assert a == b


# -- target search ----------------------------------------------------------------------------------------

def test_eta_search_zero_theta():
    res = badlab.eta_search([0], 100)
    assert res.score == F(1, 2) and res.eta == (F(1, 2),)


def test_eta_search_sqrt2_consistent():
    res = badlab.eta_search([SQRT2], 1000)
    assert scmp(res.score, F(1, 20)) > 0
    assert badlab.badness_score([[SQRT2]], list(res.eta), (1, 1000)).score == res.score
