import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_jumps, best_denominators, cf_quadratic

from gonlab import bestapprox
from gonlab.bestapprox import BestApproxSequence, class_c_test, growth_audit, psi
from gonlab.core import scalar as sc
from gonlab.core.linalg import Dims, scmp

SQRT2 = sc.sqrt_int(2)
PHI = sc.GOLDEN_RATIO


def test_psi_examples():
    r = psi([[Fraction(1, 3)]], 2)
    assert (r.value, r.witness) == (Fraction(1, 3), (1,))
    r = psi([[Fraction(1, 3)]], 3)
    assert (r.value, r.witness) == (0, (3,))
    assert bestapprox.RATIONAL_DEPENDENCE in r.flags
    r = psi([[SQRT2]], 1)
    assert r.value == SQRT2 - 1 and r.witness == (1,)


def test_psi_rejects_small_t():
    with pytest.raises(ValueError):
        psi([[SQRT2]], Fraction(1, 2))


def test_fibonacci_and_pell_denominators():
    assert best_approx_M(PHI, 100) == [1, 2, 3, 5, 8, 13, 21, 34, 55, 89]
    assert best_approx_M(SQRT2, 100) == [1, 2, 5, 12, 29, 70]


def best_approx_M(theta, t):
    return bestapprox.best_approx_sequence([[theta]], t).M


def test_matches_continued_fraction_sqrt7():
    theta = sc.sqrt_int(7)
    expected = [(q, abs(q * theta - p)) for p, q in best_denominators(cf_quadratic(0, 1, 7, 40), 10**6)]
    seq = bestapprox.best_approx_sequence([[theta]], 10**6)
    assert list(zip(seq.M, seq.zeta)) == expected


@pytest.mark.parametrize("seed", range(8))
def test_matches_brute_force_rational(seed):
    rng = random.Random(seed)
    m, n = rng.randint(1, 2), rng.randint(1, 2)
    A = [[Fraction(rng.randint(0, 999), rng.randint(1, 999)) for _ in range(n)] for _ in range(m)]
    t = 30 if n == 2 else 200
    seq = bestapprox.best_approx_sequence(A, t, Dims(m, n))
    assert list(zip(seq.M, seq.zeta)) == brute_jumps(A, t)


def test_shell_and_lattice_methods_agree():
    A = [[SQRT2, sc.sqrt_int(3)]]
    a = bestapprox.best_approx_sequence(A, 60, method="lattice")
    b = bestapprox.best_approx_sequence(A, 60, method="shell")
    assert a.M == b.M and a.zeta == b.zeta


@settings(max_examples=40, deadline=None)
@given(st.fractions(min_value=0, max_value=1, max_denominator=10**6), st.fractions(min_value=0, max_value=1, max_denominator=10**6))
def test_delta_bound_and_invariants(a, b):
    seq = bestapprox.best_approx_sequence([[a], [b]], 100, Dims(2, 1))
    assert not seq.check_invariants()
    assert all(scmp(d, 1) <= 0 for d in seq.deltas)


def test_witnesses_realize_values():
    seq = bestapprox.best_approx_sequence([[SQRT2, sc.sqrt_int(5)]], 200)
    for e in seq.entries:
        assert max(abs(x) for x in e.witness) == e.M
        assert bestapprox.torus_value(seq.A, e.witness) == e.zeta


def test_growth_audit():
    assert growth_audit(bestapprox.best_approx_sequence([[PHI]], 10**6)).verdict == "holds"
    assert growth_audit(bestapprox.best_approx_sequence([[SQRT2]], 10**8)).verdict == "holds"
    slow = BestApproxSequence.synthetic(Dims(1, 1), list(range(1, 31)), [Fraction(1, l + 2) for l in range(30)])
    rep = growth_audit(slow)
    assert rep.verdict == "violated" and rep.violations


def _synthetic(M, deltas, dims):
    # zeta_l chosen so that M_{l+1}^n zeta_l^m = Delta_l (m = 1)
    zeta = [Fraction(d) / Fraction(M[l + 1]) ** dims.n for l, d in enumerate(deltas)]
    zeta.append(zeta[-1] / 4)
    return BestApproxSequence.synthetic(dims, M, zeta)


def _blocks(ls, L, value):
    """``Delta_l = value(k)`` for ``l_{k-1} < l <= l_k``; nonincreasing, so that
    with doubling ``M`` the values ``zeta_l`` decrease."""
    out, k = [], 1
    for l in range(L):
        while k < len(ls) and l > ls[k - 1]:
            k += 1
        out.append(value(k))
    return out


def test_class_c_consistent_for_constant_delta():
    dims = Dims(1, 1)
    L = 40
    M = [2**l for l in range(L + 1)]
    seq = _synthetic(M, [Fraction(1, 2)] * L, dims)
    rep = class_c_test(seq, [2**k for k in range(5)] + [31, 38])
    assert rep.verdict == bestapprox.CONSISTENT
    assert rep.partial_sums[-1] == Fraction(len(rep.subsequence), 2)
    assert scmp(rep.H[-1], rep.H[0]) < 0


def test_class_c_convergent_series_fails_condition_one():
    dims = Dims(1, 1)
    L = 80
    M = [2**l for l in range(L + 1)]
    ls = [k * k for k in range(1, 9)]
    seq = _synthetic(M, _blocks(ls, L, lambda k: Fraction(1, k * k)), dims)
    assert class_c_test(seq, ls).verdict == bestapprox.COND1_FAIL


def test_class_c_divergent_harmonic_sums():
    dims = Dims(1, 1)
    L = 70
    ls = [k * k for k in range(1, 9)]
    M = [2**l for l in range(L + 1)]
    rep = class_c_test(_synthetic(M, _blocks(ls, L, lambda k: Fraction(1, k)), dims), ls)
    assert rep.partial_sums[-1] == sum(Fraction(1, k) for k in range(1, 9))
    assert rep.verdict != bestapprox.COND1_FAIL


def test_class_c_rejects_bad_subsequence():
    seq = bestapprox.best_approx_sequence([[SQRT2]], 1000)
    with pytest.raises(ValueError):
        class_c_test(seq, [3, 2])
    with pytest.raises(ValueError):
        class_c_test(seq, [len(seq)])


def test_auto_subsequence_doubles():
    seq = bestapprox.best_approx_sequence([[SQRT2]], 10**8)
    ls = bestapprox.auto_subsequence(seq)
    assert all(seq.M[b + 1] >= 2 * seq.M[a + 1] for a, b in zip(ls, ls[1:]))
