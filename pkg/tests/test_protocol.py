import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from precess import observables as ob
from precess import protocol as pr
from precess import spectral as sp

from .conftest import builtin_pairs

G60 = 1 / (1 + math.cos(7 * math.pi / 15))


def test_spectrum_examples(four13):
    s = pr.spectrum(four13)
    np.testing.assert_allclose(s.outcomes, [-3, -1, 1, 3], atol=1e-12)
    assert (s.x_plus, s.x_minus, s.has_zero) == (pytest.approx(1), pytest.approx(3), False)
    s1 = pr.spectrum(ob.make_spin(1))
    np.testing.assert_allclose(s1.outcomes, [-1, 0, 1], atol=1e-12)
    assert s1.has_zero and s1.x_plus == pytest.approx(1) and s1.x_minus == pytest.approx(1)


def test_spectrum_clock60(clock60):
    # oracle: enumerate the clock values and deduplicate by exact index symmetry n ~ N - n
    distinct = {min(n, 60 - n) for n in range(60)}
    s = pr.spectrum(clock60)
    assert len(s.outcomes) == len(distinct) == 31
    np.testing.assert_allclose(sorted(math.cos(2 * math.pi * n / 60) for n in distinct), s.outcomes, atol=1e-12)
    assert s.x_plus == pytest.approx(math.cos(7 * math.pi / 15), abs=1e-12)
    assert s.x_minus == pytest.approx(1, abs=1e-12)
    assert s.has_zero


def test_spectrum_detects_broken_measurements(four13):
    X0, X1, X2 = four13.probes()
    bad = ob.PrecessingPair(four13.X, four13.Y, hamiltonian=four13.hamiltonian, measured=(X0, X1 + np.eye(4), X2))
    with pytest.raises(ob.PrecessionError):
        pr.spectrum(bad)


def test_general_bound_examples():
    assert pr.bound_from_extremes(1, 3, False) == pytest.approx(0.75)
    assert pr.bound_from_extremes(1, 1, True) == 0.5
    assert pr.general_bound(pr.SpectrumInfo.from_outcomes([0, 1, 2])) == 0.5
    assert pr.general_bound(pr.SpectrumInfo.from_outcomes([-2, -1])) == 0.5
    assert pr.bound_from_extremes(math.cos(7 * math.pi / 15), 1, False) == pytest.approx(0.90537, abs=1e-5)
    assert pr.bound_from_extremes(2, 1, True) == 0.5
    # no zero: the ratio formula applies even when x_plus > x_minus
    assert pr.bound_from_extremes(2, 1, False) == pytest.approx(1 / 3)
    with pytest.raises(ValueError):
        pr.bound_from_extremes(None, None, False)


@given(st.floats(1e-6, 1 - 1e-6), st.floats(1e-6, 1 - 1e-6))
def test_general_bound_monotone(a, b):
    lo, hi = sorted((a, b))
    assert pr.bound_from_extremes(lo, 1.0, True) >= pr.bound_from_extremes(hi, 1.0, True)
    assert 0.5 < pr.bound_from_extremes(lo, 1.0, True) < 1


def test_general_bound_limit():
    assert pr.bound_from_extremes(1e-12, 1.0, False) == pytest.approx(1.0, abs=1e-11)


def test_score_examples(four13):
    rep = pr.p3_score(four13, ob.optimal_state(four13))
    assert rep.p3 == pytest.approx(0.75, abs=1e-9)
    np.testing.assert_allclose(rep.per_time, [0.75] * 3, atol=1e-9)
    assert rep.violates_classical and rep.saturates_general
    assert rep.classical_bound == 2 / 3 and rep.general_bound == pytest.approx(0.75)
    mixed = pr.p3_score(ob.make_four_level(0.7, 4.1), np.eye(4) / 4)
    assert mixed.p3 == pytest.approx(0.5, abs=1e-12)
    assert not mixed.violates_classical and not mixed.saturates_general


def test_score_clock_fourier_tuples(clock60):
    for n in range(60):
        per = pr.p3_score(clock60, ob.clock_fourier_state(60, n)).per_time
        # oracle: step function of the precessed pointer angle
        angles = [2 * math.pi * n / 60 - 2 * math.pi * k / 3 for k in range(3)]
        expected = [1.0 if math.cos(a) > 1e-12 else 0.0 if math.cos(a) < -1e-12 else 0.5 for a in angles]
        np.testing.assert_allclose(per, expected, atol=1e-9)
        assert tuple(np.round(per)) not in {(0, 0, 0), (1, 1, 1)}


def test_score_errors(four13):
    with pytest.raises(ValueError):
        pr.p3_score(four13, np.ones(3) / math.sqrt(3))
    with pytest.raises(ValueError):
        pr.p3_score(four13, np.ones(4))


def test_score_report_roundtrip(four13):
    rep = pr.p3_score(four13, ob.optimal_state(four13))
    assert pr.ScoreReport.from_dict(rep.to_dict()) == rep
    assert abs(rep.p3 - np.mean(rep.per_time)) <= 1e-12


@pytest.mark.parametrize("j,expected", [(0.5, 0.5), (1, 0.5), (1.5, 0.75)])
def test_max_p3_spin(j, expected):
    assert pr.max_p3(ob.make_spin(j))[0] == pytest.approx(expected, abs=1e-9)


@given(st.floats(0.01, 10), st.floats(1.001, 100))
def test_saturation(xp, ratio):
    pair = ob.make_four_level(xp, xp * ratio)
    top, psi = pr.max_p3(pair)
    g = pr.general_bound(pr.spectrum(pair))
    assert abs(top - g) <= 1e-9
    assert pr.p3_score(pair, psi).p3 == pytest.approx(top, abs=1e-9)


@pytest.mark.parametrize("pair", builtin_pairs(), ids=lambda p: p.label)
def test_bound_soundness(pair):
    rng = np.random.default_rng(17)
    g = pr.general_bound(pr.spectrum(pair))
    assert pr.max_p3(pair)[0] <= g + 1e-9
    for _ in range(200):
        assert pr.p3_score(pair, sp.random_state(pair.dim, rng)).p3 <= g + 1e-9


@pytest.mark.parametrize("pair", builtin_pairs(), ids=lambda p: p.label)
def test_mean_sum_zero(pair):
    rng = np.random.default_rng(5)
    states = [sp.random_state(pair.dim, rng) for _ in range(100)]
    assert pr.check_mean_sum_zero(pair, states) <= 1e-9 * sp.op_norm(pair.X)


def test_mean_sum_detects_shift(four13):
    X0, X1, X2 = four13.probes()
    bad = ob.PrecessingPair(four13.X, four13.Y, hamiltonian=four13.hamiltonian, measured=(X0, X1 + np.eye(4), X2))
    rng = np.random.default_rng(1)
    assert pr.check_mean_sum_zero(bad, [sp.random_state(4, rng) for _ in range(10)]) == pytest.approx(1, abs=1e-9)
    assert pr.check_mean_sum_zero(four13, [ob.optimal_state(four13)]) <= 1e-12


def test_dimension_witness():
    r1 = pr.dimension_witness(ob.make_spin(1))
    assert r1.distinct_levels == 3 and r1.trivial
    np.testing.assert_allclose(r1.p3_range, [0.5, 0.5], atol=1e-9)
    r12 = pr.dimension_witness(ob.make_spin(0.5))
    assert r12.distinct_levels == 2 and r12.trivial
    r4 = pr.dimension_witness(ob.make_four_level(1, 3))
    assert r4.distinct_levels == 4 and not r4.trivial
    np.testing.assert_allclose(r4.p3_range, [0.25, 0.75], atol=1e-9)
    with pytest.raises(ValueError):
        pr.dimension_witness(ob.make_clock(6))


def test_reflected_state_reaches_minimum(four13):
    # the reflected optimal state exp(-i pi sum n|n><n|)|P3> scores 1 - 3/4
    R = np.diag(np.exp(-1j * np.pi * np.arange(4)))
    assert pr.p3_score(four13, R @ ob.optimal_state(four13)).p3 == pytest.approx(0.25, abs=1e-12)


def test_random_three_level_ladders_are_trivial(rng):
    for _ in range(20):
        rep = pr.dimension_witness(ob.random_ladder(3, rng, max_degeneracy=3))
        assert rep.trivial and rep.distinct_levels == 3


def test_random_four_level_ladders_can_beat_half(rng):
    assert any(not pr.dimension_witness(ob.random_ladder(4, rng)).trivial for _ in range(10))


def _classical_oracle(N):
    best = 0.0
    for n in range(N):
        s = 0.0
        for k in range(3):
            c = math.cos(2 * math.pi * (n + k * N / 3) / N)
            s += 1.0 if c > 1e-9 else 0.0 if c < -1e-9 else 0.5
        best = max(best, s / 3)
    return best


@pytest.mark.parametrize("N", [6, 12, 18, 24, 60, 120])
def test_classical_clock(N):
    assert pr.classical_clock_max_p3(N) == 2 / 3
    assert max(pr.classical_clock_scores(N)) == Fraction(2, 3)
    assert _classical_oracle(N) == pytest.approx(2 / 3, abs=1e-15)
    with pytest.raises(ValueError):
        pr.classical_clock_max_p3(N + 1)


@pytest.mark.parametrize("pair", [ob.make_four_level(1, 3), ob.make_spin(1.5), ob.make_clock(12)],
                         ids=lambda p: p.label)
def test_embed_real(pair):
    enc = pr.embed_real(pair)
    assert enc.dim == 2 * pair.dim
    for Xk in enc.probes():
        assert np.abs(Xk.imag).max() <= 1e-12
    assert np.abs(enc.X.imag).max() <= 1e-12 and np.abs(enc.Y.imag).max() <= 1e-12
    U = enc.step(1)
    assert np.abs(U.imag).max() <= 1e-12
    np.testing.assert_allclose(U.conj().T @ U, np.eye(enc.dim), atol=1e-12)
    np.testing.assert_allclose(pr.spectrum(enc).outcomes, pr.spectrum(pair).outcomes, atol=1e-9)
    rng = np.random.default_rng(0)
    for psi in [pr.max_p3(pair)[1], sp.random_state(pair.dim, rng)]:
        assert pr.p3_score(enc, pr.encode_state_real(psi)).p3 == pytest.approx(pr.p3_score(pair, psi).p3, abs=1e-9)


def test_embed_real_optimal(four13):
    enc = pr.embed_real(four13)
    np.testing.assert_allclose(enc.X, np.kron(four13.X, np.eye(2)), atol=1e-15)
    assert pr.p3_score(enc, pr.encode_state_real(ob.optimal_state(four13))).p3 == pytest.approx(0.75, abs=1e-9)


def test_embed_grassmann(four13):
    same = pr.embed_grassmann(four13, 1)
    np.testing.assert_allclose(same.X, four13.X)
    np.testing.assert_allclose(same.hamiltonian, four13.hamiltonian)
    enc = pr.embed_grassmann(four13, 2)
    psi = ob.optimal_state(four13)
    assert pr.p3_score(enc, pr.encode_state_grassmann(psi, 2)).p3 == pytest.approx(0.75, abs=1e-9)
    np.testing.assert_allclose(pr.spectrum(enc).outcomes, pr.spectrum(four13).outcomes, atol=1e-12)
    rng = np.random.default_rng(2)
    for _ in range(5):
        phi = sp.random_state(4, rng)
        rho = pr.encode_state_grassmann(phi, 3)
        e3 = pr.embed_grassmann(four13, 3)
        for A, B in zip(four13.probes(), e3.probes()):
            assert sp.expectation(B, rho) == pytest.approx(sp.expectation(A, phi), abs=1e-12)
    with pytest.raises(ValueError):
        pr.embed_grassmann(four13, 0)


def test_embed_discrete(clock60):
    enc = pr.embed_grassmann(clock60, 2)
    assert not enc.continuous
    psi = ob.optimal_state(clock60)
    assert pr.p3_score(enc, pr.encode_state_grassmann(psi, 2)).p3 == pytest.approx(G60, abs=1e-9)


@pytest.mark.parametrize("pair", [ob.make_four_level(0.3, 2.0), ob.make_four_level(1, 3), ob.make_clock(6),
                                  ob.make_clock(12), ob.make_clock(60)], ids=lambda p: p.label)
def test_reflection_symmetry(pair):
    lo, hi = pr.score_range(pair)
    assert lo + hi == pytest.approx(1.0, abs=1e-9)
