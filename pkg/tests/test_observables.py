import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from precess import observables as ob
from precess import protocol as pr
from precess import spectral as sp

from .conftest import builtin_pairs


def test_four_level_matrix_elements(four13):
    X = four13.X
    assert X[1, 2] == pytest.approx(2)
    assert X[0, 1] == pytest.approx(math.sqrt(3)) and X[2, 3] == pytest.approx(math.sqrt(3))
    jx = ob.spin_matrices(1.5)[0]
    np.testing.assert_allclose(X, 2 * jx, atol=1e-15)
    np.testing.assert_allclose(four13.Y, 2 * ob.spin_matrices(1.5)[1], atol=1e-15)


def test_four_level_spectrum_272():
    w = np.linalg.eigvalsh(ob.make_four_level(1, 2.72).X)
    np.testing.assert_allclose(w, [-2.72, -1, 1, 2.72], atol=1e-12)


@pytest.mark.parametrize("xp,xm", [(0, 1), (1, 1), (2, 1), (-1, 3)])
def test_four_level_rejects(xp, xm):
    with pytest.raises(ValueError):
        ob.make_four_level(xp, xm)


@given(st.floats(0.01, 10), st.floats(1.001, 50))
def test_four_level_closed_form_eigenvectors(xp, ratio):
    xm = xp * ratio
    X = ob.make_four_level(xp, xm).X
    vecs = ob.four_level_eigenvectors(xp, xm)
    V = np.column_stack(list(vecs.values()))
    np.testing.assert_allclose(V.conj().T @ V, np.eye(4), atol=1e-9)
    for lam, v in vecs.items():
        assert np.abs(X @ v - lam * v).max() <= 1e-9 * xm


def test_spin_matrices():
    jx, jy, jz = ob.spin_matrices(1.5)
    np.testing.assert_allclose(np.diag(jx, 1), [math.sqrt(3) / 2, 1, math.sqrt(3) / 2])
    np.testing.assert_allclose(np.linalg.eigvalsh(jx), [-1.5, -0.5, 0.5, 1.5], atol=1e-12)


@pytest.mark.parametrize("j", [0.5, 1, 1.5, 2, 2.5, 3.5])
def test_spin_algebra(j):
    jx, jy, jz = ob.spin_matrices(j)
    assert np.abs(jx @ jy - jy @ jx - 1j * jz).max() <= 1e-12
    np.testing.assert_allclose(jx @ jx + jy @ jy + jz @ jz, j * (j + 1) * np.eye(int(2 * j + 1)), atol=1e-9)


@pytest.mark.parametrize("j", [0, 0.3, -1, 1.25])
def test_spin_rejects(j):
    with pytest.raises(ValueError):
        ob.make_spin(j)


def test_spin_max_scores():
    assert pr.max_p3(ob.make_spin(1.5))[0] == pytest.approx(0.75, abs=1e-9)
    assert pr.max_p3(ob.make_spin(0.5))[0] == pytest.approx(0.5, abs=1e-9)


def test_clock_defaults():
    xp, xm = ob.clock_extremes(60, 1.0)
    assert xp == pytest.approx(0.104528, abs=1e-6)
    assert xm == 1.0
    # independent: smallest positive of the enumerated clock values
    vals = [math.cos(2 * math.pi * n / 60) for n in range(60)]
    assert xp == pytest.approx(min(v for v in vals if v > 1e-12), abs=1e-15)


def test_clock_six_block_multiplicities():
    pair = ob.make_clock(6)
    w = np.linalg.eigvalsh(pair.X[:6, :6])
    expected = sorted(math.cos(2 * math.pi * n / 6) for n in range(6))
    np.testing.assert_allclose(w, expected, atol=1e-12)
    values, counts = np.unique(np.round(w, 9), return_counts=True)
    assert dict(zip(values.tolist(), counts.tolist())) == {-1.0: 1, -0.5: 2, 0.5: 2, 1.0: 1}


@pytest.mark.parametrize("N", [0, 4, 9, 61])
def test_clock_rejects(N):
    with pytest.raises(ValueError):
        ob.make_clock(N)


def test_clock_fourier_state():
    psi = ob.clock_fourier_state(6, 0)
    np.testing.assert_allclose(psi[:6], np.full(6, 1 / math.sqrt(6)))
    np.testing.assert_allclose(psi[6:], 0)
    with pytest.raises(ValueError):
        ob.clock_fourier_state(6, 6)


@pytest.mark.parametrize("N", [6, 12, 60])
def test_clock_fourier_expectations_and_step(N):
    pair = ob.make_clock(N)
    for n in range(N):
        psi = ob.clock_fourier_state(N, n)
        assert sp.expectation(pair.X, psi) == pytest.approx(math.cos(2 * math.pi * n / N), abs=1e-12)
        stepped = pair.unitary @ psi
        target = ob.clock_fourier_state(N, (n - N // 3) % N)
        assert abs(abs(np.vdot(target, stepped)) - 1) < 1e-12


def test_optimal_state_scores(four13, clock60):
    assert pr.p3_score(four13, ob.optimal_state(four13)).p3 == pytest.approx(0.75, abs=1e-9)
    p = ob.make_four_level(1, 2.72)
    assert pr.p3_score(p, ob.optimal_state(p)).p3 == pytest.approx(2.72 / 3.72, abs=1e-9)
    g = 1 / (1 + math.cos(7 * math.pi / 15))
    assert pr.p3_score(clock60, ob.optimal_state(clock60)).p3 == pytest.approx(g, abs=1e-9)
    with pytest.raises(ValueError):
        ob.optimal_state(ob.make_spin(1.5))


@pytest.mark.parametrize("pair", builtin_pairs(), ids=lambda p: p.label)
def test_builtin_precession(pair):
    rep = ob.verify_precession(pair, 1e-9)
    assert rep.passed, rep
    w0 = np.linalg.eigvalsh(pair.probes()[0])
    for Xk in pair.probes()[1:]:
        np.testing.assert_allclose(np.linalg.eigvalsh(Xk), w0, atol=1e-9)


def test_flipped_y_fails(four13):
    bad = ob.PrecessingPair(four13.X, -four13.Y, hamiltonian=four13.hamiltonian)
    rep = ob.verify_precession(bad, 1e-9)
    assert not rep.passed
    assert rep.max_residual > 0.5 * sp.op_norm(four13.Y)
    with pytest.raises(ob.PrecessionError):
        ob.from_raw(ob.Raw(four13.X, -four13.Y, H=four13.hamiltonian))


@pytest.mark.parametrize("N", [6, 60])
def test_clock_blockwise_rotation(N):
    pair = ob.make_clock(N)
    cx, cy = pair.X[:N, :N], pair.Y[:N, :N]
    for k, Xk in enumerate(pair.probes()):
        a = 2 * math.pi * k / 3
        np.testing.assert_allclose(Xk[:N, :N], math.cos(a) * cx + math.sin(a) * cy, atol=1e-9)


def test_random_ladder_precesses(rng):
    for levels in (2, 3, 4, 5):
        pair = ob.random_ladder(levels, rng, max_degeneracy=3)
        assert ob.verify_precession(pair).passed
        # continuous precession, not only at the probing times
        for t in (0.3, 1.1):
            Xt = sp.evolve_heisenberg(pair.X, pair.hamiltonian, t)
            np.testing.assert_allclose(Xt, math.cos(t) * pair.X + math.sin(t) * pair.Y, atol=1e-9)


def test_family_json_roundtrip(four13):
    for spec in (ob.FourLevel(1.0, 3.0), ob.Spin(1.5), ob.Clock(60, 1.0), ob.Clock(12, 2.0, 0.5, 2.0)):
        assert ob.family_from_json(ob.family_to_json(spec)) == spec
    raw = ob.Raw(four13.X, four13.Y, H=four13.hamiltonian)
    back = ob.family_from_json(ob.family_to_json(raw))
    np.testing.assert_array_equal(back.X, raw.X)
    np.testing.assert_array_equal(back.H, raw.H)
    assert ob.build_pair(back).dim == 4
    with pytest.raises(ValueError):
        ob.family_from_json({"family": "boxworld"})
