"""Reproduction checks for the headline numbers, each with its tolerance and time budget.

``run_all()`` is what ``precess repro`` prints and what the acceptance tests
assert on.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import observables as ob
from . import probspace as ps
from . import protocol as pr
from . import spectral

HARMONIC_OSCILLATOR_BOUND = 0.730822


@dataclass
class Outcome:
    key: str
    title: str
    passed: bool
    detail: str
    elapsed: float
    budget: float

    @property
    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.key:<3} {self.title:<34} {self.detail}  ({self.elapsed:.3f}s / {self.budget:g}s)"


CRITERIA = []


def criterion(key: str, title: str, budget: float):
    def wrap(fn):
        def run() -> Outcome:
            t0 = time.perf_counter()
            try:
                ok, detail = fn()
            except Exception as exc:  # a crash is a failed criterion, reported with its cause
                ok, detail = False, f"{type(exc).__name__}: {exc}"
            dt = time.perf_counter() - t0
            if dt >= budget:
                ok, detail = False, detail + f"; over time budget"
            return Outcome(key, title, bool(ok), detail, dt, budget)

        run.key = key
        run.__name__ = fn.__name__
        CRITERIA.append(run)
        return run

    return wrap


@criterion("1", "spin-3/2 maximum score", 0.1)
def spin_three_halves():
    p, _ = pr.max_p3(ob.make_spin(1.5))
    return abs(p - 0.75) <= 1e-9, f"max P3 = {p:.15f} (target 0.75)"


@criterion("2", "general bound saturation", 5.0)
def bound_saturation():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        xp, xm = np.sort(rng.uniform(0.05, 10.0, size=2))
        if xm - xp < 1e-3:
            xm = xp + 1.0
        p, _ = pr.max_p3(ob.make_four_level(xp, xm))
        worst = max(worst, abs(p - 1 / (1 + xp / xm)))
    return worst <= 1e-9, f"max |max P3 - bound| = {worst:.2e} over 100 pairs"


@criterion("3", "clock bound, N=60", 1.0)
def clock_bound():
    pair = ob.make_clock(60)
    g = pr.general_bound(pr.spectrum(pair))
    closed = 1 / (1 + math.cos(7 * math.pi / 15))
    score = pr.p3_score(pair, ob.optimal_state(pair)).p3
    ok = abs(g - closed) <= 1e-12 and abs(score - closed) <= 1e-9 and round(g, 3) == 0.905
    return ok, f"bound = {g:.12f}, closed form {closed:.12f}, optimal-state score {score:.12f}"


@criterion("4", "beats the oscillator bound", 0.1)
def oscillator_comparison():
    pair = ob.make_four_level(1.0, 2.72)
    p = pr.p3_score(pair, ob.optimal_state(pair)).p3
    ok = p >= 0.731 > HARMONIC_OSCILLATOR_BOUND and p > HARMONIC_OSCILLATOR_BOUND and abs(p - 2.72 / 3.72) <= 1e-9
    return ok, f"P3 = {p:.6f} >= 0.731 > {HARMONIC_OSCILLATOR_BOUND}"


@criterion("5", "classical clock baseline", 0.1)
def classical_baseline():
    vals = {N: max(pr.classical_clock_scores(N)) for N in (6, 12, 60)}
    ok = all(v == Fraction(2, 3) for v in vals.values()) and all(pr.classical_clock_max_p3(N) == 2 / 3 for N in vals)
    return ok, "max P3 = " + ", ".join(f"{v} (N={N})" for N, v in vals.items())


@criterion("6", "at most three levels score 1/2", 10.0)
def dimension_witness():
    rng = np.random.default_rng(6)
    pairs = [ob.make_spin(0.5), ob.make_spin(1)] + [ob.random_ladder(3, rng, max_degeneracy=3) for _ in range(50)]
    worst = 0.0
    for pair in pairs:
        rep = pr.dimension_witness(pair)
        if rep.distinct_levels > 3:
            return False, f"{pair.label} has {rep.distinct_levels} levels"
        worst = max(worst, abs(rep.p3_range[0] - 0.5), abs(rep.p3_range[1] - 0.5))
    return worst <= 1e-9, f"max deviation from 1/2 = {worst:.2e} over {len(pairs)} pairs"


def _random_scores(pair, n, rng):
    T = np.array(pr.step_operators(pair))
    Z = rng.standard_normal((n, pair.dim)) + 1j * rng.standard_normal((n, pair.dim))
    Z /= np.linalg.norm(Z, axis=1)[:, None]
    return np.einsum("si,kij,sj->s", Z.conj(), T, Z).real / 3


@criterion("7", "bound soundness, random states", 30.0)
def bound_soundness():
    rng = np.random.default_rng(7)
    worst = -math.inf
    for pair in (ob.make_four_level(1.0, 3.0), ob.make_spin(1.5), ob.make_clock(12)):
        g = pr.general_bound(pr.spectrum(pair))
        worst = max(worst, float(np.max(_random_scores(pair, 1000, rng) - g)))
    return worst <= 1e-9, f"max (P3 - bound) = {worst:.3e}"


def builtin_pairs():
    return [ob.make_four_level(1, 3), ob.make_four_level(1, 2.72), ob.make_four_level(0.2, 7.5),
            *(ob.make_spin(j) for j in (0.5, 1, 1.5, 2, 2.5)), *(ob.make_clock(N) for N in (6, 12, 60))]


@criterion("8", "precession and mean-sum checks", 5.0)
def precession_and_means():
    rng = np.random.default_rng(8)
    worst_prec, worst_mean = 0.0, 0.0
    ok = True
    for pair in builtin_pairs():
        rep = ob.verify_precession(pair, 1e-9)
        ok &= rep.passed
        worst_prec = max(worst_prec, rep.max_residual)
        states = [spectral.random_state(pair.dim, rng) for _ in range(100)]
        m = pr.check_mean_sum_zero(pair, states)
        ok &= m <= 1e-9 * spectral.op_norm(pair.probes()[0])
        worst_mean = max(worst_mean, m)
    return ok, f"max precession residual {worst_prec:.2e}, max |sum <X_k>| {worst_mean:.2e}"


@criterion("9", "probability-space geometry", 180.0)
def probability_space():
    spin = ob.make_spin(1.5)
    res = ps.sample_surface(spin, 500, seed=9, tol=1e-4)
    pts = ps.cloud_points(res, with_support=False)
    gap = max(r.gap for r in res)
    maxp3 = float(pts.mean(axis=1).max())
    cube = ps.full_cube()
    in_cube = all(cube.contains(p, 1e-9) for p in pts)
    outside = int(sum(ps.facet_distance(p) > 1e-9 for p in pts))
    ok_spin = gap <= 1e-4 and abs(maxp3 - 0.75) <= 1e-4 and in_cube and outside > 0 and not any(r.error for r in res)

    clock = ob.make_clock(60)
    cres = ps.sample_surface(clock, 200, seed=9, tol=1e-4)
    hull = ps.clock_hull(60, pr.general_bound(pr.spectrum(clock)))
    cloud = ps.cloud_points(cres)
    covered = [ps.hull_contains(cloud, v, 1e-3) for v in hull.vertices]
    ok = ok_spin and all(covered)
    return ok, (f"spin-3/2: gap {gap:.1e}, max P3 {maxp3:.6f}, {outside}/{len(pts)} beyond facet; "
                f"clock: {sum(covered)}/{len(covered)} hull vertices covered")


@criterion("10", "real and Grassmann embeddings", 1.0)
def embeddings():
    pair = ob.make_four_level(1, 3)
    psi = ob.optimal_state(pair)
    p = pr.p3_score(pair, psi).p3
    p_real = pr.p3_score(pr.embed_real(pair), pr.encode_state_real(psi)).p3
    p_grass = pr.p3_score(pr.embed_grassmann(pair, 2), pr.encode_state_grassmann(psi, 2)).p3
    worst = max(abs(p_real - p), abs(p_grass - p))
    return worst <= 1e-9, f"P3 = {p:.12f}, real {p_real:.12f}, Grassmann {p_grass:.12f}"


@criterion("11", "reflection symmetry of scores", 1.0)
def reflection_symmetry():
    rng = np.random.default_rng(11)
    pairs = [ob.make_four_level(*np.sort(rng.uniform(0.1, 5, 2))) for _ in range(5)]
    pairs += [ob.make_clock(N) for N in (6, 12, 60)]
    worst = max(abs(sum(pr.score_range(p)) - 1.0) for p in pairs)
    return worst <= 1e-9, f"max |min + max - 1| = {worst:.2e}"


def run_all(keys=None) -> list[Outcome]:
    return [run() for run in CRITERIA if keys is None or run.key in keys]
