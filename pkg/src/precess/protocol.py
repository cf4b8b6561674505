"""Scoring, the spectrum bound, and consistency checks for precessing pairs."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import spectral
from .observables import PrecessingPair, PrecessionError, Raw
from .spectral import DEFAULT_ZERO_TOL

CLASSICAL_BOUND = 2 / 3
SCORE_TOL = 1e-9


@dataclass(frozen=True)
class SpectrumInfo:
    outcomes: tuple
    x_plus: float | None
    x_minus: float | None
    has_zero: bool

    @classmethod
    def from_outcomes(cls, outcomes, zero_tol: float = DEFAULT_ZERO_TOL) -> "SpectrumInfo":
        vals = spectral.cluster_values(outcomes, zero_tol)
        thr = zero_tol * max(1.0, float(np.abs(vals).max())) if vals.size else 0.0
        vals = np.where(np.abs(vals) <= thr, 0.0, vals)
        pos = vals[vals > 0]
        neg = vals[vals < 0]
        return cls(
            outcomes=tuple(float(v) for v in vals),
            x_plus=float(pos.min()) if pos.size else None,
            x_minus=float(-neg.min()) if neg.size else None,
            has_zero=bool(np.any(vals == 0.0)),
        )

    def to_dict(self) -> dict:
        return {"outcomes": list(self.outcomes), "x_plus": self.x_plus, "x_minus": self.x_minus,
                "has_zero": self.has_zero}


def spectrum(pair: PrecessingPair, zero_tol: float = DEFAULT_ZERO_TOL) -> SpectrumInfo:
    """Distinct outcomes of ``X`` over the three probing times.

    Raises :class:`PrecessionError` when the probed spectra differ, which only
    happens for pairs whose measured observables do not come from one closed
    evolution.
    """
    probes = pair.probes()
    per_time = [np.linalg.eigvalsh(x) for x in probes]
    scale = max(1.0, max(float(np.abs(w).max()) for w in per_time))
    for k in (1, 2):
        if np.abs(per_time[k] - per_time[0]).max() > 1e-9 * scale:
            raise PrecessionError(f"spectrum of X_{k} differs from X_0 for {pair.label}: precession is broken")
    return SpectrumInfo.from_outcomes(np.concatenate(per_time), zero_tol)


def bound_from_extremes(x_plus: float | None, x_minus: float | None, has_zero: bool) -> float:
    if x_plus is None and x_minus is None:
        if not has_zero:
            raise ValueError("invalid spectrum: no outcomes")
        return 0.5
    if x_plus is None or x_minus is None:
        # one-sided spectra can only satisfy the mean-sum condition by sitting at zero
        return 0.5
    if x_plus < x_minus or not has_zero:
        return 1.0 / (1.0 + x_plus / x_minus)
    return 0.5


def general_bound(spec: SpectrumInfo) -> float:
    """Upper bound on the score for any theory with linear expectation values.

    Depends only on the smallest positive outcome, the most negative outcome,
    and whether zero is a possible outcome.
    """
    return bound_from_extremes(spec.x_plus, spec.x_minus, spec.has_zero)


@dataclass(frozen=True)
class ScoreReport:
    p3: float
    per_time: tuple
    classical_bound: float
    general_bound: float
    violates_classical: bool
    saturates_general: bool

    def to_dict(self) -> dict:
        return {
            "p3": self.p3,
            "per_time": list(self.per_time),
            "classical_bound": self.classical_bound,
            "general_bound": self.general_bound,
            "violates_classical": self.violates_classical,
            "saturates_general": self.saturates_general,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScoreReport":
        return cls(float(d["p3"]), tuple(float(x) for x in d["per_time"]), float(d["classical_bound"]),
                   float(d["general_bound"]), bool(d["violates_classical"]), bool(d["saturates_general"]))


def step_operators(pair: PrecessingPair, zero_tol: float = DEFAULT_ZERO_TOL) -> list[np.ndarray]:
    """``[Theta(X_0), Theta(X_1), Theta(X_2)]``."""
    return pair.cached(("theta", zero_tol), lambda: [spectral.heaviside(x, zero_tol) for x in pair.probes()])


def score_operator(pair: PrecessingPair, zero_tol: float = DEFAULT_ZERO_TOL) -> np.ndarray:
    return pair.cached(("q3", zero_tol), lambda: sum(step_operators(pair, zero_tol)) / 3)


def probabilities(pair: PrecessingPair, state, zero_tol: float = DEFAULT_ZERO_TOL) -> np.ndarray:
    """The tuple ``(<Theta(X_0)>, <Theta(X_1)>, <Theta(X_2)>)`` for a vector or density matrix."""
    spectral.as_density(state, pair.dim)
    return np.array([spectral.expectation(T, np.asarray(state)) for T in step_operators(pair, zero_tol)])


def p3_score(pair: PrecessingPair, state, zero_tol: float = DEFAULT_ZERO_TOL,
             score_tol: float = SCORE_TOL) -> ScoreReport:
    per = probabilities(pair, state, zero_tol)
    p3 = float(per.mean())
    g = general_bound(pair.cached(("spectrum", zero_tol), lambda: spectrum(pair, zero_tol)))
    return ScoreReport(
        p3=p3,
        per_time=tuple(float(x) for x in per),
        classical_bound=CLASSICAL_BOUND,
        general_bound=g,
        violates_classical=p3 > CLASSICAL_BOUND + score_tol,
        saturates_general=abs(p3 - g) <= score_tol,
    )


def max_p3(pair: PrecessingPair, zero_tol: float = DEFAULT_ZERO_TOL) -> tuple[float, np.ndarray]:
    """Largest quantum score and a state attaining it (top eigenvector of the score operator)."""
    es = spectral.eig_hermitian(score_operator(pair, zero_tol))
    return float(es.eigenvalues[-1]), es.eigenvectors[:, -1]


def score_range(pair: PrecessingPair, zero_tol: float = DEFAULT_ZERO_TOL) -> tuple[float, float]:
    w = np.linalg.eigvalsh(score_operator(pair, zero_tol))
    return float(w[0]), float(w[-1])


def check_mean_sum_zero(pair: PrecessingPair, states) -> float:
    """Largest ``|<X_0> + <X_1> + <X_2>|`` over the given states."""
    total = sum(pair.probes())
    return max((abs(spectral.expectation(total, np.asarray(s))) for s in states), default=0.0)


@dataclass(frozen=True)
class WitnessReport:
    distinct_levels: int
    p3_range: tuple
    trivial: bool

    def to_dict(self) -> dict:
        return {"distinct_levels": self.distinct_levels, "p3_range": list(self.p3_range), "trivial": self.trivial}


def dimension_witness(pair: PrecessingPair, zero_tol: float = DEFAULT_ZERO_TOL,
                      level_tol: float = 1e-9) -> WitnessReport:
    """Count energy levels and report the spread of achievable scores.

    With at most three distinct energies every state scores exactly 1/2; a
    pair contradicting that raises :class:`PrecessionError`.
    """
    if not pair.continuous:
        raise ValueError("dimension witness needs a continuous (Hamiltonian) evolver")
    levels = spectral.cluster_values(np.linalg.eigvalsh(pair.hamiltonian), level_tol)
    lo, hi = score_range(pair, zero_tol)
    trivial = abs(lo - 0.5) <= SCORE_TOL and abs(hi - 0.5) <= SCORE_TOL
    if levels.size <= 3 and not trivial:
        raise PrecessionError(
            f"{pair.label}: {levels.size} energy levels but score range ({lo:.12g}, {hi:.12g}) is not trivial"
        )
    return WitnessReport(int(levels.size), (lo, hi), trivial)


def _clock_step(m: int, N: int) -> Fraction:
    r = (4 * m) % (4 * N)
    if r < N or r > 3 * N:
        return Fraction(1)
    if r == N or r == 3 * N:
        return Fraction(1, 2)
    return Fraction(0)


def classical_clock_scores(N: int) -> list[Fraction]:
    """Exact score of every deterministic pointer position of an ``N``-division clock."""
    if int(N) != N or N <= 0 or N % 6:
        raise ValueError(f"N must be a positive multiple of 6, got {N}")
    return [sum((_clock_step(n + k * N // 3, N) for k in range(3)), Fraction(0)) / 3 for n in range(N)]


def classical_clock_max_p3(N: int) -> float:
    """Best classical clock score. Mixtures average deterministic scores, so the pointwise max suffices."""
    return float(max(classical_clock_scores(N)))


# -- embeddings -------------------------------------------------------------

_KET_PLUS_I = np.array([1, 1j]) / math.sqrt(2)
_KET_MINUS_I = np.array([1, -1j]) / math.sqrt(2)
_PROJ_PLUS_I = np.outer(_KET_PLUS_I, _KET_PLUS_I.conj())
_PROJ_MINUS_I = np.outer(_KET_MINUS_I, _KET_MINUS_I.conj())


def encode_real(op) -> np.ndarray:
    """``O (x) |i><i| + O* (x) |-i><-i|``; real for any complex ``O``."""
    op = np.asarray(op, dtype=complex)
    return np.kron(op, _PROJ_PLUS_I) + np.kron(op.conj(), _PROJ_MINUS_I)


def encode_state_real(state) -> np.ndarray:
    rho = spectral.as_density(state)
    return 0.5 * encode_real(rho)


def embed_real(pair: PrecessingPair) -> PrecessingPair:
    """Real-Hilbert-space encoding of ``pair`` in twice the dimension."""
    if pair.continuous:
        # exp(-iHt)* = exp(-i(-H*)t), so the conjugate block evolves under -H*
        H = pair.hamiltonian
        kw = {"hamiltonian": np.kron(H, _PROJ_PLUS_I) - np.kron(H.conj(), _PROJ_MINUS_I)}
    else:
        kw = {"unitary": encode_real(pair.unitary)}
    measured = None if pair.measured is None else tuple(encode_real(m) for m in pair.measured)
    X, Y = encode_real(pair.X), encode_real(pair.Y)
    return PrecessingPair(X, Y, label=f"real[{pair.label}]", measured=measured,
                          family=Raw(X, Y, H=kw.get("hamiltonian"), U=kw.get("unitary"), measured=measured), **kw)


def encode_state_grassmann(state, n: int) -> np.ndarray:
    rho = spectral.as_density(state)
    return np.kron(rho, np.eye(n)) / n


def embed_grassmann(pair: PrecessingPair, n: int) -> PrecessingPair:
    """``O -> O (x) 1_n`` for observables and dynamics."""
    if n < 1:
        raise ValueError("n must be at least 1")
    eye = np.eye(n)
    kw = ({"hamiltonian": np.kron(pair.hamiltonian, eye)} if pair.continuous
          else {"unitary": np.kron(pair.unitary, eye)})
    measured = None if pair.measured is None else tuple(np.kron(m, eye) for m in pair.measured)
    X, Y = np.kron(pair.X, eye), np.kron(pair.Y, eye)
    return PrecessingPair(X, Y, label=f"grassmann{n}[{pair.label}]", measured=measured,
                          family=Raw(X, Y, H=kw.get("hamiltonian"), U=kw.get("unitary"), measured=measured), **kw)
