"""Uniformly precessing observable families.

A :class:`PrecessingPair` holds ``(X, Y)`` together with the dynamics that
carries ``X`` through the three probing times. Units: hbar = omega = 1, so the
continuous probing times are ``t_k = 2 pi k / 3``; discrete evolvers advance by
one step of ``U`` per probing time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import spectral
from .spectral import as_hermitian, conjugate, unitary_from_hamiltonian

PRECESSION_TOL = 1e-9
PROBE_ANGLES = tuple(2 * math.pi * k / 3 for k in range(3))


class PrecessionError(ValueError):
    """Raised when a pair fails the uniform-precession condition."""


# -- family descriptors -----------------------------------------------------


@dataclass(frozen=True)
class FourLevel:
    x_plus: float
    x_minus: float

    def __post_init__(self):
        if not (self.x_minus > self.x_plus > 0):
            raise ValueError(f"four-level family needs x_minus > x_plus > 0, got {self.x_plus}, {self.x_minus}")


@dataclass(frozen=True)
class Spin:
    j: float

    def __post_init__(self):
        twice = 2 * self.j
        if twice < 1 or abs(twice - round(twice)) > 1e-12:
            raise ValueError(f"j must be a positive half-integer, got {self.j}")


@dataclass(frozen=True)
class Clock:
    N: int
    l: float = 1.0
    x_plus: float | None = None
    x_minus: float | None = None

    def __post_init__(self):
        if int(self.N) != self.N or self.N <= 0 or self.N % 6:
            raise ValueError(f"N must be a positive multiple of 6, got {self.N}")
        if self.l <= 0:
            raise ValueError("l must be positive")
        xp, xm = self.resolved()
        if not (xm > xp > 0):
            raise ValueError(f"clock block needs x_minus > x_plus > 0, got {xp}, {xm}")

    def resolved(self) -> tuple[float, float]:
        """``(x_plus, x_minus)`` with unset values taken from the clock spectrum."""
        xp, xm = clock_extremes(self.N, self.l)
        return (xp if self.x_plus is None else self.x_plus,
                xm if self.x_minus is None else self.x_minus)


@dataclass(frozen=True, eq=False)
class Raw:
    X: np.ndarray
    Y: np.ndarray
    H: np.ndarray | None = None
    U: np.ndarray | None = None
    measured: tuple | None = None

    def __post_init__(self):
        if (self.H is None) == (self.U is None):
            raise ValueError("raw family needs exactly one evolver: H or U")


FamilySpec = Union[FourLevel, Spin, Clock, Raw]


def clock_extremes(N: int, l: float = 1.0) -> tuple[float, float]:
    """Smallest positive and largest negative magnitude of ``{l cos(2 pi n / N)}``."""
    return l * math.cos(2 * math.pi * (math.ceil(N / 4) - 1) / N), float(l)


# -- the pair ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PrecessingPair:
    """Observables ``X``, ``Y`` and their evolver.

    Exactly one of ``hamiltonian`` (continuous, ``t_k = 2 pi k / 3``) or
    ``unitary`` (one step per probing time) is set. ``measured`` optionally
    overrides the three probed observables, for studying pairs that break
    precession on purpose.
    """

    X: np.ndarray
    Y: np.ndarray
    hamiltonian: np.ndarray | None = None
    unitary: np.ndarray | None = None
    label: str = "raw"
    family: FamilySpec | None = None
    measured: tuple | None = field(default=None, repr=False)
    _cache: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        X = as_hermitian(self.X)
        Y = as_hermitian(self.Y)
        if X.shape != Y.shape:
            raise ValueError("X and Y dimensions differ")
        if (self.hamiltonian is None) == (self.unitary is None):
            raise ValueError("exactly one of hamiltonian or unitary must be given")
        if self.hamiltonian is not None:
            H = as_hermitian(self.hamiltonian)
            if H.shape != X.shape:
                raise ValueError("Hamiltonian dimension differs from X")
            object.__setattr__(self, "hamiltonian", H)
        else:
            U = np.asarray(self.unitary, dtype=complex)
            if U.shape != X.shape:
                raise ValueError("unitary dimension differs from X")
            if np.abs(U.conj().T @ U - np.eye(U.shape[0])).max() > 1e-10:
                raise ValueError("evolver is not unitary")
            object.__setattr__(self, "unitary", U)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)
        if self.measured is not None:
            ms = tuple(as_hermitian(m) for m in self.measured)
            if len(ms) != 3 or any(m.shape != X.shape for m in ms):
                raise ValueError("measured must hold three operators of the same dimension as X")
            object.__setattr__(self, "measured", ms)

    @property
    def dim(self) -> int:
        return self.X.shape[0]

    @property
    def continuous(self) -> bool:
        return self.hamiltonian is not None

    @property
    def times(self) -> tuple:
        """Probing times (continuous) or step counts (discrete)."""
        return PROBE_ANGLES if self.continuous else (0, 1, 2)

    def step(self, k: int) -> np.ndarray:
        """The Schroedinger-picture evolution operator up to probing time ``k``."""
        if self.continuous:
            return unitary_from_hamiltonian(self.hamiltonian, self.times[k])
        return np.linalg.matrix_power(self.unitary, k)

    def evolved(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        """``(X_k, Y_k)`` from the dynamics, ignoring any ``measured`` override."""
        U = self.step(k)
        return conjugate(self.X, U), conjugate(self.Y, U)

    def probes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """The three measured observables ``(X_0, X_1, X_2)``."""
        if self.measured is not None:
            return self.measured
        return self.cached("probes", lambda: tuple(self.evolved(k)[0] for k in range(3)))

    def cached(self, key, compute):
        """Memoize a derived quantity; arrays are stored read-only."""
        try:
            return self._cache[key]
        except KeyError:
            pass
        value = compute()
        for a in value if isinstance(value, (tuple, list)) else (value,):
            if isinstance(a, np.ndarray):
                a.setflags(write=False)
        self._cache[key] = value
        return value


# -- constructors -----------------------------------------------------------


def four_level_xy(x_plus: float, x_minus: float) -> tuple[np.ndarray, np.ndarray]:
    a = x_minus - x_plus
    b = math.sqrt(x_plus * x_minus)
    X = np.zeros((4, 4), dtype=complex)
    Y = np.zeros((4, 4), dtype=complex)
    X[1, 2] = X[2, 1] = a
    Y[1, 2], Y[2, 1] = -1j * a, 1j * a
    for i, j in ((0, 1), (2, 3)):
        X[i, j] = X[j, i] = b
        Y[i, j], Y[j, i] = -1j * b, 1j * b
    return X, Y


def make_four_level(x_plus: float, x_minus: float) -> PrecessingPair:
    """Four-level pair with spectrum ``{-x_minus, -x_plus, x_plus, x_minus}``.

    The evolver is the ladder Hamiltonian ``diag(0, 1, 2, 3)``.
    """
    spec = FourLevel(float(x_plus), float(x_minus))
    X, Y = four_level_xy(spec.x_plus, spec.x_minus)
    pair = PrecessingPair(X, Y, hamiltonian=np.diag(np.arange(4.0)).astype(complex),
                          label=f"four_level(x_plus={spec.x_plus:g}, x_minus={spec.x_minus:g})", family=spec)
    _require_precession(pair)
    return pair


def four_level_eigenvectors(x_plus: float, x_minus: float) -> dict[float, np.ndarray]:
    """Closed-form eigenvectors of the four-level ``X``, keyed by eigenvalue."""
    sp, sm = math.sqrt(x_plus), math.sqrt(x_minus)
    out = {}
    for s in (1, -1):
        out[s * x_minus] = spectral.normalize([sp, s * sm, sm, s * sp])
        out[s * x_plus] = spectral.normalize([sm, s * sp, -sp, -s * sm])
    return out


def spin_matrices(j: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(J_x, J_y, J_z)`` in the basis ``m = j, j-1, ..., -j`` with hbar = 1."""
    m = np.arange(j, -j - 1, -1)
    jp = np.diag(np.sqrt(j * (j + 1) - m[1:] * (m[1:] + 1)), 1).astype(complex)
    jx = 0.5 * (jp + jp.conj().T)
    jy = -0.5j * (jp - jp.conj().T)
    return jx, jy, np.diag(m).astype(complex)


def make_spin(j: float) -> PrecessingPair:
    spec = Spin(float(j))
    jx, jy, jz = spin_matrices(spec.j)
    pair = PrecessingPair(jx, jy, hamiltonian=-jz, label=f"spin(j={spec.j:g})", family=spec)
    _require_precession(pair)
    return pair


def shift_operator(N: int) -> np.ndarray:
    S = np.zeros((N, N), dtype=complex)
    S[np.arange(1, N), np.arange(N - 1)] = 1.0
    S[0, N - 1] = 1.0
    return S


def _phase_step(n: int) -> np.ndarray:
    return np.diag(np.exp(-2j * np.pi / 3 * np.arange(n)))


def make_clock(N: int, l: float = 1.0, x_plus: float | None = None,
               x_minus: float | None = None) -> PrecessingPair:
    """Clock-face quadratures of an ``N``-division shift, direct-summed with the four-level pair.

    ``U`` applies ``exp(-i 2 pi n / 3)`` to level ``n`` of each block separately.
    """
    spec = Clock(int(N), float(l), x_plus, x_minus)
    xp, xm = spec.resolved()
    S = shift_operator(spec.N)
    cx = 0.5 * spec.l * (S.conj().T + S)
    cy = 0.5 * spec.l / 1j * (S.conj().T - S)
    X4, Y4 = four_level_xy(xp, xm)
    U = spectral.block_diag(_phase_step(spec.N), _phase_step(4))
    pair = PrecessingPair(spectral.direct_sum(cx, X4), spectral.direct_sum(cy, Y4), unitary=U,
                          label=f"clock(N={spec.N}, l={spec.l:g})", family=spec)
    _require_precession(pair)
    return pair


def clock_fourier_state(N: int, n: int) -> np.ndarray:
    """Eigenstate ``sum_n' exp(i 2 pi n n' / N)|n'>`` of the clock block, zero on the four-level block."""
    if not 0 <= n < N:
        raise ValueError(f"n must lie in [0, {N}), got {n}")
    psi = np.zeros(N + 4, dtype=complex)
    psi[:N] = np.exp(2j * np.pi * n * np.arange(N) / N) / math.sqrt(N)
    return psi


def optimal_state(pair: PrecessingPair) -> np.ndarray:
    """``(|0> - |3>)/sqrt(2)`` on the four-level block of a four-level or clock pair."""
    fam = pair.family
    if isinstance(fam, FourLevel):
        offset = 0
    elif isinstance(fam, Clock):
        offset = fam.N
    else:
        raise ValueError(f"no closed-form optimal state for {pair.label}")
    psi = np.zeros(pair.dim, dtype=complex)
    psi[offset], psi[offset + 3] = 1 / math.sqrt(2), -1 / math.sqrt(2)
    return psi


def random_ladder(n_levels: int, rng: np.random.Generator, max_degeneracy: int = 2,
                  offset: float | None = None) -> PrecessingPair:
    """Random pair driven by an equally spaced Hamiltonian with ``n_levels`` levels.

    ``A = (X + iY)/2`` is a random lowering operator between adjacent levels,
    which makes ``(X, Y)`` precess uniformly at all times.
    """
    degs = rng.integers(1, max_degeneracy + 1, size=n_levels)
    energies = np.repeat(np.arange(n_levels, dtype=float), degs)
    if offset is None:
        offset = float(rng.uniform(-2, 2))
    dim = energies.size
    starts = np.concatenate([[0], np.cumsum(degs)])
    A = np.zeros((dim, dim), dtype=complex)
    for n in range(n_levels - 1):
        lo = slice(starts[n], starts[n + 1])
        hi = slice(starts[n + 1], starts[n + 2])
        A[lo, hi] = rng.standard_normal((degs[n], degs[n + 1])) + 1j * rng.standard_normal((degs[n], degs[n + 1]))
    X = A + A.conj().T
    Y = -1j * (A - A.conj().T)
    H = np.diag(energies + offset).astype(complex)
    raw = Raw(X, Y, H=H)
    pair = PrecessingPair(X, Y, hamiltonian=H, label=f"ladder(levels={n_levels}, dim={dim})", family=raw)
    _require_precession(pair)
    return pair


def from_raw(spec: Raw, check: bool = True) -> PrecessingPair:
    pair = PrecessingPair(spec.X, spec.Y, hamiltonian=spec.H, unitary=spec.U, label="raw",
                          family=spec, measured=spec.measured)
    if check:
        _require_precession(pair)
    return pair


def build_pair(spec: FamilySpec, check: bool = True) -> PrecessingPair:
    if isinstance(spec, FourLevel):
        return make_four_level(spec.x_plus, spec.x_minus)
    if isinstance(spec, Spin):
        return make_spin(spec.j)
    if isinstance(spec, Clock):
        return make_clock(spec.N, spec.l, spec.x_plus, spec.x_minus)
    if isinstance(spec, Raw):
        return from_raw(spec, check=check)
    raise TypeError(f"unknown family spec {spec!r}")


# -- precession check -------------------------------------------------------


@dataclass(frozen=True)
class PrecessionReport:
    max_residual: float
    threshold: float
    passed: bool

    def to_dict(self) -> dict:
        return {"max_residual": self.max_residual, "threshold": self.threshold, "pass": self.passed}


def verify_precession(pair: PrecessingPair, tol: float = PRECESSION_TOL) -> PrecessionReport:
    """Compare ``X_k, Y_k`` with the rotation of ``(X_0, Y_0)`` by ``2 pi k / 3``.

    Residuals are spectral norms; the pass threshold is ``tol * ||X_0||``.
    The measured observables are used for ``X_k`` when the pair overrides them.
    """
    probes = pair.probes()
    X0 = probes[0]
    Y0 = pair.evolved(0)[1]
    worst = 0.0
    for k, ang in enumerate(PROBE_ANGLES):
        c, s = math.cos(ang), math.sin(ang)
        Yk = pair.evolved(k)[1]
        rx = np.linalg.norm(probes[k] - c * X0 - s * Y0, 2)
        ry = np.linalg.norm(Yk - c * Y0 + s * X0, 2)
        worst = max(worst, rx, ry)
    thr = tol * max(np.linalg.norm(X0, 2), 1e-300)
    return PrecessionReport(float(worst), float(thr), bool(worst <= thr))


def _require_precession(pair: PrecessingPair) -> None:
    rep = verify_precession(pair)
    if not rep.passed:
        raise PrecessionError(
            f"{pair.label} does not precess uniformly: residual {rep.max_residual:.3e} > {rep.threshold:.3e}"
        )


# -- JSON form --------------------------------------------------------------


def family_to_json(spec: FamilySpec) -> dict:
    if isinstance(spec, FourLevel):
        return {"family": "four_level", "x_plus": spec.x_plus, "x_minus": spec.x_minus}
    if isinstance(spec, Spin):
        return {"family": "spin", "j": spec.j}
    if isinstance(spec, Clock):
        out = {"family": "clock", "N": spec.N, "l": spec.l}
        if spec.x_plus is not None:
            out["x_plus"] = spec.x_plus
        if spec.x_minus is not None:
            out["x_minus"] = spec.x_minus
        return out
    if isinstance(spec, Raw):
        out = {"family": "raw", "X": spectral.matrix_to_json(spec.X), "Y": spectral.matrix_to_json(spec.Y)}
        if spec.H is not None:
            out["evolver"] = {"H": spectral.matrix_to_json(spec.H)}
        else:
            out["evolver"] = {"U": spectral.matrix_to_json(spec.U)}
        if spec.measured is not None:
            out["measured"] = [spectral.matrix_to_json(m) for m in spec.measured]
        return out
    raise TypeError(f"unknown family spec {spec!r}")


def family_from_json(obj: dict) -> FamilySpec:
    kind = obj.get("family")
    if kind == "four_level":
        return FourLevel(float(obj["x_plus"]), float(obj["x_minus"]))
    if kind == "spin":
        return Spin(float(obj["j"]))
    if kind == "clock":
        return Clock(int(obj["N"]), float(obj.get("l", 1.0)),
                     None if obj.get("x_plus") is None else float(obj["x_plus"]),
                     None if obj.get("x_minus") is None else float(obj["x_minus"]))
    if kind == "raw":
        ev = obj.get("evolver", {})
        H = spectral.matrix_from_json(ev["H"]) if "H" in ev else None
        U = spectral.matrix_from_json(ev["U"]) if "U" in ev else None
        measured = obj.get("measured")
        if measured is not None:
            measured = tuple(spectral.matrix_from_json(m) for m in measured)
        return Raw(spectral.matrix_from_json(obj["X"]), spectral.matrix_from_json(obj["Y"]), H=H, U=U,
                   measured=measured)
    raise ValueError(f"unknown family {kind!r}")
