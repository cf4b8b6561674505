"""Dense Hermitian linear algebra.

Operators are plain complex ``numpy`` arrays. Every public function validates
self-adjointness on entry and returns fresh arrays, so callers may share
inputs freely between threads.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERMITIAN_TOL = 1e-12
DEFAULT_ZERO_TOL = 1e-9


class NotHermitianError(ValueError):
    pass


@dataclass(frozen=True)
class EigenSystem:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_hermitian(M, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return ``M`` as a complex square array, rejecting non-Hermitian input.

    The asymmetry ``max|M - M^dagger|`` is compared against ``tol`` times the
    largest absolute entry.
    """
    A = np.array(M, dtype=complex)
    if A.ndim == 0:
        A = A.reshape(1, 1)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise NotHermitianError(f"expected a non-empty square matrix, got shape {A.shape}")
    scale = max(float(np.abs(A).max()), 1.0) if A.size else 1.0
    asym = float(np.abs(A - A.conj().T).max())
    if asym > tol * scale:
        raise NotHermitianError(
            f"matrix is not Hermitian: max|M - M^H| = {asym:.3e} > {tol:.1e} * {scale:.3e}"
        )
    return A


def eig_hermitian(M) -> EigenSystem:
    A = as_hermitian(M)
    w, v = np.linalg.eigh(A)
    return EigenSystem(w, v)


def op_norm(M) -> float:
    """Spectral norm of a Hermitian matrix (largest absolute eigenvalue)."""
    w = np.linalg.eigvalsh(as_hermitian(M))
    return float(np.abs(w).max())


def _zero_threshold(w: np.ndarray, zero_tol: float) -> float:
    return zero_tol * max(1.0, float(np.abs(w).max()))


def step_weights(w: np.ndarray, zero_tol: float = DEFAULT_ZERO_TOL) -> np.ndarray:
    """Heaviside of sorted eigenvalues with the convention that zero scores 1/2."""
    thr = _zero_threshold(w, zero_tol)
    return np.where(w > thr, 1.0, np.where(w < -thr, 0.0, 0.5))


def apply_function(M, f) -> np.ndarray:
    """``f(M)`` for Hermitian ``M`` with ``f`` acting on the eigenvalue array."""
    es = eig_hermitian(M)
    v = es.eigenvectors
    return (v * f(es.eigenvalues)) @ v.conj().T


def heaviside(M, zero_tol: float = DEFAULT_ZERO_TOL) -> np.ndarray:
    """Spectral projector onto the positive part plus half the kernel projector.

    An eigenvalue counts as zero when ``|lambda| <= zero_tol * max(1, ||M||)``.
    Degenerate eigenvalues always receive equal weights, so the result does not
    depend on the basis ``eigh`` picks inside a degenerate cluster.
    """
    if zero_tol < 0:
        raise ValueError("zero_tol must be nonnegative")
    out = apply_function(M, lambda w: step_weights(w, zero_tol))
    return 0.5 * (out + out.conj().T)


def sign_op(M, zero_tol: float = DEFAULT_ZERO_TOL) -> np.ndarray:
    H = heaviside(M, zero_tol)
    return 2.0 * H - np.eye(H.shape[0])


def unitary_from_hamiltonian(H, t: float) -> np.ndarray:
    """``exp(-i H t)`` via the eigendecomposition of ``H``."""
    es = eig_hermitian(H)
    v = es.eigenvectors
    return (v * np.exp(-1j * es.eigenvalues * t)) @ v.conj().T


def conjugate(M, U) -> np.ndarray:
    """``U^dagger M U``, symmetrized to remove rounding asymmetry."""
    out = U.conj().T @ M @ U
    return 0.5 * (out + out.conj().T)


def evolve_heisenberg(M, H, t: float) -> np.ndarray:
    """Heisenberg-picture evolution ``exp(iHt) M exp(-iHt)``."""
    A = as_hermitian(M)
    Hm = as_hermitian(H)
    if A.shape != Hm.shape:
        raise ValueError(f"dimension mismatch: operator {A.shape} vs Hamiltonian {Hm.shape}")
    return conjugate(A, unitary_from_hamiltonian(Hm, t))


def direct_sum(A, B) -> np.ndarray:
    A = as_hermitian(A)
    B = as_hermitian(B)
    n, m = A.shape[0], B.shape[0]
    out = np.zeros((n + m, n + m), dtype=complex)
    out[:n, :n] = A
    out[n:, n:] = B
    return out


def block_diag(*blocks) -> np.ndarray:
    """Block-diagonal assembly of arbitrary square blocks (unitaries included)."""
    blocks = [np.atleast_2d(np.asarray(b, dtype=complex)) for b in blocks]
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n), dtype=complex)
    i = 0
    for b in blocks:
        k = b.shape[0]
        out[i : i + k, i : i + k] = b
        i += k
    return out


def kron(A, B) -> np.ndarray:
    return np.kron(np.asarray(A, dtype=complex), np.asarray(B, dtype=complex))


def cluster_values(values, rel_tol: float = DEFAULT_ZERO_TOL) -> np.ndarray:
    """Sorted distinct values, merging neighbours closer than ``rel_tol * max(1, max|v|)``."""
    v = np.sort(np.asarray(values, dtype=float).ravel())
    if v.size == 0:
        return v
    thr = rel_tol * max(1.0, float(np.abs(v).max()))
    groups = [[v[0]]]
    for x in v[1:]:
        if x - groups[-1][-1] <= thr:
            groups[-1].append(x)
        else:
            groups.append([x])
    return np.array([np.mean(g) for g in groups])


# -- states -----------------------------------------------------------------

STATE_NORM_TOL = 1e-9


def normalize(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).ravel()
    nrm = np.linalg.norm(psi)
    if nrm == 0:
        raise ValueError("cannot normalize the zero vector")
    return psi / nrm


def as_density(state, dim: int | None = None, tol: float = STATE_NORM_TOL) -> np.ndarray:
    """Density matrix for a state vector or a density matrix, validated.

    Raises ``ValueError`` for a dimension mismatch or a norm/trace off by more
    than ``tol``.
    """
    s = np.asarray(state, dtype=complex)
    if s.ndim == 1:
        if abs(np.linalg.norm(s) - 1.0) > tol:
            raise ValueError(f"state vector is not normalized (norm {np.linalg.norm(s):.12g})")
        rho = np.outer(s, s.conj())
    elif s.ndim == 2:
        rho = as_hermitian(s, tol=1e-9)
        if abs(np.trace(rho).real - 1.0) > tol:
            raise ValueError(f"density matrix trace is {np.trace(rho).real:.12g}, expected 1")
    else:
        raise ValueError(f"state must be a vector or a matrix, got ndim={s.ndim}")
    if dim is not None and rho.shape[0] != dim:
        raise ValueError(f"dimension mismatch: state has dim {rho.shape[0]}, operators have dim {dim}")
    return rho


def expectation(M, state) -> float:
    """``<M>`` for a vector or density matrix; no validation beyond shapes."""
    s = np.asarray(state)
    if s.ndim == 1:
        return float(np.real(np.vdot(s, M @ s)))
    return float(np.real(np.einsum("ij,ji->", M, s)))


def random_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random pure state."""
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return z / np.linalg.norm(z)


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    A = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return 0.5 * (A + A.conj().T)


# -- JSON form --------------------------------------------------------------


def matrix_to_json(M) -> dict:
    A = np.asarray(M, dtype=complex)
    return {"dim": int(A.shape[0]), "re": A.real.tolist(), "im": A.imag.tolist()}


def matrix_from_json(obj: dict) -> np.ndarray:
    re = np.asarray(obj["re"], dtype=float)
    im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
    A = re + 1j * im
    dim = int(obj.get("dim", A.shape[0]))
    if A.shape[0] != dim:
        raise ValueError(f"declared dim {dim} does not match data of length {A.shape[0]}")
    return A
