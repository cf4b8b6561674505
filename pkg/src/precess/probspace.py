"""Geometry of the probability tuples ``(<Theta(X_0)>, <Theta(X_1)>, <Theta(X_2)>)``.

The quantum set of a pair is the linear image of the density matrices, so its
support function in direction ``u`` is the top eigenvalue of
``sum_k u_k Theta(X_k)``. :func:`ray_max` brackets the boundary along a ray
from the centre ``(1/2, 1/2, 1/2)``:

* the lower value comes from an explicit mixture of support maximizers (an
  inner polytope, solved as a small LP), so it is always achievable;
* the upper value is the gauge dual ``min (h(u) - u.c) / (u.n)`` over every
  direction ``u`` evaluated so far, so it is always a certified bound.

Each LP exit facet supplies the next ``u`` to evaluate (a cutting-plane loop),
which closes the bracket quickly on both smooth and faceted boundaries.
"""
from __future__ import annotations

import csv
import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError

from . import protocol, spectral
from .observables import PrecessingPair
from .spectral import DEFAULT_ZERO_TOL

CENTER = np.full(3, 0.5)
DEFAULT_RAY_TOL = 1e-4
GOLDEN_ANGLE = math.pi * (3 - math.sqrt(5))
P3_AXIS = np.ones(3) / math.sqrt(3)


# -- polytopes --------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Polytope:
    """Convex hull of at most a few dozen points in R^3, with facet inequalities ``a.x <= b``."""

    vertices: np.ndarray
    normals: np.ndarray = field(init=False, repr=False)
    offsets: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        V = np.asarray(self.vertices, dtype=float)
        object.__setattr__(self, "vertices", V)
        normals, offsets = _facets(V)
        object.__setattr__(self, "normals", normals)
        object.__setattr__(self, "offsets", offsets)

    def contains(self, p, tol: float = 1e-12) -> bool:
        return contains(self, p, tol)


def _facets(V: np.ndarray, tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    """Facet planes by enumerating vertex triples, keeping those with every vertex on one side."""
    planes: list[tuple[np.ndarray, float]] = []
    for i, j, k in itertools.combinations(range(len(V)), 3):
        n = np.cross(V[j] - V[i], V[k] - V[i])
        nrm = np.linalg.norm(n)
        if nrm < tol:
            continue
        n = n / nrm
        b = float(n @ V[i])
        side = V @ n - b
        if np.all(side <= tol):
            pass
        elif np.all(side >= -tol):
            n, b = -n, -b
        else:
            continue
        if not any(np.allclose(n, m, atol=1e-9) and abs(b - c) < 1e-9 for m, c in planes):
            planes.append((n, b))
    if not planes:
        raise ValueError("polytope is degenerate (vertices are coplanar)")
    return np.array([p[0] for p in planes]), np.array([p[1] for p in planes])


def contains(poly: Polytope, p, tol: float = 1e-12) -> bool:
    p = np.asarray(p, dtype=float)
    return bool(np.all(poly.normals @ p - poly.offsets <= tol))


def full_cube() -> Polytope:
    return Polytope(np.array(list(itertools.product((0.0, 1.0), repeat=3))))


def classical_polytope() -> Polytope:
    V = [v for v in itertools.product((0.0, 1.0), repeat=3) if 0 < sum(v) < 3]
    return Polytope(np.array(V))


def clock_hull(N: int | None, general_bound: float) -> Polytope:
    """Classical polytope plus the diagonal points ``(g, g, g)`` and ``(1-g, 1-g, 1-g)``.

    ``N`` only labels the clock the bound belongs to; the hull depends on ``g`` alone.
    """
    g = float(general_bound)
    if not 0.5 < g <= 1.0:
        raise ValueError(f"general bound must lie in (1/2, 1], got {g}")
    V = np.vstack([classical_polytope().vertices, [g, g, g], [1 - g, 1 - g, 1 - g]])
    return Polytope(V)


def facet_distance(p) -> float:
    """Signed distance beyond the nearer of the two nontrivial classical facets.

    Positive values lie outside the classical polytope (score above 2/3 or
    below 1/3).
    """
    s = float(np.sum(p))
    return max(s - 2.0, 1.0 - s) / math.sqrt(3)


# -- directions -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Direction:
    n: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.n, dtype=float).ravel()
        if v.shape != (3,):
            raise ValueError("direction must be a 3-vector")
        nrm = np.linalg.norm(v)
        if nrm == 0:
            raise ValueError("direction must be nonzero")
        object.__setattr__(self, "n", v / nrm)

    @classmethod
    def from_angles(cls, theta: float, phi: float) -> "Direction":
        return cls(np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)]))

    @property
    def angles(self) -> tuple[float, float]:
        x, y, z = self.n
        return math.acos(max(-1.0, min(1.0, z))), math.atan2(y, x)


def _frame(axis: np.ndarray) -> np.ndarray:
    """Orthonormal frame whose third column is ``axis``."""
    a = axis / np.linalg.norm(axis)
    helper = np.array([1.0, 0.0, 0.0]) if abs(a[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(a, helper)
    e1 /= np.linalg.norm(e1)
    return np.column_stack([e1, np.cross(a, e1), a])


def fibonacci_directions(n: int, axis=P3_AXIS) -> np.ndarray:
    """``n`` near-uniform unit vectors on a Fibonacci spiral with poles on ``+-axis``.

    Putting the poles on the score axis ``(1,1,1)`` samples the two
    score-extremal directions exactly.
    """
    if n < 1:
        raise ValueError("need at least one direction")
    if n == 1:
        return np.asarray(axis, dtype=float)[None, :] / np.linalg.norm(axis)
    i = np.arange(n)
    z = 1 - 2 * i / (n - 1)
    rho = np.sqrt(np.clip(1 - z * z, 0, None))
    phi = i * GOLDEN_ANGLE
    local = np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])
    return local @ _frame(np.asarray(axis, dtype=float)).T


def angle_grid(n_theta: int = 32, n_phi: int = 64) -> np.ndarray:
    th = (np.arange(n_theta) + 0.5) * math.pi / n_theta
    ph = np.arange(n_phi) * 2 * math.pi / n_phi
    T, P = np.meshgrid(th, ph, indexing="ij")
    return np.column_stack([(np.sin(T) * np.cos(P)).ravel(), (np.sin(T) * np.sin(P)).ravel(), np.cos(T).ravel()])


def _symmetric_directions() -> np.ndarray:
    d = np.array([v for v in itertools.product((-1.0, 0.0, 1.0), repeat=3) if any(v)])
    return d / np.linalg.norm(d, axis=1)[:, None]


# -- support oracle ---------------------------------------------------------


class SupportOracle:
    """Support function of a pair's quantum set, with a shared bank of seed points.

    The seed bank is computed once from a (theta, phi) grid plus the 26
    cube-symmetric directions and is read-only afterwards, so one oracle can
    serve many threads.
    """

    def __init__(self, pair: PrecessingPair, zero_tol: float = DEFAULT_ZERO_TOL,
                 grid: tuple[int, int] = (32, 64)):
        self.pair = pair
        self.thetas = np.array(protocol.step_operators(pair, zero_tol))
        self.dim = pair.dim
        mixed = np.eye(self.dim) / self.dim
        self.center_tuple = np.array([np.trace(T @ mixed).real for T in self.thetas])
        self.center_reanchored = bool(np.abs(self.center_tuple - CENTER).max() > 1e-9)
        self.center = CENTER.copy() if not self.center_reanchored else self.center_tuple
        U = np.vstack([angle_grid(*grid), _symmetric_directions()])
        vals, vecs, pts = zip(*(self.support(u) for u in U))
        self.seed_dirs = U
        self.seed_h = np.array(vals)
        self.seed_vecs = np.array(vecs)
        self.seed_points = np.array(pts)
        self._inner = self._prune(self.seed_points)

    def tuple_of(self, psi: np.ndarray) -> np.ndarray:
        return np.einsum("i,kij,j->k", psi.conj(), self.thetas, psi).real

    def support(self, u) -> tuple[float, np.ndarray, np.ndarray]:
        """``(h(u), maximizer, tuple of maximizer)``."""
        M = np.tensordot(np.asarray(u, dtype=float), self.thetas, axes=1)
        w, v = np.linalg.eigh(0.5 * (M + M.conj().T))
        psi = v[:, -1]
        return float(w[-1]), psi, self.tuple_of(psi)

    @staticmethod
    def _prune(points: np.ndarray) -> np.ndarray:
        """Indices of seed points worth keeping in the LP (hull vertices when the set is solid)."""
        _, uniq = np.unique(np.round(points, 12), axis=0, return_index=True)
        uniq = np.sort(uniq)
        try:
            hull = ConvexHull(points[uniq])
            return uniq[np.sort(hull.vertices)]
        except (QhullError, ValueError):
            return uniq


@dataclass
class RayResult:
    direction: np.ndarray
    r_lower: float
    r_upper: float
    witness_state: np.ndarray
    point: np.ndarray
    support_points: np.ndarray
    center: np.ndarray
    converged: bool
    iterations: int
    center_reanchored: bool = False
    error: str | None = None

    @property
    def gap(self) -> float:
        return self.r_upper - self.r_lower

    @property
    def p3(self) -> float:
        return float(np.mean(self.point))


def _solve_inner(points: np.ndarray, center: np.ndarray, n: np.ndarray, order: np.ndarray | None):
    """Max ``r`` with ``center + r n`` a convex combination of ``points``.

    Returns ``(r, weights, u)`` where ``u`` is the exit-facet normal scaled so
    that ``u.n = 1`` (from the LP duals), or ``None`` when the dual is degenerate.
    """
    m = len(points)
    perm = np.arange(m) if order is None else order
    P = points[perm]
    c = np.zeros(m + 1)
    c[-1] = -1.0
    A = np.zeros((4, m + 1))
    A[:3, :m] = P.T
    A[:3, -1] = -n
    A[3, :m] = 1.0
    b = np.append(center, 1.0)
    res = linprog(c, A_eq=A, b_eq=b, bounds=[(0, None)] * m + [(0, None)], method="highs",
                  options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10})
    if res.status != 0:
        raise RuntimeError(f"inner LP failed: {res.message}")
    w = np.empty(m)
    w[perm] = res.x[:m]
    r = float(res.x[-1])
    y = np.asarray(res.eqlin.marginals[:3])
    u = None
    for cand in (y, -y):
        s = float(cand @ n)
        if s > 1e-12:
            u = cand / s
            break
    return r, w, u


def _polish(points: np.ndarray, w: np.ndarray, center: np.ndarray, n: np.ndarray):
    """Re-solve the active set exactly so the witness sits on the ray to rounding."""
    active = np.flatnonzero(w > 1e-12)
    A = np.zeros((4, active.size + 1))
    A[:3, :-1] = points[active].T
    A[:3, -1] = -n
    A[3, :-1] = 1.0
    sol, *_ = np.linalg.lstsq(A, np.append(center, 1.0), rcond=None)
    if np.all(sol[:-1] >= -1e-14) and sol[-1] >= -1e-14:
        w = np.zeros_like(w)
        w[active] = np.clip(sol[:-1], 0, None)
        w /= w.sum()
        return float(max(sol[-1], 0.0)), w
    return None


def ray_max(pair: PrecessingPair, direction, tol: float = DEFAULT_RAY_TOL, *,
            oracle: SupportOracle | None = None, max_iter: int = 200, local: int = 64,
            rng: np.random.Generator | None = None) -> RayResult:
    """Largest ``r`` with ``center + r n`` in the pair's quantum probability set.

    ``r_lower`` is attained by ``witness_state`` (a density matrix);
    ``r_upper`` is a certified bound. ``converged`` is False when the bracket
    is still wider than ``tol`` after ``max_iter`` cuts.
    """
    if oracle is None:
        oracle = SupportOracle(pair)
    n = direction.n if isinstance(direction, Direction) else Direction(direction).n
    c = oracle.center

    upper = math.inf
    proj = oracle.seed_dirs @ n
    ok = np.flatnonzero(proj > 1e-12)
    if ok.size:
        gauge = (oracle.seed_h[ok] - oracle.seed_dirs[ok] @ c) / proj[ok]
        best = int(ok[np.argmin(gauge)])
        upper = float(gauge.min())
        # seeds whose support directions sit near the dual optimum span the exit region
        inner = oracle._inner
        near = np.argsort(-(oracle.seed_dirs[inner] @ oracle.seed_dirs[best]))[:local]
        chosen = np.sort(inner[near])
    else:
        chosen = oracle._inner

    points = np.vstack([oracle.seed_points[chosen], oracle.center_tuple[None, :]])
    vecs = list(oracle.seed_vecs[chosen])
    extra_pts: list[np.ndarray] = []

    r = 0.0
    w = np.zeros(len(points))
    it = 0
    for it in range(1, max_iter + 1):
        order = rng.permutation(len(points)) if rng is not None else None
        r, w, u = _solve_inner(points, c, n, order)
        if r > upper + 1e-9:
            raise RuntimeError(f"achieved r={r:.12g} exceeds certified bound {upper:.12g}")
        upper = max(upper, r)
        if upper - r <= tol or u is None:
            break
        h, psi, p = oracle.support(u)
        upper = min(upper, max(r, h - u @ c))
        if upper - r <= tol:
            break
        vecs.append(psi)
        extra_pts.append(p)
        points = np.vstack([points, p[None, :]])

    polished = _polish(points, w, c, n)
    if polished is not None and abs(polished[0] - r) < 1e-7:
        r, w = polished

    mix_idx = len(points) - len(extra_pts) - 1
    rho = np.zeros((oracle.dim, oracle.dim), dtype=complex)
    support_pts = []
    for idx in np.flatnonzero(w > 1e-12):
        if idx == mix_idx:
            rho += w[idx] * np.eye(oracle.dim) / oracle.dim
        else:
            v = vecs[idx] if idx < mix_idx else vecs[idx - 1]
            rho += w[idx] * np.outer(v, v.conj())
        support_pts.append(points[idx])
    rho = 0.5 * (rho + rho.conj().T)
    point = np.array([np.trace(T @ rho).real for T in oracle.thetas])
    r = max(0.0, min(r, upper))
    return RayResult(
        direction=n, r_lower=r, r_upper=max(upper, r), witness_state=rho, point=point,
        support_points=np.array(support_pts), center=c.copy(), converged=bool(upper - r <= tol),
        iterations=it, center_reanchored=oracle.center_reanchored,
    )


def default_threads() -> int:
    env = os.environ.get("PRECESS_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def sample_surface(pair: PrecessingPair, n_directions: int, seed: int = 0, tol: float = DEFAULT_RAY_TOL,
                   threads: int | None = None, oracle: SupportOracle | None = None) -> list[RayResult]:
    """Boundary points of the quantum set along a Fibonacci lattice of directions.

    ``seed`` only permutes LP columns, which can change the witness chosen among
    equally good mixtures but not the bracket. Results come back in direction
    order whatever the thread count.
    """
    if n_directions < 1:
        raise ValueError("n_directions must be at least 1")
    dirs = fibonacci_directions(n_directions)
    if oracle is None:
        oracle = SupportOracle(pair)
    seeds = np.random.SeedSequence(seed).spawn(n_directions)

    def run(i: int) -> RayResult:
        try:
            return ray_max(pair, dirs[i], tol, oracle=oracle, rng=np.random.default_rng(seeds[i]))
        except Exception as exc:  # per-direction failure is reported, the sweep continues
            nan3 = np.full(3, np.nan)
            return RayResult(dirs[i], math.nan, math.nan, np.full((pair.dim, pair.dim), np.nan), nan3,
                             np.empty((0, 3)), oracle.center.copy(), False, 0, oracle.center_reanchored,
                             error=f"{type(exc).__name__}: {exc}")

    workers = threads or default_threads()
    if workers <= 1:
        return [run(i) for i in range(n_directions)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, range(n_directions)))


CSV_HEADER = ["idx", "nx", "ny", "nz", "r_lower", "r_upper", "p0", "p1", "p2", "facet_dist"]


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_surface_csv(results: list[RayResult], path) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(CSV_HEADER)
        for i, res in enumerate(results):
            wr.writerow([i, *map(_fmt, res.direction), _fmt(res.r_lower), _fmt(res.r_upper),
                         *map(_fmt, res.point), _fmt(facet_distance(res.point))])


def read_surface_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [{k: (int(v) if k == "idx" else float(v)) for k, v in row.items()} for row in rows]


def cloud_points(results: list[RayResult], with_support: bool = True) -> np.ndarray:
    """Achieved tuples: ray endpoints plus the pure support points mixed into each witness."""
    pts = [r.point for r in results if r.error is None]
    if with_support:
        pts += [p for r in results if r.error is None for p in r.support_points]
    return np.array(pts)


def hull_contains(points: np.ndarray, q, tol: float) -> bool:
    """Whether ``q`` lies within ``tol`` of the convex hull of ``points`` (facet-wise)."""
    hull = ConvexHull(points)
    return bool(np.all(hull.equations[:, :3] @ np.asarray(q, dtype=float) + hull.equations[:, 3] <= tol))
