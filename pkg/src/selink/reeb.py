"""Volume functional on the Reeb cone and its minimization.

The functional is the Euclidean volume of the cone truncated by the
characteristic hyperplane at level 1/2, computed exactly per simplicial
piece of a pulling triangulation. Any global constant drops out of the
argmin, which is all downstream consumers need. The Einstein Reeb vector
is the minimizer over the integer-normalized slice <gamma, xi> = dim;
for the Y^{p,q} family the known closed form doubles as an oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .cone import ConeSpec, FaceLattice, RayList, dual_rays, face_lattice, gorenstein_vector, ypq_cone
from .lattice import IntMatrix, det_int


class DivergentVolumeError(ValueError):
    """Reeb vector on or outside the dual-cone boundary: infinite volume."""


class UnsupportedConeError(ValueError):
    """No integer normalization vector; the Einstein slice is undefined."""


class ConvergenceError(RuntimeError):
    """Minimizer failed to reach tolerance; carries the iteration trace."""

    def __init__(self, message: str, trace: list[tuple[int, float, float]]):
        self.trace = trace
        super().__init__(f"{message}; last iterations: {trace[-5:]}")


@dataclass(frozen=True)
class VolumeProfile:
    """Simplicial decomposition of the cone, ready for volume evaluation.

    ``simplices`` lists (ray index tuple, exact determinant) pairs whose
    sub-cones partition the cone. ``gamma`` is the normalization vector
    when the cone has one.
    """

    dim: int
    rays: tuple[tuple[int, ...], ...]
    simplices: tuple[tuple[tuple[int, ...], int], ...]
    gamma: Optional[tuple[int, ...]]


def _pulling_triangulation(
    lattice: FaceLattice, rays: RayList, dim: int, reverse: bool
) -> list[tuple[int, ...]]:
    """Pulling triangulation: recursively cone each face from an extreme ray.

    The apex of every face is its lexicographically first ray (last when
    ``reverse``), so the decomposition is canonical. Simplices are returned
    as tuples of ray indices.
    """
    faces = lattice.faces
    top = next(f for f in faces if f.dim == dim)

    def subfaces(face):
        inside = set(face.ray_indices)
        return [
            g
            for g in faces
            if g.dim == face.dim - 1 and set(g.ray_indices) <= inside
        ]

    def pull(face) -> list[tuple[int, ...]]:
        if len(face.ray_indices) == face.dim:
            return [face.ray_indices]
        pick = max if reverse else min
        apex = pick(face.ray_indices, key=lambda r: rays.rays[r])
        out = []
        for sub in subfaces(face):
            if apex not in sub.ray_indices:
                for simplex in pull(sub):
                    out.append((apex,) + simplex)
        return out

    return pull(top)


def build_profile(
    cone: ConeSpec, gamma: Optional[Sequence[int]] = None, reverse: bool = False
) -> VolumeProfile:
    """Triangulate the cone and attach the normalization vector.

    ``reverse`` selects the pulling apex from the other end of the ray
    order, giving a second, generally different, triangulation of the same
    cone for independence checks.
    """
    rays = dual_rays(cone)
    lattice = face_lattice(cone, rays)
    simplices = []
    for idx in _pulling_triangulation(lattice, rays, cone.dim, reverse):
        mat = IntMatrix.from_rows([rays.rays[i] for i in idx])
        det = det_int(mat)
        if det == 0:
            raise ValueError("degenerate simplex in triangulation")
        simplices.append((idx, det))
    if gamma is None:
        gamma = gorenstein_vector(cone)
    return VolumeProfile(
        cone.dim,
        rays.rays,
        tuple(simplices),
        tuple(gamma) if gamma is not None else None,
    )


def volume(profile: VolumeProfile, xi: Sequence[float]) -> float:
    """Euclidean volume of {y in C : <y, xi> <= 1/2}.

    Sum over simplicial pieces of |det| (1/2)^dim / (dim! prod_i <u_i, xi>).
    Diverges (raises) when xi touches the dual-cone boundary.
    """
    dim = profile.dim
    xi_arr = np.asarray(xi, dtype=float)
    pairings = np.array(profile.rays, dtype=float) @ xi_arr
    if np.any(pairings <= 0):
        raise DivergentVolumeError(
            f"xi is not strictly inside the dual cone (min pairing {pairings.min()})"
        )
    scale = 0.5**dim / math.factorial(dim)
    total = 0.0
    for idx, det in profile.simplices:
        prod = 1.0
        for i in idx:
            prod *= pairings[i]
        total += abs(det) * scale / prod
    return total


def volume_gradient(profile: VolumeProfile, xi: Sequence[float]) -> np.ndarray:
    """Analytic gradient of the volume functional at an interior point."""
    dim = profile.dim
    xi_arr = np.asarray(xi, dtype=float)
    rays_arr = np.array(profile.rays, dtype=float)
    pairings = rays_arr @ xi_arr
    if np.any(pairings <= 0):
        raise DivergentVolumeError("xi is not strictly inside the dual cone")
    scale = 0.5**dim / math.factorial(dim)
    grad = np.zeros(dim)
    for idx, det in profile.simplices:
        prod = 1.0
        for i in idx:
            prod *= pairings[i]
        term = abs(det) * scale / prod
        for i in idx:
            grad -= term / pairings[i] * rays_arr[i]
    return grad


@dataclass(frozen=True)
class ReebSolution:
    """A Reeb vector with its volume value and how it was obtained.

    ``grad_norm`` is the projected gradient norm of log volume, which is
    invariant under rescaling the functional and therefore comparable
    across cones.
    """

    xi: tuple[float, ...]
    volume: float
    grad_norm: float
    provenance: str
    iterations: int

    def to_dict(self) -> dict:
        return {
            "xi": list(self.xi),
            "volume": self.volume,
            "grad_norm": self.grad_norm,
            "provenance": self.provenance,
            "iterations": self.iterations,
        }


def _project_to_slice(xi: np.ndarray, gamma: np.ndarray, level: float) -> np.ndarray:
    return xi + (level - gamma @ xi) / (gamma @ gamma) * gamma


def _projected_grad(g: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    return g - (g @ gamma) / (gamma @ gamma) * gamma


BOUNDARY_MARGIN = 1e-12


def minimize(
    cone: ConeSpec,
    gtol: float = 1e-9,
    max_iter: int = 10000,
) -> ReebSolution:
    """Minimize the volume over the slice <gamma, xi> = dim of the Reeb cone.

    Projected gradient descent with Barzilai-Borwein steps and Armijo
    backtracking; line searches clamp the iterate so every ray pairing
    stays above a tiny margin, where the functional blows up anyway.
    Descent runs on log volume: the same minimizer, but the gradient
    tolerance becomes scale-invariant. The functional is smooth and
    convex on the slice interior, so the stationary point found is the
    minimizer.
    """
    gamma_vec = gorenstein_vector(cone)
    if gamma_vec is None:
        raise UnsupportedConeError("cone has no integer normalization vector")
    profile = build_profile(cone, gamma_vec)
    gamma = np.array(gamma_vec, dtype=float)
    level = float(cone.dim)
    rays_arr = np.array(profile.rays, dtype=float)

    def feasible(x: np.ndarray) -> bool:
        return bool(np.all(rays_arr @ x >= BOUNDARY_MARGIN))

    # barycenter of the dual-cone ray directions (the facet normals),
    # rescaled onto the slice; strictly interior for any pointed cone
    start = np.array(cone.normals, dtype=float).sum(axis=0)
    denom = gamma @ start
    if denom <= 0:
        raise UnsupportedConeError("normalization slice misses the Reeb cone")
    xi = start * (level / denom)
    if not feasible(xi):
        raise UnsupportedConeError("no interior starting point on the slice")

    def log_vol_and_grad(x: np.ndarray) -> tuple[float, np.ndarray]:
        f = volume(profile, x)
        g = volume_gradient(profile, x) / f
        return math.log(f), _projected_grad(g, gamma)

    f, g = log_vol_and_grad(xi)
    step = 0.1 / max(np.linalg.norm(g), 1.0)
    trace: list[tuple[int, float, float]] = []
    xi_prev: Optional[np.ndarray] = None
    g_prev: Optional[np.ndarray] = None
    iterations = 0
    for iterations in range(1, max_iter + 1):
        gnorm = float(np.linalg.norm(g))
        trace.append((iterations, f, gnorm))
        if gnorm < gtol:
            break
        if xi_prev is not None:
            s = xi - xi_prev
            y = g - g_prev
            sy = float(s @ y)
            if sy > 0:
                step = float(s @ s) / sy
        accepted = False
        for _ in range(80):
            cand = _project_to_slice(xi - step * g, gamma, level)
            if feasible(cand):
                f_cand, g_cand = log_vol_and_grad(cand)
                if f_cand <= f - 1e-4 * step * (g @ g):
                    accepted = True
                    break
            step *= 0.5
        if not accepted:
            # descent direction exhausted at float resolution
            if gnorm < 100 * gtol:
                break
            raise ConvergenceError("line search failed", trace)
        xi_prev, g_prev = xi, g
        xi, f, g = cand, f_cand, g_cand
    else:
        raise ConvergenceError(f"no convergence in {max_iter} iterations", trace)
    gnorm = float(np.linalg.norm(g))
    if gnorm >= 100 * gtol:
        raise ConvergenceError("stalled far from stationarity", trace)
    return ReebSolution(
        tuple(float(x) for x in xi), volume(profile, xi), gnorm, "minimized", iterations
    )


def ypq_reeb(p: int, q: int) -> ReebSolution:
    """Closed-form Einstein Reeb vector of Y^{p,q}.

    xi = (3, t, t) with t = (3p - 3q + 1/l) / 2 and
    1/l = (3 q^2 - 2 p^2 + p sqrt(4 p^2 - 3 q^2)) / q.
    """
    cone = ypq_cone(p, q)  # also validates p, q
    linv = (3 * q * q - 2 * p * p + p * math.sqrt(4 * p * p - 3 * q * q)) / q
    t = 0.5 * (3 * p - 3 * q + linv)
    xi = (3.0, t, t)
    profile = build_profile(cone)
    vol = volume(profile, xi)
    grad = _projected_grad(
        volume_gradient(profile, xi) / vol, np.array(profile.gamma, dtype=float)
    )
    return ReebSolution(xi, vol, float(np.linalg.norm(grad)), "closed_form", 0)
