"""Real-link quadric systems: construction, sampling, and classification.

The real locus upstairs is cut out by homogeneous quadrics (one per kernel
basis vector) plus one inhomogeneous level equation. In squared coordinates
u = x * x the system is linear and its solution set is a convex polytope,
so sampling reduces to a hit-and-run walk in u-space followed by a signed
square-root lift.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linprog

from .delzant import DeckGroup, DelzantData, ReebCoefficients
from .lattice import IntMatrix


class InfeasibleSystemError(ValueError):
    """The solution polytope in squared coordinates is empty."""


class SamplerError(RuntimeError):
    """Hit-and-run walk failed to produce valid points."""


@dataclass(frozen=True)
class QuadricSystem:
    """The locus {x in R^d : rows @ (x*x) = 0, level . (x*x) = 1}.

    ``rows`` is the integer matrix of homogeneous quadric coefficients
    (one row per kernel basis vector) and ``level`` the inhomogeneous
    coefficient vector.
    """

    rows: IntMatrix
    level: tuple[float, ...]

    @property
    def d(self) -> int:
        return len(self.level)

    @property
    def k(self) -> int:
        return self.rows.rows

    def rows_array(self) -> np.ndarray:
        if self.k == 0:
            return np.zeros((0, self.d))
        return np.array(self.rows.data, dtype=float)

    def residuals(self, points: np.ndarray) -> np.ndarray:
        """Per-point sup-norm residual of all defining equations."""
        pts = np.atleast_2d(points)
        u = pts * pts
        level = np.abs(u @ np.array(self.level) - 1.0)
        if self.k == 0:
            return level
        hom = np.max(np.abs(u @ self.rows_array().T), axis=1)
        return np.maximum(hom, level)

    def constraint_jacobian(self, x: np.ndarray) -> np.ndarray:
        """Jacobian of the defining equations at x: rows 2*a_i*x and 2*b*x."""
        stacked = np.vstack([self.rows_array(), np.array(self.level)])
        return 2.0 * stacked * x


def interior_point(system: QuadricSystem, margin: float = 1e-9) -> np.ndarray:
    """Strictly positive point of {u >= 0 : rows u = 0, level . u = 1}.

    Solved by maximizing the smallest coordinate with an LP; a
    non-positive optimum means the polytope has no interior and the
    system is declared infeasible.
    """
    d = system.d
    a_eq = np.hstack([np.vstack([system.rows_array(), np.array(system.level)]), np.zeros((system.k + 1, 1))])
    b_eq = np.concatenate([np.zeros(system.k), [1.0]])
    # variables (u, t); maximize t subject to u_j >= t
    a_ub = np.hstack([-np.eye(d), np.ones((d, 1))])
    b_ub = np.zeros(d)
    cost = np.concatenate([np.zeros(d), [-1.0]])
    bounds = [(0, None)] * d + [(None, 1.0)]
    res = linprog(cost, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=bounds, method="highs")
    if not res.success or res.x[-1] <= margin:
        raise InfeasibleSystemError(
            "no interior point: the squared-coordinate polytope is empty or degenerate"
        )
    return res.x[:-1]


def build_system(data: DelzantData, coeffs: ReebCoefficients) -> QuadricSystem:
    """Assemble the quadric system from kernel basis rows and Reeb coefficients.

    The homogeneous rows are the transposed kernel basis; the level row is
    the coefficient vector. Feasibility of the squared-coordinate polytope
    is verified before returning.
    """
    rows = data.kernel_basis.transpose()
    system = QuadricSystem(rows, tuple(float(v) for v in coeffs.values))
    interior_point(system)
    return system


def _row_space_contains(mat: np.ndarray, rows: np.ndarray, tol: float) -> bool:
    if mat.size == 0:
        return bool(np.all(np.abs(rows) <= tol))
    sol, *_ = np.linalg.lstsq(mat.T, rows.T, rcond=None)
    residual = mat.T @ sol - rows.T
    return bool(np.max(np.abs(residual)) <= tol)


def _augmented(system: QuadricSystem) -> np.ndarray:
    hom = np.hstack([system.rows_array(), np.zeros((system.k, 1))])
    level = np.concatenate([np.array(system.level), [1.0]])
    aug = np.vstack([hom, level])
    norms = np.linalg.norm(aug, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return aug / norms


def systems_equivalent(s1: QuadricSystem, s2: QuadricSystem, tol: float = 1e-9) -> bool:
    """Whether the two affine solution sets in squared coordinates coincide.

    Compares augmented row spaces both ways after row normalization, which
    absorbs row permutations, row scalings, and any positive rescaling of
    the inhomogeneous equation.
    """
    if s1.d != s2.d:
        raise ValueError("systems live in different dimensions")
    a1, a2 = _augmented(s1), _augmented(s2)
    return _row_space_contains(a1, a2, tol) and _row_space_contains(a2, a1, tol)


@dataclass(frozen=True)
class SampleSet:
    """Sampled points of the real link with their certificates."""

    points: np.ndarray
    residual_max: float
    seed: int
    jacobian_rank: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.points)


def _chain(system: QuadricSystem, basis: np.ndarray, start: np.ndarray, count: int,
           rng: np.random.Generator, burn_in: int, thin: int) -> np.ndarray:
    """One hit-and-run chain in u-space, lifted to x by random signs."""
    d = system.d
    n_dirs = basis.shape[1]
    u = start.copy()
    out = np.empty((count, d))
    produced = 0
    step = 0
    max_steps = burn_in + thin * count + 10_000
    while produced < count:
        step += 1
        if step > max_steps:
            raise SamplerError("hit-and-run failed to mix within the step budget")
        if n_dirs == 0:
            # zero-dimensional polytope: the single point repeats
            lo = hi = 0.0
            w = np.zeros(d)
        else:
            g = rng.normal(size=n_dirs)
            norm = np.linalg.norm(g)
            if norm == 0:
                continue
            w = basis @ (g / norm)
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = -u / w
            lo = np.max(ratios[w > 0], initial=-np.inf)
            hi = np.min(ratios[w < 0], initial=np.inf)
            if not np.isfinite(lo) or not np.isfinite(hi) or hi <= lo:
                continue
        s = rng.uniform(lo, hi)
        u = np.maximum(u + s * w, 0.0)
        if step > burn_in and (step - burn_in) % thin == 0:
            signs = rng.integers(0, 2, size=d) * 2.0 - 1.0
            out[produced] = signs * np.sqrt(u)
            produced += 1
    return out


def sample(
    system: QuadricSystem,
    count: int,
    seed: int,
    chains: int = 4,
    burn_in: int = 128,
    thin: int = 3,
    workers: int = 1,
) -> SampleSet:
    """Draw ``count`` points of the locus, deterministically in ``seed``.

    The walk runs in the squared-coordinate polytope along an orthonormal
    basis of the constraint null space; points are lifted with random
    signs. Chain seeds derive from the master seed by chain index, so the
    result is identical for any worker count.
    """
    if count <= 0:
        raise ValueError("count must be positive")
    start = interior_point(system)
    stacked = np.vstack([system.rows_array(), np.array(system.level)])
    _, sing, vt = np.linalg.svd(stacked)
    rank = int(np.sum(sing > 1e-12 * sing[0]))
    basis = vt[rank:].T
    per_chain = [count // chains + (1 if c < count % chains else 0) for c in range(chains)]

    def run(c: int) -> np.ndarray:
        rng = np.random.default_rng([seed, c])
        return _chain(system, basis, start, per_chain[c], rng, burn_in, thin)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(chains)))
    else:
        parts = [run(c) for c in range(chains)]
    points = np.vstack([p for p in parts if len(p)])
    residual_max = float(np.max(system.residuals(points)))
    ranks = tuple(
        int(np.linalg.matrix_rank(system.constraint_jacobian(x))) for x in points
    )
    return SampleSet(points, residual_max, seed, ranks)


def sample_set_to_json(samples: SampleSet, system: QuadricSystem) -> str:
    """JSON export of points, per-point residuals, and the seed."""
    residuals = system.residuals(samples.points)
    payload = {
        "seed": samples.seed,
        "count": len(samples),
        "points": [[float(v) for v in row] for row in samples.points],
        "residuals": [float(r) for r in residuals],
        "jacobian_rank": list(samples.jacobian_rank),
    }
    return json.dumps(payload, sort_keys=True)


def quotient_representative(x: np.ndarray, deck: DeckGroup) -> np.ndarray:
    """Lexicographically minimal point in the deck orbit of x."""
    orbit = [deck.apply(e, np.asarray(x, dtype=float)) for e in deck.elements]
    return min(orbit, key=lambda p: tuple(p))


def orbit_size(x: np.ndarray, deck: DeckGroup, tol: float = 1e-9) -> int:
    """Number of distinct points in the deck orbit of x."""
    orbit = [deck.apply(e, np.asarray(x, dtype=float)) for e in deck.elements]
    distinct: list[np.ndarray] = []
    for p in orbit:
        if all(np.max(np.abs(p - q)) > tol for q in distinct):
            distinct.append(p)
    return len(distinct)


def component_count(points: np.ndarray, eps: Optional[float] = None) -> int:
    """Connected components of the eps-neighborhood graph; diagnostic only."""
    n = len(points)
    if n == 0:
        return 0
    dists = np.linalg.norm(points[:, None, :] - points[None, :, :], axis=2)
    if eps is None:
        # heuristic: a few times the typical nearest-neighbor spacing
        nn = np.sort(dists + np.eye(n) * 1e18, axis=1)[:, 0]
        eps = 4.0 * float(np.median(nn))
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if dists[i, j] <= eps:
                pi, pj = find(i), find(j)
                if pi != pj:
                    parent[pi] = pj
    return len({find(i) for i in range(n)})


@dataclass(frozen=True)
class DeckActionReport:
    element: tuple[int, ...]
    free_on_samples: bool
    min_displacement: float
    action: str


@dataclass(frozen=True)
class TopologyReport:
    """Recognized structure of the real link and its deck quotient.

    Classification is only claimed for the recognizable product form
    (an ellipse factor crossed with a round circle fiber); anything else
    is reported as unclassified with diagnostics. Sampling statistics can
    support but never prove a topology statement.
    """

    upstairs: str
    quotient: str
    ellipse_coords: Optional[tuple[int, int]]
    fiber_coords: Optional[tuple[int, int]]
    deck_actions: tuple[DeckActionReport, ...]
    diagnostics: dict

    def to_dict(self) -> dict:
        return {
            "upstairs": self.upstairs,
            "quotient": self.quotient,
            "ellipse_coords": list(self.ellipse_coords) if self.ellipse_coords else None,
            "fiber_coords": list(self.fiber_coords) if self.fiber_coords else None,
            "deck_actions": [
                {
                    "element": list(a.element),
                    "free_on_samples": a.free_on_samples,
                    "min_displacement": a.min_displacement,
                    "action": a.action,
                }
                for a in self.deck_actions
            ],
            "diagnostics": self.diagnostics,
        }


def _find_product_structure(system: QuadricSystem):
    """Detect the ellipse-times-circle form of a d=4, k=1 system.

    Looks for a coordinate pair (l, m) with equal homogeneous coefficients
    on which the level row can be cancelled, leaving a positive ellipse
    equation on the complementary pair and a positive circle radius over
    every ellipse point.
    """
    a = np.array(system.rows.data[0], dtype=float)
    b = np.array(system.level)
    for fiber in ([0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]):
        ellipse = [i for i in range(4) if i not in fiber]
        l, m = fiber
        i, j = ellipse
        if a[l] == 0 or a[l] != a[m]:
            continue
        if abs(b[l] * a[m] - b[m] * a[l]) > 1e-9 * max(1.0, np.max(np.abs(b))):
            continue
        t = -b[l] / a[l]
        bb = b + t * a
        alpha, beta = bb[i], bb[j]
        if alpha <= 1e-12 or beta <= 1e-12:
            continue
        # circle radius^2 = -(a_i u_i + a_j u_j)/a_l must be positive on the
        # ellipse segment; check its endpoints
        if -a[i] / (a[l] * alpha) <= 0 or -a[j] / (a[l] * beta) <= 0:
            continue
        return (i, j), (l, m), (alpha, beta)
    return None


def classify_ypq(
    system: QuadricSystem,
    deck: DeckGroup,
    samples: Optional[SampleSet] = None,
    seed: int = 0,
    sample_count: int = 500,
    displacement_tol: float = 1e-6,
) -> TopologyReport:
    """Classify the real link of a d=4, k=1 system and its deck quotient.

    Recognizes the ellipse-times-circle product (a torus); reports whether
    each nontrivial deck element acts freely on samples and names the
    quotient when every action is a fixed-point-free product move. The
    k=0 case reports the round sphere. Everything else: unclassified.
    """
    if samples is None:
        samples = sample(system, sample_count, seed)
    pts = samples.points

    if system.k == 0:
        deck_reports = _deck_reports(deck, pts, (), (), displacement_tol)
        return TopologyReport(
            upstairs=f"real sphere S^{system.d - 1}",
            quotient="no deck quotient; real sphere S^%d" % (system.d - 1),
            ellipse_coords=None,
            fiber_coords=None,
            deck_actions=deck_reports,
            diagnostics={"components_estimate": component_count(pts)},
        )

    if system.d != 4 or system.k != 1:
        return TopologyReport(
            upstairs="unclassified",
            quotient="unclassified",
            ellipse_coords=None,
            fiber_coords=None,
            deck_actions=_deck_reports(deck, pts, (), (), displacement_tol),
            diagnostics={
                "reason": f"classifier handles d=4, k=1; got d={system.d}, k={system.k}",
                "components_estimate": component_count(pts),
            },
        )

    structure = _find_product_structure(system)
    if structure is None:
        return TopologyReport(
            upstairs="unclassified",
            quotient="unclassified",
            ellipse_coords=None,
            fiber_coords=None,
            deck_actions=_deck_reports(deck, pts, (), (), displacement_tol),
            diagnostics={
                "reason": "no ellipse-times-circle form found",
                "components_estimate": component_count(pts),
            },
        )
    ellipse, fiber, ellipse_coeffs = structure
    deck_reports = _deck_reports(deck, pts, ellipse, fiber, displacement_tol)
    all_free = all(r.free_on_samples for r in deck_reports if any(r.element))
    all_product_moves = all(
        r.action in ("antipodal on ellipse", "antipodal on fiber", "antipodal on both")
        for r in deck_reports
        if any(r.element)
    )
    quotient = "torus" if (all_free and all_product_moves) else "unclassified"
    return TopologyReport(
        upstairs="torus (ellipse x circle)",
        quotient=quotient,
        ellipse_coords=ellipse,
        fiber_coords=fiber,
        deck_actions=deck_reports,
        diagnostics={
            "ellipse_coefficients": [float(c) for c in ellipse_coeffs],
            "components_estimate": component_count(pts),
        },
    )


def _deck_reports(deck, pts, ellipse, fiber, displacement_tol):
    reports = []
    for element in deck.elements:
        if not any(element):
            continue
        moved = pts - np.array([deck.apply(element, x) for x in pts])
        displacements = np.linalg.norm(moved, axis=1)
        min_disp = float(np.min(displacements)) if len(pts) else float("nan")
        action = _describe_action(element, ellipse, fiber)
        reports.append(
            DeckActionReport(element, bool(min_disp > displacement_tol), min_disp, action)
        )
    return tuple(reports)


def _describe_action(element, ellipse, fiber):
    if not ellipse or not fiber:
        return "sign flip on " + ",".join(f"x{i + 1}" for i, s in enumerate(element) if s)
    on_ellipse = tuple(element[i] for i in ellipse)
    on_fiber = tuple(element[i] for i in fiber)
    if on_ellipse == (1, 1) and on_fiber == (1, 1):
        return "antipodal on both"
    if on_ellipse == (1, 1) and on_fiber == (0, 0):
        return "antipodal on ellipse"
    if on_ellipse == (0, 0) and on_fiber == (1, 1):
        return "antipodal on fiber"
    return "reflection (has fixed circles)"
