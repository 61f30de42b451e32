"""Rational polyhedral cones: validity predicates, extreme rays, face lattice.

A cone is given by integer facet normals: C = {y : <y, normal_i> >= 0}.
All structural decisions (rays, faces, goodness) are made in exact integer
or rational arithmetic; floats only enter through Reeb-vector membership
tests for irrational inputs.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Optional, Sequence

from .lattice import (
    DependentVectorsError,
    IntMatrix,
    gcd_vector,
    integer_kernel_basis,
    is_primitive,
    is_saturated,
    make_primitive,
    rational_rank,
    solve_rational,
)

MAX_FACETS = 16


class DegenerateConeError(ValueError):
    """Cone has a line or empty interior; ray computations are meaningless."""


@dataclass(frozen=True)
class ConeSpec:
    """A rational polyhedral cone in R^dim cut out by integer facet normals."""

    dim: int
    normals: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be positive")
        for n in self.normals:
            if len(n) != self.dim:
                raise ValueError("normal length does not match dim")
            if not all(isinstance(x, int) for x in n):
                raise TypeError("normals must be integer vectors")

    @classmethod
    def from_normals(cls, normals: Sequence[Sequence[int]]) -> "ConeSpec":
        rows = tuple(tuple(int(x) for x in n) for n in normals)
        if not rows:
            raise ValueError("at least one normal required")
        return cls(len(rows[0]), rows)

    @property
    def num_normals(self) -> int:
        return len(self.normals)


def ypq_cone(p: int, q: int) -> ConeSpec:
    """Moment cone of the Y^{p,q} family: coprime integers p > q >= 1."""
    if not (isinstance(p, int) and isinstance(q, int)):
        raise ValueError("p and q must be integers")
    if not p > q >= 1:
        raise ValueError(f"require p > q >= 1, got p={p}, q={q}")
    if math.gcd(p, q) != 1:
        raise ValueError(f"p and q must be coprime, got p={p}, q={q}")
    return ConeSpec.from_normals(
        [(1, 0, 0), (1, p - q - 1, p - q), (1, p, p), (1, 1, 0)]
    )


def orthant_cone(dim: int) -> ConeSpec:
    """The nonnegative orthant, the flat model with trivial quotient group."""
    return ConeSpec.from_normals(
        [tuple(1 if i == j else 0 for j in range(dim)) for i in range(dim)]
    )


@dataclass(frozen=True)
class RayList:
    """Primitive integer generators of the extreme rays, in lexicographic order."""

    rays: tuple[tuple[int, ...], ...]

    def __len__(self) -> int:
        return len(self.rays)


@dataclass(frozen=True)
class Face:
    """One face of the cone.

    ``normal_indices`` is the full set of normals vanishing on the face and
    ``ray_indices`` the extreme rays spanning it; ``dim`` is its linear
    dimension (0 for the apex, cone.dim for the cone itself).
    """

    normal_indices: tuple[int, ...]
    ray_indices: tuple[int, ...]
    dim: int


@dataclass(frozen=True)
class FaceLattice:
    faces: tuple[Face, ...]

    def of_dim(self, d: int) -> list[Face]:
        return [f for f in self.faces if f.dim == d]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    witness: Optional[dict] = None

    def to_dict(self) -> dict:
        out = {"name": self.name, "passed": self.passed}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> CheckResult:
        return next(c for c in self.checks if c.name == name)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checks": [c.to_dict() for c in self.checks]}


def _check_size(cone: ConeSpec) -> None:
    if cone.num_normals > MAX_FACETS:
        raise ValueError(
            f"face enumeration supports at most {MAX_FACETS} normals, got {cone.num_normals}"
        )


def _ray_candidates(cone: ConeSpec) -> list[tuple[int, ...]]:
    """Extreme-ray candidates via pairwise facet intersection.

    Every (dim-1)-subset of normals with full rank pins a line; keep a
    primitive generator on the feasible side whose active normal set still
    has rank dim-1. Exact integer arithmetic throughout.
    """
    dim = cone.dim
    normals = cone.normals
    found: set[tuple[int, ...]] = set()
    for subset in itertools.combinations(range(len(normals)), dim - 1):
        rows = [normals[i] for i in subset]
        if rational_rank(rows) != dim - 1:
            continue
        kernel = integer_kernel_basis(IntMatrix.from_rows(rows))
        if kernel.cols != 1:
            continue
        gen = make_primitive(kernel.column(0))
        for cand in (gen, tuple(-x for x in gen)):
            pairings = [sum(a * b for a, b in zip(cand, lam)) for lam in normals]
            if all(v >= 0 for v in pairings):
                active = [i for i, v in enumerate(pairings) if v == 0]
                if rational_rank([normals[i] for i in active]) == dim - 1:
                    found.add(cand)
    return sorted(found)


def dual_rays(cone: ConeSpec) -> RayList:
    """Extreme rays of the cone, primitive and lexicographically sorted.

    Raises DegenerateConeError when the cone contains a line or has empty
    interior (in either case there is no meaningful extreme-ray set).
    """
    _check_size(cone)
    if cone.dim < 2:
        raise ValueError("dual_rays requires dim >= 2")
    if rational_rank(cone.normals) != cone.dim:
        raise DegenerateConeError("cone contains a line (normals do not span)")
    rays = _ray_candidates(cone)
    if not rays:
        raise DegenerateConeError("cone has no extreme rays")
    interior = tuple(sum(r[i] for r in rays) for i in range(cone.dim))
    if any(sum(a * b for a, b in zip(interior, lam)) <= 0 for lam in cone.normals):
        raise DegenerateConeError("cone has empty interior")
    return RayList(tuple(rays))


def face_lattice(cone: ConeSpec, rays: Optional[RayList] = None) -> FaceLattice:
    """All faces of the cone, as the intersection closure of its facets.

    Each face is recorded with the maximal set of normals vanishing on it.
    Includes the cone itself and the apex {0}.
    """
    _check_size(cone)
    if rays is None:
        rays = dual_rays(cone)
    ray_list = rays.rays
    normals = cone.normals
    pairing = [
        [sum(a * b for a, b in zip(r, lam)) for lam in normals] for r in ray_list
    ]

    def vanishing_normals(ray_set: frozenset[int]) -> tuple[int, ...]:
        return tuple(
            i for i in range(len(normals)) if all(pairing[r][i] == 0 for r in ray_set)
        )

    def face_dim(ray_set: frozenset[int]) -> int:
        if not ray_set:
            return 0
        return rational_rank([ray_list[r] for r in sorted(ray_set)])

    facets = [
        frozenset(r for r in range(len(ray_list)) if pairing[r][i] == 0)
        for i in range(len(normals))
    ]
    all_rays = frozenset(range(len(ray_list)))
    seen: set[frozenset[int]] = {all_rays}
    work = [all_rays]
    while work:
        current = work.pop()
        for facet in facets:
            nxt = current & facet
            if nxt not in seen:
                seen.add(nxt)
                work.append(nxt)
    faces = [
        Face(vanishing_normals(s), tuple(sorted(s)), face_dim(s))
        for s in sorted(seen, key=lambda s: (len(s), tuple(sorted(s))))
    ]
    return FaceLattice(tuple(faces))


def validate(cone: ConeSpec) -> ValidationReport:
    """Run the full validity suite: primitive, minimal, strongly convex, good.

    Failures are report entries with witnesses, never exceptions. Goodness
    is decided on every proper face of positive dimension: the normals
    vanishing there must be independent over Z and span a saturated
    sublattice (the apex face is excluded; its vanishing set is the whole
    normal list, which is never independent once the cone is non-simplicial).
    """
    _check_size(cone)
    checks: list[CheckResult] = []

    bad = [i for i, n in enumerate(cone.normals) if all(x == 0 for x in n)]
    if bad:
        checks.append(CheckResult("nonzero", False, {"normal_index": bad[0]}))
        return ValidationReport(tuple(checks))
    checks.append(CheckResult("nonzero", True))

    if cone.num_normals < cone.dim:
        checks.append(
            CheckResult("count", False, {"reason": f"need at least {cone.dim} normals"})
        )
    else:
        checks.append(CheckResult("count", True))

    non_prim = [i for i, n in enumerate(cone.normals) if not is_primitive(n)]
    if non_prim:
        checks.append(
            CheckResult(
                "primitive",
                False,
                {"normal_index": non_prim[0], "normal": list(cone.normals[non_prim[0]])},
            )
        )
    else:
        checks.append(CheckResult("primitive", True))

    strongly_convex = rational_rank(cone.normals) == cone.dim
    checks.append(
        CheckResult(
            "strongly_convex",
            strongly_convex,
            None if strongly_convex else {"reason": "normals do not span the ambient space"},
        )
    )

    rays: Optional[RayList] = None
    if strongly_convex:
        try:
            rays = dual_rays(cone)
            checks.append(CheckResult("full_dimensional", True))
        except DegenerateConeError as err:
            checks.append(CheckResult("full_dimensional", False, {"reason": str(err)}))
    else:
        checks.append(
            CheckResult("full_dimensional", False, {"reason": "prerequisite strongly_convex failed"})
        )

    if rays is not None:
        pairing = [
            [sum(a * b for a, b in zip(r, lam)) for lam in cone.normals] for r in rays.rays
        ]
        redundant = []
        for i in range(cone.num_normals):
            on_facet = [rays.rays[r] for r in range(len(rays)) if pairing[r][i] == 0]
            # an irredundant inequality of a full-dimensional cone cuts a facet
            is_facet = bool(on_facet) and rational_rank(on_facet) == cone.dim - 1
            if not is_facet:
                redundant.append(i)
        if redundant:
            checks.append(
                CheckResult(
                    "minimal",
                    False,
                    {"normal_index": redundant[0], "normal": list(cone.normals[redundant[0]])},
                )
            )
        else:
            checks.append(CheckResult("minimal", True))

        lattice_ok = True
        witness = None
        for face in face_lattice(cone, rays).faces:
            if face.dim == 0 or face.dim == cone.dim:
                continue
            subset = [cone.normals[i] for i in face.normal_indices]
            if rational_rank(subset) != len(subset):
                lattice_ok = False
                witness = {
                    "face_normals": list(face.normal_indices),
                    "reason": "normals on face are linearly dependent",
                }
                break
            try:
                if not is_saturated(subset, cone.dim):
                    lattice_ok = False
                    witness = {
                        "face_normals": list(face.normal_indices),
                        "reason": "face sublattice is not saturated",
                    }
                    break
            except DependentVectorsError as err:
                lattice_ok = False
                witness = {
                    "face_normals": list(face.normal_indices),
                    "reason": "normals on face are linearly dependent",
                    "dependency": [str(c) for c in err.witness],
                }
                break
        checks.append(CheckResult("good", lattice_ok, witness))
    else:
        checks.append(CheckResult("minimal", False, {"reason": "prerequisite failed"}))
        checks.append(CheckResult("good", False, {"reason": "prerequisite failed"}))

    return ValidationReport(tuple(checks))


def reeb_cone_contains(cone: ConeSpec, xi: Sequence, rays: Optional[RayList] = None) -> bool:
    """Strict interior test of the dual cone: <ray, xi> > 0 on every extreme ray.

    Exact when all components of xi are rational; float comparison otherwise.
    """
    if rays is None:
        rays = dual_rays(cone)
    exact = all(isinstance(x, Rational) for x in xi)
    for ray in rays.rays:
        val = sum(Fraction(a) * Fraction(x) if exact else float(a) * float(x) for a, x in zip(ray, xi))
        if val <= 0:
            return False
    return True


def gorenstein_vector(cone: ConeSpec) -> Optional[tuple[int, ...]]:
    """Integer vector pairing to exactly 1 with every normal, if one exists.

    Solved exactly over the rationals; a fractional solution means no
    integer normalization vector exists and None is returned.
    """
    sol = solve_rational(cone.normals, [1] * cone.num_normals)
    if sol is None:
        return None
    # solve_rational returns one solution; verify it really hits every normal
    for lam in cone.normals:
        if sum(Fraction(g) * l for g, l in zip(sol, lam)) != 1:
            return None
    if any(c.denominator != 1 for c in sol):
        return None
    return tuple(int(c) for c in sol)


def xi_zero(cone: ConeSpec) -> tuple[int, ...]:
    """Sum of the first dim normals, the construction's default Reeb choice.

    Membership in the Reeb cone is never assumed; callers must check with
    reeb_cone_contains and report.
    """
    return tuple(sum(lam[i] for lam in cone.normals[: cone.dim]) for i in range(cone.dim))
