"""Numerical contact-geometry checks on sampled real-link data.

All evaluations happen upstairs in C^d with the closed-form potential
r^2 = 2 sum_j b_j |z_j|^2, the contact form d^c log r, and the two-form
i sum_j b_j dz_j ^ dz_j-bar. On the real locus these vanish on real
tangent frames for structural reasons (conjugation flips their sign), so
the checks certify the implementation and the sampled locus rather than
re-derive the geometry; the negative controls make sure they can fail.

Sign conventions are fixed once here and validated by the pairing of the
contact form with the rotated Euler field, which must be identically 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .delzant import ReebCoefficients
from .reallink import QuadricSystem, SampleSet

#: Conservative machine-noise floor for residual-type checks. Tolerances
#: below a check's floor cannot be certified in double precision and are
#: reported as failures with an explanatory note.
EPS_FLOOR = 64 * np.finfo(float).eps


@dataclass(frozen=True)
class ContactData:
    """Closed-form contact data determined by the Reeb coefficients.

    weights holds the coefficients b; the potential, contact form, and
    two-form are all constant-coefficient expressions in them. The radius
    is conjugation invariant by construction, so the real locus sees the
    anti-invariance of the contact form directly.
    """

    weights: tuple[float, ...]

    def weight_array(self) -> np.ndarray:
        return np.array(self.weights)

    def r2(self, z: np.ndarray) -> float:
        return float(2.0 * np.sum(self.weight_array() * np.abs(np.asarray(z)) ** 2))

    def r(self, z: np.ndarray) -> float:
        return math.sqrt(self.r2(z))


def contact_data(coeffs: ReebCoefficients) -> ContactData:
    return ContactData(tuple(float(v) for v in coeffs.values))


def euler_field(z: np.ndarray) -> np.ndarray:
    """Generator of the cone dilations, the gradient of half the potential."""
    return np.asarray(z, dtype=complex)


def reeb_field(z: np.ndarray) -> np.ndarray:
    """Rotation of the Euler field by the complex structure."""
    return 1j * np.asarray(z, dtype=complex)


def eval_eta(ctx: ContactData, z: np.ndarray, vec: np.ndarray) -> complex:
    """Pairing of the contact form with a tangent vector at z.

    Closed form (2/r^2) sum_j b_j Im(conj(z_j) X_j), assembled so the
    imaginary part of the returned value vanishes identically and serves
    as a consistency channel. Rejects points with r = 0.
    """
    z = np.asarray(z, dtype=complex)
    vec = np.asarray(vec, dtype=complex)
    r2 = ctx.r2(z)
    if r2 <= 0:
        raise ValueError("contact form undefined where the radius vanishes")
    w = np.sum(ctx.weight_array() * np.conj(z) * vec)
    return complex(1j * (np.conj(w) - w) / r2)


def eval_omega(ctx: ContactData, x_vec: np.ndarray, y_vec: np.ndarray) -> float:
    """Two-form from the potential, on constant coefficients: point independent."""
    x_vec = np.asarray(x_vec, dtype=complex)
    y_vec = np.asarray(y_vec, dtype=complex)
    return float(-2.0 * np.imag(np.sum(ctx.weight_array() * x_vec * np.conj(y_vec))))


def holomorphic_volume_pairing(vectors: Sequence[np.ndarray]) -> complex:
    """Flat-model top holomorphic form on a frame: the complex determinant."""
    mat = np.column_stack([np.asarray(v, dtype=complex) for v in vectors])
    return complex(np.linalg.det(mat))


@dataclass(frozen=True)
class CheckEntry:
    name: str
    max_violation: float
    tolerance: float
    passed: bool
    note: Optional[str] = None

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "max_violation": self.max_violation,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }
        if self.note is not None:
            out["note"] = self.note
        return out


@dataclass(frozen=True)
class VerificationReport:
    checks: tuple[CheckEntry, ...]
    sample_count: int
    seed: int

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> CheckEntry:
        return next(c for c in self.checks if c.name == name)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "sample_count": self.sample_count,
            "seed": self.seed,
            "checks": [c.to_dict() for c in self.checks],
        }


def _entry(name: str, violation: float, tol: float, floor: float = 0.0) -> CheckEntry:
    if tol < floor:
        return CheckEntry(
            name,
            violation,
            tol,
            False,
            note=f"tolerance below double-precision floor {floor:.2e}; cannot certify",
        )
    return CheckEntry(name, violation, tol, bool(violation < tol))


def tangent_frame(system: QuadricSystem, x: np.ndarray) -> Optional[np.ndarray]:
    """Orthonormal basis of the locus tangent space at x, or None if the
    constraint Jacobian is rank deficient there."""
    jac = system.constraint_jacobian(x)
    expected = system.k + 1
    _, sing, vt = np.linalg.svd(jac)
    if np.sum(sing > 1e-8 * max(sing[0], 1.0)) != expected:
        return None
    return vt[expected:]


def verify_link(
    system: QuadricSystem,
    ctx: ContactData,
    samples: SampleSet,
    tol: float = 1e-9,
) -> VerificationReport:
    """Run the link checks at every sample.

    Samples sit on the level set where the level pairing equals 1, which
    is radius sqrt(2); the cone structure moves them to radius 1 by exact
    scaling before the geometric checks. Residual-type checks run at
    tol/10, geometric pairings at tol.
    """
    pts = samples.points
    weights = ctx.weight_array()
    res_tol = tol / 10.0

    u = pts * pts
    scale = float(np.max(np.abs(u))) if len(pts) else 1.0
    a_norm = float(np.max(np.abs(system.rows_array()))) if system.k else 0.0
    b_norm = float(np.max(np.abs(weights)))
    residual_floor = EPS_FLOOR * max(1.0, (a_norm + b_norm) * scale * system.d)

    constraint_violation = float(np.max(system.residuals(pts))) if len(pts) else 0.0

    radii = np.sqrt(2.0 * (pts * pts) @ weights)
    level_violation = float(np.max(np.abs(radii - math.sqrt(2.0))))
    normalized = pts / radii[:, None]

    eta_max = 0.0
    omega_max = 0.0
    cone_max = 0.0
    r_one_max = 0.0
    reeb_max = 0.0
    bad_frames = 0
    rows_arr = system.rows_array()
    for x in normalized:
        frame = tangent_frame(system, x)
        if frame is None:
            bad_frames += 1
            continue
        z = x.astype(complex)
        for y_vec in frame:
            eta_max = max(eta_max, abs(eval_eta(ctx, z, y_vec).real))
        for i in range(len(frame)):
            for j in range(i + 1, len(frame)):
                omega_max = max(omega_max, abs(eval_omega(ctx, frame[i], frame[j])))
        if system.k:
            # Euler direction x must be tangent to the cone over the locus:
            # the homogeneous constraints' derivative along x is 2 A (x*x)
            cone_max = max(cone_max, float(np.max(np.abs(2.0 * rows_arr @ (x * x)))))
        r_one_max = max(r_one_max, abs(ctx.r(x) - 1.0))
        reeb_max = max(reeb_max, abs(eval_eta(ctx, z, reeb_field(z)).real - 1.0))

    checks = (
        _entry("constraint_residual", constraint_violation, res_tol, residual_floor),
        _entry("level_radius", level_violation, res_tol, residual_floor),
        CheckEntry("frame_rank", float(bad_frames), 1.0, bad_frames == 0,
                   note=None if bad_frames == 0 else f"{bad_frames} rank-deficient points"),
        _entry("eta_on_frames", eta_max, tol),
        _entry("omega_on_frames", omega_max, tol),
        _entry("cone_tangency", cone_max, res_tol, residual_floor),
        _entry("radius_normalized", r_one_max, res_tol, EPS_FLOOR),
        _entry("reeb_pairing", reeb_max, max(tol, 1e-12), EPS_FLOOR),
    )
    return VerificationReport(checks, len(pts), samples.seed)


def verify_flat_special(
    n: int,
    samples: SampleSet,
    tol: float = 1e-9,
    im_tol: float = 1e-12,
) -> VerificationReport:
    """Flat-model calibration check on the real unit sphere S^n in R^{n+1}.

    Frames are {x, orthonormal tangent basis of the sphere}; the top
    holomorphic form evaluated on them must be real (imaginary part below
    im_tol) with |real part| equal to the frame volume within tol.
    Rejects input that is not flat-model shaped.
    """
    pts = samples.points
    if pts.shape[1] != n + 1:
        raise ValueError(f"flat model of dimension n={n} needs points in R^{n + 1}")
    norms = np.linalg.norm(pts, axis=1)
    if float(np.max(np.abs(norms - 1.0))) > 1e-8:
        raise ValueError("samples are not on the real unit sphere")

    im_max = 0.0
    cal_max = 0.0
    for x in pts:
        _, sing, vt = np.linalg.svd(x[None, :])
        tangent = vt[1:]
        frame = np.vstack([x[None, :], tangent])
        value = holomorphic_volume_pairing(list(frame))
        gram = frame @ frame.T
        vol = math.sqrt(abs(np.linalg.det(gram)))
        im_max = max(im_max, abs(value.imag))
        cal_max = max(cal_max, abs(abs(value.real) - vol))
    checks = (
        _entry("imaginary_part", im_max, im_tol, EPS_FLOOR / 4),
        _entry("calibration_equality", cal_max, tol, EPS_FLOOR),
    )
    return VerificationReport(checks, len(pts), samples.seed)
