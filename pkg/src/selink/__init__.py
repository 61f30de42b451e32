"""Toric Sasaki-Einstein cone computations and special Legendrian real links.

The pipeline: validate a good rational polyhedral cone, build the quotient
bookkeeping (kernel matrix, deck group), find the Einstein Reeb vector by
volume minimization, emit the quadric system cutting the real link, sample
it, and numerically verify the contact-geometric identities on the samples.
"""

__version__ = "0.1.0"

from .cone import ConeSpec, dual_rays, gorenstein_vector, reeb_cone_contains, validate, ypq_cone
from .delzant import DelzantData, build, deck_group, reeb_coefficients
from .reallink import QuadricSystem, build_system, sample, systems_equivalent
from .reeb import minimize, volume, ypq_reeb
from .verifier import ContactData, eval_eta, verify_flat_special, verify_link

__all__ = [
    "ConeSpec",
    "ContactData",
    "DelzantData",
    "QuadricSystem",
    "build",
    "build_system",
    "deck_group",
    "dual_rays",
    "eval_eta",
    "gorenstein_vector",
    "minimize",
    "reeb_cone_contains",
    "reeb_coefficients",
    "sample",
    "systems_equivalent",
    "validate",
    "verify_flat_special",
    "verify_link",
    "volume",
    "ypq_cone",
    "ypq_reeb",
]
