"""Variance of prime ideals of a Galois number field in arithmetic progressions.

A Barban-Davenport-Halberstam type experiment: prime-ideal norms are bucketed
by residue class, the variance S(x; Q1, Q2) is measured, and it is compared
with main terms built from Dirichlet-series constants of 1/phi_K(n).
"""

from .field_catalog import FieldSpec, build_field, catalog
from .galois_image import base_data, gq_by_generation, phi_k_by_formula
from .dirichlet_constants import constant_set, euler_h, leading_constant_c1
from .variance_engine import predicted_S, regress_slope, variance_S

__all__ = [
    "FieldSpec",
    "build_field",
    "catalog",
    "base_data",
    "gq_by_generation",
    "phi_k_by_formula",
    "constant_set",
    "euler_h",
    "leading_constant_c1",
    "predicted_S",
    "regress_slope",
    "variance_S",
]
