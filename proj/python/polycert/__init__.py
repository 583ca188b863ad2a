"""Certified robustness for union-of-subspaces classifiers."""

from ._core import (
    ArgumentError,
    Certified,
    PolycertError,
    all_agree_radius,
    bpdn_solve,
    cap_measure,
    certify,
    clopper_pearson_lower,
    cube_risk,
    inv_norm_cdf,
    norm_cdf,
    reg_inc_beta,
    run_cli,
    sphere_risk_curve,
)

__all__ = [
    "ArgumentError",
    "Certified",
    "PolycertError",
    "all_agree_radius",
    "bpdn_solve",
    "cap_measure",
    "certify",
    "clopper_pearson_lower",
    "cube_risk",
    "inv_norm_cdf",
    "norm_cdf",
    "reg_inc_beta",
    "run_cli",
    "sphere_risk_curve",
]
