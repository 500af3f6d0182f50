"""Published parameter sets used by the table-reproduction command.

The hyper-exponential fits below (seven phases per side) approximate a
variance gamma model with C=0.925, G=4.667, M=11.876 and a normal
inverse Gaussian model with alpha=8.858, beta=-5.808, delta=0.174, both
calibrated to Stoxx50E calls.  The drift and variance entries are taken
as published (two significant digits) and are used verbatim rather than
re-derived, so the fitted processes are martingales only to the printed
precision.
"""
from __future__ import annotations

from .models import HEJDParams, KoBoLModel, NIGModel, vg_model

__all__ = [
    "NIG_TARGET",
    "VG_TARGET",
    "NIG_FIT",
    "VG_FIT",
    "REFERENCE_SPOT",
]

REFERENCE_SPOT = 3500.0

NIG_TARGET = NIGModel(alpha=8.858, beta=-5.808, delta=0.174)

VG_TARGET: KoBoLModel = vg_model(c=0.925, g=4.667, m=11.876)

NIG_FIT = HEJDParams(
    mu=0.15,
    sigma2=0.042,
    lambda_plus=5.1,
    lambda_minus=6.4,
    p_plus=(0.005, 0.005, 0.01, 0.06, 0.12, 0.19, 0.61),
    alpha_plus=(5.0, 10.0, 15.0, 25.0, 30.0, 60.0, 80.0),
    p_minus=(0.05, 0.03, 0.11, 0.08, 0.10, 0.40, 0.23),
    alpha_minus=(5.0, 10.0, 15.0, 25.0, 30.0, 60.0, 80.0),
)

VG_FIT = HEJDParams(
    mu=0.13,
    sigma2=0.011,
    lambda_plus=2.2,
    lambda_minus=3.0,
    p_plus=(0.003, 0.007, 0.21, 0.08, 0.26, 0.19, 0.25),
    alpha_plus=(5.0, 10.0, 15.0, 25.0, 30.0, 60.0, 80.0),
    p_minus=(0.01, 0.09, 0.31, 0.31, 0.10, 0.08, 0.10),
    alpha_minus=(2.0, 5.0, 10.0, 30.0, 50.0, 80.0, 100.0),
)
