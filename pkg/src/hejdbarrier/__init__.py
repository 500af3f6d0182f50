"""Barrier option prices and greeks under hyper-exponential jump-diffusions.

The pipeline: approximate a completely monotone jump density by a finite
exponential mixture per side (``fitting``), factorise the Laplace
exponent into its half-plane roots (``wiener_hopf``), assemble
closed-form price and greek transforms (``transforms``, ``greeks``), and
invert numerically (``inversion``).  ``mc`` holds an independent Monte
Carlo cross-check.
"""

from .models import (
    HEJDParams,
    TargetModel,
    KouModel,
    HyperExpModel,
    KoBoLModel,
    NIGModel,
    MeixnerModel,
    vg_model,
    levy_density,
    char_exponent,
    martingale_drift,
    with_martingale_drift,
)
from .fitting import FitConfig, FitReport, fit_hyperexp, gaussian_adjustment, fit_model
from .wiener_hopf import RootCache, RootFactorization, solve_roots
from .transforms import ContractKind, ContractSpec
from .greeks import GreekKind
from .inversion import InversionConfig, ValuationRow, abate_whitt_invert, value_contract, value_grid
from .mc import SimConfig, MCEstimate, mc_value, mc_value_grid, mc_greek_fd

__all__ = [
    "HEJDParams", "TargetModel", "KouModel", "HyperExpModel", "KoBoLModel",
    "NIGModel", "MeixnerModel", "vg_model", "levy_density", "char_exponent",
    "martingale_drift", "with_martingale_drift",
    "FitConfig", "FitReport", "fit_hyperexp", "gaussian_adjustment", "fit_model",
    "RootCache", "RootFactorization", "solve_roots",
    "ContractKind", "ContractSpec", "GreekKind",
    "InversionConfig", "ValuationRow", "abate_whitt_invert", "value_contract",
    "value_grid",
    "SimConfig", "MCEstimate", "mc_value", "mc_value_grid", "mc_greek_fd",
]

__version__ = "0.1.0"
