"""Least-squares approximation of a target jump density by exponentials.

Step one of the pricing pipeline: pick exponent grids per side, match the
target density on a set of evaluation points by non-negative least
squares (solved in the ``w_i = lambda * p_i * alpha_i`` parametrisation,
which is linear in the density), then

* fold the small-jump mass that the mixture misses into the Gaussian
  variance (positive part of the density defect, integrated against y^2
  over an interval around zero), and
* re-solve the drift so the discounted exponential is a martingale.

The evaluation grid deliberately excludes a neighbourhood of zero: an
infinite-activity target blows up there and the mixture never matches
it; that region belongs to the variance correction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import quad
from scipy.optimize import nnls

from .models import (
    HEJDParams,
    HyperExpModel,
    TargetModel,
    levy_density,
    martingale_drift,
    tail_decay_rate,
)

__all__ = ["FitConfig", "FitReport", "FitError", "fit_hyperexp",
           "gaussian_adjustment", "fit_model"]


class FitError(RuntimeError):
    pass


def _check_grid(grid, name: str) -> tuple[float, ...]:
    g = tuple(float(v) for v in grid)
    if not g:
        raise ValueError(f"{name} must not be empty")
    if any(v <= 0.0 for v in g):
        raise ValueError(f"{name} entries must be positive")
    if any(b <= a for a, b in zip(g, g[1:])):
        raise ValueError(f"{name} must be strictly increasing")
    return g


@dataclass(frozen=True)
class FitConfig:
    """Exponent grids, evaluation abscissae and solver knobs.

    ``x_grid`` mixes negative and positive points (strictly increasing,
    zero excluded).  ``weighting`` picks the least-squares metric:
    "relative" (default) scales each residual by the target density, so
    every decade of the grid counts equally; "uniform" fits absolute
    residuals; "user" uses the explicit per-point ``weights``.  Fitted
    components whose weight falls below ``drop_tol`` times the largest
    weight on their side are dropped from the returned parameter set.
    """

    alpha_plus_grid: tuple[float, ...]
    alpha_minus_grid: tuple[float, ...]
    x_grid: tuple[float, ...]
    weighting: str = "relative"
    weights: Optional[tuple[float, ...]] = None
    drop_tol: float = 1e-12

    def __post_init__(self):
        object.__setattr__(self, "alpha_plus_grid",
                           _check_grid(self.alpha_plus_grid, "alpha_plus_grid"))
        object.__setattr__(self, "alpha_minus_grid",
                           _check_grid(self.alpha_minus_grid, "alpha_minus_grid"))
        xs = tuple(float(v) for v in self.x_grid)
        if not xs:
            raise ValueError("x_grid must not be empty")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("x_grid must be strictly increasing")
        if any(v == 0.0 for v in xs):
            raise ValueError("x_grid must exclude zero")
        object.__setattr__(self, "x_grid", xs)
        if self.weighting not in ("relative", "uniform", "user"):
            raise ValueError(f"unknown weighting {self.weighting!r}")
        if self.weights is not None:
            w = tuple(float(v) for v in self.weights)
            if len(w) != len(xs):
                raise ValueError("weights must match x_grid in length")
            if any(v < 0.0 for v in w):
                raise ValueError("weights must be non-negative")
            object.__setattr__(self, "weights", w)
        if self.weighting == "user" and self.weights is None:
            raise ValueError("weighting='user' needs explicit weights")
        if self.drop_tol < 0.0:
            raise ValueError("drop_tol must be >= 0")

    @property
    def x_min(self) -> float:
        return min(abs(x) for x in self.x_grid)

    @property
    def x_max(self) -> float:
        return max(abs(x) for x in self.x_grid)

    @classmethod
    def default(cls, alpha_plus_grid, alpha_minus_grid,
                x_min: float = 0.005, x_max: float = 1.0,
                points_per_side: int = 200) -> "FitConfig":
        """Log-spaced evaluation points on [x_min, x_max] per side."""
        pos = np.geomspace(x_min, x_max, points_per_side)
        xs = tuple(-pos[::-1]) + tuple(pos)
        return cls(alpha_plus_grid=tuple(alpha_plus_grid),
                   alpha_minus_grid=tuple(alpha_minus_grid), x_grid=xs)


@dataclass(frozen=True)
class FitReport:
    """Fit quality: intensities, density RMSE on the grid, tail-mass gap."""

    lambda_plus: float
    lambda_minus: float
    rmse: float
    tail_mass_error: float


def _fit_side(target: TargetModel, alphas: tuple[float, ...], xs: np.ndarray,
              sign: float, weights: Optional[np.ndarray], drop_tol: float):
    """NNLS in the w = lambda*p*alpha parametrisation on one side.

    ``xs`` are positive magnitudes; ``sign`` selects the half-axis the
    target density is read from.
    """
    design = np.exp(-np.outer(xs, np.asarray(alphas)))
    rhs = np.asarray(levy_density(target, sign * xs), dtype=float)
    if weights is not None:
        scale = np.sqrt(weights)
        design = design * scale[:, None]
        rhs = rhs * scale
    w, _residual = nnls(design, rhs)
    if w.max(initial=0.0) > 0.0:
        w[w < drop_tol * w.max()] = 0.0
    keep = w > 0.0
    lam = float(np.sum(w[keep] / np.asarray(alphas)[keep])) if keep.any() else 0.0
    if lam <= 0.0:
        return 0.0, (), ()
    p = tuple((wi / ai) / lam for wi, ai in zip(w[keep], np.asarray(alphas)[keep]))
    # renormalise away the rounding of the drop step
    total = math.fsum(p)
    p = tuple(v / total for v in p)
    return lam, p, tuple(float(a) for a in np.asarray(alphas)[keep])


def _tail_mass_gap(target: TargetModel, fitted: HyperExpModel, x_max: float) -> float:
    """|integral of (k - k_n) over |x| > x_max|, per side, summed."""
    total = 0.0
    for sign, side, lam, p, alpha in (
        (+1.0, "up", fitted.lambda_plus, fitted.p_plus, fitted.alpha_plus),
        (-1.0, "down", fitted.lambda_minus, fitted.p_minus, fitted.alpha_minus),
    ):
        # integrate to where the exponential tail is numerically dead
        upper = x_max + 80.0 / tail_decay_rate(target, side)
        target_tail, _ = quad(lambda y: float(levy_density(target, sign * y)),
                              x_max, upper, limit=200)
        fit_tail = lam * sum(pi * math.exp(-ai * x_max) for pi, ai in zip(p, alpha))
        total += abs(target_tail - fit_tail)
    return total


def fit_hyperexp(target: TargetModel, config: FitConfig) -> tuple[HyperExpModel, FitReport]:
    """Fit the jump part; returns the mixture and a quality report.

    Raises :class:`FitError` when the target density is negligible on the
    whole grid (all fitted weights zero).
    """
    xs = np.asarray(config.x_grid)
    if config.weighting == "uniform":
        w = None
    elif config.weighting == "relative":
        dens = np.asarray(levy_density(target, xs), dtype=float)
        w = 1.0 / np.maximum(dens, 1e-300) ** 2
    else:
        w = np.asarray(config.weights)
    pos = xs > 0.0
    lam_p, p_p, a_p = _fit_side(target, config.alpha_plus_grid, xs[pos], +1.0,
                                w[pos] if w is not None else None, config.drop_tol)
    neg = xs < 0.0
    lam_m, p_m, a_m = _fit_side(target, config.alpha_minus_grid, -xs[neg][::-1], -1.0,
                                w[neg][::-1] if w is not None else None, config.drop_tol)
    if lam_p <= 0.0 and lam_m <= 0.0:
        raise FitError("target density is negligible on the whole evaluation grid")
    fitted = HyperExpModel(
        lambda_plus=lam_p, p_plus=p_p, alpha_plus=a_p,
        lambda_minus=lam_m, p_minus=p_m, alpha_minus=a_m,
    )
    resid = np.asarray(levy_density(fitted, xs), dtype=float) - np.asarray(
        levy_density(target, xs), dtype=float)
    rmse = float(np.sqrt(np.mean(resid ** 2)))
    report = FitReport(lambda_plus=lam_p, lambda_minus=lam_m, rmse=rmse,
                       tail_mass_error=_tail_mass_gap(target, fitted, config.x_max))
    return fitted, report


def gaussian_adjustment(target: TargetModel, fitted: HyperExpModel,
                        interval: Optional[tuple[float, float]] = None,
                        rtol: float = 1e-8) -> float:
    """Target variance plus the small-jump compensation integral.

    ``integral of y^2 * max(k(y) - k_n(y), 0)`` over ``interval`` (which
    must contain zero; defaults to the reciprocal smallest exponent per
    side), added to the target's own Gaussian variance.
    """
    if interval is None:
        if not fitted.alpha_plus or not fitted.alpha_minus:
            raise ValueError("default interval needs non-empty fitted mixtures; pass interval=")
        interval = (-1.0 / min(fitted.alpha_minus), 1.0 / min(fitted.alpha_plus))
    lo, hi = interval
    if not lo < 0.0 < hi:
        raise ValueError(f"interval must contain zero, got {interval}")

    def defect(y: float) -> float:
        return y * y * max(float(levy_density(target, y)) - float(levy_density(fitted, y)), 0.0)

    left, _ = quad(defect, lo, 0.0, limit=400, epsabs=0.0, epsrel=rtol)
    right, _ = quad(defect, 0.0, hi, limit=400, epsabs=0.0, epsrel=rtol)
    return target.sigma2 + left + right


def fit_model(target: TargetModel, config: FitConfig, r: float, d: float = 0.0,
              interval: Optional[tuple[float, float]] = None,
              with_report: bool = False):
    """Full pipeline: density fit, variance correction, martingale drift.

    Returns the assembled :class:`HEJDParams` (with the report when
    ``with_report`` is set).
    """
    from dataclasses import replace

    fitted, report = fit_hyperexp(target, config)
    sigma2 = gaussian_adjustment(target, fitted, interval)
    params = HEJDParams(
        mu=0.0, sigma2=sigma2,
        lambda_plus=fitted.lambda_plus, p_plus=fitted.p_plus, alpha_plus=fitted.alpha_plus,
        lambda_minus=fitted.lambda_minus, p_minus=fitted.p_minus, alpha_minus=fitted.alpha_minus,
    )
    params = replace(params, mu=martingale_drift(params, r, d))
    return (params, report) if with_report else params
