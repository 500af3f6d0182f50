"""Laplace transforms of theta, delta and gamma for barrier contracts.

Digitals differentiate the knock-in mixture directly.  For the
down-and-out put the delta and gamma are the exact spot derivatives of
the corridor decomposition in :mod:`hejdbarrier.transforms`: each
coefficient group scales like a pure power of the spot, so
differentiation multiplies the group by its exponent.  The S0-linear
group (present when the strike is at or above spot) survives only in the
delta.

Thetas follow from ``theta_hat = q * price_hat - price(0+)`` with the
appropriate time-zero value: 0 for knock-in digitals, 1 for the
down-and-out digital and ``(K - S0)^+`` for the down-and-out put.
"""
from __future__ import annotations

from enum import Enum
from typing import Optional

import numpy as np

from .models import HEJDParams
from .transforms import (
    ContractKind,
    ContractSpec,
    put_corridor_coeffs,
    lt_edid,
    lt_dop,
)
from .wiener_hopf import RootCache, solve_roots

__all__ = ["GreekKind", "lt_theta", "lt_delta", "lt_gamma", "dop_delta_coeffs"]


class GreekKind(str, Enum):
    DELTA = "delta"
    GAMMA = "gamma"
    THETA = "theta"


_DIGITAL_DOWN = {ContractKind.EDID, ContractKind.ADID, ContractKind.EDOD}


def _require_smooth(contract: ContractSpec, params: HEJDParams):
    if params.sigma2 <= 0.0:
        raise ValueError(
            "spot greeks need sigma2 > 0 (value functions are smooth only "
            "with a Gaussian component)"
        )
    if contract.kind == ContractKind.DOP and contract.s0 == contract.strike:
        raise ValueError(
            "DOP delta/gamma sit on the strike-regime boundary at S0 == K; "
            "offset the spot by a small epsilon"
        )


def _factor(contract: ContractSpec, params: HEJDParams, q: complex,
            cache: Optional[RootCache]):
    arg = complex(q) + contract.rate
    return cache.get(params, arg) if cache is not None else solve_roots(params, arg)


def _digital_power_sum(contract, fact, extra_power: int) -> complex:
    """sum_j rho_j^(k) weights: rho**1 for delta, rho*(rho-1) for gamma."""
    h = contract.h
    out = 0.0 + 0.0j
    for a, rho in zip(fact.a_minus, fact.rho_minus):
        w = rho if extra_power == 1 else rho * (rho - 1.0)
        out += w * a * np.exp(-rho * h)
    return out


def lt_theta(contract: ContractSpec, params: HEJDParams, q: complex,
             cache: Optional[RootCache] = None) -> complex:
    """Transform of the maturity sensitivity."""
    kind = contract.kind
    r = contract.rate
    if kind == ContractKind.EDID:
        return q * lt_edid(contract, params, q, cache)
    if kind == ContractKind.ADID:
        return (q + r) * lt_edid(contract, params, q, cache)
    if kind == ContractKind.EDOD:
        # EDOD = e^{-rT} - EDID, EDOD(0+) = 1
        return -q * lt_edid(contract, params, q, cache) - r / (q + r)
    if kind == ContractKind.DOP:
        return q * lt_dop(contract, params, q, cache) - max(contract.strike - contract.s0, 0.0)
    raise ValueError(f"theta transform not available for {kind.value}")


def lt_delta(contract: ContractSpec, params: HEJDParams, q: complex,
             cache: Optional[RootCache] = None) -> complex:
    """Transform of d(price)/d(S0)."""
    _require_smooth(contract, params)
    kind = contract.kind
    r = contract.rate
    fact = _factor(contract, params, q, cache)
    if kind in _DIGITAL_DOWN:
        base = _digital_power_sum(contract, fact, 1) / ((q + r) * contract.s0)
        if kind == ContractKind.EDID:
            return base
        if kind == ContractKind.ADID:
            return (q + r) / q * base
        return -base  # EDOD = e^{-rT} - EDID has no other S0 dependence
    if kind == ContractKind.DOP:
        s0, k = contract.s0, contract.strike
        c0 = put_corridor_coeffs(0, contract.ell, contract.h, fact)
        c1 = put_corridor_coeffs(1, contract.ell, contract.h, fact)
        out = 0.0 + 0.0j
        for a, rho, d0, d1 in zip(fact.a_minus, fact.rho_minus, c0.down, c1.down):
            out += a * rho * (k * d0 - s0 * d1)
        for a, rho, u0, u1 in zip(fact.a_plus, fact.rho_plus, c0.up, c1.up):
            out += a * rho * (k * u0 - s0 * u1)
        out /= s0
        out -= c1.const  # d/dS0 of the -S0*const piece of the price
        return out / (q + r)
    raise ValueError(f"delta transform not available for {kind.value}")


def lt_gamma(contract: ContractSpec, params: HEJDParams, q: complex,
             cache: Optional[RootCache] = None) -> complex:
    """Transform of d2(price)/d(S0)^2."""
    _require_smooth(contract, params)
    kind = contract.kind
    r = contract.rate
    fact = _factor(contract, params, q, cache)
    if kind in _DIGITAL_DOWN:
        base = _digital_power_sum(contract, fact, 2) / ((q + r) * contract.s0 ** 2)
        if kind == ContractKind.EDID:
            return base
        if kind == ContractKind.ADID:
            return (q + r) / q * base
        return -base
    if kind == ContractKind.DOP:
        s0, k = contract.s0, contract.strike
        c0 = put_corridor_coeffs(0, contract.ell, contract.h, fact)
        c1 = put_corridor_coeffs(1, contract.ell, contract.h, fact)
        out = 0.0 + 0.0j
        for a, rho, d0, d1 in zip(fact.a_minus, fact.rho_minus, c0.down, c1.down):
            out += a * rho * (rho - 1.0) * (k * d0 - s0 * d1)
        for a, rho, u0, u1 in zip(fact.a_plus, fact.rho_plus, c0.up, c1.up):
            out += a * rho * (rho - 1.0) * (k * u0 - s0 * u1)
        return out / (s0 ** 2 * (q + r))
    raise ValueError(f"gamma transform not available for {kind.value}")


def dop_delta_coeffs(b: int, contract: ContractSpec, params: HEJDParams, q: complex,
                     cache: Optional[RootCache] = None):
    """Coefficient lists entering the DOP delta/gamma at exponent ``b``.

    Returns the corridor decomposition at ``q + r``: per-root downward
    coefficients, per-root upward coefficients (empty in the
    strike-below-spot regime) and the S0-free constant.  The delta is
    assembled from these lists; they are exposed for boundary tests
    (corridor collapse, regime agreement at the strike).
    """
    fact = _factor(contract, params, q, cache)
    return put_corridor_coeffs(b, contract.ell, contract.h, fact)
