"""Laplace transforms (in maturity) of single-barrier contract prices.

Every price here is a function of the maturity T; its Laplace transform
is closed-form in the roots and weights of the factorisation at argument
``q + r``.  Contracts:

* EDID / EDOD -- European down-and-in / down-and-out digital, paying 1 at
  maturity.
* ADID -- American down-and-in digital, paying 1 at the moment of
  crossing.
* DOP / DIP -- down-and-out / down-and-in put with strike K.
* EUID / AUID -- up-barrier digital analogues.

Exponentials are always evaluated on the *summed* exponent in the
log-moneyness variables ``h = log(H/S0)`` and ``ell = log(K/S0)``;
splitting them into separate powers of S0, K, H overflows at deep
Bromwich nodes where the roots are large.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .models import HEJDParams
from .wiener_hopf import RootCache, RootFactorization, solve_roots

__all__ = [
    "ContractKind",
    "ContractSpec",
    "lt_edid",
    "lt_adid",
    "lt_edod",
    "lt_euid",
    "lt_auid",
    "lt_dop",
    "lt_dip",
    "c_b",
    "d_b",
    "put_corridor_coeffs",
    "CorridorCoeffs",
]


class ContractKind(str, Enum):
    EDID = "edid"
    ADID = "adid"
    EDOD = "edod"
    DOP = "dop"
    DIP = "dip"
    EUID = "euid"
    AUID = "auid"


_DOWN_KINDS = {ContractKind.EDID, ContractKind.ADID, ContractKind.EDOD,
               ContractKind.DOP, ContractKind.DIP}
_UP_KINDS = {ContractKind.EUID, ContractKind.AUID}
_PUT_KINDS = {ContractKind.DOP, ContractKind.DIP}


@dataclass(frozen=True)
class ContractSpec:
    """Single-barrier contract descriptor.

    Down-type contracts need ``barrier < s0``; up-type need
    ``barrier >= s0`` (equality means knock-in is immediate).  Puts
    additionally need ``barrier < strike``.  ``strike`` is unused (and
    may be None) for digitals.
    """

    kind: ContractKind
    s0: float
    barrier: float
    maturity: float
    rate: float
    dividend: float = 0.0
    strike: Optional[float] = None

    def __post_init__(self):
        kind = ContractKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if self.s0 <= 0.0 or self.barrier <= 0.0:
            raise ValueError("s0 and barrier must be positive")
        if self.maturity <= 0.0:
            raise ValueError(f"maturity must be positive, got {self.maturity}")
        if kind in _PUT_KINDS:
            if self.strike is None or self.strike <= 0.0:
                raise ValueError(f"{kind.value} requires a positive strike")
            if self.barrier >= self.strike:
                raise ValueError(
                    f"{kind.value} requires barrier < strike, got H={self.barrier}, K={self.strike}"
                )
        if kind in _DOWN_KINDS and self.barrier >= self.s0:
            raise ValueError(
                f"{kind.value} requires barrier < s0, got H={self.barrier}, S0={self.s0}"
            )
        if kind in _UP_KINDS and self.barrier < self.s0:
            raise ValueError(
                f"{kind.value} requires barrier >= s0, got H={self.barrier}, S0={self.s0}"
            )

    @property
    def h(self) -> float:
        """Log-distance of the barrier, log(H/S0)."""
        return math.log(self.barrier / self.s0)

    @property
    def ell(self) -> float:
        """Log-moneyness of the strike, log(K/S0)."""
        if self.strike is None:
            raise ValueError("contract has no strike")
        return math.log(self.strike / self.s0)


def _factor(params: HEJDParams, q: complex, rate: float,
            cache: Optional[RootCache]) -> RootFactorization:
    arg = complex(q) + rate
    if cache is not None:
        return cache.get(params, arg)
    return solve_roots(params, arg)


# ---------------------------------------------------------------------------
# Digitals
# ---------------------------------------------------------------------------

def lt_edid(contract: ContractSpec, params: HEJDParams, q: complex,
            cache: Optional[RootCache] = None) -> complex:
    """Transform of the European down-and-in digital price."""
    if contract.kind not in _DOWN_KINDS:
        raise ValueError(f"not a down contract: {contract.kind.value}")
    fact = _factor(params, q, contract.rate, cache)
    h = contract.h
    total = sum(a * cmath.exp(-rho * h) for a, rho in zip(fact.a_minus, fact.rho_minus))
    return total / (q + contract.rate)


def lt_adid(contract: ContractSpec, params: HEJDParams, q: complex,
            cache: Optional[RootCache] = None) -> complex:
    """Transform of the American down-and-in digital (pays at crossing)."""
    return (q + contract.rate) / q * lt_edid(contract, params, q, cache)


def lt_edod(contract: ContractSpec, params: HEJDParams, q: complex,
            cache: Optional[RootCache] = None) -> complex:
    """Transform of the European down-and-out digital price."""
    return 1.0 / (q + contract.rate) - lt_edid(contract, params, q, cache)


def lt_euid(contract: ContractSpec, params: HEJDParams, q: complex,
            cache: Optional[RootCache] = None) -> complex:
    """Transform of the European up-and-in digital price (h >= 0)."""
    if contract.kind not in _UP_KINDS:
        raise ValueError(f"not an up contract: {contract.kind.value}")
    fact = _factor(params, q, contract.rate, cache)
    h = contract.h
    total = sum(a * cmath.exp(-rho * h) for a, rho in zip(fact.a_plus, fact.rho_plus))
    return total / (q + contract.rate)


def lt_auid(contract: ContractSpec, params: HEJDParams, q: complex,
            cache: Optional[RootCache] = None) -> complex:
    """Transform of the American up-and-in digital price."""
    return (q + contract.rate) / q * lt_euid(contract, params, q, cache)


# ---------------------------------------------------------------------------
# Put corridor functionals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CorridorCoeffs:
    """Decomposition of the corridor functional by power of S0.

    ``c_b == sum_j a_minus[j]*down[j] + sum_i a_plus[i]*up[i] + const``
    where the ``down[j]`` group scales like ``S0**(rho_minus[j]-b)``, the
    ``up[i]`` group like ``S0**(rho_plus[i]-b)`` and ``const`` is
    S0-free.  The split is what the delta/gamma formulas differentiate
    term by term; it is exposed for testability.
    """

    b: int
    down: tuple[complex, ...]
    up: tuple[complex, ...]
    const: complex

    def total(self, fact: RootFactorization) -> complex:
        out = self.const
        out += sum(a * c for a, c in zip(fact.a_minus, self.down))
        out += sum(a * c for a, c in zip(fact.a_plus, self.up))
        return out


def put_corridor_coeffs(b: int, ell: float, h: float,
                        fact: RootFactorization) -> CorridorCoeffs:
    """Coefficient lists of E[e^{b X(tau)}; inf X(tau) > h, X(tau) < ell].

    Covers both strike regimes: ``h < ell <= 0`` (strike below spot) and
    ``h < 0 < ell``; the boundary ``ell == 0`` deterministically uses the
    second branch, whose formula is the continuous limit of the first.
    """
    if b not in (0, 1):
        raise ValueError(f"b must be 0 or 1, got {b}")
    if h >= 0.0:
        raise ValueError(f"corridor functional needs h < 0, got {h}")
    if ell <= h:
        raise ValueError(f"domain violation: need ell > h, got ell={ell}, h={h}")

    ap = np.asarray(fact.rho_plus)
    am = np.asarray(fact.rho_minus)
    a_plus = np.asarray(fact.a_plus)
    a_minus = np.asarray(fact.a_minus)

    # E_b = 1 - sum_i b*A+_i/(b - rho+_i); equals 1 when b == 0
    e_b = 1.0 - np.sum(b * a_plus / (b - ap)) if b else 1.0 + 0.0j

    # w[i, j] = rho+_i*(-rho-_j) / ((rho-_j - rho+_i)*(b - rho+_i)), sans weights
    w = ap[:, None] * (-am[None, :]) / ((am[None, :] - ap[:, None]) * (b - ap)[:, None])

    if ell < 0.0:
        # strike below spot: every term scales like S0**(rho-_j - b)
        cross = np.exp((b - ap)[:, None] * ell + (ap[:, None] - am[None, :]) * h) \
            - np.exp((b - am) * ell)[None, :]
        down = np.sum(w * a_plus[:, None] * cross, axis=0)
        down += e_b * (-am) / (am - b) * (np.exp((b - am) * h) - np.exp((b - am) * ell))
        up = np.zeros(len(ap), dtype=complex)
        const = 0.0 + 0.0j
    else:
        # strike at or above spot: the "-1" companion of the mixed term
        # scales like S0**(rho+_i - b) and lives inside ``up`` below
        cross = np.exp((b - ap)[:, None] * ell + (ap[:, None] - am[None, :]) * h)
        down = np.sum(w * a_plus[:, None] * cross, axis=0)
        down += e_b * (-am) / (am - b) * np.exp((b - am) * h)
        up = np.exp((b - ap) * ell) * ap / (b - ap) * (
            1.0 + np.sum(a_minus * ap[:, None] / (am[None, :] - ap[:, None]), axis=1)
        )
        const = e_b * (1.0 + np.sum(a_minus * b / (am - b)))
    return CorridorCoeffs(b=b, down=tuple(down), up=tuple(up), const=complex(const))


def c_b(b: int, ell: float, h: float, fact: RootFactorization) -> complex:
    """Corridor functional E[e^{b X(tau)}; inf X(tau) > h, X(tau) < ell]."""
    return put_corridor_coeffs(b, ell, h, fact).total(fact)


def d_b(b: int, h: float, k: float, fact: RootFactorization) -> complex:
    """Knock-in functional E[e^{b X(tau)}; inf X(tau) < h, X(tau) < k]."""
    if b not in (0, 1):
        raise ValueError(f"b must be 0 or 1, got {b}")
    if h >= 0.0:
        raise ValueError(f"knock-in functional needs h < 0, got {h}")
    if k <= h:
        raise ValueError(f"domain violation: need k > h, got k={k}, h={h}")
    ap = np.asarray(fact.rho_plus)
    am = np.asarray(fact.rho_minus)
    a_plus = np.asarray(fact.a_plus)
    a_minus = np.asarray(fact.a_minus)

    e_b = 1.0 - np.sum(b * a_plus / (b - ap)) if b else 1.0 + 0.0j
    w = ap[:, None] * am[None, :] / ((am[None, :] - ap[:, None]) * (b - ap)[:, None])
    cross = np.exp((b - ap)[:, None] * k + (ap[:, None] - am[None, :]) * h)
    total = np.sum(w * a_plus[:, None] * a_minus[None, :] * cross)
    total += e_b * np.sum(a_minus * am / (am - b) * np.exp((b - am) * h))
    return complex(total)


# ---------------------------------------------------------------------------
# Puts
# ---------------------------------------------------------------------------

def lt_dop(contract: ContractSpec, params: HEJDParams, q: complex,
           cache: Optional[RootCache] = None) -> complex:
    """Transform of the down-and-out put price."""
    if contract.kind not in _PUT_KINDS:
        raise ValueError(f"not a put contract: {contract.kind.value}")
    fact = _factor(params, q, contract.rate, cache)
    ell, h = contract.ell, contract.h
    k = contract.strike
    return (k * c_b(0, ell, h, fact) - contract.s0 * c_b(1, ell, h, fact)) / (q + contract.rate)


def lt_dip(contract: ContractSpec, params: HEJDParams, q: complex,
           cache: Optional[RootCache] = None) -> complex:
    """Transform of the down-and-in put price."""
    if contract.kind not in _PUT_KINDS:
        raise ValueError(f"not a put contract: {contract.kind.value}")
    fact = _factor(params, q, contract.rate, cache)
    ell, h = contract.ell, contract.h
    k = contract.strike
    return (k * d_b(0, h, ell, fact) - contract.s0 * d_b(1, h, ell, fact)) / (q + contract.rate)
