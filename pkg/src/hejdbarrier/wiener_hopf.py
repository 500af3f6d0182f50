"""Root factorisation of the HEJD Laplace exponent.

Clearing denominators of ``psi(s) = q`` over the pole set yields a
polynomial of degree ``n+ + n- + 2`` (Gaussian part present) whose roots
split into those with positive and negative real part.  The split drives
everything downstream: the running supremum and infimum of the process at
an independent exponential time are finite mixtures of exponentials with
expoments given by the roots and weights by the partial-fraction
coefficients computed here.

For real ``q > 0`` all roots are real, simple, and interlace with the
poles, so they are found by bracketed root solving between consecutive
poles.  For complex ``q`` (Bromwich contour nodes) Laguerre's method with
deflation and full-polynomial polishing is used.  Nearly coincident roots
at complex ``q`` are handled by re-solving at a slightly rotated ``q``;
all consumers are continuous in ``q`` so the substitution is harmless at
inversion accuracy.
"""
from __future__ import annotations

import cmath
import math
import threading
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.optimize import brentq

from .models import HEJDParams, char_exponent
from .polyroots import laguerre_roots, polyval_with_derivs

__all__ = [
    "RootFactorization",
    "RootCache",
    "cramer_polynomial",
    "solve_roots",
    "sup_dist_lt",
    "inf_dist_lt",
    "wh_factor_plus",
    "wh_factor_minus",
]

_RESIDUAL_SCALE = 1e-10
_CLUSTER_TOL = 1e-9
_LOG_PRODUCT_THRESHOLD = 7  # switch A+- products to log space from this many phases


@dataclass(frozen=True)
class RootFactorization:
    """Roots and partial-fraction weights of ``psi(s) = q`` at one ``q``.

    ``rho_plus`` holds the roots with positive real part (ascending real
    part), ``rho_minus`` those with negative real part (descending real
    part, i.e. closest to zero first).  ``a_plus``/``a_minus`` are the
    matching mixture weights and ``residual_max`` the largest
    ``|psi(root) - q|`` observed.
    """

    q: complex
    rho_plus: tuple[complex, ...]
    rho_minus: tuple[complex, ...]
    a_plus: tuple[complex, ...]
    a_minus: tuple[complex, ...]
    residual_max: float


def cramer_polynomial(params: HEJDParams, q: complex) -> np.ndarray:
    """Ascending coefficients of the polynomial with roots ``psi(s) = q``.

    ``(psi(s) - q)`` multiplied by ``prod_i (alpha_plus_i - s) *
    prod_j (alpha_minus_j + s)``.  Degree is ``n+ + n- + 2`` when
    ``sigma2 > 0`` and ``n+ + n- + 1`` for a pure-jump process with
    drift.
    """
    use_complex = isinstance(q, complex) and q.imag != 0.0
    dtype = complex if use_complex else float
    qv = complex(q) if use_complex else float(np.real(q))

    up_factors = [np.array([a, -1.0], dtype=dtype) for a in params.alpha_plus]
    dn_factors = [np.array([a, 1.0], dtype=dtype) for a in params.alpha_minus]

    def prod(factors):
        out = np.array([1.0], dtype=dtype)
        for f in factors:
            out = npoly.polymul(out, f)
        return out

    denom = prod(up_factors + dn_factors)
    base = np.array(
        [-(qv + params.lambda_plus + params.lambda_minus), params.mu, 0.5 * params.sigma2],
        dtype=dtype,
    )
    poly = npoly.polymul(base, denom)

    if params.lambda_plus:
        for i, (p, a) in enumerate(zip(params.p_plus, params.alpha_plus)):
            rest = prod(up_factors[:i] + up_factors[i + 1:] + dn_factors)
            poly = npoly.polyadd(poly, params.lambda_plus * p * a * rest)
    if params.lambda_minus:
        for j, (p, a) in enumerate(zip(params.p_minus, params.alpha_minus)):
            rest = prod(up_factors + dn_factors[:j] + dn_factors[j + 1:])
            poly = npoly.polyadd(poly, params.lambda_minus * p * a * rest)

    # the true degree is structural, never magnitude-based: the coefficient
    # spread is enormous (constant term carries the product of all poles)
    n_jump = params.n_plus + params.n_minus
    if params.sigma2 > 0.0:
        degree = n_jump + 2
    elif params.mu != 0.0:
        degree = n_jump + 1
    else:
        degree = n_jump
    poly = np.asarray(poly)
    if len(poly) < degree + 1 or poly[degree] == 0.0:
        raise ValueError("degenerate Cramer polynomial: vanishing leading coefficient")
    if np.max(np.abs(poly)) == 0.0:
        raise ValueError("degenerate Cramer polynomial: all coefficients vanish")
    return poly[: degree + 1]


def _real_roots_bracketed(params: HEJDParams, q: float, poly: np.ndarray) -> np.ndarray:
    """All real roots for real q > 0 using pole interlacing brackets."""

    def pval(s: float) -> float:
        return float(np.real(npoly.polyval(s, poly)))

    def expand_outer(start: float, direction: float) -> float:
        # walk outward until the polynomial changes sign
        step = max(1.0, abs(start)) * 0.5
        s_prev = start
        f_prev = pval(start)
        for _ in range(200):
            s_next = s_prev + direction * step
            f_next = pval(s_next)
            if f_prev == 0.0:
                return s_prev
            if f_prev * f_next <= 0.0:
                return s_next
            s_prev, f_prev = s_next, f_next
            step *= 1.7
        raise ArithmeticError("no outer sign change found for real-q root bracket")

    roots: list[float] = []
    degree = len(poly) - 1

    for sign, alphas in ((1.0, params.alpha_plus), (-1.0, params.alpha_minus)):
        poles = [sign * a for a in alphas]
        poles.sort(key=abs)
        anchors = [0.0] + poles
        for a, b in zip(anchors, anchors[1:]):
            fa, fb = pval(a), pval(b)
            if fa * fb > 0.0:
                continue  # no root in this pole gap (possible when sigma2 == 0)
            roots.append(brentq(pval, a, b, xtol=1e-14, rtol=1e-15, maxiter=200))
        # outermost root beyond the last pole, when the degree allows one
        start = anchors[-1] if poles else 0.0
        outer_needed = len(roots) < degree
        if outer_needed:
            try:
                edge = expand_outer(start + sign * max(1e-9, 1e-9 * max(1.0, abs(start))), sign)
            except ArithmeticError:
                edge = None
            if edge is not None:
                lo, hi = (start, edge) if sign > 0 else (edge, start)
                eps = 1e-12 * max(1.0, abs(start))
                lo, hi = lo + eps, hi - eps
                if pval(lo) * pval(hi) <= 0.0:
                    roots.append(brentq(pval, lo, hi, xtol=1e-14, rtol=1e-15, maxiter=200))
    return np.asarray(sorted(roots), dtype=float)


def _cluster_gap(roots: np.ndarray) -> float:
    if len(roots) < 2:
        return math.inf
    order = np.argsort(roots.real)
    r = roots[order]
    gaps = np.abs(np.diff(r))
    return float(np.min(gaps))


def _coefficients(rhos: np.ndarray, alphas: tuple[float, ...], sign: float) -> np.ndarray:
    """Partial-fraction weights A for one half-plane.

    ``A_i = prod_v (1 + sign*rho_i/alpha_v) / prod_{v != i} (1 - rho_i/rho_v)``
    with ``sign = -1`` for the upward side and ``+1`` for the downward
    side.  Products are evaluated in log space for seven or more phases.
    """
    m = len(rhos)
    out = np.empty(m, dtype=complex)
    use_log = max(len(alphas), m - 1) >= _LOG_PRODUCT_THRESHOLD
    for i, rho in enumerate(rhos):
        num_factors = [1.0 + sign * rho / a for a in alphas]
        den_factors = [1.0 - rho / rhos[v] for v in range(m) if v != i]
        if use_log:
            log_sum = sum(cmath.log(f) for f in num_factors) - sum(
                cmath.log(f) for f in den_factors
            )
            out[i] = cmath.exp(log_sum)
        else:
            num = 1.0 + 0.0j
            for f in num_factors:
                num *= f
            den = 1.0 + 0.0j
            for f in den_factors:
                den *= f
            out[i] = num / den
    return out


def solve_roots(params: HEJDParams, q: complex) -> RootFactorization:
    """Full root factorisation of ``psi(s) = q`` with weights and residuals.

    Real ``q`` uses bracketed solving (interlacing makes the brackets
    rigorous); complex ``q`` uses Laguerre with deflation and Newton
    polishing.  Nearly multiple roots trigger a retry at ``q`` rotated by
    1e-7 relative; persistent failures raise ``ArithmeticError``.
    """
    q = complex(q)
    if q.real <= 0.0 and q.imag == 0.0:
        raise ValueError(f"q must have positive real part or be real positive, got {q}")

    attempt_q = q
    last_error: Optional[Exception] = None
    for attempt in range(4):
        poly = cramer_polynomial(params, attempt_q)
        try:
            if attempt_q.imag == 0.0:
                roots = _real_roots_bracketed(params, attempt_q.real, poly).astype(complex)
                if len(roots) < len(poly) - 1:
                    # fall back to the general solver for any missed roots
                    roots = laguerre_roots(poly)
            else:
                roots = laguerre_roots(poly)
        except ArithmeticError as exc:  # pragma: no cover - rare
            last_error = exc
            attempt_q = attempt_q * (1.0 + 1e-7j)
            continue
        if _cluster_gap(roots) < _CLUSTER_TOL * max(1.0, float(np.max(np.abs(roots)))):
            attempt_q = attempt_q * (1.0 + 1e-7j)
            continue
        return _assemble(params, attempt_q, roots, poly)
    if last_error is not None:
        raise ArithmeticError(f"root solve failed at q={q}: {last_error}")
    raise ArithmeticError(f"root solve failed at q={q}: persistent near-multiple roots")


def _assemble(params: HEJDParams, q: complex, roots: np.ndarray, poly: np.ndarray) -> RootFactorization:
    plus = roots[roots.real > 0.0]
    minus = roots[roots.real < 0.0]
    on_axis = roots[roots.real == 0.0]
    if len(on_axis):
        raise ArithmeticError(f"root on the imaginary axis at q={q}: {on_axis}")
    plus = plus[np.argsort(plus.real)]
    minus = minus[np.argsort(-minus.real)]

    if params.sigma2 > 0.0:
        expected_plus, expected_minus = params.n_plus + 1, params.n_minus + 1
        if len(plus) != expected_plus or len(minus) != expected_minus:
            raise ArithmeticError(
                f"unexpected root split at q={q}: {len(plus)}+/{len(minus)}-, "
                f"expected {expected_plus}+/{expected_minus}-"
            )

    residual = 0.0
    for rho in roots:
        residual = max(residual, abs(char_exponent(params, rho) - q))

    a_plus = _coefficients(plus, params.alpha_plus, -1.0)
    a_minus = _coefficients(minus, params.alpha_minus, +1.0)
    return RootFactorization(
        q=q,
        rho_plus=tuple(plus),
        rho_minus=tuple(minus),
        a_plus=tuple(a_plus),
        a_minus=tuple(a_minus),
        residual_max=residual,
    )


class RootCache:
    """Memo of factorisations keyed by (params, q).

    ``misses`` counts actual root solves, which lets callers assert the
    sharing contract (one solve per inversion node regardless of how many
    contracts are valued).  Insertion is lock-guarded so concurrent grid
    valuation never solves a node twice.
    """

    def __init__(self):
        self._store: dict[tuple[HEJDParams, complex], RootFactorization] = {}
        self._lock = threading.Lock()
        self.misses = 0

    def get(self, params: HEJDParams, q: complex) -> RootFactorization:
        key = (params, complex(q))
        fact = self._store.get(key)
        if fact is None:
            with self._lock:
                fact = self._store.get(key)
                if fact is None:
                    fact = solve_roots(params, q)
                    self._store[key] = fact
                    self.misses += 1
        return fact

    def clear(self):
        with self._lock:
            self._store.clear()
            self.misses = 0


# ---------------------------------------------------------------------------
# First-passage transforms and Wiener-Hopf factors
# ---------------------------------------------------------------------------

def sup_dist_lt(params: HEJDParams, q: complex, z: float,
                cache: Optional[RootCache] = None) -> complex:
    """Laplace transform in t of P(sup_{s<=t} X(s) <= z), z >= 0."""
    if z < 0.0:
        raise ValueError(f"z must be >= 0, got {z}")
    fact = cache.get(params, q) if cache is not None else solve_roots(params, q)
    total = sum(a * cmath.exp(-rho * z) for a, rho in zip(fact.a_plus, fact.rho_plus))
    return (1.0 - total) / fact.q


def inf_dist_lt(params: HEJDParams, q: complex, z: float,
                cache: Optional[RootCache] = None) -> complex:
    """Laplace transform in t of P(-inf_{s<=t} X(s) <= z), z >= 0."""
    if z < 0.0:
        raise ValueError(f"z must be >= 0, got {z}")
    fact = cache.get(params, q) if cache is not None else solve_roots(params, q)
    total = sum(a * cmath.exp(rho * z) for a, rho in zip(fact.a_minus, fact.rho_minus))
    return (1.0 - total) / fact.q


def wh_factor_plus(params: HEJDParams, fact: RootFactorization, u: float) -> complex:
    """Positive Wiener-Hopf factor at real frequency u, assembled from roots."""
    num = 1.0 + 0.0j
    for a in params.alpha_plus:
        num *= 1.0 - 1j * u / a
    den = 1.0 + 0.0j
    for rho in fact.rho_plus:
        den *= 1.0 - 1j * u / rho
    return num / den


def wh_factor_minus(params: HEJDParams, fact: RootFactorization, u: float) -> complex:
    """Negative Wiener-Hopf factor at real frequency u."""
    num = 1.0 + 0.0j
    for a in params.alpha_minus:
        num *= 1.0 + 1j * u / a
    den = 1.0 + 0.0j
    for rho in fact.rho_minus:
        den *= 1.0 - 1j * u / rho
    return num / den
