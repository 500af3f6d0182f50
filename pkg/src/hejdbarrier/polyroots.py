"""Complex polynomial roots by Laguerre's method with deflation.

Coefficients are ascending: ``p(s) = c[0] + c[1]*s + ... + c[n]*s^n``.
Each root found on the deflated polynomial is polished against the full
original polynomial (Newton steps, falling back to a Laguerre step when
Newton stalls), which removes the error accumulated by deflation.
"""
from __future__ import annotations

import cmath

import numpy as np

__all__ = ["laguerre_roots", "polyval_with_derivs"]

_EPS = np.finfo(float).eps
# fractional steps used to break rare limit cycles
_FRAC = (0.0, 0.5, 0.25, 0.75, 0.13, 0.38, 0.62, 0.88, 1.0)


def polyval_with_derivs(coeffs: np.ndarray, x: complex) -> tuple[complex, complex, complex, float]:
    """Evaluate p(x), p'(x), p''(x)/2 and a roundoff bound on |p(x)|."""
    b = coeffs[-1]
    d = 0.0 + 0.0j
    f = 0.0 + 0.0j
    err = abs(b)
    abx = abs(x)
    for c in coeffs[-2::-1]:
        f = x * f + d
        d = x * d + b
        b = x * b + c
        err = abs(b) + abx * err
    return b, d, f, err * _EPS


def _laguerre_step(coeffs: np.ndarray, x: complex, order: int, iteration: int) -> tuple[complex, bool]:
    """One Laguerre update; returns (new x, converged)."""
    b, d, f, err = polyval_with_derivs(coeffs, x)
    if abs(b) <= err:
        return x, True
    g = d / b
    g2 = g * g
    h = g2 - 2.0 * f / b
    sq = cmath.sqrt((order - 1) * (order * h - g2))
    gp = g + sq
    gm = g - sq
    abp, abm = abs(gp), abs(gm)
    if abp < abm:
        gp = gm
    if max(abp, abm) > 0.0:
        dx = order / gp
    else:
        dx = (1.0 + abs(x)) * cmath.exp(1j * iteration)
    x1 = x - dx
    if x1 == x:
        return x, True
    # occasionally take a fractional step to break limit cycles
    if iteration % 10 == 0 and iteration > 0:
        x1 = x - _FRAC[(iteration // 10) % len(_FRAC)] * dx
    return x1, False


def _laguerre(coeffs: np.ndarray, x0: complex, max_iter: int = 80) -> complex:
    x = complex(x0)
    order = len(coeffs) - 1
    for it in range(1, max_iter + 1):
        x, done = _laguerre_step(coeffs, x, order, it)
        if done:
            return x
    raise ArithmeticError(f"Laguerre iteration did not converge from {x0}")


def _polish(coeffs: np.ndarray, x: complex, max_iter: int = 24) -> complex:
    """Newton polish against the full polynomial."""
    order = len(coeffs) - 1
    for it in range(max_iter):
        b, d, _f, err = polyval_with_derivs(coeffs, x)
        if abs(b) <= 4.0 * err:
            return x
        if d == 0:
            return _laguerre(coeffs, x)
        step = b / d
        if not (abs(step) < 1.0 + abs(x)):
            # Newton overshoots; let Laguerre take over
            return _laguerre(coeffs, x)
        x = x - step
    return x


def laguerre_roots(coeffs, polish: bool = True) -> np.ndarray:
    """All roots of the polynomial with ascending coefficients ``coeffs``.

    Raises ``ValueError`` on an (effectively) zero polynomial and
    ``ArithmeticError`` when the iteration fails to converge.
    """
    c = np.asarray(coeffs, dtype=complex).copy()
    scale = np.max(np.abs(c))
    if scale == 0.0:
        raise ValueError("zero polynomial has no well-defined roots")
    c /= scale
    # strip only exactly-zero leading coefficients; the caller owns the degree
    degree = len(c) - 1
    while degree > 0 and c[degree] == 0.0:
        degree -= 1
    if degree == 0:
        raise ValueError("polynomial is constant; degenerate input")
    c = c[: degree + 1]
    full = c.copy()

    roots = np.empty(degree, dtype=complex)
    work = c.copy()
    for j in range(degree, 0, -1):
        x = _laguerre(work[: j + 1], 0.0 + 0.0j)
        if abs(x.imag) <= 2.0 * _EPS * abs(x.real):
            x = complex(x.real, 0.0)
        roots[degree - j] = x
        # synthetic division by (s - x)
        b = work[j]
        for k in range(j - 1, -1, -1):
            work[k], b = b, work[k] + x * b
    if polish:
        for i in range(degree):
            roots[i] = _polish(full, roots[i])
        for i in range(degree):
            x = roots[i]
            if abs(x.imag) <= 1e-12 * max(1.0, abs(x.real)):
                roots[i] = complex(x.real, 0.0)
    return roots
