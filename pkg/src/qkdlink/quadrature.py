"""Adaptive Simpson quadrature for the smooth 1-D integrals used here.

The integrands (attenuation coefficient over altitude, refractive-index
structure profile) are smooth except for isolated breakpoints, so a
recursive Simpson rule with Richardson error control converges in a few
dozen evaluations. Pass explicit breakpoints through
:func:`integrate_piecewise` when the integrand has kinks.
"""
from __future__ import annotations

import math
from typing import Callable, Sequence

from .errors import QuadratureError

# Deep enough for any smooth integrand at 1e-12 tolerances, shallow
# enough that bisection still resolves distinct doubles near the limit.
_MAX_DEPTH = 48


def _simpson(fa: float, fm: float, fb: float, h: float) -> float:
    return h / 6.0 * (fa + 4.0 * fm + fb)


def _recurse(
    f: Callable[[float], float],
    a: float,
    b: float,
    fa: float,
    fm: float,
    fb: float,
    whole: float,
    tol: float,
    depth: int,
) -> float:
    m = 0.5 * (a + b)
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm = f(lm)
    frm = f(rm)
    left = _simpson(fa, flm, fm, m - a)
    right = _simpson(fm, frm, fb, b - m)
    delta = left + right - whole
    # 15 = 2**4 - 1, the Richardson factor for Simpson's rule
    if abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    if depth >= _MAX_DEPTH:
        raise QuadratureError(
            f"adaptive Simpson did not converge on [{a}, {b}] "
            f"(residual {abs(delta):.3e}, tolerance {tol:.3e})"
        )
    return _recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) + _recurse(
        f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1
    )


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    rel_tol: float = 1e-10,
    abs_tol: float = 0.0,
) -> float:
    """Integrate ``f`` over ``[a, b]``.

    The tolerance used is ``max(abs_tol, rel_tol * |coarse estimate|)``;
    raises :class:`QuadratureError` when bisection depth runs out first.
    """
    if a == b:
        return 0.0
    sign = 1.0
    if b < a:
        a, b = b, a
        sign = -1.0
    fa = f(a)
    fm = f(0.5 * (a + b))
    fb = f(b)
    whole = _simpson(fa, fm, fb, b - a)
    tol = max(abs_tol, rel_tol * abs(whole))
    if tol == 0.0:
        tol = rel_tol if rel_tol > 0 else 1e-12
    return sign * _recurse(f, a, b, fa, fm, fb, whole, tol, 0)


def integrate_piecewise(
    f: Callable[[float], float],
    points: Sequence[float],
    rel_tol: float = 1e-10,
) -> float:
    """Integrate ``f`` over consecutive ``points``, summing the pieces.

    Duplicate or unordered interior points are tolerated (empty pieces
    contribute zero). Interior boundaries are nudged one ulp to the
    right so a piecewise integrand with a jump at a boundary is sampled
    on a single branch per piece; without this the Richardson residual
    at the jump shrinks no faster than the tolerance and the recursion
    cannot terminate.
    """
    pts = sorted(points)
    total = 0.0
    previous_hi: float | None = None
    for lo, hi in zip(pts[:-1], pts[1:]):
        if previous_hi is not None and lo == previous_hi:
            lo = math.nextafter(lo, math.inf)
        if hi > lo:
            total += adaptive_simpson(f, lo, hi, rel_tol=rel_tol)
        previous_hi = hi
    return total
