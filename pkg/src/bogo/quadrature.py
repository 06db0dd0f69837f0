"""Adaptive Simpson quadrature for complex-valued integrands."""

from __future__ import annotations

from typing import Callable

from .errors import AccuracyError

#: Hard cap on interval subdivisions (2**16).
MAX_INTERVALS = 65536


def adaptive_simpson(
    f: Callable[[float], complex],
    a: float,
    b: float,
    tol: float = 1e-10,
) -> complex:
    """Integrate ``f`` over ``[a, b]`` to absolute tolerance ``tol``.

    Standard adaptive Simpson with the Richardson correction term
    ``(S2 - S1)/15``.  Works for real or complex scalar integrands.
    Raises :class:`AccuracyError` if the interval budget is exhausted
    before every subinterval meets its share of the tolerance.
    """
    if a == b:
        return 0.0 + 0.0j
    if b < a:
        return -adaptive_simpson(f, b, a, tol)

    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    # Each stack entry: (a, b, fa, fm, fb, simpson_estimate, tol).
    stack = [(a, b, fa, fm, fb, whole, tol)]
    total = 0.0 + 0.0j
    used = 1
    while stack:
        xa, xb, ya, ym, yb, s, t = stack.pop()
        xm = 0.5 * (xa + xb)
        lm = 0.5 * (xa + xm)
        rm = 0.5 * (xm + xb)
        yl, yr = f(lm), f(rm)
        sl = (xm - xa) / 6.0 * (ya + 4.0 * yl + ym)
        sr = (xb - xm) / 6.0 * (ym + 4.0 * yr + yb)
        err = sl + sr - s
        if abs(err) <= 15.0 * t:
            total += sl + sr + err / 15.0
            continue
        used += 2
        if used > MAX_INTERVALS:
            raise AccuracyError(
                f"adaptive Simpson exceeded {MAX_INTERVALS} subintervals "
                f"before reaching tol={tol:g}"
            )
        half = 0.5 * t
        stack.append((xa, xm, ya, yl, ym, sl, half))
        stack.append((xm, xb, ym, yr, yb, sr, half))
    return total
