"""Clebsch-Gordan coefficients (Condon-Shortley phase) via the Racah formula."""

from __future__ import annotations

from fractions import Fraction
from math import factorial, sqrt


def _twice(x) -> int:
    """Return 2*x as an int, rejecting anything that is not a half-integer."""
    two_x = 2 * Fraction(x).limit_denominator(1000)
    if two_x.denominator != 1 or abs(float(two_x) - 2 * float(x)) > 1e-9:
        raise ValueError(f"{x!r} is not an integer or half-integer")
    return int(two_x)


def clebsch_gordan(j1, m1, j2, m2, J, M) -> float:
    """<j1 m1; j2 m2 | J M>.

    Returns 0 whenever the triangle or projection rules are violated.
    """
    tj1, tm1, tj2, tm2, tJ, tM = (_twice(v) for v in (j1, m1, j2, m2, J, M))
    if min(tj1, tj2, tJ) < 0:
        raise ValueError("angular momenta must be non-negative")
    if tm1 + tm2 != tM:
        return 0.0
    if abs(tm1) > tj1 or abs(tm2) > tj2 or abs(tM) > tJ:
        return 0.0
    if not (abs(tj1 - tj2) <= tJ <= tj1 + tj2) or (tj1 + tj2 + tJ) % 2:
        return 0.0
    if (tj1 - tm1) % 2 or (tj2 - tm2) % 2 or (tJ - tM) % 2:
        return 0.0

    # all of these are integers once the parity checks above pass
    a = (tj1 + tj2 - tJ) // 2
    b = (tj1 - tj2 + tJ) // 2
    c = (-tj1 + tj2 + tJ) // 2
    d = (tj1 + tj2 + tJ) // 2 + 1
    pre = (tJ + 1) * factorial(a) * factorial(b) * factorial(c) / factorial(d)
    pre *= (
        factorial((tj1 + tm1) // 2) * factorial((tj1 - tm1) // 2)
        * factorial((tj2 + tm2) // 2) * factorial((tj2 - tm2) // 2)
        * factorial((tJ + tM) // 2) * factorial((tJ - tM) // 2)
    )

    kmin = max(0, (tj2 - tJ - tm1) // 2, (tj1 - tJ + tm2) // 2)
    kmax = min(a, (tj1 - tm1) // 2, (tj2 + tm2) // 2)
    total = 0.0
    for k in range(kmin, kmax + 1):
        denom = (
            factorial(k)
            * factorial(a - k)
            * factorial((tj1 - tm1) // 2 - k)
            * factorial((tj2 + tm2) // 2 - k)
            * factorial((tJ - tj2 + tm1) // 2 + k)
            * factorial((tJ - tj1 - tm2) // 2 + k)
        )
        total += (-1) ** k / denom
    return sqrt(pre) * total
