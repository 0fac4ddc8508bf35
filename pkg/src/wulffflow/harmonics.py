"""Real spherical harmonics as homogeneous harmonic polynomials.

The polar axis is ``e1`` (array index 0).  On ``S^2`` the azimuth is measured in
the ``(x2, x3)`` plane, so ``(x2 + i x3)^m = r^m sin^m(theta) e^{i m phi}``.
In higher dimensions only zonal harmonics (``m = 0``) are provided; they are
Gegenbauer polynomials in ``x1 / r``.  All harmonics are L2-normalized on the
unit sphere.
"""

from __future__ import annotations

from functools import lru_cache
from math import factorial, gamma, pi, sqrt

import sympy as sp

from .errors import DomainError


def sphere_area(n: int) -> float:
    """Area of the unit sphere ``S^n`` in ``R^{n+1}``."""
    return 2.0 * pi ** ((n + 1) / 2) / gamma((n + 1) / 2)


def _zonal_norm(n: int, l: int) -> float:
    alpha = (n - 1) / 2
    h = pi * 2 ** (1 - 2 * alpha) * gamma(l + 2 * alpha) / (
        factorial(l) * (l + alpha) * gamma(alpha) ** 2)
    return sqrt(sphere_area(n - 1) * h)


def _homogenize(poly_t: sp.Poly, x0: sp.Symbol, r2: sp.Expr, degree: int) -> sp.Expr:
    """Return ``r^degree * p(x0 / r)`` for a polynomial of matching parity."""
    out = sp.Integer(0)
    for (power,), coeff in poly_t.terms():
        rest = degree - power
        if rest % 2:
            raise ValueError("parity mismatch")
        out += coeff * x0 ** power * r2 ** (rest // 2)
    return out


@lru_cache(maxsize=None)
def harmonic_polynomial(n: int, l: int, m: int) -> tuple[sp.Expr, tuple[sp.Symbol, ...]]:
    """Return ``(P, symbols)`` with ``P`` the homogeneous harmonic of degree ``l``.

    Its restriction to ``S^n`` is the orthonormal real harmonic ``Y_{l,m}``
    (cosine type for ``m > 0``, sine type for ``m < 0``).
    """
    if n < 2 or l < 0:
        raise DomainError("need n >= 2 and l >= 0")
    if abs(m) > l:
        raise DomainError(f"|m| must not exceed l (l={l}, m={m})")
    if m != 0 and n != 2:
        raise DomainError("non-zonal harmonics are only available on S^2")
    xs = sp.symbols(f"x0:{n + 1}", real=True)
    t = sp.Symbol("t")
    r2 = sum(x ** 2 for x in xs)
    if m == 0:
        alpha = sp.Rational(n - 1, 2)
        c = sp.legendre(l, t) if n == 2 else sp.gegenbauer(l, alpha, t)
        poly = _homogenize(sp.Poly(sp.expand(c), t), xs[0], r2, l)
        return sp.expand(poly / _zonal_norm(n, l)), xs
    am = abs(m)
    dp = sp.Poly(sp.diff(sp.legendre(l, t), t, am), t)
    radial = _homogenize(dp, xs[0], r2, l - am)
    w = sp.expand((xs[1] + sp.I * xs[2]) ** am)
    ang = sp.re(w) if m > 0 else sp.im(w)
    norm = sqrt(2.0) * sqrt((2 * l + 1) / (4 * pi) * factorial(l - am) / factorial(l + am))
    return sp.expand(norm * radial * ang), xs


def parse_harmonics(spec) -> dict[tuple[int, int], float]:
    """Normalize harmonic coefficients to ``{(l, m): c}``.

    Accepts a mapping or a string such as ``"2:0:1.0, 3:1:0.5"``.
    """
    if spec is None:
        return {}
    if isinstance(spec, str):
        out: dict[tuple[int, int], float] = {}
        for item in filter(None, (s.strip() for s in spec.split(","))):
            parts = item.split(":")
            if len(parts) != 3:
                raise DomainError(f"harmonic term {item!r} must read l:m:coefficient")
            out[(int(parts[0]), int(parts[1]))] = float(parts[2])
        return out
    return {(int(l), int(m)): float(c) for (l, m), c in dict(spec).items()}
