"""Convex bodies containing the origin.

A body is stored either by its support function ``h`` or by its gauge
``g(p) = |p| / rho(p/|p|)``; both are 1-homogeneous and each is the dual norm
of the other, so any body offers ``support`` and ``radial`` evaluations.
"""

from __future__ import annotations

import numpy as np
import sympy as sp

from .errors import DomainError
from .harmonics import harmonic_polynomial, parse_harmonics
from .homogeneous import HomogeneousFunction, QuadraticNorm, SymbolicFunction


class AffineSupport(HomogeneousFunction):
    """``scale * base(x) + <shift, x>``: a dilated and translated body."""

    def __init__(self, base: HomogeneousFunction, scale: float = 1.0, shift=None):
        self.base = base
        self.dim = base.dim
        self.scale = float(scale)
        self.shift = np.zeros(self.dim) if shift is None else np.asarray(shift, dtype=float)

    def value(self, x):
        return self.scale * self.base.value(x) + np.asarray(x, float) @ self.shift

    def grad(self, x):
        return self.scale * self.base.grad(x) + self.shift

    def hess(self, x):
        return self.scale * self.base.hess(x)

    def third(self, x):
        return self.scale * self.base.third(x)


class ConvexBody:
    """Convex body with the origin in its interior."""

    def __init__(self, dim: int, *, support=None, gauge=None, name: str = "body",
                 axisymmetric: bool = False):
        if (support is None) == (gauge is None):
            raise DomainError("give exactly one of support or gauge")
        self.dim = int(dim)
        self.n = self.dim - 1
        self._support = support
        self._gauge = gauge
        self.name = name
        self.axisymmetric = bool(axisymmetric)

    def __repr__(self) -> str:
        return f"ConvexBody({self.name!r}, n={self.n})"

    @property
    def support_function(self) -> HomogeneousFunction | None:
        return self._support

    def support(self, u) -> np.ndarray:
        """Support function ``h(u)`` (1-homogeneous in ``u``)."""
        if self._support is not None:
            return self._support.value(u)
        return self._gauge.dual(u)

    def gauge(self, p) -> np.ndarray:
        if self._gauge is not None:
            return self._gauge.value(p)
        return self._support.dual(p)

    def radial(self, y) -> np.ndarray:
        """Radial function ``rho(y)`` for unit ``y``."""
        return 1.0 / self.gauge(y)

    def anisotropic_support(self, aniso, x) -> np.ndarray:
        """``s = h / F`` at normal directions ``x``: the body as a field on the
        Wulff chart."""
        return self.support(x) / aniso.value(x)

    def scaled(self, factor: float) -> "ConvexBody":
        factor = float(factor)
        if self._support is not None:
            fn = AffineSupport(self._support, factor)
            return ConvexBody(self.dim, support=fn, name=f"{factor:g}*{self.name}",
                              axisymmetric=self.axisymmetric)
        return ConvexBody(self.dim, gauge=AffineSupport(self._gauge, 1.0 / factor),
                          name=f"{factor:g}*{self.name}", axisymmetric=self.axisymmetric)


def _axis_only(center) -> bool:
    return center is None or bool(np.allclose(np.asarray(center, float)[1:], 0.0))


def sphere(n: int = 2, radius: float = 1.0, center=None) -> ConvexBody:
    dim = n + 1
    fn = QuadraticNorm(radius ** 2 * np.eye(dim), center)
    return ConvexBody(dim, support=fn, name=f"sphere(r={radius:g})",
                      axisymmetric=_axis_only(center))


def ellipsoid(semi_axes, center=None, rotation=None) -> ConvexBody:
    axes = np.asarray(semi_axes, dtype=float)
    if np.any(axes <= 0):
        raise DomainError("semi-axes must be positive")
    dim = axes.size
    rot = np.eye(dim) if rotation is None else np.asarray(rotation, dtype=float)
    fn = QuadraticNorm(rot @ np.diag(axes ** 2) @ rot.T, center)
    axis = rotation is None and np.allclose(axes[1:], axes[1]) and _axis_only(center)
    return ConvexBody(dim, support=fn, name="ellipsoid(" + ", ".join(f"{a:.4g}" for a in axes) + ")",
                      axisymmetric=axis)


def wulff(aniso, radius: float = 1.0, center=None) -> ConvexBody:
    fn = AffineSupport(aniso.fn, radius, center)
    return ConvexBody(aniso.dim, support=fn, name=f"{radius:g}*W_F",
                      axisymmetric=aniso.is_axisymmetric and _axis_only(center))


def _harmonic_sum(n, harmonics, xs, r, shift_degree):
    total = sp.Integer(0)
    for (l, m), c in sorted(harmonics.items()):
        poly, sym = harmonic_polynomial(n, l, m)
        total += c * poly.subs(dict(zip(sym, xs)), simultaneous=True) * r ** (shift_degree - l)
    return total


def harmonic_support(n: int, radius: float, harmonics, epsilon: float) -> ConvexBody:
    """Body with support function ``radius (1 + eps sum c_lm Y_lm)``."""
    harmonics = parse_harmonics(harmonics)
    xs = sp.symbols(f"x0:{n + 1}", real=True)
    r = sp.sqrt(sum(v ** 2 for v in xs))
    expr = radius * (r + epsilon * _harmonic_sum(n, harmonics, xs, r, 1))
    return ConvexBody(n + 1, support=SymbolicFunction(expr, xs), name="harmonic-support",
                      axisymmetric=all(m == 0 for (_, m) in harmonics))


def harmonic_radial(n: int, radius: float, harmonics, epsilon: float) -> ConvexBody:
    """Body with radial function ``radius (1 + eps sum c_lm Y_lm)``."""
    harmonics = parse_harmonics(harmonics)
    xs = sp.symbols(f"x0:{n + 1}", real=True)
    r = sp.sqrt(sum(v ** 2 for v in xs))
    expr = r / (radius * (1 + epsilon * _harmonic_sum(n, harmonics, xs, r, 0)))
    return ConvexBody(n + 1, gauge=SymbolicFunction(expr, xs), name="harmonic-radial",
                      axisymmetric=all(m == 0 for (_, m) in harmonics))


def random_rotation(rng: np.random.Generator, dim: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def min_curvature_radius(body: ConvexBody, samples: int = 4000) -> float:
    """Smallest principal radius of curvature over a direction sample.

    Radii are the eigenvalues of ``D^2 h`` restricted to ``u^perp``.
    """
    from .anisotropy import tangent_basis
    from .homogeneous import fibonacci_sphere

    u = fibonacci_sphere(samples, body.dim, seed=7)
    fn = body.support_function
    if fn is None:
        raise DomainError("curvature radii need a support-function body")
    e = tangent_basis(u)
    r = np.einsum("...ia,...ij,...jb->...ab", e, fn.hess(u), e)
    return float(np.linalg.eigvalsh(r)[:, 0].min())


def random_body(rng: np.random.Generator, n: int = 2, kind: str | None = None,
                axisymmetric: bool = False) -> ConvexBody:
    """Draw a random smooth convex body with the origin well inside.

    ``kind`` is ``"ellipsoid"`` or ``"harmonic"`` (drawn at random when omitted).
    Axisymmetric draws keep the symmetry axis ``e1``.  Harmonic draws are
    rejected until every principal radius exceeds a fifth of the mean radius.
    """
    for _ in range(100):
        body = _draw_body(rng, n, kind, axisymmetric)
        if body.name.startswith("ellipsoid"):
            return body
        if min_curvature_radius(body) > 0.2 * float(body.support(np.eye(n + 1)).mean()):
            return body
    raise DomainError("could not draw a sufficiently convex body")


def _draw_body(rng, n, kind, axisymmetric):
    if kind is None:
        kind = "ellipsoid" if rng.random() < 0.5 else "harmonic"
    dim = n + 1
    if kind == "ellipsoid":
        if axisymmetric:
            a, b = rng.uniform(0.6, 1.5, size=2)
            c = np.zeros(dim)
            c[0] = rng.uniform(-0.2, 0.2) * min(a, b)
            return ellipsoid([a] + [b] * n, center=c)
        axes = rng.uniform(0.6, 1.5, size=dim)
        c = rng.uniform(-0.2, 0.2, size=dim) * axes.min()
        return ellipsoid(axes, center=c, rotation=random_rotation(rng, dim))
    if kind == "harmonic":
        max_l = 3
        terms = {}
        for l in range(1, max_l + 1):
            ms = [0] if (axisymmetric or n > 2) else range(-l, l + 1)
            for m in ms:
                terms[(l, m)] = float(rng.normal())
        norm = np.sqrt(sum(c * c for c in terms.values()))
        terms = {key: c / norm for key, c in terms.items()}
        radius = rng.uniform(0.7, 1.4)
        return harmonic_support(n, radius, terms, 0.12)
    raise DomainError(f"unknown body kind {kind!r}")
