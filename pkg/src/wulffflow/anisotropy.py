"""The anisotropy ``F``: support function of the Wulff shape ``W_F``.

Three families are supported:

``round``
    ``F = 1``; the Wulff shape is the unit ball.
``ellipsoid``
    ``F(x) = sqrt(sum a_i^2 x_i^2)``; the Wulff shape is the ellipsoid with
    semi-axes ``a_i``.
``harmonic``
    ``F = 1 + eps * sum c_lm Y_lm`` on the sphere, extended 1-homogeneously as
    ``|x| + eps * sum c_lm P_lm(x) |x|^{1-l}`` where ``P_lm`` is the harmonic
    polynomial restricting to ``Y_lm``.

Everything downstream consumes the extension and its first three derivatives.
Quantities on the Wulff hypersurface ``Sigma_F`` are indexed by the normal
direction ``x`` in ``S^n``; the corresponding point is ``z = phi(x) = DF(x)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gamma, pi

import numpy as np
import sympy as sp

from .errors import AdmissibilityError, ConfigError
from .harmonics import harmonic_polynomial, parse_harmonics, sphere_area
from .homogeneous import (FiniteDifferenceFunction, HomogeneousFunction, QuadraticNorm,
                          SymbolicFunction, fibonacci_sphere)
from .validation import check_nonzero_vectors, check_unit_vectors

FAMILIES = ("round", "ellipsoid", "harmonic")
DERIVATIVE_MODES = ("closed_form", "finite_difference")


def tangent_basis(x: np.ndarray) -> np.ndarray:
    """Orthonormal basis of ``x^perp`` for unit ``x``, as columns ``(..., d, d-1)``.

    Uses the Householder reflection that swaps ``e1`` and ``x``.
    """
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    e1 = np.zeros(d)
    e1[0] = 1.0
    flip = x[..., 0] > 0
    v = np.where(flip[..., None], x + e1, x - e1)
    vv = np.einsum("...i,...i->...", v, v)
    vv = np.where(vv == 0, 1.0, vv)
    h = np.eye(d) - 2.0 * v[..., :, None] * v[..., None, :] / vv[..., None, None]
    return h[..., :, 1:]


@dataclass(frozen=True)
class WulffPointFrame:
    """Geometry of ``Sigma_F`` at ``z = phi(x)``.

    ``metric`` is ``G(z)``, ``q`` is ``Q(z)`` (both in ambient coordinates) and
    the columns of ``basis`` form a ``G``-orthonormal basis of ``T_z Sigma_F``.
    """

    x: np.ndarray
    z: np.ndarray
    metric: np.ndarray
    q: np.ndarray
    basis: np.ndarray


class Anisotropy:
    """An admissible anisotropy on ``S^n``.

    Parameters
    ----------
    family : {"round", "ellipsoid", "harmonic"}
    n : int
        Dimension of the sphere ``S^n`` (the ambient space is ``R^{n+1}``).
    semi_axes : sequence of float, optional
        Ellipsoid semi-axes ``a_1..a_{n+1}``.
    harmonics : mapping or str, optional
        Harmonic coefficients ``{(l, m): c}`` or ``"l:m:c, ..."``.
    epsilon : float
        Amplitude of the harmonic perturbation.
    derivative_mode : {"closed_form", "finite_difference"}
    h_fd : float
        Base step for finite-difference derivatives.
    admission_tol : float
        Relative floor on the smallest eigenvalue of ``A_F``.
    """

    def __init__(self, family: str = "round", n: int = 2, *, semi_axes=None, harmonics=None,
                 epsilon: float = 0.0, derivative_mode: str = "closed_form",
                 h_fd: float = 1e-4, admission_samples: int = 10_000,
                 admission_tol: float = 1e-6):
        family = str(family).lower()
        if family not in FAMILIES:
            raise ConfigError(f"unknown anisotropy family {family!r}")
        if derivative_mode not in DERIVATIVE_MODES:
            raise ConfigError(f"unknown derivative mode {derivative_mode!r}")
        if int(n) != n or n < 2:
            raise ConfigError("dimension n must be an integer >= 2")
        self.family = family
        self.n = int(n)
        self.dim = self.n + 1
        self.derivative_mode = derivative_mode
        self.h_fd = float(h_fd)
        self.admission_tol = float(admission_tol)
        self.epsilon = float(epsilon)
        self.harmonics = parse_harmonics(harmonics)
        self.semi_axes = None

        if family == "round":
            base: HomogeneousFunction = QuadraticNorm(np.eye(self.dim))
        elif family == "ellipsoid":
            if semi_axes is None:
                raise ConfigError("ellipsoid anisotropy needs semi_axes")
            axes = np.asarray(semi_axes, dtype=float)
            if axes.shape != (self.dim,) or np.any(axes <= 0):
                raise ConfigError(f"semi_axes must be {self.dim} positive numbers")
            self.semi_axes = axes
            base = QuadraticNorm(np.diag(axes ** 2))
        else:
            base = SymbolicFunction(*self._harmonic_expression())
        self._exact = base
        self.fn = (FiniteDifferenceFunction(base, self.h_fd)
                   if derivative_mode == "finite_difference" else base)
        self.check_admissible(admission_samples)

    # construction helpers -------------------------------------------------
    @classmethod
    def round(cls, n: int = 2, **kw) -> "Anisotropy":
        return cls("round", n, **kw)

    @classmethod
    def ellipsoid(cls, semi_axes, **kw) -> "Anisotropy":
        return cls("ellipsoid", len(semi_axes) - 1, semi_axes=semi_axes, **kw)

    @classmethod
    def harmonic(cls, harmonics, epsilon: float, n: int = 2, **kw) -> "Anisotropy":
        return cls("harmonic", n, harmonics=harmonics, epsilon=epsilon, **kw)

    def _harmonic_expression(self):
        xs = sp.symbols(f"x0:{self.dim}", real=True)
        r = sp.sqrt(sum(v ** 2 for v in xs))
        expr = r
        for (l, m), c in sorted(self.harmonics.items()):
            poly, sym = harmonic_polynomial(self.n, l, m)
            poly = poly.subs(dict(zip(sym, xs)), simultaneous=True)
            expr = expr + self.epsilon * c * poly * r ** (1 - l)
        return expr, xs

    def __repr__(self) -> str:
        if self.family == "ellipsoid":
            extra = f", semi_axes={self.semi_axes.tolist()}"
        elif self.family == "harmonic":
            extra = f", harmonics={self.harmonics}, epsilon={self.epsilon}"
        else:
            extra = ""
        return f"Anisotropy({self.family!r}, n={self.n}{extra})"

    @property
    def is_axisymmetric(self) -> bool:
        """Invariance under rotations fixing ``e1``."""
        if self.family == "round":
            return True
        if self.family == "ellipsoid":
            return bool(np.allclose(self.semi_axes[1:], self.semi_axes[1]))
        return all(m == 0 for (_, m), c in self.harmonics.items() if c != 0)

    # raw extension (no validation; used in hot loops) ---------------------
    def value(self, x):
        return self._exact.value(x)

    def grad(self, x):
        return self.fn.grad(x)

    def hess(self, x):
        return self.fn.hess(x)

    def third(self, x):
        return self.fn.third(x)

    # validated operations --------------------------------------------------
    def eval_support(self, x) -> np.ndarray:
        x = check_unit_vectors(x, self.dim)
        return self.value(x)

    def dual_norm(self, z) -> np.ndarray:
        z = check_nonzero_vectors(z, self.dim)
        return self._exact.dual(z)

    def wulff_embedding(self, x) -> np.ndarray:
        x = check_unit_vectors(x, self.dim)
        return self.grad(x)

    def a_matrix(self, x, basis=None, *, check: bool = True) -> np.ndarray:
        """``A_F(x) = E^T D^2F(x) E`` in an orthonormal frame ``E`` of ``x^perp``."""
        x = check_unit_vectors(x, self.dim)
        e = tangent_basis(x) if basis is None else np.asarray(basis, dtype=float)
        a = np.einsum("...ia,...ij,...jb->...ab", e, self.hess(x), e)
        a = 0.5 * (a + np.swapaxes(a, -1, -2))
        if check:
            ev = np.linalg.eigvalsh(a)
            if np.any(ev[..., 0] <= self.admission_tol * ev[..., -1]):
                raise AdmissibilityError("A_F is not uniformly positive definite")
        return a

    def metric_g(self, x) -> np.ndarray:
        """``G(phi(x)) = [DF DF^T + F D^2F]^{-1}(x)`` for unit ``x``."""
        f, df, d2f = self.value(x), self.grad(x), self.hess(x)
        p2 = df[..., :, None] * df[..., None, :] + f[..., None, None] * d2f
        return np.linalg.inv(p2)

    def tensor_q(self, x, metric=None) -> np.ndarray:
        """``Q(phi(x)) = 1/2 D^3 (F^0)^2`` obtained from derivatives of ``F`` by
        Legendre duality."""
        f, df, d2f, d3f = self.value(x), self.grad(x), self.hess(x), self.third(x)
        g = self.metric_g(x) if metric is None else metric
        p3 = (np.einsum("...i,...jk->...ijk", df, d2f) + np.einsum("...j,...ik->...ijk", df, d2f)
              + np.einsum("...k,...ij->...ijk", df, d2f) + f[..., None, None, None] * d3f)
        q = np.einsum("...abc,...ai,...bj,...ck->...ijk", p3, g, g, g)
        return -f[..., None, None, None] * q

    def q_normal_residual(self, x) -> np.ndarray:
        """``max |Q(z)(z, U, V)|`` over unit ``U, V`` at ``z = phi(x)``; zero in exact
        arithmetic because ``(F^0)^2`` is 2-homogeneous."""
        x = check_unit_vectors(x, self.dim)
        z = self.grad(x)
        contracted = np.einsum("...ijk,...i->...jk", self.tensor_q(x), z)
        return np.abs(np.linalg.eigvalsh(contracted)).max(axis=-1)

    def frame_at(self, x) -> WulffPointFrame:
        x = check_unit_vectors(x, self.dim)
        g = self.metric_g(x)
        e = tangent_basis(x)
        gram = np.einsum("...ia,...ij,...jb->...ab", e, g, e)
        chol = np.linalg.cholesky(gram)
        basis = np.swapaxes(np.linalg.solve(chol, np.swapaxes(e, -1, -2)), -1, -2)
        return WulffPointFrame(x=x, z=self.grad(x), metric=g, q=self.tensor_q(x, g),
                               basis=basis)

    # global quantities -----------------------------------------------------
    def check_admissible(self, samples: int = 10_000) -> float:
        """Return the smallest relative eigenvalue of ``A_F`` over a sample.

        Raises ``AdmissibilityError`` when ``F`` is not positive or ``A_F``
        fails the uniform convexity floor.
        """
        if samples <= 0:
            return float("nan")
        x = fibonacci_sphere(samples, self.dim, seed=12345)
        if np.any(self.value(x) <= 0):
            raise AdmissibilityError("F must be positive on the sphere")
        ev = np.linalg.eigvalsh(self.a_matrix(x, check=False))
        ratio = float((ev[:, 0] / ev[:, -1]).min())
        if ev[:, 0].min() <= 0 or ratio <= self.admission_tol:
            raise AdmissibilityError(
                f"A_F fails uniform convexity (min eigenvalue ratio {ratio:.3e})")
        return ratio

    def wulff_volume(self, grid=None) -> float:
        """Volume ``|W_F|`` of the Wulff shape.

        Closed form for the quadric families; otherwise the quadrature
        ``(n+1)^{-1} int F det A_F`` over a grid (a fine default grid when
        ``grid`` is omitted).
        """
        ball = pi ** (self.dim / 2) / gamma(self.dim / 2 + 1)
        if self.family == "round":
            return ball
        if self.family == "ellipsoid":
            return ball * float(np.prod(self.semi_axes))
        from .grid import build_sphere_grid
        if grid is None:
            if self.is_axisymmetric:
                grid = build_sphere_grid("axisymmetric", 256, n=self.n)
            else:
                grid = build_sphere_grid("full", 96, 192)
        x = grid.x
        a = self.a_matrix(x, np.stack(grid.frame_vectors(), axis=-1), check=False)
        dens = self.value(x) * grid.frame_det(a)
        return float(grid.integrate(dens)) / self.dim

    def wulff_area(self, grid=None) -> float:
        """Anisotropic area of ``Sigma_F``; equals ``(n+1) |W_F|``."""
        return self.dim * self.wulff_volume(grid)


def unit_ball_volume(n: int) -> float:
    """Volume of the unit ball in ``R^{n+1}``."""
    return sphere_area(n) / (n + 1)

