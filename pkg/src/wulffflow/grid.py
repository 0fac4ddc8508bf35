"""Latitude-longitude grids on S^n with pole-reflection stencils.

Polar angle ``theta`` is measured from ``e1`` and sampled at cell midpoints,
so no node sits on a pole.  Difference stencils in ``theta`` reach across a
pole through ghost rows: the point at polar angle ``-theta`` and longitude
``phi`` is the point ``(theta, phi + pi)``, so ghost values are copies of
interior rows shifted half a period in longitude.  Quantities that flip sign
under that reflection (a single ``theta`` index) take parity ``-1``.

Longitude derivatives are spectral (FFT).  In axisymmetric mode only the polar
angle is discretized; the node at longitude 0 stands for its whole orbit and
the orbit directions carry multiplicity ``n - 1``.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np
from scipy.special import roots_legendre

from .errors import ConfigError, DomainError
from .harmonics import sphere_area
from .validation import check_int

MODES = ("full", "axisymmetric")

_FIRST = {2: (np.array([-0.5, 0.0, 0.5]), 1.0),
          4: (np.array([1 / 12, -2 / 3, 0.0, 2 / 3, -1 / 12]), 1.3722)}
_SECOND = {2: (np.array([1.0, -2.0, 1.0]), 4.0),
           4: (np.array([-1 / 12, 4 / 3, -5 / 2, 4 / 3, -1 / 12]), 16 / 3)}


def polar_weights(n_theta: int, power: int) -> np.ndarray:
    """Weights ``w_j`` on midpoint nodes exact for ``cos(m theta) sin^power(theta)``,
    ``m < n_theta``."""
    theta = (np.arange(n_theta) + 0.5) * np.pi / n_theta
    nodes, gw = roots_legendre(2 * n_theta + power + 64)
    t = 0.5 * np.pi * (nodes + 1.0)
    m = np.arange(n_theta)
    mu = (0.5 * np.pi * gw * np.sin(t) ** power) @ np.cos(np.outer(t, m))
    basis = np.cos(np.outer(theta, m[1:]))
    return (mu[0] + 2.0 * basis @ mu[1:]) / n_theta


class SphereGrid:
    """Structured grid on ``S^n``.

    Parameters
    ----------
    mode : {"full", "axisymmetric"}
        ``full`` requires ``n = 2``.
    n_theta : int
        Number of polar nodes (>= 16).
    n_phi : int, optional
        Number of longitudes, even and >= 32 (full mode only).
    n : int
        Sphere dimension.
    order : {2, 4}
        Accuracy order of the polar stencils.
    """

    def __init__(self, mode: str, n_theta: int, n_phi: int | None = None, *, n: int = 2,
                 order: int = 4):
        mode = str(mode).lower()
        if mode not in MODES:
            raise ConfigError(f"unknown grid mode {mode!r}")
        n_theta = check_int(n_theta, name="n_theta", low=16)
        n = check_int(n, name="n", low=2)
        if order not in _FIRST:
            raise ConfigError("order must be 2 or 4")
        if mode == "full":
            if n != 2:
                raise ConfigError("full grids are only available for n = 2")
            if n_phi is None:
                n_phi = 2 * n_theta
            n_phi = check_int(n_phi, name="n_phi", low=32)
            if n_phi % 2:
                raise ConfigError("n_phi must be even")
        else:
            n_phi = 1
        self.mode, self.n, self.order = mode, n, order
        self.n_theta, self.n_phi = n_theta, n_phi
        self.h_theta = np.pi / n_theta
        self.h_phi = 2 * np.pi / n_phi
        self.theta = (np.arange(n_theta) + 0.5) * self.h_theta
        self.phi = np.arange(n_phi) * self.h_phi
        self.shape = (n_theta, n_phi)
        self.size = n_theta * n_phi
        self.sin_t = np.sin(self.theta)[:, None]
        self.cos_t = np.cos(self.theta)[:, None]
        self.cot_t = self.cos_t / self.sin_t
        self.multiplicity = (1, n - 1) if mode == "axisymmetric" else (1, 1)
        self._ghost = len(_FIRST[order][0]) // 2

        th, ph = np.meshgrid(self.theta, self.phi, indexing="ij")
        self.x, self.e_theta, self.e_phi = self.embed(th, ph)
        power = 1 if mode == "full" else n - 1
        wt = polar_weights(n_theta, power)
        orbit = self.h_phi if mode == "full" else sphere_area(n - 1)
        self.weights = np.repeat((wt * orbit)[:, None], n_phi, axis=1)

    def __repr__(self) -> str:
        res = f"{self.n_theta}x{self.n_phi}" if self.mode == "full" else f"{self.n_theta}"
        return f"SphereGrid({self.mode!r}, {res}, n={self.n}, order={self.order})"

    @property
    def axisymmetric(self) -> bool:
        return self.mode == "axisymmetric"

    def refined(self, factor: int = 2) -> "SphereGrid":
        n_phi = self.n_phi * factor if self.mode == "full" else None
        return SphereGrid(self.mode, self.n_theta * factor, n_phi, n=self.n, order=self.order)

    def embed(self, theta, phi):
        """Points and unit coordinate directions ``(x, e_theta, e_phi)``."""
        theta = np.asarray(theta, dtype=float)
        phi = np.asarray(phi, dtype=float)
        st, ct = np.sin(theta), np.cos(theta)
        sp_, cp = np.sin(phi), np.cos(phi)
        shape = np.broadcast(theta, phi).shape + (self.n + 1,)
        x = np.zeros(shape)
        et = np.zeros(shape)
        ep = np.zeros(shape)
        x[..., 0], et[..., 0] = ct, -st
        x[..., 1], et[..., 1], ep[..., 1] = st * cp, ct * cp, -sp_
        x[..., 2], et[..., 2], ep[..., 2] = st * sp_, ct * sp_, cp
        return x, et, ep

    def frame_vectors(self):
        return self.e_theta, self.e_phi

    def frame_det(self, a: np.ndarray) -> np.ndarray:
        """Determinant of an ``n x n`` operator given by its 2x2 frame block.

        In axisymmetric mode the orbit entry is raised to its multiplicity.
        """
        if self.axisymmetric:
            return a[..., 0, 0] * a[..., 1, 1] ** (self.n - 1)
        return a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]

    # differentiation -----------------------------------------------------
    def _pad(self, f: np.ndarray, parity: float) -> np.ndarray:
        g = self._ghost
        top = f[:g][::-1]
        bot = f[-g:][::-1]
        if self.mode == "full":
            half = self.n_phi // 2
            top = np.roll(top, half, axis=1)
            bot = np.roll(bot, half, axis=1)
        return np.concatenate([parity * top, f, parity * bot], axis=0)

    def _stencil(self, f, coeffs, parity):
        f = np.asarray(f, dtype=float)
        padded = self._pad(f, parity)
        n = f.shape[0]
        return sum(c * padded[i:i + n] for i, c in enumerate(coeffs) if c != 0.0)

    def d_theta(self, f, parity: float = 1.0) -> np.ndarray:
        return self._stencil(f, _FIRST[self.order][0], parity) / self.h_theta

    def d_theta2(self, f, parity: float = 1.0) -> np.ndarray:
        return self._stencil(f, _SECOND[self.order][0], parity) / self.h_theta ** 2

    @cached_property
    def _wavenumbers(self):
        return np.arange(self.n_phi // 2 + 1, dtype=float)

    def d_phi(self, f) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        if self.axisymmetric:
            return np.zeros_like(f)
        ik = 1j * self._wavenumbers
        ik[-1] = 0.0
        return np.fft.irfft(np.fft.rfft(f, axis=1) * ik, n=self.n_phi, axis=1)

    def d_phi2(self, f) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        if self.axisymmetric:
            return np.zeros_like(f)
        k2 = -self._wavenumbers ** 2
        return np.fft.irfft(np.fft.rfft(f, axis=1) * k2, n=self.n_phi, axis=1)

    def coordinate_derivatives(self, f):
        """``(f_t, f_p, f_tt, f_tp, f_pp)`` in ``(theta, phi)`` coordinates."""
        ft = self.d_theta(f)
        ftt = self.d_theta2(f)
        if self.axisymmetric:
            z = np.zeros_like(ft)
            return ft, z, ftt, z, z
        fp = self.d_phi(f)
        return ft, fp, ftt, self.d_theta(fp), self.d_phi2(f)

    def gradient(self, f) -> np.ndarray:
        """Tangential gradient in the orthonormal frame ``(e_theta, e_phi)``."""
        ft, fp = self.d_theta(f), self.d_phi(f)
        return np.stack([ft, fp / self.sin_t], axis=-1)

    def hessian(self, f, derivs=None) -> np.ndarray:
        """Covariant Hessian of the round metric in the orthonormal frame."""
        ft, fp, ftt, ftp, fpp = self.coordinate_derivatives(f) if derivs is None else derivs
        h = np.empty(ft.shape + (2, 2))
        h[..., 0, 0] = ftt
        h[..., 0, 1] = h[..., 1, 0] = (ftp - self.cot_t * fp) / self.sin_t
        h[..., 1, 1] = fpp / self.sin_t ** 2 + self.cot_t * ft
        return h

    def laplacian(self, f) -> np.ndarray:
        h = self.hessian(f)
        return h[..., 0, 0] + self.multiplicity[1] * h[..., 1, 1]

    def integrate(self, f) -> float:
        f = np.asarray(f, dtype=float)
        if f.shape != self.shape:
            raise DomainError(f"field has shape {f.shape}, grid expects {self.shape}")
        return float(np.sum(self.weights * f))

    def mean(self, f) -> float:
        return self.integrate(f) / float(self.weights.sum())

    def _ring_radius(self, m_max) -> float:
        c1 = _FIRST[self.order][1]
        c2 = _SECOND[self.order][1]
        rho = c2 / self.h_theta ** 2 + self.multiplicity[1] * np.abs(self.cot_t[:, 0]) * c1 / self.h_theta
        if not self.axisymmetric:
            rho = rho + m_max ** 2 / self.sin_t[:, 0] ** 2
        return float(rho.max())

    @cached_property
    def spectral_radius(self) -> float:
        """Upper estimate of the spectral radius of the discrete Laplacian."""
        return self._ring_radius(self.n_phi / 2)

    @cached_property
    def polar_cutoffs(self) -> np.ndarray:
        """Highest phi wavenumber kept on each ring by :meth:`polar_filter`."""
        if self.axisymmetric:
            return np.zeros(self.n_theta, dtype=int)
        return np.minimum(np.ceil(0.5 * self.n_phi * self.sin_t[:, 0]).astype(int),
                          self.n_phi // 2)

    @cached_property
    def filtered_spectral_radius(self) -> float:
        """Spectral radius bound once :meth:`polar_filter` is applied."""
        return self._ring_radius(self.polar_cutoffs)

    def polar_filter(self, f) -> np.ndarray:
        """Drop phi wavenumbers above ``ceil(n_phi sin(theta) / 2)`` on each ring.

        Rings near the poles are short, so without this the admissible explicit
        step shrinks like ``sin(theta_1)^2``.
        """
        if self.axisymmetric:
            return f
        spec = np.fft.rfft(f, axis=1)
        keep = np.arange(spec.shape[1])[None, :] <= self.polar_cutoffs[:, None]
        return np.fft.irfft(spec * keep, n=self.n_phi, axis=1)


def build_sphere_grid(mode: str, n_theta: int, n_phi: int | None = None, *, n: int = 2,
                      order: int = 4) -> SphereGrid:
    """Construct a :class:`SphereGrid`."""
    return SphereGrid(mode, n_theta, n_phi, n=n, order=order)
