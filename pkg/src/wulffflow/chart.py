"""The Wulff chart: ``Sigma_F`` parametrized by normal directions on ``S^n``.

A node of a :class:`~wulffflow.grid.SphereGrid` with direction ``x`` maps to
``z = DF(x)``.  Coordinates are the grid's ``(theta, phi)``.  The pulled-back
metric is ``gbar_ab = G(z_a, z_b)`` with ``z_a = D^2F(x) x_a``.  Christoffel
symbols come from the exact relation
``Gamma_{c,ab} = G(z_ab, z_c) + Q(z_a, z_b, z_c) / 2``, which holds because
``DG = Q``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError
from .validation import check_field


def _coordinate_maps(grid, theta, phi):
    x, et, ep = grid.embed(theta, phi)
    st = np.sin(theta)[..., None]
    ct = np.cos(theta)[..., None]
    rho_hat = st * x + ct * et
    xa = np.stack([et, st * ep], axis=-2)
    xab = np.empty(x.shape[:-1] + (2, 2, x.shape[-1]))
    xab[..., 0, 0, :] = -x
    xab[..., 0, 1, :] = xab[..., 1, 0, :] = ct * ep
    xab[..., 1, 1, :] = -st * rho_hat
    return x, et, ep, xa, xab


def chart_quantities(aniso, grid, theta, phi) -> dict:
    """Chart data at arbitrary coordinates (used on nodes and on cell faces)."""
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    x, et, ep, xa, xab = _coordinate_maps(grid, theta, phi)
    f = aniso.value(x)
    d2 = aniso.hess(x)
    d3 = aniso.third(x)
    g_amb = aniso.metric_g(x)
    q_amb = aniso.tensor_q(x, g_amb)
    za = np.einsum("...ij,...aj->...ai", d2, xa)
    zab = (np.einsum("...ijk,...aj,...bk->...abi", d3, xa, xa)
           + np.einsum("...ij,...abj->...abi", d2, xab))
    gz = np.einsum("...ij,...cj->...ci", g_amb, za)
    metric = np.einsum("...ai,...bi->...ab", za, gz)
    metric = 0.5 * (metric + np.swapaxes(metric, -1, -2))
    qc = np.einsum("...ijk,...ai,...bj,...ck->...abc", q_amb, za, za, za)
    gamma1 = np.einsum("...abi,...ci->...cab", zab, gz) + 0.5 * np.moveaxis(qc, -1, -3)
    frame = np.stack([et, ep], axis=-1)
    a = np.einsum("...ia,...ij,...jb->...ab", frame, d2, frame)
    return dict(x=x, z=aniso.grad(x), za=za, metric=metric, q=qc, gamma1=gamma1,
                f=f, a=a, det_a=grid.frame_det(a))


@dataclass(eq=False)
class WulffChart:
    """Chart data on every node of ``grid``.

    Attributes
    ----------
    metric, metric_inv : (..., 2, 2)
        ``gbar`` and its inverse in ``(theta, phi)`` coordinates.
    christoffel : (..., 2, 2, 2)
        ``Gamma^c_ab`` stored as ``[c, a, b]``.
    q : (..., 2, 2, 2)
        ``Q(z_a, z_b, z_c)``.
    density : (...)
        ``F det A_F``: the density of ``mu_F`` against round area.
    mu : (...)
        Quadrature weights for ``mu_F``.
    """

    aniso: object
    grid: object
    x: np.ndarray
    z: np.ndarray
    za: np.ndarray
    metric: np.ndarray
    metric_inv: np.ndarray
    christoffel: np.ndarray
    q: np.ndarray
    support: np.ndarray
    a_frame: np.ndarray
    density: np.ndarray
    mu: np.ndarray

    @property
    def shape(self):
        return self.grid.shape

    def integrate(self, f) -> float:
        """Integral against ``mu_F`` over ``Sigma_F``."""
        return float(np.sum(self.mu * f))

    @property
    def area(self) -> float:
        return float(self.mu.sum())

    def mean(self, f) -> float:
        return self.integrate(f) / self.area

    def coordinate_gradient(self, f):
        return self.grid.d_theta(f), self.grid.d_phi(f)


def build_wulff_chart(aniso, grid) -> WulffChart:
    """Pull the Wulff-shape geometry back to ``grid``."""
    if aniso.n != grid.n:
        raise NumericalError("anisotropy and grid dimensions differ")
    th, ph = np.meshgrid(grid.theta, grid.phi, indexing="ij")
    d = chart_quantities(aniso, grid, th, ph)
    metric = d["metric"]
    det = metric[..., 0, 0] * metric[..., 1, 1] - metric[..., 0, 1] ** 2
    if np.any(metric[..., 0, 0] <= 0) or np.any(det <= 0):
        raise NumericalError("pulled-back metric is not positive definite")
    inv = np.empty_like(metric)
    inv[..., 0, 0] = metric[..., 1, 1] / det
    inv[..., 1, 1] = metric[..., 0, 0] / det
    inv[..., 0, 1] = inv[..., 1, 0] = -metric[..., 0, 1] / det
    gamma2 = np.einsum("...dc,...cab->...dab", inv, d["gamma1"])
    if grid.axisymmetric:
        # exact symmetry: drop round-off in components that vanish identically
        gamma2[..., 0, 0, 1] = gamma2[..., 0, 1, 0] = 0.0
        gamma2[..., 1, 0, 0] = gamma2[..., 1, 1, 1] = 0.0
    density = d["f"] * d["det_a"]
    return WulffChart(aniso=aniso, grid=grid, x=d["x"], z=d["z"], za=d["za"], metric=metric,
                      metric_inv=inv, christoffel=gamma2, q=d["q"], support=d["f"],
                      a_frame=d["a"], density=density, mu=grid.weights * density)


def covariant_hessian(chart: WulffChart, f, derivs=None) -> np.ndarray:
    """``nabla_a nabla_b f`` of ``gbar`` in chart coordinates, shape ``(..., 2, 2)``."""
    grid = chart.grid
    if derivs is None:
        f = check_field(grid, f)
        derivs = grid.coordinate_derivatives(f)
    ft, fp, ftt, ftp, fpp = derivs
    h = np.empty(ft.shape + (2, 2))
    h[..., 0, 0] = ftt
    h[..., 0, 1] = h[..., 1, 0] = ftp
    h[..., 1, 1] = fpp
    grad = np.stack([ft, fp], axis=-1)
    return h - np.einsum("...cab,...c->...ab", chart.christoffel, grad)


def chart_laplacian(chart: WulffChart, f) -> np.ndarray:
    """Trace of the covariant Hessian (orbit directions counted with multiplicity)."""
    h = covariant_hessian(chart, f)
    return _trace(chart, h)


def _trace(chart, h):
    inv = chart.metric_inv
    if chart.grid.axisymmetric:
        return inv[..., 0, 0] * h[..., 0, 0] + (chart.grid.n - 1) * inv[..., 1, 1] * h[..., 1, 1]
    return np.einsum("...ab,...ab->...", inv, h)


def drift_vector(chart: WulffChart) -> np.ndarray:
    """``b^l = gbar^{ij} Q_ijk gbar^{kl} / 2``; the operator ``L`` is ``Delta - b . d``."""
    inv, q = chart.metric_inv, chart.q
    if chart.grid.axisymmetric:
        tr = inv[..., 0, 0, None] * q[..., 0, 0, :] + (chart.grid.n - 1) * inv[..., 1, 1, None] * q[..., 1, 1, :]
    else:
        tr = np.einsum("...ij,...ijk->...k", inv, q)
    return 0.5 * np.einsum("...kl,...k->...l", inv, tr)


def operator_pointwise(chart: WulffChart, f) -> np.ndarray:
    """Non-divergence form ``Delta f - (1/2) gbar^{ij} Q_ijk nabla^k f``."""
    b = drift_vector(chart)
    ft, fp = chart.coordinate_gradient(f)
    return chart_laplacian(chart, f) - b[..., 0] * ft - b[..., 1] * fp
