"""The linearized operator ``L = Delta - (1/2) gbar^{ij} Q_ijk nabla^k`` on
``Sigma_F``, its first nonzero eigenvalue, and decay-rate fitting.

``L`` is the ``mu_F``-weighted Laplacian: ``int v L u dmu_F = -int gbar(du, dv)
dmu_F``.  The discretization assembles that quadratic form with face-centred
differences (a finite-volume stencil), so the weighted matrix ``M L`` is
symmetric, negative semidefinite and annihilates constants by construction.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sps
from scipy.sparse.linalg import eigsh

from .chart import chart_quantities
from .errors import DomainError, NumericalError
from .harmonics import sphere_area

DENSE_LIMIT = 2500


def _inv2(m):
    det = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    out = np.empty_like(m)
    out[..., 0, 0] = m[..., 1, 1] / det
    out[..., 1, 1] = m[..., 0, 0] / det
    out[..., 0, 1] = out[..., 1, 0] = -m[..., 0, 1] / det
    return out


def _face_data(chart, theta, phi):
    d = chart_quantities(chart.aniso, chart.grid, theta, phi)
    return _inv2(d["metric"]), d["f"] * d["det_a"]


@dataclass(eq=False)
class LinearizedOperator:
    """``L = M^{-1} K`` with ``K`` symmetric and ``M`` the ``mu_F`` weights."""

    chart: object
    stiffness: sps.csr_matrix
    mass: np.ndarray

    @property
    def size(self) -> int:
        return self.mass.size

    @property
    def matrix(self) -> sps.csr_matrix:
        return sps.diags(1.0 / self.mass) @ self.stiffness

    def apply(self, f) -> np.ndarray:
        """``L f`` in difference form, so constants map to zero exactly."""
        f = np.asarray(f, dtype=float)
        flat = f.ravel()
        coo = self.stiffness.tocoo()
        off = coo.row != coo.col
        row, col, val = coo.row[off], coo.col[off], coo.data[off]
        out = np.bincount(row, weights=val * (flat[col] - flat[row]), minlength=flat.size)
        return (out / self.mass).reshape(f.shape)

    def weighted_asymmetry(self) -> float:
        """``|W L - (W L)^T| / |W L|`` with ``W = diag(mass)``."""
        wl = sps.diags(self.mass) @ self.matrix
        diff = abs(wl - wl.T).max()
        return float(diff / abs(wl).max())

    def spectrum(self, count: int = 6) -> np.ndarray:
        """Smallest ``count`` values of ``-L`` (ascending)."""
        count = min(count, self.size - 1)
        if self.size <= DENSE_LIMIT:
            vals = sla.eigh(-self.stiffness.toarray(), np.diag(self.mass), eigvals_only=True,
                            subset_by_index=[0, count - 1])
            return np.sort(vals)
        try:
            vals = eigsh(-self.stiffness.tocsc(), k=count, M=sps.diags(self.mass).tocsc(),
                         sigma=-0.1, which="LM", return_eigenvectors=False, tol=1e-12)
        except Exception as exc:  # ARPACK reports failures with several types
            raise NumericalError(f"eigensolver failed: {exc}") from exc
        return np.sort(vals)

    def lambda1(self) -> float:
        """Smallest nonzero eigenvalue of ``-L`` (the constant mode is skipped)."""
        vals = self.spectrum(6)
        scale = max(abs(vals).max(), 1.0)
        nonzero = vals[vals > 1e-7 * scale]
        if nonzero.size == 0:
            raise NumericalError("no nonzero eigenvalue found")
        return float(nonzero[0])


def fourier_diff_matrix(m: int) -> np.ndarray:
    """Periodic spectral first-derivative matrix on ``m`` equispaced nodes (``m`` even)."""
    h = 2 * np.pi / m
    diff = np.arange(m)[:, None] - np.arange(m)[None, :]
    out = np.zeros((m, m))
    off = diff != 0
    out[off] = 0.5 * (-1.0) ** diff[off] / np.tan(0.5 * diff[off] * h)
    return out


def _row_selector(grid, rows) -> sps.csr_matrix:
    """Pick whole latitude rows; rows ``-1`` and ``n_theta`` are the ghost
    rows reflected across the poles (half-period shift in phi)."""
    nt, nph = grid.shape
    idx = np.arange(nt * nph).reshape(nt, nph)
    half = nph // 2
    cols = []
    for r in rows:
        if r < 0:
            cols.append(np.roll(idx[0], -half))
        elif r >= nt:
            cols.append(np.roll(idx[-1], -half))
        else:
            cols.append(idx[r])
    cols = np.concatenate(cols)
    return sps.csr_matrix((np.ones(cols.size), (np.arange(cols.size), cols)),
                          shape=(cols.size, nt * nph))


def _band_volumes(grid) -> np.ndarray:
    """Exact volumes of the latitude cells ``[j h, (j+1) h]`` per node."""
    ht = grid.h_theta
    edges = np.arange(grid.n_theta + 1) * ht
    if grid.axisymmetric:
        nodes, gw = np.polynomial.legendre.leggauss(8)
        t = 0.5 * (edges[:-1, None] + edges[1:, None]) + 0.5 * ht * nodes[None, :]
        band = 0.5 * ht * (np.sin(t) ** (grid.n - 1)) @ gw
        return (band * sphere_area(grid.n - 1))[:, None]
    return ((np.cos(edges[:-1]) - np.cos(edges[1:])) * grid.h_phi)[:, None]


def _cell_mass(chart) -> np.ndarray:
    return chart.density * _band_volumes(chart.grid)


def build_operator(chart) -> LinearizedOperator:
    """Assemble ``L`` on the chart's grid.

    The form ``int gbar^{ab} u_a v_b dmu_F`` uses theta differences on
    latitude faces and spectral differences in phi.  The mixed part sits on
    all latitude faces including the two pole faces, where reflected ghost
    rows supply the missing neighbours.
    """
    grid = chart.grid
    nt, nph = grid.shape
    ht = grid.h_theta
    tf = np.arange(1, nt) * ht
    phi_rows = np.broadcast_to(grid.phi, (nt - 1, nph))
    inv_t, dens_t = _face_data(chart, np.repeat(tf[:, None], nph, axis=1), phi_rows)
    d_theta = (_row_selector(grid, range(1, nt)) - _row_selector(grid, range(nt - 1))) / ht
    if grid.axisymmetric:
        band = sphere_area(grid.n - 1) * np.sin(tf)[:, None] ** (grid.n - 1) * ht
    else:
        band = np.sin(tf)[:, None] * ht * grid.h_phi
    w_t = (dens_t * band * inv_t[..., 0, 0]).ravel()
    k = d_theta.T @ sps.diags(w_t) @ d_theta

    if not grid.axisymmetric:
        d_phi = sps.csr_matrix(sps.kron(sps.identity(nt), fourier_diff_matrix(nph)))
        w_p = (chart.density * _band_volumes(grid) * chart.metric_inv[..., 1, 1]).ravel()
        k = k + d_phi.T @ sps.diags(w_p) @ d_phi
        # d_phi annihilates the Nyquist mode; restore its (M/2)^2 stiffness per row
        nyq = (-1.0) ** np.arange(nph)
        w_row = w_p.reshape(nt, nph).mean(axis=1) * (nph / 2) ** 2 / nph
        k = k + sps.kron(sps.diags(w_row), np.outer(nyq, nyq))

        # rho * gbar^{theta phi} stays finite at the poles; take it just inside
        inv_c = np.empty((nt + 1, nph, 2, 2))
        dens_c = np.empty((nt + 1, nph))
        inv_c[1:-1] = inv_t
        dens_c[1:-1] = dens_t * np.sin(tf)[:, None]
        for pos, theta_face in ((0, 1e-6), (nt, np.pi - 1e-6)):
            inv_p, dens_p = _face_data(chart, np.full(nph, theta_face), grid.phi)
            inv_c[pos] = inv_p
            dens_c[pos] = dens_p * np.sin(theta_face)
        trap = np.full(nt + 1, ht * grid.h_phi)
        trap[[0, -1]] *= 0.5
        w_c = (dens_c * inv_c[..., 0, 1] * trap[:, None]).ravel()
        lo = _row_selector(grid, range(-1, nt))
        hi = _row_selector(grid, range(0, nt + 1))
        cross = ((hi - lo) / ht).T @ sps.diags(w_c) @ (0.5 * (hi + lo) @ d_phi)
        k = k + cross + cross.T
    k = -sps.csr_matrix(k)
    k = 0.5 * (k + k.T)
    # remove round-off from the constant mode exactly
    k = sps.csr_matrix(k - sps.diags(np.asarray(k.sum(axis=1)).ravel()))
    mass = _cell_mass(chart).ravel()
    if np.any(mass <= 0):
        raise NumericalError("nonpositive mass weights")
    return LinearizedOperator(chart=chart, stiffness=sps.csr_matrix(k), mass=mass)


def lambda1(op: LinearizedOperator) -> float:
    return op.lambda1()


def predicted_rate(lam1: float, n: int, r_bar: float) -> float:
    """Asymptotic decay rate ``lambda_1 / (n r_bar)``."""
    return lam1 / (n * r_bar)


@dataclass
class DecayFit:
    rate: float
    intercept: float
    r2: float
    n_points: int
    stderr: float
    t_start: float
    t_end: float

    @property
    def ci95(self) -> tuple[float, float]:
        return self.rate - 1.96 * self.stderr, self.rate + 1.96 * self.stderr


def fit_decay(times, deviations, *, start_fraction: float = 0.1, floor: float | None = None,
              min_points: int = 20) -> DecayFit:
    """Least-squares slope of ``log(deviation)`` over the tail window.

    The window opens when the deviation first drops below ``start_fraction``
    of its initial value and excludes values at or below ``floor``
    (default ``1e-13`` times the initial deviation), which are dominated by
    round-off.
    """
    t = np.asarray(times, dtype=float)
    d = np.asarray(deviations, dtype=float)
    if t.shape != d.shape or t.ndim != 1:
        raise DomainError("times and deviations must be 1-D arrays of equal length")
    if d.size == 0 or d[0] <= 0:
        raise DomainError("initial deviation must be positive")
    floor = 1e-13 * d[0] if floor is None else floor
    below = np.flatnonzero(d < start_fraction * d[0])
    if below.size == 0:
        raise DomainError("deviation never entered the asymptotic window")
    sel = np.arange(below[0], d.size)
    sel = sel[d[sel] > floor]
    if sel.size < min_points:
        raise DomainError(f"need at least {min_points} records in the tail, got {sel.size}")
    tt, yy = t[sel], np.log(d[sel])
    design = np.stack([tt, np.ones_like(tt)], axis=1)
    coef, *_ = np.linalg.lstsq(design, yy, rcond=None)
    resid = yy - design @ coef
    ss_tot = float(np.sum((yy - yy.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    dof = max(sel.size - 2, 1)
    sigma2 = float(np.sum(resid ** 2)) / dof
    stderr = float(np.sqrt(sigma2 / np.sum((tt - tt.mean()) ** 2)))
    if r2 < 0.99:
        warnings.warn(f"decay fit quality is poor (R^2 = {r2:.4f})", RuntimeWarning,
                      stacklevel=2)
    return DecayFit(rate=-float(coef[0]), intercept=float(coef[1]), r2=r2, n_points=int(sel.size),
                    stderr=stderr, t_start=float(tt[0]), t_end=float(tt[-1]))
