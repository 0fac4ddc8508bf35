"""Pointwise anisotropic curvature in the radial and support parametrizations."""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import DomainError, NumericalError
from .validation import as_float_array, check_field, check_int


# symmetric functions ---------------------------------------------------------

def elementary_all(kappa) -> np.ndarray:
    """Normalized ``E_0..E_n`` of the last axis of ``kappa``, shape ``(..., n+1)``."""
    kappa = np.asarray(kappa, dtype=float)
    n = kappa.shape[-1]
    e = np.zeros(kappa.shape[:-1] + (n + 1,))
    e[..., 0] = 1.0
    for i in range(n):
        k = kappa[..., i:i + 1]
        e[..., 1:i + 2] = e[..., 1:i + 2] + k * e[..., 0:i + 1]
    return e / np.array([comb(n, j) for j in range(n + 1)], dtype=float)


def elementary_Ek(kappa, k: int) -> np.ndarray:
    """Normalized elementary symmetric function ``E_k`` (``E_0 = 1``)."""
    kappa = as_float_array(kappa, name="kappa", ndim_min=1)
    k = check_int(k, name="k", low=0, high=kappa.shape[-1], error=DomainError)
    return elementary_all(kappa)[..., k]


def psi(kappa, k: int) -> np.ndarray:
    """``E_k(kappa)^{1/k}``."""
    ek = elementary_all(kappa)[..., k]
    return np.maximum(ek, 0.0) ** (1.0 / k)


def phi_dual(tau, k: int) -> np.ndarray:
    """``(E_n(tau) / E_{n-k}(tau))^{1/k}`` for positive ``tau``."""
    tau = as_float_array(tau, name="tau", ndim_min=1)
    n = tau.shape[-1]
    k = check_int(k, name="k", low=1, high=n, error=DomainError)
    if np.any(tau <= 0):
        raise DomainError("phi_dual needs positive arguments")
    e = elementary_all(tau)
    return (e[..., n] / e[..., n - k]) ** (1.0 / k)


def psi_gradient(kappa, k: int) -> np.ndarray:
    """Partial derivatives ``d E_k^{1/k} / d kappa_i``."""
    kappa = np.asarray(kappa, dtype=float)
    n = kappa.shape[-1]
    ek = elementary_all(kappa)[..., k]
    out = np.empty_like(kappa)
    for i in range(n):
        rest = np.delete(kappa, i, axis=-1)
        sk1 = elementary_all(rest)[..., k - 1] * comb(n - 1, k - 1)
        out[..., i] = sk1 / comb(n, k)
    return out * (np.maximum(ek, 1e-300) ** (1.0 / k - 1.0) / k)[..., None]


def phi_gradient(tau, k: int) -> np.ndarray:
    """Partial derivatives of ``phi_dual`` in ``tau``."""
    tau = np.asarray(tau, dtype=float)
    kap = 1.0 / tau
    p = psi(kap, k)
    return psi_gradient(kap, k) / (p[..., None] ** 2 * tau ** 2)


def newton_maclaurin_gap(kappa) -> np.ndarray:
    """``max_j (E_{j+1}^{1/(j+1)} - E_j^{1/j})`` per node; nonpositive when the
    Newton-MacLaurin chain holds."""
    e = elementary_all(kappa)
    n = e.shape[-1] - 1
    roots = np.stack([np.maximum(e[..., j], 0) ** (1.0 / j) for j in range(1, n + 1)], axis=-1)
    return np.max(np.diff(roots, axis=-1), axis=-1) if n > 1 else np.zeros(e.shape[:-1])


def umbilicity_from_kappa(kappa) -> np.ndarray:
    e = elementary_all(kappa)
    n = e.shape[-1] - 1
    return n * n * (n - 1) * (e[..., 1] ** 2 - e[..., 2])


# small dense helpers ---------------------------------------------------------

def sym2_eig(m: np.ndarray):
    """Ascending eigenvalues of symmetric 2x2 matrices."""
    a, b, c = m[..., 0, 0], 0.5 * (m[..., 0, 1] + m[..., 1, 0]), m[..., 1, 1]
    mid = 0.5 * (a + c)
    rad = np.hypot(0.5 * (a - c), b)
    return np.stack([mid - rad, mid + rad], axis=-1)


def sqrtm2(a: np.ndarray) -> np.ndarray:
    """Principal square root of symmetric positive definite 2x2 matrices."""
    det = a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]
    s = np.sqrt(det)
    t = np.sqrt(a[..., 0, 0] + a[..., 1, 1] + 2 * s)
    return (a + s[..., None, None] * np.eye(2)) / t[..., None, None]


def chol2(m: np.ndarray) -> np.ndarray:
    l = np.zeros_like(m)
    l11 = np.sqrt(m[..., 0, 0])
    l21 = m[..., 1, 0] / l11
    l[..., 0, 0] = l11
    l[..., 1, 0] = l21
    l[..., 1, 1] = np.sqrt(m[..., 1, 1] - l21 ** 2)
    return l


def inv_lower2(l: np.ndarray) -> np.ndarray:
    out = np.zeros_like(l)
    out[..., 0, 0] = 1.0 / l[..., 0, 0]
    out[..., 1, 1] = 1.0 / l[..., 1, 1]
    out[..., 1, 0] = -l[..., 1, 0] / (l[..., 0, 0] * l[..., 1, 1])
    return out


def pencil_eig(t: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Eigenvalues of ``t`` against the positive definite ``g`` (2x2 batches)."""
    li = inv_lower2(chol2(g))
    return sym2_eig(li @ t @ np.swapaxes(li, -1, -2))


def _expand(pair: np.ndarray, grid) -> np.ndarray:
    """Turn per-node (first, orbit) pairs into the full ``n``-vector."""
    if grid.axisymmetric and grid.n > 2:
        return np.concatenate([pair[..., :1]] + [pair[..., 1:2]] * (grid.n - 1), axis=-1)
    return pair


def _first_nonpositive(values: np.ndarray) -> tuple[bool, int, float]:
    low = values.min(axis=-1).ravel()
    bad = np.flatnonzero(low <= 0)
    if bad.size:
        return False, int(bad[0]), float(low[bad[0]])
    return True, -1, float(low.min())


# radial graphs -----------------------------------------------------------------

@dataclass(eq=False)
class GraphGeometry:
    """Per-node geometry of the radial graph ``X = exp(gamma) x``.

    ``kappa`` has shape ``(..., n)`` sorted ascending (orbit directions repeated
    in axisymmetric mode).  ``a_tan`` and ``shape_tan`` are ``A_F(nu)`` and the
    isotropic shape operator in an orthonormal tangent frame.
    """

    grid: object
    rho: np.ndarray
    omega: np.ndarray
    nu: np.ndarray
    f_nu: np.ndarray
    nu_f: np.ndarray
    sigma_f: np.ndarray
    kappa: np.ndarray
    a_tan: np.ndarray
    shape_tan: np.ndarray
    area_density: np.ndarray
    convex: bool
    bad_node: int
    kappa_floor: float
    metric_li: np.ndarray | None = None
    pair: np.ndarray | None = None

    @property
    def mu_f(self) -> np.ndarray:
        """Quadrature weights of ``dmu_F`` on ``M``."""
        return self.grid.weights * self.area_density * self.f_nu

    @property
    def isotropic_curvatures(self) -> np.ndarray:
        return _expand(self._pair_eigs(self.shape_tan), self.grid)

    def _pair_eigs(self, m):
        if self.grid.axisymmetric:
            return np.stack([m[..., 0, 0], m[..., 1, 1]], axis=-1)
        return sym2_eig(m)

    def gauge_matrix(self) -> np.ndarray:
        """``A^{1/2} S A^{1/2}``: the symmetric gauge of the Weingarten map."""
        r = sqrtm2(self.a_tan)
        return r @ self.shape_tan @ r

    def gauge_asymmetry(self) -> float:
        m = self.gauge_matrix()
        num = np.abs(m - np.swapaxes(m, -1, -2)).max()
        return float(num / max(np.abs(m).max(), 1e-300))

    def elementary(self) -> np.ndarray:
        return elementary_all(self.kappa)


def graph_geometry(aniso, grid, gamma) -> GraphGeometry:
    """Anisotropic geometry of the radial graph with ``rho = exp(gamma)``."""
    gamma = check_field(grid, gamma, name="gamma")
    derivs = grid.coordinate_derivatives(gamma)
    g1 = derivs[0]
    g2 = derivs[1] / grid.sin_t
    hess = grid.hessian(gamma, derivs)
    rho = np.exp(gamma)
    w2 = 1.0 + g1 * g1 + g2 * g2
    omega = np.sqrt(w2)
    x, et, ep = grid.x, grid.e_theta, grid.e_phi
    nu = (x - g1[..., None] * et - g2[..., None] * ep) / omega[..., None]

    gv = np.stack([g1, g2], axis=-1)
    ggt = gv[..., :, None] * gv[..., None, :]
    eye = np.eye(2)
    metric = rho[..., None, None] ** 2 * (eye + ggt)
    second = (rho / omega)[..., None, None] * (eye + ggt - hess)
    basis = rho[..., None, None] * (np.stack([et, ep], axis=-2) + gv[..., None] * x[..., None, :])
    li = inv_lower2(chol2(metric))
    tan = li @ basis
    shape_tan = li @ second @ np.swapaxes(li, -1, -2)
    shape_tan = 0.5 * (shape_tan + np.swapaxes(shape_tan, -1, -2))
    d2 = aniso.hess(nu)
    a_tan = np.einsum("...ai,...ij,...bj->...ab", tan, d2, tan)
    a_tan = 0.5 * (a_tan + np.swapaxes(a_tan, -1, -2))

    if grid.axisymmetric:
        pair = np.stack([a_tan[..., 0, 0] * shape_tan[..., 0, 0],
                         a_tan[..., 1, 1] * shape_tan[..., 1, 1]], axis=-1)
    else:
        r = sqrtm2(a_tan)
        pair = sym2_eig(r @ shape_tan @ r)
    if not np.all(np.isfinite(pair)):
        raise NumericalError("non-finite curvature values")
    kappa = np.sort(_expand(pair, grid), axis=-1)
    f_nu = aniso.value(nu)
    convex, bad, floor = _first_nonpositive(kappa)
    return GraphGeometry(grid=grid, rho=rho, omega=omega, nu=nu, f_nu=f_nu,
                         nu_f=aniso.grad(nu), sigma_f=rho / (omega * f_nu), kappa=kappa,
                         a_tan=a_tan, shape_tan=shape_tan,
                         area_density=rho ** grid.n * omega, convex=convex, bad_node=bad,
                         kappa_floor=floor, metric_li=li, pair=pair)


def radial_symbol_bound(geom, k: int) -> float:
    """Largest ratio of the principal symbol of ``psi(kappa[gamma])`` to the
    round Laplacian symbol, over all nodes and covectors.

    With ``L`` the Cholesky factor of the graph metric and ``R = A_F^{1/2}``,
    the symbol is ``(rho/omega) xi^T L^-T R (sum_l psi_l u_l u_l^T) R L^-1 xi``
    where ``u_l`` are the eigenvectors of ``R S R``.
    """
    grid = geom.grid
    if grid.axisymmetric:
        dpsi = psi_gradient(_expand(geom.pair, grid), k)[..., 0]
        return float(np.max(geom.a_tan[..., 0, 0] * dpsi
                            / (geom.rho * geom.omega ** 3)))
    r = sqrtm2(geom.a_tan)
    kap, u = np.linalg.eigh(r @ geom.shape_tan @ r)
    c = psi_gradient(kap, k)
    w = np.swapaxes(geom.metric_li, -1, -2) @ r @ u
    b = np.einsum("...il,...l,...jl->...ij", w, c, w) * (geom.rho / geom.omega)[..., None, None]
    return float(sym2_eig(b)[..., 1].max())


def umbilicity_defect(geom) -> float:
    """``sup n^2 (n-1) (E_1^2 - E_2)`` over nodes (``Sum_{i<j} (k_i - k_j)^2``)."""
    return float(np.max(umbilicity_from_kappa(geom.kappa)))


# support functions on the Wulff chart ------------------------------------------

@dataclass(eq=False)
class TauField:
    """``tau_ab`` in chart coordinates and its eigenvalues against ``gbar``."""

    tau: np.ndarray
    radii: np.ndarray
    convex: bool
    bad_node: int
    radius_floor: float

    @property
    def kappa(self) -> np.ndarray:
        return 1.0 / self.radii[..., ::-1]


def tau_matrix(chart, s, derivs=None) -> TauField:
    """``tau_ab = nabla_a nabla_b s + gbar_ab s - Q_abc nabla^c s / 2``."""
    from .chart import covariant_hessian

    grid = chart.grid
    if derivs is None:
        s = check_field(grid, s, name="s")
        derivs = grid.coordinate_derivatives(s)
    hess = covariant_hessian(chart, s, derivs)
    grad = np.stack([derivs[0], derivs[1]], axis=-1)
    up = np.einsum("...cd,...d->...c", chart.metric_inv, grad)
    tau = hess + chart.metric * s[..., None, None] - 0.5 * np.einsum("...abc,...c->...ab",
                                                                      chart.q, up)
    tau = 0.5 * (tau + np.swapaxes(tau, -1, -2))
    if grid.axisymmetric:
        pair = np.stack([tau[..., 0, 0] / chart.metric[..., 0, 0],
                         tau[..., 1, 1] / chart.metric[..., 1, 1]], axis=-1)
    else:
        pair = pencil_eig(tau, chart.metric)
    radii = np.sort(_expand(pair, grid), axis=-1)
    convex, bad, floor = _first_nonpositive(radii)
    return TauField(tau=tau, radii=radii, convex=convex, bad_node=bad, radius_floor=floor)


def codazzi_residual(chart, s) -> np.ndarray:
    """Codazzi defect of ``tau[s]`` per node, measured in a ``gbar``-orthonormal frame.

    The defect ``nabla_j tau_kl + Q_klp tau_j^p / 2 - (j <-> k)`` is
    antisymmetric in ``(j, k)``, so on a two-dimensional chart only
    ``(j, k) = (theta, phi)`` survives.  Returns an array of shape
    ``grid.shape + (2,)`` indexed by ``l``.
    """
    grid = chart.grid
    tau = tau_matrix(chart, s).tau
    gam = chart.christoffel
    parity = {(0, 0): 1.0, (0, 1): -1.0, (1, 1): 1.0}

    def d_t(a, b):
        return grid.d_theta(tau[..., a, b], parity[min(a, b), max(a, b)])

    def d_p(a, b):
        return grid.d_phi(tau[..., a, b])

    mixed = np.einsum("...pq,...jq->...jp", chart.metric_inv, tau)  # tau_j^p
    out = np.empty(grid.shape + (2,))
    for l in range(2):
        val = d_t(1, l) - d_p(0, l)
        val -= np.einsum("...m,...m->...", gam[..., :, 0, l], tau[..., 1, :])
        val += np.einsum("...m,...m->...", gam[..., :, 1, l], tau[..., 0, :])
        val += 0.5 * (np.einsum("...p,...p->...", chart.q[..., 1, l, :], mixed[..., 0, :])
                      - np.einsum("...p,...p->...", chart.q[..., 0, l, :], mixed[..., 1, :]))
        out[..., l] = val
    # convert the (theta, phi, l) component to unit-length frame vectors
    g = chart.metric
    norm_t = np.sqrt(g[..., 0, 0])
    norm_p = np.sqrt(g[..., 1, 1])
    area = np.sqrt(np.maximum(g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] ** 2, 0.0))
    out[..., 0] /= area * norm_t
    out[..., 1] /= area * norm_p
    return out


def codazzi_norm(chart, s) -> float:
    """``L^2(mu_F)`` norm of :func:`codazzi_residual`."""
    r = codazzi_residual(chart, s)
    return float(np.sqrt(chart.integrate(np.sum(r ** 2, axis=-1))))
