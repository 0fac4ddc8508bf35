"""Integral geometry: mixed volumes, Minkowski identities, isoperimetric ratios,
Alexandrov-Fenchel slack, and a Monte-Carlo Minkowski-sum oracle.

Conventions: for a convex body ``Omega`` with boundary ``M``,
``V_{n-k} = int_M E_k(kappa) dmu_F`` for ``k = 0..n`` and
``V_{n+1} = (n+1) Vol(Omega)``.  With these, ``V_m(W_F) = (n+1)|W_F|`` for
all ``m`` and ``Vol(Omega + eps W_F) = sum_m C(n+1, m) V_m eps^{n+1-m} / (n+1)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

from .curvature import elementary_all, umbilicity_from_kappa
from .errors import DomainError, NumericalError
from .homogeneous import fibonacci_sphere


@dataclass
class FunctionalReport:
    """Integral diagnostics of one state.

    ``v[m]`` is ``V_m`` for ``m = 0..n+1``; ``minkowski[k]`` is the Minkowski
    residual of order ``k``.
    """

    n: int
    vol: float
    v: np.ndarray
    minkowski: np.ndarray
    s_min: float
    s_max: float
    kappa_min: float
    kappa_max: float
    umbilicity: float
    volume_identity: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def area_f(self) -> float:
        return float(self.v[self.n])

    def isoperimetric(self, k: int) -> float:
        return isoperimetric_ratio(self, k)

    def relative_minkowski(self) -> np.ndarray:
        """Residuals divided by the matching ``int E_k dmu_F``."""
        ks = np.arange(self.n)
        return self.minkowski / np.abs(self.v[self.n - ks])


def report_radial(geom) -> FunctionalReport:
    """Functionals of a radial graph from its :class:`GraphGeometry`."""
    n = geom.grid.n
    e = elementary_all(geom.kappa)
    mu = geom.mu_f
    ints = np.tensordot(mu, e, axes=mu.ndim)
    sig = geom.sigma_f
    vol = float(np.sum(sig * mu)) / (n + 1)
    v = np.empty(n + 2)
    v[:n + 1] = ints[::-1]
    v[n + 1] = (n + 1) * vol
    ints_sigma = np.tensordot(mu * sig, e, axes=mu.ndim)
    mink = ints_sigma[1:] - ints[:-1]
    vol_radial = geom.grid.integrate(geom.rho ** (n + 1)) / (n + 1)
    return FunctionalReport(
        n=n, vol=vol, v=v, minkowski=mink, s_min=float(sig.min()), s_max=float(sig.max()),
        kappa_min=float(geom.kappa.min()), kappa_max=float(geom.kappa.max()),
        umbilicity=float(umbilicity_from_kappa(geom.kappa).max()),
        volume_identity=(n + 1) * (vol - vol_radial))


def report_support(chart, tau, s) -> FunctionalReport:
    """Functionals of a support-function state on the Wulff chart."""
    n = chart.grid.n
    e = elementary_all(tau.radii)
    mu = chart.mu
    v = np.empty(n + 2)
    v[:n + 1] = np.tensordot(mu, e, axes=mu.ndim)
    v[n + 1] = float(np.sum(s * e[..., n] * mu))
    vol = v[n + 1] / (n + 1)
    ints_s = np.tensordot(mu * s, e, axes=mu.ndim)
    ks = np.arange(n)
    mink = ints_s[n - ks - 1] - v[n - ks]
    kappa = tau.kappa
    return FunctionalReport(
        n=n, vol=vol, v=v, minkowski=mink, s_min=float(np.min(s)), s_max=float(np.max(s)),
        kappa_min=float(kappa.min()), kappa_max=float(kappa.max()),
        umbilicity=float(umbilicity_from_kappa(kappa).max()))


def _require_convex(geom):
    if not geom.convex:
        raise DomainError("curvature integrals need a strictly convex state")


def mixed_volume_surface(geom, m: int) -> float:
    """``V_m`` of the body bounded by a radial graph."""
    n = geom.grid.n
    if not 0 <= m <= n + 1:
        raise DomainError(f"m must lie in 0..{n + 1}")
    if m <= n:
        _require_convex(geom)
    return float(report_radial(geom).v[m])


def minkowski_residual(geom, k: int) -> tuple[float, float]:
    """``(int E_{k+1} sigma_F - int E_k, int sigma_F - (n+1) Vol)``."""
    n = geom.grid.n
    if not 0 <= k <= n - 1:
        raise DomainError(f"k must lie in 0..{n - 1}")
    _require_convex(geom)
    rep = report_radial(geom)
    return float(rep.minkowski[k]), float(rep.volume_identity)


def isoperimetric_ratio(report: FunctionalReport, k: int) -> float:
    """``I_k = V_{n+2-k} / V_{n+1}^{(n+2-k)/(n+1)}``."""
    n = report.n
    if not 1 <= k <= n + 1:
        raise DomainError(f"k must lie in 1..{n + 1}")
    j = n + 2 - k
    return float(report.v[j] / report.v[n + 1] ** (j / (n + 1)))


def af_slack(report: FunctionalReport, k: int, wulff_volume: float) -> float:
    """``int E_k dmu_F - (n+1) Vol^{(n-k)/(n+1)} |W_F|^{(k+1)/(n+1)}``."""
    n = report.n
    if not 0 <= k <= n:
        raise DomainError(f"k must lie in 0..{n}")
    bound = (n + 1) * report.vol ** ((n - k) / (n + 1)) * wulff_volume ** ((k + 1) / (n + 1))
    return float(report.v[n - k] - bound)


def af_check(aniso, geom, k: int, wulff_volume: float | None = None) -> float:
    """Alexandrov-Fenchel slack of a radial graph (nonnegative in theory)."""
    n = geom.grid.n
    if not 0 <= k <= n - 2:
        raise DomainError(f"k must lie in 0..{n - 2}")
    _require_convex(geom)
    wv = aniso.wulff_volume() if wulff_volume is None else wulff_volume
    return af_slack(report_radial(geom), k, wv)


# Monte-Carlo oracle ----------------------------------------------------------

@dataclass
class MixedVolumeEstimate:
    """Monte-Carlo estimate of all ``V_m`` with one-sigma errors."""

    values: np.ndarray
    stderr: np.ndarray
    eps: np.ndarray
    volumes: np.ndarray
    volume_stderr: np.ndarray
    samples: int
    directions: int

    def __getitem__(self, m):
        return float(self.values[m]), float(self.stderr[m])


def _directions(dim: int, count: int, seed: int) -> np.ndarray:
    if dim == 3:
        return fibonacci_sphere(count, 3)
    return fibonacci_sphere(count, dim, seed=seed)


def mc_mixed_volume(aniso, body, m: int | None = None, *, n_samples: int = 2_000_000,
                    n_directions: int = 2000, eps_factor: float = 1.0, n_eps: int = 6,
                    strata: int | None = None, seed: int = 0, chunk: int = 4096,
                    max_condition: float = 1e8):
    """Estimate mixed volumes from ``Vol(Omega + eps W_F)``.

    Points are drawn from a stratified bounding box.  For each point the
    smallest ``eps`` admitting it, ``max_u (<u,p> - h(u)) / F(u)``, is computed
    once over a direction sample; this makes the volume estimates at all
    ``eps`` use common random numbers, so their differences are much more
    precise than the volumes themselves.  A degree ``n+1`` polynomial fit in
    ``eps`` then yields every ``V_m`` with propagated standard errors.

    Returns the full :class:`MixedVolumeEstimate` when ``m`` is None, otherwise
    ``(V_m, stderr)``.
    """
    dim = aniso.dim
    n = dim - 1
    if n_eps < n + 2:
        raise DomainError("need at least n+2 values of eps")
    rng = np.random.default_rng(seed)
    u = _directions(dim, n_directions, seed)
    h = body.support(u)
    f = aniso.value(u)
    scale = float(h.mean() / f.mean())
    eps = scale * eps_factor * np.linspace(0.0, 1.0, n_eps)
    design = np.vander(eps, n + 2, increasing=True)
    if np.linalg.cond(design) > max_condition:
        raise NumericalError("polynomial fit is ill-conditioned; increase the eps spread")
    eye = np.eye(dim)
    hi = body.support(eye) + eps[-1] * aniso.value(eye)
    lo = -(body.support(-eye) + eps[-1] * aniso.value(-eye))
    ut = u / f[:, None]
    b = h / f

    if strata is None:
        strata = 8 if dim == 3 else 4
    n_cells = strata ** dim
    per = max(2, int(np.ceil(n_samples / n_cells)))
    width = (hi - lo) / strata
    cell_vol = float(np.prod(width))
    idx = np.stack(np.unravel_index(np.arange(n_cells), (strata,) * dim), axis=-1)

    counts = np.zeros((n_cells, n_eps))
    cells_per_chunk = max(1, chunk // per)
    for start in range(0, n_cells, cells_per_chunk):
        cells = idx[start:start + cells_per_chunk]
        jitter = rng.random((len(cells), per, dim))
        pts = lo + (cells[:, None, :] + jitter) * width
        flat = pts.reshape(-1, dim)
        need = np.max(flat @ ut.T - b, axis=1).reshape(len(cells), per)
        counts[start:start + len(cells)] = (need[..., None] <= eps).sum(axis=1)

    p = counts / per
    volumes = cell_vol * p.sum(axis=0)
    pmin = np.minimum(p[:, :, None], p[:, None, :])
    cov_cell = (pmin - p[:, :, None] * p[:, None, :]) * per / (per - 1)
    cov = cell_vol ** 2 * cov_cell.sum(axis=0) / per

    pinv = np.linalg.pinv(design)
    coef = pinv @ volumes
    coef_cov = pinv @ cov @ pinv.T
    ms = np.arange(n + 2)
    norm = np.array([(n + 1) / comb(n + 1, mm) for mm in ms])
    values = norm * coef[n + 1 - ms]
    stderr = norm * np.sqrt(np.maximum(np.diag(coef_cov)[n + 1 - ms], 0.0))
    est = MixedVolumeEstimate(values=values, stderr=stderr, eps=eps, volumes=volumes,
                              volume_stderr=np.sqrt(np.diag(cov)),
                              samples=per * n_cells, directions=n_directions)
    if m is None:
        return est
    return est[m]
