"""Time integration of ``dX/dt = (1 - E_k^{1/k} sigma_F) nu_F``.

Two parametrizations are available:

* ``radial``: ``X = exp(gamma) x`` over ``S^n``, evolving
  ``gamma_t = omega F(nu) / rho - E_k^{1/k}(kappa)``;
* ``support``: the anisotropic support function ``s`` on the Wulff chart,
  evolving ``s_t = 1 - s / Phi(tau[s])`` with ``Phi = (E_n / E_{n-k})^{1/k}``.

Inside :meth:`run` the radial speed is well balanced by default: the discrete
speed of the Wulff shape is subtracted, so every scaled Wulff shape is an exact
discrete steady state.  Without this, the truncation residual pushes the
neutral scale mode at a constant rate and ``sup|speed|`` stalls at that
residual.

Both are advanced by Heun's method with a step chosen each time from the
principal symbol of the linearized operator.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .bodies import wulff
from .chart import build_wulff_chart
from .curvature import (chol2, elementary_all, graph_geometry, inv_lower2, phi_dual, phi_gradient,
                        psi, radial_symbol_bound, sym2_eig, tau_matrix)
from .errors import ConfigError, ConvexityLost, StiffnessError
from .functionals import FunctionalReport, report_radial, report_support
from .validation import check_field

log = logging.getLogger(__name__)

PARAMETRIZATIONS = ("radial", "support")


@dataclass
class FlowConfig:
    k: int = 2
    parametrization: str = "radial"
    t_max: float = 50.0
    tol: float = 1e-8
    max_steps: int = 2_000_000
    cfl: float = 0.5
    record_stride: int = 50
    dt_floor: float = 1e-12
    polar_filter: bool = True
    well_balanced: bool = True

    def validate(self, n: int) -> "FlowConfig":
        if self.parametrization not in PARAMETRIZATIONS:
            raise ConfigError(f"unknown parametrization {self.parametrization!r}")
        if not (isinstance(self.k, (int, np.integer)) and 2 <= self.k <= n):
            raise ConfigError(f"flow exponent k must satisfy 2 <= k <= n = {n}")
        if not 0 < self.cfl < 1:
            raise ConfigError("cfl must lie in (0, 1)")
        if self.t_max <= 0 or self.tol <= 0:
            raise ConfigError("t_max and tol must be positive")
        if self.max_steps < 1 or self.record_stride < 1:
            raise ConfigError("max_steps and record_stride must be positive")
        return self


@dataclass
class FlowRecord:
    t: float
    step: int
    report: FunctionalReport
    sup_speed: float
    r_bar: float
    deviation: float
    i_k: float

    def row(self) -> dict:
        rep = self.report
        n = rep.n
        out = {"t": self.t, "vol": rep.vol}
        out.update({f"v{m}": float(rep.v[m]) for m in range(n + 2)})
        out.update({"i_k": self.i_k, "s_min": rep.s_min, "s_max": rep.s_max,
                    "kappa_min": rep.kappa_min, "kappa_max": rep.kappa_max})
        out.update({f"mink_res_{j}": float(rep.minkowski[j]) for j in range(n)})
        out.update({"umbilicity": rep.umbilicity, "sup_speed": self.sup_speed})
        return out


@dataclass
class FlowResult:
    status: str
    records: list
    field: np.ndarray
    t: float
    steps: int
    message: str = ""
    bad_node: int = -1
    extra: dict = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    @property
    def final(self) -> FlowRecord:
        return self.records[-1]


class _Solver:
    """Shared driver logic; subclasses supply the PDE."""

    parametrization = ""

    def __init__(self, aniso, grid, k: int):
        if aniso.n != grid.n:
            raise ConfigError("anisotropy and grid dimensions differ")
        if grid.axisymmetric and not aniso.is_axisymmetric:
            raise ConfigError("axisymmetric grids need an axisymmetric anisotropy")
        self.aniso, self.grid, self.k = aniso, grid, int(k)
        self.n = grid.n

    # subclass API: evaluate(field) -> (rhs, speed, diffusion, aux)
    def evaluate(self, f, t=0.0):
        raise NotImplementedError

    def report(self, f, aux) -> FunctionalReport:
        raise NotImplementedError

    def shape_stats(self, f, aux) -> tuple[float, float]:
        raise NotImplementedError

    def rhs(self, f):
        return self.evaluate(f)[0]

    polar_filter = True
    well_balanced = False

    def _tendency(self, rhs):
        return self.grid.polar_filter(rhs) if self.polar_filter else rhs

    def time_step(self, diffusion: float, cfl: float) -> float:
        radius = (self.grid.filtered_spectral_radius if self.polar_filter
                  else self.grid.spectral_radius)
        return 2.0 * cfl / (diffusion * radius)

    def step(self, f, t: float, cfl: float = 0.5, first=None):
        """One Heun step; returns ``(new_field, dt, evaluation_at_f)``."""
        ev = self.evaluate(f, t) if first is None else first
        dt = self.time_step(ev[2], cfl)
        k1 = self._tendency(ev[0])
        k2 = self._tendency(self.evaluate(f + dt * k1, t + dt)[0])
        return f + 0.5 * dt * (k1 + k2), dt, ev

    def record(self, f, aux, t, step, speed) -> FlowRecord:
        rep = self.report(f, aux)
        r_bar, dev = self.shape_stats(f, aux)
        return FlowRecord(t=t, step=step, report=rep, sup_speed=speed, r_bar=r_bar,
                          deviation=dev, i_k=rep.isoperimetric(self.k))

    def run(self, f0, config: FlowConfig, callback=None) -> FlowResult:
        """Integrate until ``sup|speed| < tol``, ``t_max`` or ``max_steps``."""
        config.validate(self.n)
        self.polar_filter = bool(config.polar_filter)
        self.well_balanced = bool(config.well_balanced)
        f = check_field(self.grid, f0, name="initial field").copy()
        t, steps, records = 0.0, 0, []
        try:
            ev = self.evaluate(f, t)
            records.append(self.record(f, ev[3], t, 0, ev[1]))
            status = "timeout"
            while True:
                if ev[1] < config.tol:
                    status = "converged"
                    break
                if t >= config.t_max or steps >= config.max_steps:
                    break
                f_new, dt, _ = self.step(f, t, config.cfl, first=ev)
                if dt < config.dt_floor * max(t, 1.0):
                    raise StiffnessError(f"time step {dt:.3e} below floor at t={t:.6g}")
                dt_used = dt
                f, t, steps = f_new, t + dt_used, steps + 1
                ev = self.evaluate(f, t)
                if steps % config.record_stride == 0:
                    records.append(self.record(f, ev[3], t, steps, ev[1]))
                    if callback is not None:
                        callback(records[-1], f)
            if records[-1].step != steps:
                records.append(self.record(f, ev[3], t, steps, ev[1]))
            msg = (f"sup|speed| = {ev[1]:.3e} < tol" if status == "converged"
                   else f"stopped at t = {t:.6g} after {steps} steps, sup|speed| = {ev[1]:.3e}")
            return FlowResult(status, records, f, t, steps, msg)
        except ConvexityLost as exc:
            return FlowResult("convexity_lost", records, f, t, steps,
                              f"convexity lost at t = {t:.6g}: {exc}", bad_node=exc.node,
                              extra={"value": exc.value})
        except StiffnessError as exc:
            return FlowResult("stiff", records, f, t, steps, str(exc))


class RadialSolver(_Solver):
    """Radial-graph parametrization ``X = exp(gamma) x``."""

    parametrization = "radial"

    def __init__(self, aniso, grid, k: int, well_balanced: bool = False):
        super().__init__(aniso, grid, k)
        self.well_balanced = bool(well_balanced)
        self._wulff_residual = None

    def initial_field(self, body) -> np.ndarray:
        return np.log(body.radial(self.grid.x))

    def wulff_residual(self) -> np.ndarray:
        """Discrete speed on the Wulff shape.

        It does not depend on the scale, since shifting ``gamma`` by a
        constant rescales curvatures and ``sigma_F`` exactly.
        """
        if self._wulff_residual is None:
            geom = graph_geometry(self.aniso, self.grid,
                                  np.log(wulff(self.aniso).radial(self.grid.x)))
            self._wulff_residual = 1.0 - psi(geom.kappa, self.k) * geom.sigma_f
        return self._wulff_residual

    def evaluate(self, gamma, t=0.0):
        geom = graph_geometry(self.aniso, self.grid, gamma)
        if not geom.convex:
            raise ConvexityLost(f"kappa = {geom.kappa_floor:.3e} at node {geom.bad_node}",
                                node=geom.bad_node, value=geom.kappa_floor, time=t)
        p = psi(geom.kappa, self.k)
        speed = 1.0 - p * geom.sigma_f
        if self.well_balanced:
            # scaled Wulff shapes become exact steady states
            speed = speed - self.wulff_residual()
        rhs = speed / geom.sigma_f
        return rhs, float(np.max(np.abs(speed))), radial_symbol_bound(geom, self.k), geom

    def report(self, gamma, geom) -> FunctionalReport:
        return report_radial(geom)

    def shape_stats(self, gamma, geom):
        wn = elementary_all(geom.kappa)[..., -1] * geom.mu_f
        r_bar = float(np.sum(geom.sigma_f * wn) / np.sum(wn))
        dev = float(np.sqrt(np.sum((geom.sigma_f - r_bar) ** 2 * wn)))
        return r_bar, dev

    def support_values(self, gamma, geom=None) -> np.ndarray:
        geom = graph_geometry(self.aniso, self.grid, gamma) if geom is None else geom
        return geom.sigma_f

    def surface_points(self, gamma) -> np.ndarray:
        return np.exp(gamma)[..., None] * self.grid.x


class SupportSolver(_Solver):
    """Anisotropic support function on the Wulff chart."""

    parametrization = "support"

    def __init__(self, aniso, grid, k: int, chart=None):
        super().__init__(aniso, grid, k)
        self.chart = build_wulff_chart(aniso, grid) if chart is None else chart
        self._li = inv_lower2(chol2(self.chart.metric))
        self._sin = np.broadcast_to(grid.sin_t, grid.shape)

    def initial_field(self, body) -> np.ndarray:
        return body.anisotropic_support(self.aniso, self.grid.x)

    def evaluate(self, s, t=0.0):
        tau = tau_matrix(self.chart, s)
        if not tau.convex:
            raise ConvexityLost(f"tau = {tau.radius_floor:.3e} at node {tau.bad_node}",
                                node=tau.bad_node, value=tau.radius_floor, time=t)
        phi = phi_dual(tau.radii, self.k)
        rhs = 1.0 - s / phi
        speed = float(np.max(np.abs(rhs)))
        return rhs, speed, self.symbol_bound(s, tau, phi), tau

    def symbol_bound(self, s, tau, phi) -> float:
        """Largest ratio of the principal symbol ``s Phi^-2 Phi'^{kl}`` (raised
        with ``gbar``) to the round symbol that sets the grid's spectral radius."""
        g = self.chart.metric
        coef = (s / phi ** 2)[..., None]
        if self.grid.axisymmetric:
            r_t = tau.tau[..., 0, 0] / g[..., 0, 0]
            r_o = tau.tau[..., 1, 1] / g[..., 1, 1]
            pair = np.stack([r_t, r_o], axis=-1)
            if self.n > 2:
                pair = np.concatenate([pair[..., :1]] + [pair[..., 1:2]] * (self.n - 1), axis=-1)
            c = coef[..., 0] * phi_gradient(pair, self.k)[..., 0]
            return float(np.max(c / g[..., 0, 0]))
        li = self._li
        m = li @ tau.tau @ np.swapaxes(li, -1, -2)
        r, v = np.linalg.eigh(m)
        c = coef * phi_gradient(r, self.k)
        # A^{ij} = sum_l c_l e_l^i e_l^j with e_l = L^{-T} v_l
        e = np.swapaxes(li, -1, -2) @ v
        a = np.einsum("...il,...l,...jl->...ij", e, c, e)
        a[..., 1, :] *= self._sin[..., None]
        a[..., :, 1] *= self._sin[..., None]
        return float(sym2_eig(a)[..., 1].max())

    def report(self, s, tau) -> FunctionalReport:
        return report_support(self.chart, tau, s)

    def shape_stats(self, s, tau):
        r_bar = self.chart.mean(s)
        dev = float(np.sqrt(self.chart.integrate((s - r_bar) ** 2)))
        return r_bar, dev

    def support_values(self, s, tau=None) -> np.ndarray:
        return s

    def surface_points(self, s) -> np.ndarray:
        """Boundary points ``X = h x + grad h`` with ``h = F s``."""
        grid = self.grid
        h = self.aniso.value(grid.x) * s
        g = grid.gradient(h)
        return (h[..., None] * grid.x + g[..., 0, None] * grid.e_theta
                + g[..., 1, None] * grid.e_phi)


def make_solver(aniso, grid, k: int, parametrization: str = "radial", *,
                well_balanced: bool = False):
    """``well_balanced`` applies to the radial solver outside :meth:`run`,
    which takes the setting from its :class:`FlowConfig`."""
    if parametrization == "radial":
        return RadialSolver(aniso, grid, k, well_balanced=well_balanced)
    if parametrization == "support":
        return SupportSolver(aniso, grid, k)
    raise ConfigError(f"unknown parametrization {parametrization!r}")


def rhs_radial(aniso, grid, gamma, k: int) -> np.ndarray:
    """``d gamma / dt`` for the radial parametrization."""
    return RadialSolver(aniso, grid, k).evaluate(np.asarray(gamma, float))[0]


def rhs_support(chart, s, k: int) -> np.ndarray:
    """``d s / dt`` for the support parametrization."""
    solver = SupportSolver(chart.aniso, chart.grid, k, chart=chart)
    return solver.evaluate(np.asarray(s, float))[0]


def run(aniso, grid, body, config: FlowConfig, callback=None) -> FlowResult:
    """Build a solver for ``config`` and integrate from ``body``."""
    solver = make_solver(aniso, grid, config.k, config.parametrization)
    return solver.run(solver.initial_field(body), config, callback)


MONOTONE = {"vol": +1, "v_k": -1, "i_k": -1, "s_max": -1, "s_min": +1}


def monotonicity_violations(records, k: int, slack: float = 1e-8) -> dict:
    """Largest relative violation per monitored quantity (``<= slack`` passes).

    Directions: volume and ``s_min`` non-decreasing; ``V_{n+2-k}``, ``I_k`` and
    ``s_max`` non-increasing.
    """
    if not records:
        return {}
    n = records[0].report.n
    series = {
        "vol": np.array([r.report.vol for r in records]),
        "v_k": np.array([r.report.v[n + 2 - k] for r in records]),
        "i_k": np.array([r.i_k for r in records]),
        "s_max": np.array([r.report.s_max for r in records]),
        "s_min": np.array([r.report.s_min for r in records]),
    }
    out = {}
    for key, vals in series.items():
        if len(vals) < 2:
            out[key] = 0.0
            continue
        inc = np.diff(vals) * MONOTONE[key]
        scale = np.maximum(np.abs(vals[1:]), np.abs(vals[:-1]))
        out[key] = float(max(0.0, np.max(-inc / scale)))
    return out


def with_overrides(config: FlowConfig, **kw) -> FlowConfig:
    return replace(config, **kw)
