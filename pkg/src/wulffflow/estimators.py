"""scikit-learn style front end.

Estimators take plain hyperparameters (so ``get_params``/``set_params`` and
``clone`` work) and build the anisotropy and grid when fitted.  Samples are
convex bodies, e.g. from :mod:`wulffflow.bodies`.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .anisotropy import Anisotropy
from .bodies import ConvexBody
from .errors import ConfigError, DomainError
from .flow import FlowConfig, make_solver
from .grid import build_sphere_grid
from .harmonics import parse_harmonics


def _as_bodies(X) -> list[ConvexBody]:
    items = [X] if isinstance(X, ConvexBody) else list(X)
    if not items:
        raise DomainError("need at least one body")
    for b in items:
        if not isinstance(b, ConvexBody):
            raise DomainError(f"expected ConvexBody samples, got {type(b).__name__}")
    return items


class _WulffBase(BaseEstimator):
    def __init__(self, family="round", n=2, semi_axes=None, harmonics=None, epsilon=0.0,
                 grid_mode="axisymmetric", n_theta=64, n_phi=None):
        self.family = family
        self.n = n
        self.semi_axes = semi_axes
        self.harmonics = harmonics
        self.epsilon = epsilon
        self.grid_mode = grid_mode
        self.n_theta = n_theta
        self.n_phi = n_phi

    def _build(self):
        if self.family == "round":
            aniso = Anisotropy.round(self.n)
        elif self.family == "ellipsoid":
            if self.semi_axes is None or len(self.semi_axes) != self.n + 1:
                raise ConfigError(f"semi_axes needs {self.n + 1} entries")
            aniso = Anisotropy.ellipsoid(list(self.semi_axes))
        elif self.family == "harmonic":
            aniso = Anisotropy.harmonic(parse_harmonics(self.harmonics), self.epsilon, n=self.n)
        else:
            raise ConfigError(f"unknown family {self.family!r}")
        grid = build_sphere_grid(self.grid_mode, self.n_theta, self.n_phi, n=self.n)
        if grid.axisymmetric and not aniso.is_axisymmetric:
            raise ConfigError("axisymmetric grids need an axisymmetric anisotropy")
        return aniso, grid


class FunctionalTransformer(TransformerMixin, _WulffBase):
    """Map bodies to their anisotropic integral functionals.

    Columns: ``vol``, ``V_0 .. V_{n+1}``, ``I_2 .. I_n``, ``umbilicity``.
    """

    def fit(self, X=None, y=None):
        self.anisotropy_, self.grid_ = self._build()
        self.n_features_out_ = 1 + (self.n + 2) + (self.n - 1) + 1
        return self

    def transform(self, X):
        from .curvature import graph_geometry
        from .functionals import report_radial

        check_is_fitted(self, "grid_")
        rows = []
        for body in _as_bodies(X):
            geom = graph_geometry(self.anisotropy_, self.grid_, np.log(body.radial(self.grid_.x)))
            rep = report_radial(geom)
            rows.append([rep.vol, *rep.v, *(rep.isoperimetric(k) for k in range(2, self.n + 1)),
                         rep.umbilicity])
        return np.asarray(rows)

    def get_feature_names_out(self, input_features=None):
        return np.array(["vol"] + [f"V{m}" for m in range(self.n + 2)]
                        + [f"I{k}" for k in range(2, self.n + 1)] + ["umbilicity"], dtype=object)


class WulffFlowEstimator(_WulffBase):
    """Run the flow from each body; ``predict`` returns the limiting scale ``r_bar``.

    After ``fit``: ``results_`` (one :class:`FlowResult` per body), ``r_bar_``,
    ``decay_rate_`` (NaN when the tail was too short to fit) and ``status_``.
    """

    def __init__(self, family="round", n=2, semi_axes=None, harmonics=None, epsilon=0.0,
                 grid_mode="axisymmetric", n_theta=64, n_phi=None, k=2,
                 parametrization="radial", t_max=50.0, tol=1e-8, cfl=0.5, record_stride=50):
        super().__init__(family, n, semi_axes, harmonics, epsilon, grid_mode, n_theta, n_phi)
        self.k = k
        self.parametrization = parametrization
        self.t_max = t_max
        self.tol = tol
        self.cfl = cfl
        self.record_stride = record_stride

    def _config(self) -> FlowConfig:
        return FlowConfig(k=self.k, parametrization=self.parametrization, t_max=self.t_max,
                          tol=self.tol, cfl=self.cfl, record_stride=self.record_stride
                          ).validate(self.n)

    def _flow(self, bodies):
        import warnings

        from .spectral import fit_decay

        solver = make_solver(self.anisotropy_, self.grid_, self.k, self.parametrization)
        results, rates = [], []
        for body in bodies:
            res = solver.run(solver.initial_field(body), self._config())
            results.append(res)
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", RuntimeWarning)
                    rates.append(fit_decay([r.t for r in res.records],
                                           [r.deviation for r in res.records]).rate)
            except DomainError:
                rates.append(np.nan)
        return results, np.asarray(rates)

    def fit(self, X, y=None):
        self._config()
        self.anisotropy_, self.grid_ = self._build()
        self.results_, self.decay_rate_ = self._flow(_as_bodies(X))
        self.status_ = [r.status for r in self.results_]
        self.r_bar_ = np.array([r.records[-1].r_bar if r.records else np.nan
                                for r in self.results_])
        return self

    def predict(self, X):
        check_is_fitted(self, "results_")
        results, _ = self._flow(_as_bodies(X))
        return np.array([r.records[-1].r_bar if r.records else np.nan for r in results])

    def transform(self, X):
        """Final fields (log radius or support function) stacked per body."""
        check_is_fitted(self, "results_")
        results, _ = self._flow(_as_bodies(X))
        return np.stack([r.field for r in results])


class SpectralGapEstimator(_WulffBase):
    """First nonzero eigenvalue of the linearized operator on the Wulff shape.

    ``predict(r_bar)`` returns the asymptotic decay rates ``lambda_1 / (n r_bar)``.
    """

    def fit(self, X=None, y=None):
        from .chart import build_wulff_chart
        from .spectral import build_operator

        self.anisotropy_, self.grid_ = self._build()
        self.operator_ = build_operator(build_wulff_chart(self.anisotropy_, self.grid_))
        self.lambda1_ = self.operator_.lambda1()
        return self

    def predict(self, X):
        from .spectral import predicted_rate

        check_is_fitted(self, "lambda1_")
        r = np.asarray(X, dtype=float).ravel()
        if np.any(r <= 0):
            raise DomainError("r_bar must be positive")
        return np.array([predicted_rate(self.lambda1_, self.n, v) for v in r])
