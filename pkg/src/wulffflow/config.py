"""Run configuration: a flat ``section.key = value`` text format.

Example::

    n = 2
    seed = 7
    anisotropy.family = ellipsoid
    anisotropy.semi_axes = 2, 1, 1
    grid.mode = axisymmetric
    grid.n_theta = 64
    body.kind = harmonic_radial
    body.harmonics = 1:0:1, 2:0:0.25
    body.epsilon = 0.3
    flow.k = 2
    flow.t_max = 40

Blank lines and ``#`` comments are ignored.  Lists are comma separated;
harmonic terms read ``l:m:coefficient``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .flow import PARAMETRIZATIONS, FlowConfig
from .harmonics import parse_harmonics

BODY_KINDS = ("wulff", "sphere", "ellipsoid", "harmonic_radial", "harmonic_support", "random")
FAMILIES = ("round", "ellipsoid", "harmonic")


@dataclass
class AnisotropySpec:
    family: str = "round"
    semi_axes: object = None
    harmonics: str = ""
    epsilon: float = 0.0
    derivative_mode: str = "closed_form"


@dataclass
class GridSpec:
    mode: str = "full"
    n_theta: int = 64
    n_phi: object = None
    order: int = 4


@dataclass
class BodySpec:
    kind: str = "wulff"
    radius: float = 1.0
    semi_axes: object = None
    center: object = None
    harmonics: str = ""
    epsilon: float = 0.0
    random_kind: str = ""


@dataclass
class OutputSpec:
    dir: str = "out"
    snapshot_stride: int = 0


@dataclass
class AFSpec:
    count: int = 20
    tolerance: float = 1e-6
    kind: str = ""


@dataclass
class OracleSpec:
    samples: int = 2_000_000
    directions: int = 2000
    eps_factor: float = 1.0
    rel_tol: float = 0.02
    sigmas: float = 3.0


@dataclass
class SpectrumSpec:
    r_bar: float = 1.0
    count: int = 6


@dataclass
class RunConfig:
    n: int = 2
    seed: int = 0
    anisotropy: AnisotropySpec = field(default_factory=AnisotropySpec)
    grid: GridSpec = field(default_factory=GridSpec)
    body: BodySpec = field(default_factory=BodySpec)
    flow: FlowConfig = field(default_factory=FlowConfig)
    output: OutputSpec = field(default_factory=OutputSpec)
    af: AFSpec = field(default_factory=AFSpec)
    oracle: OracleSpec = field(default_factory=OracleSpec)
    spectrum: SpectrumSpec = field(default_factory=SpectrumSpec)

    # cross-field checks; nothing is computed here
    def validate(self) -> "RunConfig":
        n = self.n
        if not isinstance(n, int) or n < 2:
            raise ConfigError("n must be an integer >= 2")
        a, g, b = self.anisotropy, self.grid, self.body
        if a.family not in FAMILIES:
            raise ConfigError(f"anisotropy.family must be one of {FAMILIES}")
        if a.family == "ellipsoid":
            axes = _floats(a.semi_axes, "anisotropy.semi_axes")
            if len(axes) != n + 1:
                raise ConfigError(f"anisotropy.semi_axes needs {n + 1} entries")
        if a.family == "harmonic" and not parse_harmonics(a.harmonics):
            raise ConfigError("harmonic anisotropy needs anisotropy.harmonics")
        if g.mode not in ("full", "axisymmetric"):
            raise ConfigError("grid.mode must be 'full' or 'axisymmetric'")
        if g.mode == "full" and n != 2:
            raise ConfigError("full grids exist only for n = 2; use grid.mode = axisymmetric")
        if g.order not in (2, 4):
            raise ConfigError("grid.order must be 2 or 4")
        if b.kind not in BODY_KINDS:
            raise ConfigError(f"body.kind must be one of {BODY_KINDS}")
        if b.radius <= 0:
            raise ConfigError("body.radius must be positive")
        if b.kind == "ellipsoid" and len(_floats(b.semi_axes, "body.semi_axes")) != n + 1:
            raise ConfigError(f"body.semi_axes needs {n + 1} entries")
        if b.center is not None and len(_floats(b.center, "body.center")) != n + 1:
            raise ConfigError(f"body.center needs {n + 1} entries")
        if self.flow.parametrization not in PARAMETRIZATIONS:
            raise ConfigError(f"flow.parametrization must be one of {PARAMETRIZATIONS}")
        self.flow.validate(n)
        if g.mode == "axisymmetric":
            if not anisotropy_is_axisymmetric(a):
                raise ConfigError("axisymmetric grids need an axisymmetric anisotropy")
            if not body_is_axisymmetric(b):
                raise ConfigError("axisymmetric grids need an axisymmetric initial body")
        stride = self.output.snapshot_stride
        if stride < 0 or (stride and stride % self.flow.record_stride):
            raise ConfigError("output.snapshot_stride must be 0 or a multiple of flow.record_stride")
        if self.af.count < 1 or self.oracle.samples < 1 or self.spectrum.r_bar <= 0:
            raise ConfigError("af.count, oracle.samples and spectrum.r_bar must be positive")
        return self

    def with_seed(self, seed: int) -> "RunConfig":
        return replace(self, seed=int(seed))


def _floats(value, name: str) -> list[float]:
    if value is None:
        raise ConfigError(f"{name} is required")
    vals = value if isinstance(value, (list, tuple)) else [value]
    try:
        return [float(v) for v in vals]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must be a list of numbers") from exc


def anisotropy_is_axisymmetric(spec: AnisotropySpec) -> bool:
    if spec.family == "round":
        return True
    if spec.family == "ellipsoid":
        axes = _floats(spec.semi_axes, "anisotropy.semi_axes")
        return bool(np.allclose(axes[1:], axes[1]))
    return all(m == 0 for (_, m) in parse_harmonics(spec.harmonics))


def body_is_axisymmetric(spec: BodySpec) -> bool:
    if spec.center is not None and not np.allclose(_floats(spec.center, "body.center")[1:], 0.0):
        return False
    if spec.kind == "ellipsoid":
        axes = _floats(spec.semi_axes, "body.semi_axes")
        return bool(np.allclose(axes[1:], axes[1]))
    if spec.kind.startswith("harmonic"):
        terms = parse_harmonics(spec.harmonics)
        return all(m == 0 for (_, m) in terms)
    return True


def _literal(text: str):
    text = text.strip()
    low = text.lower()
    if low in ("none", "null", ""):
        return None
    if low in ("true", "false"):
        return low == "true"
    if ":" not in text and "," in text:
        return [_literal(p) for p in text.split(",")]
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def _coerce(default, value, key: str):
    if value is None or default is None:
        return value
    try:
        if isinstance(default, bool):
            return bool(value)
        if isinstance(default, int):
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value)
        if isinstance(default, float):
            return float(value)
        if isinstance(default, str):
            if isinstance(value, list):
                return ", ".join(str(v) for v in value)
            return str(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: cannot interpret {value!r}") from exc
    return value


def parse_config(text: str) -> RunConfig:
    """Parse config text into a validated :class:`RunConfig`."""
    cfg = RunConfig()
    sections = {f.name: getattr(cfg, f.name) for f in fields(cfg)
                if not isinstance(getattr(cfg, f.name), (int, float))}
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (p.strip() for p in line.split("=", 1))
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        seen.add(key)
        value = _literal(value)
        if "." not in key:
            if key not in ("n", "seed"):
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            setattr(cfg, key, _coerce(0, value, key))
            continue
        section, name = key.split(".", 1)
        target = sections.get(section)
        if target is None or name not in {f.name for f in fields(target)}:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        setattr(target, name, _coerce(getattr(target, name), value, key))
    return cfg.validate()


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def build_anisotropy(cfg: RunConfig):
    from .anisotropy import Anisotropy

    a = cfg.anisotropy
    kw = {"derivative_mode": a.derivative_mode}
    if a.family == "round":
        return Anisotropy.round(cfg.n, **kw)
    if a.family == "ellipsoid":
        return Anisotropy.ellipsoid(_floats(a.semi_axes, "anisotropy.semi_axes"), **kw)
    return Anisotropy.harmonic(parse_harmonics(a.harmonics), a.epsilon, n=cfg.n, **kw)


def build_grid(cfg: RunConfig):
    from .grid import build_sphere_grid

    g = cfg.grid
    return build_sphere_grid(g.mode, g.n_theta, g.n_phi, n=cfg.n, order=g.order)


def build_body(cfg: RunConfig, aniso):
    from . import bodies

    b, n = cfg.body, cfg.n
    center = None if b.center is None else _floats(b.center, "body.center")
    if b.kind == "wulff":
        return bodies.wulff(aniso, b.radius, center)
    if b.kind == "sphere":
        return bodies.sphere(n, b.radius, center)
    if b.kind == "ellipsoid":
        return bodies.ellipsoid(_floats(b.semi_axes, "body.semi_axes"), center)
    rng = np.random.default_rng(cfg.seed)
    if b.kind == "random":
        return bodies.random_body(rng, n, b.random_kind or None,
                                  axisymmetric=cfg.grid.mode == "axisymmetric")
    terms = parse_harmonics(b.harmonics)
    if not terms:
        terms = _random_terms(rng, n, cfg.grid.mode == "axisymmetric")
    maker = bodies.harmonic_radial if b.kind == "harmonic_radial" else bodies.harmonic_support
    return maker(n, b.radius, terms, b.epsilon)


def _random_terms(rng, n: int, axisymmetric: bool) -> dict:
    terms = {}
    for l in (1, 2, 3):
        for m in ([0] if axisymmetric or n > 2 else range(-l, l + 1)):
            terms[(l, m)] = float(rng.normal())
    norm = np.sqrt(sum(c * c for c in terms.values()))
    return {key: c / norm for key, c in terms.items()}
