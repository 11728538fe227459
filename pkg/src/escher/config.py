"""Run configuration: a flat ``key = value`` text format and its dataclass.

The grammar is one assignment per line, ``#`` comments, blank lines
ignored, sections spelled as dotted keys::

    surface.kind = oscillating_sphere
    mesh.subdivisions = 2
    scheme = fully_implicit
    eps = 0.05
    tau = 1e-4
    T = 0.1
    initial = sphere_eoc

``parse_config(emit_config(cfg))`` reproduces the configuration exactly.
"""

import math
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from .errors import ParseError, ValidationError
from .potentials import make_potential
from .solver import SCHEMES, SchemeConfig
from .surfaces import make_surface, surface_kinds


def sphere_eoc_initial(points):
    """u0(x, y, z) = 0.5 x sin(pi y)."""
    points = np.asarray(points, dtype=float)
    return 0.5 * points[..., 0] * np.sin(np.pi * points[..., 1])


def torus_initial(points):
    """u0(x, y, z) = 0.5 x y sin(10 pi z)."""
    points = np.asarray(points, dtype=float)
    return (0.5 * points[..., 0] * points[..., 1]
            * np.sin(10.0 * np.pi * points[..., 2]))


def _constant_initial(points, value=0.0):
    points = np.asarray(points, dtype=float)
    return np.full(points.shape[:-1], value)


INITIAL_DATA = ("sphere_eoc", "torus", "constant")


@dataclass
class RunConfig:
    """Everything one run needs, in plain fields."""

    surface_kind: str = "oscillating_sphere"
    surface_params: dict = field(default_factory=dict)
    subdivisions: int = 2          # icosphere meshes
    n_major: int = 48              # torus meshes
    n_minor: int = 16
    eps: float = 0.05
    theta: float = 1.0
    potential: str = "quartic"
    tau: float = 1e-4
    t_end: float = 0.1
    scheme: str = "fully_implicit"
    initial: str = "sphere_eoc"
    initial_value: float = 0.0
    newton_tol: float = 1e-11
    newton_max_iter: int = 25
    linear_solver: str = "auto"
    output_dir: str = "out"
    snapshot_every: int = 0
    seed: int = 0                  # reserved

    def build_surface(self):
        return make_surface(self.surface_kind, **self.surface_params)

    def build_mesh(self, surface=None, t0=0.0):
        from .meshing import build_icosphere, build_torus_mesh

        surface = surface or self.build_surface()
        if surface.family == "sphere":
            return build_icosphere(surface, self.subdivisions, t0)
        return build_torus_mesh(surface, self.n_major, self.n_minor, t0)

    def build_potential(self):
        return make_potential(self.potential, theta=self.theta)

    def scheme_config(self):
        return SchemeConfig(
            eps=self.eps,
            tau=self.tau,
            t_end=self.t_end,
            scheme=self.scheme,
            newton_tol=self.newton_tol,
            newton_max_iter=self.newton_max_iter,
            linear_solver=self.linear_solver,
        )

    def initial_function(self):
        if self.initial == "sphere_eoc":
            return sphere_eoc_initial
        if self.initial == "torus":
            return torus_initial
        return partial(_constant_initial, value=self.initial_value)


_POSITIVE_FIELDS = ("eps", "tau")


def validate_config(cfg):
    """Reject inconsistent configurations; returns the config unchanged."""
    if cfg.surface_kind not in surface_kinds():
        raise ValidationError("surface.kind",
                              f"expected one of {surface_kinds()}")
    for name in _POSITIVE_FIELDS:
        value = getattr(cfg, name)
        if not math.isfinite(value) or value <= 0.0:
            raise ValidationError(name, "must be finite and positive")
    if not math.isfinite(cfg.t_end) or cfg.t_end < 0.0:
        raise ValidationError("T", "must be finite and nonnegative")
    if cfg.tau > cfg.t_end > 0.0:
        raise ValidationError("tau", "timestep exceeds final time")
    if cfg.t_end > 0.0:
        steps = round(cfg.t_end / cfg.tau)
        if steps < 1 or abs(steps * cfg.tau - cfg.t_end) > 1e-8 * cfg.t_end:
            raise ValidationError("tau", "must divide T into whole steps")
    if cfg.scheme not in SCHEMES:
        raise ValidationError("scheme", f"expected one of {SCHEMES}")
    if cfg.initial not in INITIAL_DATA:
        raise ValidationError("initial", f"expected one of {INITIAL_DATA}")
    if cfg.subdivisions < 0:
        raise ValidationError("mesh.subdivisions", "must be >= 0")
    if cfg.n_major < 3 or cfg.n_minor < 3:
        raise ValidationError("mesh.n_major", "torus grid needs >= 3 each way")
    if cfg.theta < 0.0:
        raise ValidationError("theta", "must be nonnegative")
    if cfg.newton_tol <= 0.0:
        raise ValidationError("newton.tol", "must be positive")
    if cfg.newton_max_iter < 1:
        raise ValidationError("newton.max_iter", "must be >= 1")
    if cfg.linear_solver not in ("auto", "lu", "reuse-lu", "bicgstab"):
        raise ValidationError("linear_solver", "expected auto, lu, reuse-lu or bicgstab")
    if cfg.snapshot_every < 0:
        raise ValidationError("output.snapshot_every", "must be >= 0")
    try:
        cfg.build_surface()
    except (TypeError, ValueError) as exc:
        raise ValidationError("surface", str(exc)) from exc
    try:
        cfg.build_potential()
    except ValueError as exc:
        raise ValidationError("potential", str(exc)) from exc
    return cfg


# config key <-> (attribute, converter)
_KEYS = {
    "surface.kind": ("surface_kind", str),
    "mesh.subdivisions": ("subdivisions", int),
    "mesh.n_major": ("n_major", int),
    "mesh.n_minor": ("n_minor", int),
    "eps": ("eps", float),
    "theta": ("theta", float),
    "potential": ("potential", str),
    "tau": ("tau", float),
    "T": ("t_end", float),
    "scheme": ("scheme", str),
    "initial": ("initial", str),
    "initial.value": ("initial_value", float),
    "newton.tol": ("newton_tol", float),
    "newton.max_iter": ("newton_max_iter", int),
    "linear_solver": ("linear_solver", str),
    "output.dir": ("output_dir", str),
    "output.snapshot_every": ("snapshot_every", int),
    "seed": ("seed", int),
}


def parse_config(text):
    """Parse the flat key-value format into a validated RunConfig."""
    cfg = RunConfig()
    surface_params = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {line!r}", lineno)
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not key or not value:
            raise ParseError("empty key or value", lineno)
        if key.startswith("surface.") and key != "surface.kind":
            try:
                surface_params[key.removeprefix("surface.")] = float(value)
            except ValueError:
                raise ParseError(f"bad number {value!r}", lineno) from None
            continue
        if key not in _KEYS:
            raise ParseError(f"unknown key {key!r}", lineno)
        attr, conv = _KEYS[key]
        try:
            setattr(cfg, attr, conv(value))
        except ValueError:
            raise ParseError(
                f"bad {conv.__name__} value {value!r} for {key}", lineno
            ) from None
    cfg.surface_params = surface_params
    return validate_config(cfg)


def emit_config(cfg):
    """Serialise a RunConfig; the inverse of parse_config on all fields."""
    lines = [f"{key} = {getattr(cfg, attr)}" for key, (attr, _) in _KEYS.items()]
    for name, value in sorted(cfg.surface_params.items()):
        lines.append(f"surface.{name} = {value}")
    return "\n".join(lines) + "\n"


def load_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())
