"""Run configuration as a flat ``section.key = value`` document.

Every key has one documented default and one constraint.  ``parse_config``
materializes all defaults (including derived ones such as the Galerkin
cutoff and the profile cap scale) so that ``config_to_text`` echoes a
document that re-parses to an equal config.

Value syntax: numbers and bare words as usual; ``true``/``false``; vectors
as comma-separated numbers (``0.5, 0.5``); lists of records separated by
``;`` (polyline vertices ``0.2 0.2; 0.8 0.2; 0.5 0.8``, velocity modes
``kx ky index amplitude; ...``).  ``#`` starts a comment.
"""
import dataclasses
from dataclasses import dataclass, field

from . import spectral
from .constitutive import StressLaw
from .errors import ConfigError
from .phase_init import ProfileParams, Scenario

DEFAULT_K = 32


@dataclass(frozen=True)
class GridConfig:
    d: int = 2
    N: int = 256
    K: int = 0  # 0 selects min(32, floor((N - 1) / 3))


@dataclass(frozen=True)
class PhysicsConfig:
    epsilon: float = 0.02
    gamma: float = 0.25
    kappa1: float = 1.0
    kappa2: float = 1.0
    p: float = 3.0
    a_plus: float = 1.0
    b_plus: float = 1.0
    a_minus: float = 1.0
    b_minus: float = 1.0
    mollifier: str = "interface"
    profile_b: float = 0.0  # 0 selects the scenario reach


@dataclass(frozen=True)
class ScenarioConfig:
    kind: str = "circle"
    center: tuple = ()
    radius: float = 0.25
    center2: tuple = ()
    radius2: float = 0.1
    y0: float = 0.25
    y1: float = 0.75
    vertices: tuple = ()
    u0: str = "shear"
    u0_amplitude: float = 0.1
    u0_wavenumber: int = 1
    u0_modes: tuple = ()


@dataclass(frozen=True)
class SteppingConfig:
    dt_policy: str = "fixed"
    dt: float = 0.0  # 0 selects the stable step of the initial state
    safety: float = 0.5
    dealias: bool = True
    T: float = 0.02


@dataclass(frozen=True)
class DiagnosticsConfig:
    record_interval: int = 10
    radii: tuple = ()  # empty selects 4h * 2^m up to 1/2
    center_stride: int = 4
    brakke_test: str = "const1"
    bump_center: tuple = ()
    bump_width: float = 0.1
    brakke_tol_abs: float = 1e-2
    brakke_tol_rel: float = 0.1


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    snapshot_interval: int = 10  # in records; 0 disables snapshots
    formats: str = "csv,bin"


@dataclass(frozen=True)
class SimConfig:
    grid: GridConfig = field(default_factory=GridConfig)
    physics: PhysicsConfig = field(default_factory=PhysicsConfig)
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    stepping: SteppingConfig = field(default_factory=SteppingConfig)
    diagnostics: DiagnosticsConfig = field(default_factory=DiagnosticsConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    seed: int = 0

    # derived objects
    def grid_spec(self):
        return spectral.GridSpec(self.grid.d, self.grid.N)

    def stress_law(self):
        ph = self.physics
        return StressLaw(ph.p, ph.a_plus, ph.b_plus, ph.a_minus, ph.b_minus)

    def scenario_obj(self):
        s = self.scenario
        return Scenario(kind=s.kind, center=s.center, radius=s.radius,
                        center2=s.center2, radius2=s.radius2, y0=s.y0, y1=s.y1,
                        vertices=s.vertices, u0=s.u0, u0_amplitude=s.u0_amplitude,
                        u0_wavenumber=s.u0_wavenumber, u0_modes=s.u0_modes)

    def profile(self):
        return ProfileParams(self.physics.epsilon, self.physics.profile_b, self.physics.gamma)

    def replace(self, **flat):
        """Copy with flat dotted keys overridden, e.g. ``replace(**{"grid.N": 64})``.

        Derived defaults are re-derived when their inputs change: the cutoff
        when ``grid.N`` changes, the profile cap scale when the scenario does.
        """
        values = config_to_dict(self)
        flat = {key.replace("__", "."): value for key, value in flat.items()}
        values.update(flat)
        if "grid.N" in flat and "grid.K" not in flat:
            values["grid.K"] = 0
        if any(k.startswith("scenario.") for k in flat) and "physics.profile_b" not in flat:
            values["physics.profile_b"] = 0.0
        return build_config(values)


SECTIONS = ("grid", "physics", "scenario", "stepping", "diagnostics", "output")
_VECTORS = {"scenario.center", "scenario.center2", "diagnostics.radii", "diagnostics.bump_center"}


def _schema():
    out = {}
    for sec in SECTIONS:
        cls = SimConfig.__dataclass_fields__[sec].default_factory
        for f in dataclasses.fields(cls):
            out[f"{sec}.{f.name}"] = f
    out["seed"] = SimConfig.__dataclass_fields__["seed"]
    return out


SCHEMA = _schema()


def _parse_scalar(key, text, kind):
    try:
        if kind is bool:
            low = text.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError
            return low in ("true", "1", "yes")
        if kind is int:
            value = float(text)
            if value != int(value):
                raise ValueError
            return int(value)
        if kind is float:
            return float(text)
    except ValueError:
        raise ConfigError(f"{key}: expected {kind.__name__}, got {text!r}") from None
    return text


def _parse_value(key, text, kind):
    text = text.strip()
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        text = text[1:-1]
    if key in _VECTORS:
        if text.lower() in ("", "auto"):
            return ()
        return tuple(_parse_scalar(key, t, float) for t in text.replace(",", " ").split())
    if key == "scenario.vertices":
        return tuple(tuple(_parse_scalar(key, t, float) for t in rec.replace(",", " ").split())
                     for rec in text.split(";") if rec.strip())
    if key == "scenario.u0_modes":
        modes = []
        for rec in text.split(";"):
            parts = rec.replace(",", " ").split()
            if not parts:
                continue
            if len(parts) < 4:
                raise ConfigError(f"{key}: each mode needs 'k1 .. kd index amplitude', got {rec!r}")
            k = tuple(_parse_scalar(key, t, int) for t in parts[:-2])
            modes.append((k, _parse_scalar(key, parts[-2], int), _parse_scalar(key, parts[-1], float)))
        return tuple(modes)
    return _parse_scalar(key, text, kind)


def _format_value(key, value):
    if key == "scenario.vertices":
        return "; ".join(" ".join(repr(float(c)) for c in v) for v in value)
    if key == "scenario.u0_modes":
        return "; ".join(" ".join([*(str(c) for c in k), str(i), repr(float(a))]) for k, i, a in value)
    if isinstance(value, tuple):
        return ", ".join(repr(float(c)) for c in value) if value else "auto"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_text(text):
    """Split a document into ``{key: raw string}``; duplicate keys are errors."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value
    return raw


def parse_config(text):
    raw = parse_text(text)
    values = {key: _parse_value(key, value, SCHEMA[key].type) for key, value in raw.items()}
    return build_config(values)


def config_to_dict(cfg):
    out = {}
    for sec in SECTIONS:
        for f in dataclasses.fields(getattr(cfg, sec)):
            out[f"{sec}.{f.name}"] = getattr(getattr(cfg, sec), f.name)
    out["seed"] = cfg.seed
    return out


def config_to_text(cfg):
    lines = [f"{key} = {_format_value(key, value)}" for key, value in config_to_dict(cfg).items()]
    return "\n".join(lines) + "\n"


def build_config(values):
    """Validate a ``{flat key: value}`` mapping and materialize defaults."""
    for key in values:
        if key not in SCHEMA:
            raise ConfigError(f"unknown key {key!r}")
    sections = {}
    for sec in SECTIONS:
        cls = SimConfig.__dataclass_fields__[sec].default_factory
        kwargs = {k.split(".", 1)[1]: v for k, v in values.items() if k.startswith(sec + ".")}
        try:
            sections[sec] = cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None
    cfg = SimConfig(seed=int(values.get("seed", 0)), **sections)
    return _validate(cfg)


def _validate(cfg):
    g = cfg.grid
    grid = spectral.GridSpec(g.d, g.N)
    K = g.K or min(DEFAULT_K, (g.N - 1) // 3)
    if not 1 <= K <= g.N / 3:
        raise ConfigError(f"grid.K={K}: must satisfy 1 <= K <= N/3")

    ph = cfg.physics
    if ph.epsilon < 2 * grid.h:
        raise ConfigError(f"physics.epsilon={ph.epsilon}: epsilon < 2h (h = 1/{g.N})")
    if ph.epsilon > 1:
        raise ConfigError("physics.epsilon must be <= 1")
    if not 0 < ph.gamma < 0.5:
        raise ConfigError("physics.gamma must lie in (0, 1/2)")
    if ph.kappa1 < 0:
        raise ConfigError("physics.kappa1 must be >= 0")
    if ph.kappa2 <= 0:
        raise ConfigError("physics.kappa2 must be > 0")
    cfg.stress_law().check(g.d)
    spectral.mollifier_kernel(grid, ph.epsilon, ph.gamma, ph.mollifier)

    sc = cfg.scenario
    center = sc.center or (0.5,) * g.d
    center2 = sc.center2 or (0.5,) * g.d
    if sc.kind == "two_circles" and not sc.center2:
        raise ConfigError("scenario.center2 is required for two_circles")
    sc = dataclasses.replace(sc, center=tuple(center), center2=tuple(center2))
    cfg = dataclasses.replace(cfg, scenario=sc)
    scn = cfg.scenario_obj().check(g.d)
    b = cfg.profile().resolved(scn, warn=False).b
    cfg = dataclasses.replace(cfg, grid=dataclasses.replace(g, K=K),
                              physics=dataclasses.replace(ph, profile_b=b))

    st = cfg.stepping
    if st.dt_policy not in ("fixed", "auto"):
        raise ConfigError("stepping.dt_policy must be 'fixed' or 'auto'")
    if st.dt < 0:
        raise ConfigError("stepping.dt must be >= 0")
    if not 0 < st.safety <= 1:
        raise ConfigError("stepping.safety must lie in (0, 1]")
    if st.T < 0:
        raise ConfigError("stepping.T must be >= 0")

    dg = cfg.diagnostics
    if dg.record_interval < 1:
        raise ConfigError("diagnostics.record_interval must be >= 1")
    if dg.center_stride < 1:
        raise ConfigError("diagnostics.center_stride must be >= 1")
    for r in dg.radii:
        if not 2 * grid.h < r <= 0.5:
            raise ConfigError(f"diagnostics.radii: {r} outside (2h, 1/2]")
    if dg.brakke_test not in ("const1", "gaussian_bump"):
        raise ConfigError("diagnostics.brakke_test must be 'const1' or 'gaussian_bump'")
    if dg.bump_center and len(dg.bump_center) != g.d:
        raise ConfigError(f"diagnostics.bump_center needs {g.d} coordinates")
    if dg.bump_width <= 0:
        raise ConfigError("diagnostics.bump_width must be > 0")

    out = cfg.output
    if out.snapshot_interval < 0:
        raise ConfigError("output.snapshot_interval must be >= 0")
    bad = set(f.strip() for f in out.formats.split(",") if f.strip()) - {"csv", "bin"}
    if bad:
        raise ConfigError(f"output.formats: unknown format(s) {sorted(bad)}")
    return cfg


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
