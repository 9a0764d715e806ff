"""Run configuration: INI files with strict keys, plus named presets.

The material constants are illustrative; every run declares them
explicitly (defaults ``a = b = c = 1``, giving ``s* = 1.5``).
"""

from __future__ import annotations

import configparser
import math
from dataclasses import asdict, dataclass, field

from .errors import ConfigError, DomainError
from .fields import OUTER_CONDITIONS, ExteriorGrid
from .harmonic import INITIALISATIONS
from .io import parse_float
from .qtensor import MaterialParams
from .solver import MODES, StepSchedule

STUDY_KINDS = ("decay", "rate", "exchange")
FORMATS = ("csv", "json")

SCHEMA = {
    "material": ("a", "b", "c"),
    "regime": ("L", "W", "w"),
    "grid": ("r_out", "n_s", "n_phi", "outer"),
    "solver": ("tol", "max_iters", "mode", "init", "psi_init", "multi_start", "far_field"),
    "outputs": ("directory", "formats"),
    "study": ("kind", "Ls", "r_max", "n_radii", "r_min", "source"),
    "ring": ("w_values",),
}

DEFAULTS = {
    "material": {"a": "1", "b": "1", "c": "1"},
    "regime": {"L": "100", "w": "5"},
    "grid": {"r_out": "20", "n_s": "128", "n_phi": "96", "outer": "dirichlet"},
    "solver": {
        "tol": "1e-8",
        "max_iters": "400",
        "mode": "newton",
        "init": "q0",
        "psi_init": "boundary-decay",
        "multi_start": "false",
        "far_field": "0",
    },
    "outputs": {"directory": "", "formats": "csv,json"},
    "study": {"kind": "rate", "Ls": "25,100,400", "r_max": "3", "n_radii": "20", "r_min": "2", "source": "q0"},
    "ring": {"w_values": "1,1.7320508075688772,3,inf"},
}

PRESETS = {
    "default": {},
    "small-particle": {"regime": {"L": "400", "w": "5"}, "grid": {"outer": "asymptotic"}},
    "rate": {"regime": {"w": "5"}, "grid": {"outer": "asymptotic"}, "study": {"kind": "rate", "Ls": "25,100,400"}},
    "decay": {"regime": {"L": "100", "w": "5"}, "grid": {"outer": "asymptotic"}, "study": {"kind": "decay"}},
    "exchange": {"regime": {"w": "inf"}, "study": {"kind": "exchange", "source": "q0", "r_max": "3"}},
    "harmonic": {"grid": {"r_out": "20", "n_s": "256", "n_phi": "192"}, "solver": {"multi_start": "true"}},
}


@dataclass(frozen=True)
class RunConfig:
    """Validated settings for one CLI command."""

    a: float = 1.0
    b: float = 1.0
    c: float = 1.0
    L: float = 100.0
    W: float = 500.0
    w: float = 5.0
    r_out: float = 20.0
    n_s: int = 128
    n_phi: int = 96
    outer: str = "dirichlet"
    tol: float = 1e-8
    max_iters: int = 400
    mode: str = "newton"
    init: str = "q0"
    psi_init: str = "boundary-decay"
    multi_start: bool = False
    far_field: float = 0.0
    directory: str = ""
    formats: tuple = FORMATS
    study_kind: str = "rate"
    Ls: tuple = (25.0, 100.0, 400.0)
    r_max: float = 3.0
    n_radii: int = 20
    r_min: float = 2.0
    source: str = "q0"
    w_values: tuple = field(default_factory=tuple)

    @property
    def material(self) -> MaterialParams:
        return MaterialParams(self.a, self.b, self.c, L=self.L, W=self.W)

    @property
    def grid(self) -> ExteriorGrid:
        return ExteriorGrid(self.r_out, self.n_s, self.n_phi, self.outer)

    @property
    def schedule(self) -> StepSchedule:
        return StepSchedule(tol=self.tol, max_iters=self.max_iters, mode=self.mode)

    def echo(self) -> dict:
        d = asdict(self)
        d["formats"] = list(self.formats)
        d["Ls"] = list(self.Ls)
        d["w_values"] = list(self.w_values)
        return d


def _float_list(text: str, key: str) -> tuple:
    parts = [t for t in text.replace(";", ",").split(",") if t.strip()]
    try:
        return tuple(parse_float(t) for t in parts)
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse {text!r} as a list of numbers") from exc


def _num(sections, sec, key, kind=float):
    raw = sections[sec][key]
    try:
        if kind is int:
            v = float(raw)
            if v != int(v):
                raise ValueError
            return int(v)
        return parse_float(raw)
    except ValueError as exc:
        raise ConfigError(f"[{sec}] {key}: expected {kind.__name__}, got {raw!r}") from exc


def _bool(raw: str, key: str) -> bool:
    t = raw.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {raw!r}")


def _merge(base: dict, overlay: dict, origin: str) -> None:
    for sec, items in overlay.items():
        if sec not in SCHEMA:
            raise ConfigError(f"{origin}: unknown section [{sec}]")
        for key, val in items.items():
            if key not in SCHEMA[sec]:
                raise ConfigError(f"{origin}: unknown key {key!r} in [{sec}]")
            base.setdefault(sec, {})[key] = val


def read_ini(path) -> dict:
    """Parse an INI file into ``{section: {key: text}}`` (keys are case-sensitive)."""
    parser = configparser.ConfigParser(interpolation=None, default_section="__none__")
    parser.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return {sec: dict(parser.items(sec)) for sec in parser.sections()}


def load_config(path=None, preset: str | None = None, overrides: dict | None = None) -> RunConfig:
    """Defaults, then the preset, then the file, then ``overrides``; everything is validated."""
    sections = {sec: dict(items) for sec, items in DEFAULTS.items()}
    if preset is not None and preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r}; choose from {', '.join(PRESETS)}")
    layers = [
        (f"preset {preset}", PRESETS.get(preset) if preset else None),
        (str(path), read_ini(path) if path else None),
        ("overrides", overrides),
    ]
    use_W = False
    for origin, layer in layers:
        if not layer:
            continue
        regime = layer.get("regime", {})
        if "W" in regime and "w" in regime:
            raise ConfigError(f"{origin}: [regime] give either W or w, not both")
        _merge(sections, layer, origin)
        # the last layer naming W or w decides which one is used
        if "W" in regime:
            use_W = True
        elif "w" in regime:
            use_W = False
    return _build(sections, {"W": True} if use_W else {})


def _build(s: dict, regime: dict) -> RunConfig:
    a, b, c = (_num(s, "material", k) for k in ("a", "b", "c"))
    L = _num(s, "regime", "L")
    if "W" in regime:
        W = _num(s, "regime", "W")
        w = W / L if L > 0 else math.nan
    else:
        w = _num(s, "regime", "w")
        W = math.inf if math.isinf(w) else w * L
    outer = s["grid"]["outer"].strip()
    mode = s["solver"]["mode"].strip()
    init = s["solver"]["init"].strip()
    psi_init = s["solver"]["psi_init"].strip()
    kind = s["study"]["kind"].strip()
    source = s["study"]["source"].strip()
    formats = tuple(f.strip() for f in s["outputs"]["formats"].split(",") if f.strip())
    far = _num(s, "solver", "far_field")
    checks = [
        (outer in OUTER_CONDITIONS, f"[grid] outer must be one of {OUTER_CONDITIONS}"),
        (mode in MODES, f"[solver] mode must be one of {MODES}"),
        (init in ("q0", "uniform"), "[solver] init must be q0 or uniform"),
        (psi_init in INITIALISATIONS, f"[solver] psi_init must be one of {INITIALISATIONS}"),
        (kind in STUDY_KINDS, f"[study] kind must be one of {STUDY_KINDS}"),
        (source in ("q0", "ldg"), "[study] source must be q0 or ldg"),
        (bool(formats) and all(f in FORMATS for f in formats), f"[outputs] formats must be from {FORMATS}"),
        (far in (0.0, math.pi), "[solver] far_field must be 0 or pi (3.141592653589793)"),
    ]
    for ok, msg in checks:
        if not ok:
            raise ConfigError(msg)
    cfg = RunConfig(
        a=a,
        b=b,
        c=c,
        L=L,
        W=W,
        w=w,
        r_out=_num(s, "grid", "r_out"),
        n_s=_num(s, "grid", "n_s", int),
        n_phi=_num(s, "grid", "n_phi", int),
        outer=outer,
        tol=_num(s, "solver", "tol"),
        max_iters=_num(s, "solver", "max_iters", int),
        mode=mode,
        init=init,
        psi_init=psi_init,
        multi_start=_bool(s["solver"]["multi_start"], "[solver] multi_start"),
        far_field=far,
        directory=s["outputs"]["directory"].strip(),
        formats=formats,
        study_kind=kind,
        Ls=_float_list(s["study"]["Ls"], "[study] Ls"),
        r_max=_num(s, "study", "r_max"),
        n_radii=_num(s, "study", "n_radii", int),
        r_min=_num(s, "study", "r_min"),
        source=source,
        w_values=_float_list(s["ring"]["w_values"], "[ring] w_values"),
    )
    # re-validate the physics before anything is allocated
    try:
        cfg.material
        cfg.grid
        cfg.schedule
    except (DomainError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    if "W" not in regime and not w > 0.0:
        raise ConfigError(f"[regime] anchoring ratio must be positive, got {w}")
    return cfg

