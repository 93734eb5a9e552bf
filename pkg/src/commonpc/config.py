"""Experiment configuration (TOML) and its validation.

The schema is documented in ``docs/config-schema.md``.  Projection and
marginal coordinate indices are 1-based in the file, as in the model.
"""

from __future__ import annotations

import enum
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import CommonPCError, ConfigError
from .model import HarmonicParams, QuarticChainParams, SystemSpec
from .sampler import SamplerConfig, Target


class Mode(str, enum.Enum):
    COMMON_AXES = "common_axes"
    INDIVIDUAL_PCA = "individual_pca"
    CANONICAL_BASELINE = "canonical_baseline"


@dataclass
class GridSettings:
    bins: tuple[int, ...] = (60, 60)
    padding: float = 0.1
    lo: tuple[float, ...] | None = None
    hi: tuple[float, ...] | None = None


@dataclass
class MarginalSettings:
    enabled: bool = True
    coords: tuple[int, int] = (1, 2)
    bins: tuple[int, int] = (60, 60)
    quad_points_per_dim: int = 401


@dataclass
class ExperimentConfig:
    systems: list[tuple[SystemSpec, SamplerConfig]]
    l: int = 2
    fractions: tuple[float, ...] | None = None
    grid: GridSettings = field(default_factory=GridSettings)
    marginal: MarginalSettings = field(default_factory=MarginalSettings)
    mode: Mode = Mode.COMMON_AXES
    output_dir: Path = Path("out")
    center_pc_scores: bool = True
    workers: int = 1
    tune: bool = True
    target_acceptance: float = 0.35
    figures: bool = False

    @property
    def m(self) -> int:
        return self.systems[0][0].m


# key -> (expected type(s), type name for messages)
_NUM = ((int, float), "number")
_INT = (int, "integer")
_BOOL = (bool, "boolean")
_STR = (str, "string")
_NUMS = ("list[number]", "list of numbers")
_INTS = ("list[int]", "list of integers")

_EXPERIMENT_KEYS = {
    "mode": _STR,
    "l": _INT,
    "fractions": _NUMS,
    "output_dir": _STR,
    "center_pc_scores": _BOOL,
    "workers": _INT,
    "tune": _BOOL,
    "target_acceptance": _NUM,
    "figures": _BOOL,
}
_GRID_KEYS = {"bins": _INTS, "padding": _NUM, "lo": _NUMS, "hi": _NUMS}
_MARGINAL_KEYS = {"enabled": _BOOL, "coords": _INTS, "bins": _INTS, "quad_points_per_dim": _INT}
_SYSTEM_KEYS = {
    "label": _STR,
    "n": _INT,
    "beta_target": _NUM,
    "beta_lo": _NUM,
    "beta_hi": _NUM,
    "projection": _INTS,
    "potential": (dict, "table"),
    "sampler": (dict, "table"),
}
_POTENTIAL_KEYS = {
    "kind": _STR,
    "b": _NUMS,
    "d": _NUMS,
    "k": _NUM,
    "amplitude": _NUM,
    "omega": _NUMS,
}
_SAMPLER_KEYS = {
    "n_steps": _INT,
    "burn_in": _INT,
    "thin": _INT,
    "step_size_x": _NUM,
    "step_size_p": _NUM,
    "seed": _INT,
    "target": _STR,
    "x_scales": _NUMS,
    "x0": _NUMS,
}


def _check_value(path: str, value, kind):
    expected, name = kind
    if expected in ("list[number]", "list[int]"):
        item = int if expected == "list[int]" else (int, float)
        ok = isinstance(value, list) and all(
            isinstance(v, item) and not isinstance(v, bool) for v in value
        )
    elif expected is bool:
        ok = isinstance(value, bool)
    else:
        ok = isinstance(value, expected) and not isinstance(value, bool)
    if not ok:
        raise ConfigError(f"{path}: expected {name}, got {value!r}")
    return value


def _table(doc: dict, path: str, schema: dict) -> dict:
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: expected table")
    for key, value in doc.items():
        if key not in schema:
            raise ConfigError(f"{path}.{key}: unknown key")
        _check_value(f"{path}.{key}", value, schema[key])
    return doc


def _require(table: dict, path: str, key: str):
    if key not in table:
        raise ConfigError(f"{path}.{key}: required key missing")
    return table[key]


def _potential(doc: dict, path: str):
    _table(doc, path, _POTENTIAL_KEYS)
    kind = doc.get("kind", "quartic_chain")
    if kind == "quartic_chain":
        for bad in ("omega",):
            if bad in doc:
                raise ConfigError(f"{path}.{bad}: not valid for kind quartic_chain")
        return QuarticChainParams(
            b=_require(doc, path, "b"),
            d=_require(doc, path, "d"),
            k=float(doc.get("k", 0.0)),
            amplitude=float(doc.get("amplitude", 10.0)),
        )
    if kind == "harmonic":
        for bad in ("b", "d", "k", "amplitude"):
            if bad in doc:
                raise ConfigError(f"{path}.{bad}: not valid for kind harmonic")
        return HarmonicParams(omega=_require(doc, path, "omega"))
    raise ConfigError(f"{path}.kind: expected 'quartic_chain' or 'harmonic', got {kind!r}")


def _system(doc: dict, path: str) -> tuple[SystemSpec, SamplerConfig]:
    _table(doc, path, _SYSTEM_KEYS)
    label = _require(doc, path, "label")
    if not label or any(ch.isspace() for ch in label):
        raise ConfigError(f"{path}.label: must be non-empty without whitespace")
    n = _require(doc, path, "n")
    potential = _potential(_require(doc, path, "potential"), f"{path}.potential")
    projection = doc.get("projection", list(range(1, n + 1)))
    for k in projection:
        if not 1 <= k <= n:
            raise ConfigError(f"{path}.projection: index {k} outside [1, {n}]")
    beta_target = float(_require(doc, path, "beta_target"))
    try:
        spec = SystemSpec(
            n=n,
            potential=potential,
            beta_target=beta_target,
            beta_lo=float(doc.get("beta_lo", beta_target)),
            beta_hi=float(doc.get("beta_hi", beta_target)),
            projection=tuple(projection),
            label=label,
        )
    except CommonPCError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    sdoc = _table(doc.get("sampler", {}), f"{path}.sampler", _SAMPLER_KEYS)
    kwargs = dict(sdoc)
    if "target" in kwargs:
        try:
            kwargs["target"] = Target(kwargs["target"].upper())
        except ValueError:
            raise ConfigError(
                f"{path}.sampler.target: expected 'delocalized' or 'canonical', got {sdoc['target']!r}"
            ) from None
    for key in ("x_scales", "x0"):
        if key in kwargs:
            kwargs[key] = tuple(kwargs[key])
    try:
        scfg = SamplerConfig(**kwargs)
    except CommonPCError as exc:
        raise ConfigError(f"{path}.sampler: {exc}") from exc
    return spec, scfg


def parse_config(text: str) -> ExperimentConfig:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    for key in doc:
        if key not in ("experiment", "grid", "marginal", "system"):
            raise ConfigError(f"{key}: unknown key")
    exp = _table(doc.get("experiment", {}), "experiment", _EXPERIMENT_KEYS)
    grid_doc = _table(doc.get("grid", {}), "grid", _GRID_KEYS)
    marg_doc = _table(doc.get("marginal", {}), "marginal", _MARGINAL_KEYS)
    sys_docs = doc.get("system", [])
    if not isinstance(sys_docs, list) or not sys_docs:
        raise ConfigError("system: expected at least one [[system]] table")
    systems = [_system(s, f"system[{i}]") for i, s in enumerate(sys_docs)]

    labels = [s.label for s, _ in systems]
    if len(set(labels)) != len(labels):
        raise ConfigError("system.label: labels must be unique")
    ms = {s.m for s, _ in systems}
    if len(ms) != 1:
        raise ConfigError(f"system.projection: all systems must share m, got {sorted(ms)}")
    m = ms.pop()

    try:
        mode = Mode(exp.get("mode", "common_axes").lower())
    except ValueError:
        raise ConfigError(
            "experiment.mode: expected one of " + ", ".join(x.value for x in Mode)
        ) from None
    l = exp.get("l", 2)
    if not 1 <= l <= m:
        raise ConfigError(f"experiment.l: must lie in [1, {m}], got {l}")
    fractions = exp.get("fractions")
    if fractions is not None:
        if len(fractions) != len(systems):
            raise ConfigError(f"experiment.fractions: expected {len(systems)} entries")
        if any(f <= 0 for f in fractions):
            raise ConfigError("experiment.fractions: fractions must be positive")
        if abs(sum(fractions) - 1.0) > 1e-12:
            raise ConfigError("experiment.fractions: fractions must sum to 1")
        fractions = tuple(float(f) for f in fractions)
    target_acceptance = float(exp.get("target_acceptance", 0.35))
    if not 0 < target_acceptance < 1:
        raise ConfigError("experiment.target_acceptance: must lie in (0, 1)")
    workers = exp.get("workers", 1)
    if workers < 1:
        raise ConfigError("experiment.workers: must be >= 1")

    grid = GridSettings(
        bins=tuple(grid_doc.get("bins", [60] * l)),
        padding=float(grid_doc.get("padding", 0.1)),
        lo=tuple(grid_doc["lo"]) if "lo" in grid_doc else None,
        hi=tuple(grid_doc["hi"]) if "hi" in grid_doc else None,
    )
    if len(grid.bins) != l or any(b < 1 for b in grid.bins):
        raise ConfigError(f"grid.bins: expected {l} positive integers")
    if (grid.lo is None) != (grid.hi is None):
        raise ConfigError("grid.lo/grid.hi: give both or neither")
    if grid.lo is not None and not (len(grid.lo) == len(grid.hi) == l):
        raise ConfigError(f"grid.lo/grid.hi: expected {l} entries each")

    n_min = min(s.n for s, _ in systems)
    marginal = MarginalSettings(
        enabled=marg_doc.get("enabled", True),
        coords=tuple(marg_doc.get("coords", [1, 2])),
        bins=tuple(marg_doc.get("bins", [60, 60])),
        quad_points_per_dim=marg_doc.get("quad_points_per_dim", 401),
    )
    if len(marginal.coords) != 2 or marginal.coords[0] == marginal.coords[1]:
        raise ConfigError("marginal.coords: expected two distinct indices")
    for k in marginal.coords:
        if not 1 <= k <= n_min:
            raise ConfigError(f"marginal.coords: index {k} outside [1, {n_min}]")
    if len(marginal.bins) != 2 or any(b < 1 for b in marginal.bins):
        raise ConfigError("marginal.bins: expected two positive integers")
    if marginal.quad_points_per_dim < 3:
        raise ConfigError("marginal.quad_points_per_dim: must be >= 3")

    return ExperimentConfig(
        systems=systems,
        l=l,
        fractions=fractions,
        grid=grid,
        marginal=marginal,
        mode=mode,
        output_dir=Path(exp.get("output_dir", "out")),
        center_pc_scores=exp.get("center_pc_scores", True),
        workers=workers,
        tune=exp.get("tune", True),
        target_acceptance=target_acceptance,
        figures=exp.get("figures", False),
    )


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())


def bundled_config(name: str) -> str:
    """Text of a config shipped in ``commonpc/configs`` (e.g. ``fig1.cfg``)."""
    return resources.files("commonpc").joinpath("configs", name).read_text()
