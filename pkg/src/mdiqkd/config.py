"""Schema-validated run configuration files.

A run configuration is one YAML document with nested sections for the
sources, channels, detectors and interference parameters.  Every
characterized scalar may carry a uniform uncertainty, written either as a
bare number or as ``{value: ..., half_width: ...}``.  Unknown keys are
rejected so typos fail loudly.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

import yaml

from .detector import DetectorParams
from .link import (
    ParameterBand,
    StateBand,
    StateSetBands,
    UncertainSystemConfig,
    transmissions_from_total_loss,
)
from .optimizer import OptimizationGrid
from .states import Basis, StateLabel


class ConfigError(ValueError):
    """A configuration file violated the schema; the message carries the field path."""


_GRID_FIELDS = (
    "decoy_min",
    "decoy_max",
    "signal_max",
    "intensity_step",
    "distance_min_km",
    "distance_max_km",
    "distance_step_km",
    "db_per_km",
    "error_correction_efficiency",
)


_STATE_FIELDS = (
    ("z0", Basis.Z, StateLabel.KET0),
    ("z1", Basis.Z, StateLabel.KET1),
    ("x_plus", Basis.X, StateLabel.KET_PLUS),
    ("x_minus", Basis.X, StateLabel.KET_MINUS),
)


@dataclass(frozen=True)
class RunConfig:
    """Deserialized configuration: seed, uncertain system parameters and,
    optionally, default optimization-grid settings."""

    seed: int
    uncertain: UncertainSystemConfig
    grid: OptimizationGrid | None = None


def _expect_mapping(node: Any, path: str) -> Mapping[str, Any]:
    if not isinstance(node, Mapping):
        raise ConfigError(f"{path}: expected a mapping, got {type(node).__name__}")
    return node


def _check_keys(node: Mapping[str, Any], allowed: set[str], path: str) -> None:
    unknown = set(node) - allowed
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {sorted(unknown)}; allowed: {sorted(allowed)}")


def _require(node: Mapping[str, Any], key: str, path: str) -> Any:
    if key not in node:
        raise ConfigError(f"{path}: missing required key {key!r}")
    return node[key]


def _number(node: Any, path: str) -> float:
    if isinstance(node, bool) or not isinstance(node, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {node!r}")
    return float(node)


def _band(node: Any, path: str) -> ParameterBand:
    if isinstance(node, (int, float)) and not isinstance(node, bool):
        return ParameterBand(central=float(node))
    mapping = _expect_mapping(node, path)
    _check_keys(mapping, {"value", "half_width"}, path)
    value = _number(_require(mapping, "value", path), f"{path}.value")
    half_width = _number(mapping.get("half_width", 0.0), f"{path}.half_width")
    try:
        return ParameterBand(central=value, half_width=half_width)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _state_band(node: Any, path: str, basis: Basis, label: StateLabel) -> StateBand:
    mapping = _expect_mapping(node, path)
    _check_keys(mapping, {"m", "b", "phi"}, path)
    m = _band(_require(mapping, "m", path), f"{path}.m")
    b = _band(_require(mapping, "b", path), f"{path}.b")
    if not 0.0 <= m.central <= 1.0:
        raise ConfigError(f"{path}.m: central value {m.central} outside [0, 1]")
    if b.central < 0.0:
        raise ConfigError(f"{path}.b: central value {b.central} must be >= 0")
    return StateBand(
        m=m,
        b=b,
        phi=_band(mapping.get("phi", 0.0), f"{path}.phi"),
        basis=basis,
        label=label,
    )


@dataclass(frozen=True)
class _Source:
    intensity: ParameterBand
    background_per_gate: float
    states: StateSetBands


def _source(node: Any, path: str) -> _Source:
    mapping = _expect_mapping(node, path)
    _check_keys(mapping, {"intensity", "background_per_gate", "states"}, path)
    states_node = _expect_mapping(_require(mapping, "states", path), f"{path}.states")
    _check_keys(states_node, {name for name, _, _ in _STATE_FIELDS}, f"{path}.states")
    bands = {
        name: _state_band(_require(states_node, name, f"{path}.states"), f"{path}.states.{name}", basis, label)
        for name, basis, label in _STATE_FIELDS
    }
    return _Source(
        intensity=_band(_require(mapping, "intensity", path), f"{path}.intensity"),
        background_per_gate=_number(mapping.get("background_per_gate", 0.0), f"{path}.background_per_gate"),
        states=StateSetBands(
            z0=bands["z0"], z1=bands["z1"], x_plus=bands["x_plus"], x_minus=bands["x_minus"]
        ),
    )


def _transmissions(node: Any, path: str) -> tuple[float, float]:
    mapping = _expect_mapping(node, path)
    _check_keys(mapping, {"total_loss_db", "transmission_alice", "transmission_bob"}, path)
    has_loss = "total_loss_db" in mapping
    has_t = "transmission_alice" in mapping or "transmission_bob" in mapping
    if has_loss and has_t:
        raise ConfigError(f"{path}: give either total_loss_db or explicit transmissions, not both")
    if has_loss:
        return transmissions_from_total_loss(_number(mapping["total_loss_db"], f"{path}.total_loss_db"))
    if "transmission_alice" not in mapping or "transmission_bob" not in mapping:
        raise ConfigError(f"{path}: both transmission_alice and transmission_bob are required")
    return (
        _number(mapping["transmission_alice"], f"{path}.transmission_alice"),
        _number(mapping["transmission_bob"], f"{path}.transmission_bob"),
    )


def _detector(node: Any, path: str) -> tuple[DetectorParams, ParameterBand]:
    mapping = _expect_mapping(node, path)
    allowed = {
        "eta",
        "eta_gate",
        "p_dark_bin",
        "p_dark_gate",
        "bin_gate_ratio",
        "alpha",
        "p_geo",
        "k_dead",
        "deadtime_free",
    }
    _check_keys(mapping, allowed, path)
    dark = _band(_require(mapping, "p_dark_bin", path), f"{path}.p_dark_bin")
    ratio = _number(_require(mapping, "bin_gate_ratio", path), f"{path}.bin_gate_ratio")
    k_dead = _require(mapping, "k_dead", path)
    if isinstance(k_dead, bool) or not isinstance(k_dead, int):
        raise ConfigError(f"{path}.k_dead: expected an integer number of gates")
    deadtime_free = mapping.get("deadtime_free", False)
    if not isinstance(deadtime_free, bool):
        raise ConfigError(f"{path}.deadtime_free: expected a boolean")
    try:
        params = DetectorParams(
            eta=_number(_require(mapping, "eta", path), f"{path}.eta"),
            eta_gate=_number(_require(mapping, "eta_gate", path), f"{path}.eta_gate"),
            p_dark_bin=dark.central,
            bin_gate_ratio=ratio,
            alpha=_number(_require(mapping, "alpha", path), f"{path}.alpha"),
            p_geo=_number(_require(mapping, "p_geo", path), f"{path}.p_geo"),
            k_dead=k_dead,
            deadtime_free=deadtime_free,
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    # The per-gate dark rate is derived from the bin/gate ratio; a dataset
    # supplying all three must be self-consistent.
    if "p_dark_gate" in mapping:
        explicit = _number(mapping["p_dark_gate"], f"{path}.p_dark_gate")
        derived = params.p_dark_gate
        if abs(explicit - derived) > 1e-9 * max(explicit, derived):
            raise ConfigError(
                f"{path}.p_dark_gate: {explicit} inconsistent with "
                f"p_dark_bin / bin_gate_ratio = {derived}"
            )
    return params, dark


def _grid(node: Any, path: str) -> OptimizationGrid:
    mapping = _expect_mapping(node, path)
    _check_keys(mapping, set(_GRID_FIELDS), path)
    values = {key: _number(value, f"{path}.{key}") for key, value in mapping.items()}
    try:
        return OptimizationGrid(**values)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def from_dict(document: Any, source: str = "<config>") -> RunConfig:
    """Build a :class:`RunConfig` from a parsed YAML document."""
    root = _expect_mapping(document, source)
    _check_keys(
        root, {"seed", "model", "sources", "channels", "detectors", "interference", "grid"}, source
    )

    seed = root.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError(f"{source}.seed: expected an integer")

    model = _expect_mapping(root.get("model", {}), f"{source}.model")
    _check_keys(model, {"max_photons"}, f"{source}.model")
    max_photons = model.get("max_photons", 3)
    if isinstance(max_photons, bool) or not isinstance(max_photons, int):
        raise ConfigError(f"{source}.model.max_photons: expected an integer")

    sources = _expect_mapping(_require(root, "sources", source), f"{source}.sources")
    _check_keys(sources, {"alice", "bob"}, f"{source}.sources")
    alice = _source(_require(sources, "alice", f"{source}.sources"), f"{source}.sources.alice")
    bob = _source(_require(sources, "bob", f"{source}.sources"), f"{source}.sources.bob")

    t_alice, t_bob = _transmissions(_require(root, "channels", source), f"{source}.channels")
    detector, dark_band = _detector(_require(root, "detectors", source), f"{source}.detectors")

    interference = _expect_mapping(_require(root, "interference", source), f"{source}.interference")
    _check_keys(interference, {"visibility", "phase_drift_bound"}, f"{source}.interference")
    visibility = _band(_require(interference, "visibility", f"{source}.interference"), f"{source}.interference.visibility")
    drift = _number(
        interference.get("phase_drift_bound", 0.0), f"{source}.interference.phase_drift_bound"
    )
    if drift < 0.0:
        raise ConfigError(f"{source}.interference.phase_drift_bound: must be >= 0")

    try:
        uncertain = UncertainSystemConfig(
            alice=alice.states,
            bob=bob.states,
            mu=alice.intensity,
            sigma=bob.intensity,
            t_alice=t_alice,
            t_bob=t_bob,
            visibility=visibility,
            p_dark_bin=dark_band,
            phase_drift_bound=drift,
            detector=detector,
            background_gate_alice=alice.background_per_gate,
            background_gate_bob=bob.background_per_gate,
            max_photons=max_photons,
        )
        uncertain.central()  # validates the central configuration end to end
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    grid = _grid(root["grid"], f"{source}.grid") if "grid" in root else None
    return RunConfig(seed=seed, uncertain=uncertain, grid=grid)


def load_run_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        document = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML: {exc}") from exc
    return from_dict(document, source=str(path))


def _band_dict(band: ParameterBand) -> Any:
    if band.half_width == 0.0:
        return band.central
    return {"value": band.central, "half_width": band.half_width}


def to_dict(config: RunConfig) -> dict[str, Any]:
    """Serialize back to the schema; semantically inverse to :func:`from_dict`."""
    u = config.uncertain

    def source_dict(states: StateSetBands, intensity: ParameterBand, background: float) -> dict:
        return {
            "intensity": _band_dict(intensity),
            "background_per_gate": background,
            "states": {
                name: {
                    "m": _band_dict(getattr(states, name).m),
                    "b": _band_dict(getattr(states, name).b),
                    "phi": _band_dict(getattr(states, name).phi),
                }
                for name, _, _ in _STATE_FIELDS
            },
        }

    document: dict[str, Any] = {
        "seed": config.seed,
        "model": {"max_photons": u.max_photons},
        "sources": {
            "alice": source_dict(u.alice, u.mu, u.background_gate_alice),
            "bob": source_dict(u.bob, u.sigma, u.background_gate_bob),
        },
        "channels": {
            "transmission_alice": u.t_alice,
            "transmission_bob": u.t_bob,
        },
        "detectors": {
            "eta": u.detector.eta,
            "eta_gate": u.detector.eta_gate,
            "p_dark_bin": _band_dict(u.p_dark_bin),
            "bin_gate_ratio": u.detector.bin_gate_ratio,
            "alpha": u.detector.alpha,
            "p_geo": u.detector.p_geo,
            "k_dead": u.detector.k_dead,
            "deadtime_free": u.detector.deadtime_free,
        },
        "interference": {
            "visibility": _band_dict(u.visibility),
            "phase_drift_bound": u.phase_drift_bound,
        },
    }
    if config.grid is not None:
        document["grid"] = {key: getattr(config.grid, key) for key in _GRID_FIELDS}
    return document


def dump_run_config(config: RunConfig, path: str | Path) -> None:
    Path(path).write_text(yaml.safe_dump(to_dict(config), sort_keys=False))
