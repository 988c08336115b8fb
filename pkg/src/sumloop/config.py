"""Run and grid configuration files (YAML).

Configs are strict: unknown keys, wrong types, and out-of-range values
are rejected with the offending key named, so a typo never silently
becomes a default. Defaults mirror the experiment conventions:
fractions 0.01, epochs 6, effective batch 128, three labeling
iterations when any strategy is active.

Checkpoint root precedence: CLI flag > config file > the
SUMLOOP_CHECKPOINT_ROOT environment variable > ``./runs``.
"""

from __future__ import annotations

from pathlib import Path

import yaml

from .grid import CampaignPaths, GridSpec
from .loop_engine import AdapterSpec, ConfigError, HlMode, RunConfig
from .model_adapter import AdapterKind
from .runstate import default_checkpoint_root
from .strategies import ScoreNormalization, SelectionKind, StrategySpec


def _require(mapping: dict, key: str, kind, where: str, default=None, required=False):
    if key not in mapping:
        if required:
            raise ConfigError(f"config key '{where}{key}' is required")
        return default
    value = mapping[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
        raise ConfigError(
            f"config key '{where}{key}' must be {getattr(kind, '__name__', kind)}, "
            f"got {type(value).__name__}"
        )
    return value


def _check_known(mapping: dict, allowed: set[str], where: str) -> None:
    unknown = sorted(set(mapping) - allowed)
    if unknown:
        raise ConfigError(f"unknown config key '{where}{unknown[0]}'")


def _enum(value: str, enum_cls, where: str):
    try:
        return enum_cls(value)
    except ValueError:
        options = "|".join(e.value for e in enum_cls)
        raise ConfigError(f"config key '{where}' must be one of {options}, got {value!r}")


def _parse_address(value: str, where: str) -> tuple[str, int]:
    host, _, port = value.rpartition(":")
    if not host or not port.isdigit():
        raise ConfigError(f"config key '{where}' must look like 'host:port', got {value!r}")
    return host, int(port)


def parse_adapter(mapping: dict, where: str = "adapter.") -> AdapterSpec:
    _check_known(
        mapping,
        {"kind", "noise_rate", "curve_c", "lead_k", "command", "address",
         "fit_timeout", "predict_timeout"},
        where,
    )
    kind = _enum(_require(mapping, "kind", str, where, default="oracle_noise"),
                 AdapterKind, where + "kind")
    command = mapping.get("command")
    if command is not None and (
        not isinstance(command, list) or not all(isinstance(c, str) for c in command)
    ):
        raise ConfigError(f"config key '{where}command' must be a list of strings")
    address = mapping.get("address")
    return AdapterSpec(
        kind=kind,
        noise_rate=_require(mapping, "noise_rate", float, where, default=0.3),
        curve_c=_require(mapping, "curve_c", float, where, default=None),
        lead_k=_require(mapping, "lead_k", int, where, default=2),
        command=tuple(command) if command else None,
        address=_parse_address(address, where + "address") if address else None,
        fit_timeout=_require(mapping, "fit_timeout", float, where, default=None),
        predict_timeout=_require(mapping, "predict_timeout", float, where, default=600.0),
    )


def parse_strategy(mapping: dict, where: str = "strategy.") -> StrategySpec:
    _check_known(mapping, {"pl", "hl", "pl_fraction", "hl_fraction", "seed"}, where)
    return StrategySpec(
        pl=_enum(_require(mapping, "pl", str, where, default="none"), SelectionKind, where + "pl"),
        hl=_enum(_require(mapping, "hl", str, where, default="none"), SelectionKind, where + "hl"),
        pl_fraction=_require(mapping, "pl_fraction", float, where, default=0.01),
        hl_fraction=_require(mapping, "hl_fraction", float, where, default=0.01),
        seed=_require(mapping, "seed", int, where, default=0),
    )


_RUN_KEYS = {
    "run_id", "corpus", "test_set", "lexicon", "negex_rules", "checkpoint_root",
    "results", "l0_size", "dropout", "seed", "n_iterations", "score_normalization",
    "hl_mode", "epochs", "effective_batch_size", "strategy", "adapter",
}


def _load_yaml(path: str | Path) -> dict:
    try:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML: {exc}")
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return data


def load_run_config(path: str | Path, checkpoint_root: str | None = None):
    """Returns (RunConfig, CampaignPaths) for a single-run config file."""
    data = _load_yaml(path)
    _check_known(data, _RUN_KEYS, "")
    strategy = parse_strategy(_require(data, "strategy", dict, "", default={}) or {})
    adapter = parse_adapter(_require(data, "adapter", dict, "", default={}) or {})
    n_iterations = _require(data, "n_iterations", int, "",
                            default=0 if strategy.is_trivial else 3)
    run_id = _require(data, "run_id", str, "", default=None)
    l0_size = _require(data, "l0_size", int, "", required=True)
    seed = _require(data, "seed", int, "", default=42)
    dropout = _require(data, "dropout", float, "", default=0.1)
    if run_id is None:
        run_id = (
            f"d{dropout:g}_l{l0_size:04d}_pl-{strategy.pl.value}"
            f"_hl-{strategy.hl.value}_s{seed}"
        )
    config = RunConfig(
        run_id=run_id,
        l0_size=l0_size,
        dropout=dropout,
        strategy=strategy,
        n_iterations=n_iterations,
        seed=seed,
        adapter=adapter,
        score_normalization=_enum(
            _require(data, "score_normalization", str, "", default="none"),
            ScoreNormalization, "score_normalization",
        ),
        hl_mode=_enum(
            _require(data, "hl_mode", str, "", default="simulated_oracle"),
            HlMode, "hl_mode",
        ),
        epochs=_require(data, "epochs", int, "", default=6),
        effective_batch_size=_require(data, "effective_batch_size", int, "", default=128),
    )
    paths = _parse_paths(data, path, checkpoint_root)
    return config, paths


def _parse_paths(data: dict, config_path: str | Path, checkpoint_root_flag: str | None) -> CampaignPaths:
    base = Path(config_path).parent

    def resolve(key: str, required: bool = False) -> Path | None:
        value = _require(data, key, str, "", required=required)
        if value is None:
            return None
        p = Path(value)
        return p if p.is_absolute() else base / p

    corpus = resolve("corpus", required=True)
    test_set = resolve("test_set", required=True)
    if checkpoint_root_flag is not None:
        root = Path(checkpoint_root_flag)
    elif data.get("checkpoint_root") is not None:
        root = resolve("checkpoint_root")
    else:
        root = default_checkpoint_root()
    results = resolve("results") or root / "results.ndjson"
    return CampaignPaths(
        corpus=corpus,
        test_set=test_set,
        lexicon=resolve("lexicon"),
        negex=resolve("negex_rules"),
        checkpoint_root=root,
        results=results,
    )


_GRID_KEYS = {
    "corpus", "test_set", "lexicon", "negex_rules", "checkpoint_root", "results",
    "l0_sizes", "dropouts", "pl", "hl", "pl_fraction", "hl_fraction",
    "n_iterations", "seed", "adapter", "epochs", "effective_batch_size",
}


def load_grid_spec(path: str | Path, checkpoint_root: str | None = None):
    """Returns (GridSpec, CampaignPaths) for a grid spec file."""
    data = _load_yaml(path)
    _check_known(data, _GRID_KEYS, "")

    def int_list(key: str, default: tuple[int, ...]) -> tuple[int, ...]:
        value = data.get(key)
        if value is None:
            return default
        if not isinstance(value, list) or not all(
            isinstance(v, int) and not isinstance(v, bool) for v in value
        ):
            raise ConfigError(f"config key '{key}' must be a list of integers")
        return tuple(value)

    def float_list(key: str, default: tuple[float, ...]) -> tuple[float, ...]:
        value = data.get(key)
        if value is None:
            return default
        if not isinstance(value, list):
            raise ConfigError(f"config key '{key}' must be a list of numbers")
        out = []
        for v in value:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"config key '{key}' must be a list of numbers")
            out.append(float(v))
        return tuple(out)

    def kind_list(key: str, default: tuple[SelectionKind, ...]) -> tuple[SelectionKind, ...]:
        value = data.get(key)
        if value is None:
            return default
        if not isinstance(value, list):
            raise ConfigError(f"config key '{key}' must be a list of strategy names")
        return tuple(_enum(v, SelectionKind, f"{key}[{i}]") for i, v in enumerate(value))

    from .grid import DEFAULT_DROPOUTS, DEFAULT_HL, DEFAULT_L0_SIZES, DEFAULT_PL

    spec = GridSpec(
        l0_sizes=int_list("l0_sizes", DEFAULT_L0_SIZES),
        dropouts=float_list("dropouts", DEFAULT_DROPOUTS),
        pl_kinds=kind_list("pl", DEFAULT_PL),
        hl_kinds=kind_list("hl", DEFAULT_HL),
        pl_fraction=_require(data, "pl_fraction", float, "", default=0.01),
        hl_fraction=_require(data, "hl_fraction", float, "", default=0.01),
        n_iterations=_require(data, "n_iterations", int, "", default=3),
        seed=_require(data, "seed", int, "", default=42),
        adapter=parse_adapter(_require(data, "adapter", dict, "", default={}) or {}),
        epochs=_require(data, "epochs", int, "", default=6),
        effective_batch_size=_require(data, "effective_batch_size", int, "", default=128),
    )
    paths = _parse_paths(data, path, checkpoint_root)
    return spec, paths
