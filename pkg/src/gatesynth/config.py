"""Declarative experiment configs: YAML parsing, validation, canonical dump.

A config names the device, the target gate, the evaluation basis, a schedule
template with initial tone values, the optimizable parameters with bounds,
optimizer settings, and optionally a pruning plan (which replaces the
explicit tone list with a generated comb). Dumps are canonical (sorted keys)
so serialize -> parse -> serialize is byte-identical.
"""

from __future__ import annotations

from dataclasses import dataclass

import yaml

from .device import DeviceSpec, TransmonSpec
from .errors import ConfigError, GateSynthError
from .gates import TWO_TRANSMON_GATES, GateName
from .optimize import ParameterEntry, PruningSchedule
from .pulses import DEFAULT_SAMPLE_DT, Envelope, PulseSchedule, Tone

BASIS_KINDS = ("bare", "dressed", "relabeled")


@dataclass(frozen=True)
class OptimizerSettings:
    """Run-level optimizer knobs; goal_threshold gates the exit status."""

    budget: int = 2000
    goal_threshold: float = 1e-4
    gtol: float = 1e-8
    ftol: float = 1e-12

    def __post_init__(self) -> None:
        if self.budget < 0:
            raise ConfigError(f"optimizer.budget must be >= 0, got {self.budget!r}")
        if not self.goal_threshold > 0:
            raise ConfigError(
                f"optimizer.goal_threshold must be positive, got {self.goal_threshold!r}"
            )


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one `synth run` needs, mirrored 1:1 by the YAML file."""

    device: DeviceSpec
    target: GateName
    basis: str
    gate_time: float
    channels: tuple[tuple[Tone, ...], ...] | None
    parameters: tuple[ParameterEntry, ...] | None
    optimizer: OptimizerSettings
    sample_dt: float = DEFAULT_SAMPLE_DT
    pruning: PruningSchedule | None = None
    output_dir: str | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.basis not in BASIS_KINDS:
            raise ConfigError(f"basis must be one of {BASIS_KINDS}, got {self.basis!r}")
        need = 2 if self.target in TWO_TRANSMON_GATES else 1
        if self.device.n_transmons != need:
            raise ConfigError(
                f"target {self.target.value} is a {4 if need == 1 else 16}-dimensional "
                f"gate and needs {need} transmon(s); device has {self.device.n_transmons}"
            )
        if self.basis == "dressed" and (
            self.device.n_transmons != 2 or self.device.coupling <= 0
        ):
            raise ConfigError("basis 'dressed' requires two coupled transmons")
        if any(t.levels < 4 for t in self.device.transmons):
            raise ConfigError("device.transmons[*].levels must be >= 4 to host the register")
        if self.pruning is None:
            if not self.channels or not self.parameters:
                raise ConfigError(
                    "channels and parameters are required when pruning is not set"
                )
            if len(self.channels) != self.device.n_transmons:
                raise ConfigError(
                    f"channels has {len(self.channels)} entries for "
                    f"{self.device.n_transmons} transmon(s)"
                )
        else:
            if self.channels or self.parameters:
                raise ConfigError(
                    "a pruning config generates its tone comb; leave channels and "
                    "parameters unset"
                )
        # schedule-level invariants (step count, Nyquist, envelope ranges)
        try:
            schedule = self.build_schedule()
        except GateSynthError as exc:
            raise ConfigError(f"schedule: {exc}") from exc
        if self.pruning is None:
            from .optimize import ParameterSpace

            space = ParameterSpace(entries=self.parameters)
            x0 = space.initial_vector(schedule)
            for e, x in zip(space.entries, x0):
                v = x * e.scale
                if not e.lower - 1e-12 <= v <= e.upper + 1e-12:
                    raise ConfigError(
                        f"initial value {v} of {e.name} outside bounds "
                        f"[{e.lower}, {e.upper}]"
                    )

    def build_schedule(self) -> PulseSchedule:
        """Schedule template: explicit channels, or the generated comb."""
        if self.pruning is not None:
            from .optimize import initial_comb

            return initial_comb(self.device, self.pruning, self.gate_time, self.sample_dt)
        return PulseSchedule(
            gate_time=self.gate_time, channels=self.channels, sample_dt=self.sample_dt
        )


def _need(mapping: dict, field: str, path: str):
    if field not in mapping or mapping[field] is None:
        raise ConfigError(f"missing field {path}.{field}")
    return mapping[field]


def _as_mapping(obj, path: str) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(f"{path} must be a mapping, got {type(obj).__name__}")
    return obj


def _as_list(obj, path: str) -> list:
    if not isinstance(obj, list):
        raise ConfigError(f"{path} must be a list, got {type(obj).__name__}")
    return obj


def _envelope_from_dict(d: dict, path: str) -> Envelope:
    d = _as_mapping(d, path)
    kind = _need(d, "kind", path)
    try:
        if kind == "gaussian":
            return Envelope.gaussian(
                t0=float(_need(d, "t0", path)), sigma=float(_need(d, "sigma", path))
            )
        if kind == "rectangular":
            return Envelope.rectangular()
        if kind == "flattop":
            return Envelope.flattop(rise=float(_need(d, "rise", path)))
    except GateSynthError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    raise ConfigError(f"{path}.kind must be gaussian/rectangular/flattop, got {kind!r}")


def _envelope_to_dict(env: Envelope) -> dict:
    if env.kind == "gaussian":
        return {"kind": "gaussian", "sigma": float(env.sigma), "t0": float(env.t0)}
    if env.kind == "rectangular":
        return {"kind": "rectangular"}
    return {"kind": "flattop", "rise": float(env.rise)}


def _tone_from_dict(d: dict, path: str) -> Tone:
    d = _as_mapping(d, path)
    try:
        return Tone(
            frequency=float(_need(d, "frequency", path)),
            phase=float(d.get("phase", 0.0)),
            amplitude=float(_need(d, "amplitude", path)),
            envelope=_envelope_from_dict(_need(d, "envelope", path), f"{path}.envelope"),
            drag_delta=float(d.get("drag_delta", 0.0)),
        )
    except GateSynthError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _tone_to_dict(tone: Tone) -> dict:
    return {
        "amplitude": float(tone.amplitude),
        "drag_delta": float(tone.drag_delta),
        "envelope": _envelope_to_dict(tone.envelope),
        "frequency": float(tone.frequency),
        "phase": float(tone.phase),
    }


def _parameter_from_dict(d: dict, path: str) -> ParameterEntry:
    d = _as_mapping(d, path)
    try:
        return ParameterEntry(
            field=str(_need(d, "field", path)),
            channel=None if d.get("channel") is None else int(d["channel"]),
            tone=None if d.get("tone") is None else int(d["tone"]),
            lower=float(_need(d, "lower", path)),
            upper=float(_need(d, "upper", path)),
            scale=float(d.get("scale", 1.0)),
            frozen=bool(d.get("frozen", False)),
        )
    except GateSynthError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _parameter_to_dict(e: ParameterEntry) -> dict:
    return {
        "channel": e.channel,
        "field": e.field,
        "frozen": bool(e.frozen),
        "lower": float(e.lower),
        "scale": float(e.scale),
        "tone": e.tone,
        "upper": float(e.upper),
    }


def _device_from_dict(d: dict, path: str) -> DeviceSpec:
    d = _as_mapping(d, path)
    transmons = []
    for i, td in enumerate(_as_list(_need(d, "transmons", path), f"{path}.transmons")):
        tp = f"{path}.transmons[{i}]"
        td = _as_mapping(td, tp)
        try:
            transmons.append(
                TransmonSpec(
                    omega=float(_need(td, "omega", tp)),
                    anharmonicity=float(_need(td, "anharmonicity", tp)),
                    levels=int(td.get("levels", 5)),
                )
            )
        except GateSynthError as exc:
            raise ConfigError(f"{tp}: {exc}") from exc
    try:
        return DeviceSpec(transmons=tuple(transmons), coupling=float(d.get("coupling", 0.0)))
    except GateSynthError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _device_to_dict(spec: DeviceSpec) -> dict:
    return {
        "coupling": float(spec.coupling),
        "transmons": [
            {
                "anharmonicity": float(t.anharmonicity),
                "levels": int(t.levels),
                "omega": float(t.omega),
            }
            for t in spec.transmons
        ],
    }


def _pruning_from_dict(d: dict, path: str) -> PruningSchedule:
    d = _as_mapping(d, path)
    band = d.get("band", [2.5, 5.5])
    band = _as_list(band, f"{path}.band")
    if len(band) != 2:
        raise ConfigError(f"{path}.band must have two entries")
    frozen = _as_list(d.get("frozen_channels", []), f"{path}.frozen_channels")
    try:
        return PruningSchedule(
            initial_tones=int(d.get("initial_tones", 200)),
            removal_fraction=float(d.get("removal_fraction", 0.25)),
            removal_count=None if d.get("removal_count") is None else int(d["removal_count"]),
            min_tones=int(d.get("min_tones", 1)),
            goal_threshold=(
                None if d.get("goal_threshold") is None else float(d["goal_threshold"])
            ),
            band=(float(band[0]), float(band[1])),
            amplitude_scale=float(d.get("amplitude_scale", 0.01)),
            amplitude_bound_factor=float(d.get("amplitude_bound_factor", 20.0)),
            optimize_frequencies=bool(d.get("optimize_frequencies", True)),
            budget_per_round=int(d.get("budget_per_round", 2000)),
            seed=int(d.get("seed", 0)),
            frozen_channels=tuple(int(c) for c in frozen),
            frequency_scale=(
                None if d.get("frequency_scale") is None else float(d["frequency_scale"])
            ),
            stage_stop_goal=(
                None if d.get("stage_stop_goal") is None else float(d["stage_stop_goal"])
            ),
            warmup_budget=int(d.get("warmup_budget", 0)),
        )
    except GateSynthError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _pruning_to_dict(p: PruningSchedule) -> dict:
    return {
        "amplitude_bound_factor": float(p.amplitude_bound_factor),
        "amplitude_scale": float(p.amplitude_scale),
        "band": [float(p.band[0]), float(p.band[1])],
        "budget_per_round": int(p.budget_per_round),
        "frequency_scale": None if p.frequency_scale is None else float(p.frequency_scale),
        "frozen_channels": [int(c) for c in p.frozen_channels],
        "goal_threshold": None if p.goal_threshold is None else float(p.goal_threshold),
        "initial_tones": int(p.initial_tones),
        "min_tones": int(p.min_tones),
        "optimize_frequencies": bool(p.optimize_frequencies),
        "removal_count": None if p.removal_count is None else int(p.removal_count),
        "removal_fraction": float(p.removal_fraction),
        "seed": int(p.seed),
        "stage_stop_goal": None if p.stage_stop_goal is None else float(p.stage_stop_goal),
        "warmup_budget": int(p.warmup_budget),
    }


def config_from_dict(d: dict) -> ExperimentConfig:
    """Build and validate a config from parsed YAML data."""
    d = _as_mapping(d, "config")
    known = {
        "device", "target", "basis", "gate_time", "sample_dt", "channels",
        "parameters", "optimizer", "pruning", "output_dir", "seed",
    }
    for key in d:
        if key not in known:
            raise ConfigError(f"unknown config field {key!r}")
    target_name = str(_need(d, "target", "config"))
    try:
        target = GateName(target_name)
    except ValueError:
        raise ConfigError(
            f"config.target {target_name!r} is not a known gate name"
        ) from None
    channels = None
    if d.get("channels") is not None:
        channels = []
        for ci, ch in enumerate(_as_list(d["channels"], "config.channels")):
            cp = f"config.channels[{ci}]"
            ch = _as_mapping(ch, cp)
            tones = [
                _tone_from_dict(td, f"{cp}.tones[{ti}]")
                for ti, td in enumerate(_as_list(_need(ch, "tones", cp), f"{cp}.tones"))
            ]
            channels.append(tuple(tones))
        channels = tuple(channels)
    parameters = None
    if d.get("parameters") is not None:
        parameters = tuple(
            _parameter_from_dict(pd, f"config.parameters[{i}]")
            for i, pd in enumerate(_as_list(d["parameters"], "config.parameters"))
        )
    opt = _as_mapping(d.get("optimizer", {}), "config.optimizer")
    try:
        settings = OptimizerSettings(
            budget=int(opt.get("budget", 2000)),
            goal_threshold=float(opt.get("goal_threshold", 1e-4)),
            gtol=float(opt.get("gtol", 1e-8)),
            ftol=float(opt.get("ftol", 1e-12)),
        )
        return ExperimentConfig(
            device=_device_from_dict(_need(d, "device", "config"), "config.device"),
            target=target,
            basis=str(_need(d, "basis", "config")),
            gate_time=float(_need(d, "gate_time", "config")),
            channels=channels,
            parameters=parameters,
            optimizer=settings,
            sample_dt=float(d.get("sample_dt", DEFAULT_SAMPLE_DT)),
            pruning=(
                None if d.get("pruning") is None
                else _pruning_from_dict(d["pruning"], "config.pruning")
            ),
            output_dir=None if d.get("output_dir") is None else str(d["output_dir"]),
            seed=int(d.get("seed", 0)),
        )
    except ConfigError:
        raise
    except GateSynthError as exc:
        raise ConfigError(str(exc)) from exc


def config_to_dict(config: ExperimentConfig) -> dict:
    """Plain-data form of a config; inverse of `config_from_dict`."""
    return {
        "basis": config.basis,
        "channels": (
            None
            if config.channels is None
            else [{"tones": [_tone_to_dict(t) for t in ch]} for ch in config.channels]
        ),
        "device": _device_to_dict(config.device),
        "gate_time": float(config.gate_time),
        "optimizer": {
            "budget": int(config.optimizer.budget),
            "ftol": float(config.optimizer.ftol),
            "goal_threshold": float(config.optimizer.goal_threshold),
            "gtol": float(config.optimizer.gtol),
        },
        "output_dir": config.output_dir,
        "parameters": (
            None
            if config.parameters is None
            else [_parameter_to_dict(e) for e in config.parameters]
        ),
        "pruning": None if config.pruning is None else _pruning_to_dict(config.pruning),
        "sample_dt": float(config.sample_dt),
        "seed": int(config.seed),
        "target": config.target.value,
    }


def dump_config(config: ExperimentConfig) -> str:
    """Canonical YAML text (sorted keys, stable formatting)."""
    return yaml.safe_dump(config_to_dict(config), sort_keys=True, default_flow_style=False)


def parse_config(text: str) -> ExperimentConfig:
    """Parse YAML text into a validated config."""
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}") from exc
    return config_from_dict(data)


def load_config(path) -> ExperimentConfig:
    """Read and validate a config file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def save_config(path, config: ExperimentConfig) -> None:
    """Write the canonical YAML form."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_config(config))
