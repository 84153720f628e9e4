"""Run a config end to end and write its artifacts.

A run optimizes the configured schedule (or executes the pruning loop),
then writes report.json plus waveform/spectrum/propagator/trace CSVs into
the output directory. Report values are deterministic for a fixed config
and seed; only wall_time_s varies between repeats.
"""

from __future__ import annotations

import json
import math
import os
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ExperimentConfig
from .device import BasisMap, DeviceSpec, bare_map, dressed_map, drift_hamiltonian, relabel_map
from .dynamics import (
    fidelity,
    leakage,
    project_to_computational,
    propagate,
    write_propagator_csv,
)
from .gates import build_gate
from .linalg import hermitian_eig
from .optimize import (
    ParameterSpace,
    make_evaluator,
    minimize,
    prune_and_reoptimize,
    write_trace_csv,
)
from .pulses import (
    PulseSchedule,
    drive_hamiltonian_at,
    write_spectrum_csv,
    write_waveform_csv,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_REACHED = 2

DEFAULT_ANNOTATION_BAND = (2.5, 5.5)


@dataclass(frozen=True)
class ExperimentOutcome:
    """What a run produced: exit status, headline numbers, artifact dir."""

    status: int
    reached: bool
    initial_goal: float
    final_goal: float
    out_dir: Path
    report: dict


def build_basis(config: ExperimentConfig) -> BasisMap:
    """Computational-subspace map named by the config's basis field."""
    levels = tuple(t.levels for t in config.device.transmons)
    if config.basis == "dressed":
        return dressed_map(config.device)
    if config.basis == "bare":
        return bare_map(config.device.n_transmons, levels)
    return relabel_map(config.device.n_transmons, levels)


def resolve_output_dir(config_path, config: ExperimentConfig, override=None) -> Path:
    """Output dir precedence: CLI --out, config.output_dir, $SYNTH_OUTPUT_DIR, ./runs."""
    stem = Path(config_path).stem
    if override is not None:
        return Path(override)
    if config.output_dir:
        return Path(config.output_dir)
    env = os.environ.get("SYNTH_OUTPUT_DIR")
    if env:
        return Path(env) / stem
    return Path("runs") / stem


def _clean(value):
    """JSON-safe copy: numpy scalars to python, non-finite floats to null."""
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_clean(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        f = float(value)
        return f if math.isfinite(f) else None
    return value


def _envelope_summary(env) -> dict:
    if env.kind == "gaussian":
        return {"kind": "gaussian", "sigma_ns": env.sigma, "t0_ns": env.t0}
    if env.kind == "rectangular":
        return {"kind": "rectangular"}
    return {"kind": "flattop", "rise_ns": env.rise}


def _schedule_summary(schedule: PulseSchedule) -> dict:
    """Per-tone parameter table in reporting units (amplitudes in mV)."""
    return {
        "gate_time_ns": schedule.gate_time,
        "sample_dt_ns": schedule.sample_dt,
        "channels": [
            {
                "tones": [
                    {
                        "amplitude_mV": 1e3 * t.amplitude,
                        "drag_delta": t.drag_delta,
                        "envelope": _envelope_summary(t.envelope),
                        "frequency_GHz": t.frequency,
                        "phase_rad": t.phase,
                    }
                    for t in ch
                ]
            }
            for ch in schedule.channels
        ],
    }


def run_experiment(config: ExperimentConfig, out_dir) -> ExperimentOutcome:
    """Optimize per the config and write all artifacts into out_dir."""
    start = time.perf_counter()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    target = build_gate(config.target)
    basis = build_basis(config)
    curve = None
    if config.pruning is None:
        schedule = config.build_schedule()
        space = ParameterSpace(entries=config.parameters)
        goal = make_evaluator(config.device, schedule, space, target, basis)
        report = minimize(
            space,
            space.initial_vector(schedule),
            goal,
            config.optimizer.budget,
            gtol=config.optimizer.gtol,
            ftol=config.optimizer.ftol,
        )
        final_schedule = space.apply(schedule, report.final_point)
    else:
        stages = prune_and_reoptimize(
            config.device, target, basis, config.pruning, config.gate_time, config.sample_dt
        )
        report = stages[-1].report
        final_schedule = stages[-1].schedule
        curve = [(s.tone_count, s.fidelity) for s in stages]

    u = project_to_computational(propagate(config.device, final_schedule), basis)
    reached = report.final_goal <= config.optimizer.goal_threshold
    status = EXIT_OK if reached else EXIT_NOT_REACHED

    write_waveform_csv(out / "waveform.csv", config.device, final_schedule)
    write_spectrum_csv(out / "spectrum.csv", config.device, final_schedule)
    write_propagator_csv(out / "propagator.csv", u)
    write_trace_csv(out / "trace.csv", report)
    if curve is not None:
        with open(out / "pruning_curve.csv", "w") as fh:
            fh.write("tone_count,fidelity\n")
            for count, fid in curve:
                fh.write(f"{count},{f_repr(fid)}\n")

    doc = _clean(
        {
            "basis": config.basis,
            "final_goal": report.final_goal,
            "final_parameters": list(report.final_parameters),
            "gate_time_ns": config.gate_time,
            "goal_threshold": config.optimizer.goal_threshold,
            "gradient_norm": report.gradient_norm,
            "gradient_trace": list(report.gradient_trace),
            "initial_goal": report.initial_goal,
            "leakage": leakage(u),
            "n_evaluations": report.n_evaluations,
            "parameters": _schedule_summary(final_schedule),
            "pruning_curve": curve,
            "reached": reached,
            "sample_dt_ns": config.sample_dt,
            "seed": config.seed,
            "target": config.target.value,
            "termination": report.termination,
            "trace": list(report.trace),
            "wall_time_s": time.perf_counter() - start,
        }
    )
    with open(out / "report.json", "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return ExperimentOutcome(
        status=status,
        reached=reached,
        initial_goal=report.initial_goal,
        final_goal=report.final_goal,
        out_dir=out,
        report=doc,
    )


def f_repr(x: float) -> str:
    """Shortest round-trip decimal form of a float."""
    return repr(float(x))


def _occupancy_labels(spec: DeviceSpec) -> list[tuple[int, ...]]:
    """Bare occupation tuple for each bare index, register order."""
    dims = [t.levels for t in spec.transmons]
    out = []
    for idx in range(int(np.prod(dims))):
        rem, occ = idx, []
        for d in reversed(dims):
            occ.append(rem % d)
            rem //= d
        out.append(tuple(reversed(occ)))
    return out


def annotate_spectrum(
    spec: DeviceSpec, schedule: PulseSchedule, band: tuple[float, float] = DEFAULT_ANNOTATION_BAND
) -> list[tuple[float, str]]:
    """Single-excitation transition lines of the driven device at mid-gate.

    Eigenstates of H0 + Hd(T/2) are labeled by their dominant bare
    occupation; every pair differing by one excitation on one transmon
    contributes a line at the eigenvalue difference. Returns (frequency
    GHz, label) rows inside the band, sorted by frequency.
    """
    h = drift_hamiltonian(spec) + drive_hamiltonian_at(spec, schedule, schedule.gate_time / 2)
    s = hermitian_eig(h)
    occ = _occupancy_labels(spec)
    labels = [occ[int(np.argmax(np.abs(s.eigenvectors[:, k])))] for k in range(len(occ))]

    def fmt(o: tuple[int, ...]) -> str:
        return str(o[0]) if len(o) == 1 else "(" + ",".join(str(n) for n in o) + ")"

    rows = []
    dim = len(occ)
    for j in range(dim):
        for k in range(j + 1, dim):
            diff = sum(abs(a - b) for a, b in zip(labels[j], labels[k]))
            if diff != 1:
                continue
            f = float(s.eigenvalues[k] - s.eigenvalues[j])
            if band[0] <= f <= band[1]:
                rows.append((f, f"{fmt(labels[j])}->{fmt(labels[k])}"))
    rows.sort(key=lambda r: (r[0], r[1]))
    return rows


def write_resonances_csv(path, rows: list[tuple[float, str]]) -> None:
    """Write annotated transition lines as (frequency_GHz, label) CSV."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("frequency_GHz,label\n")
        for f, label in rows:
            fh.write(f"{f_repr(f)},{label}\n")
