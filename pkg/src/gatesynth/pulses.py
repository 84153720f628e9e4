"""Drive-signal model: envelopes, tones, schedules and sampled waveforms.

A channel drives one transmon with a superposition of tones. Each tone is a
carrier at frequency f and phase phi, scaled by an amplitude in volts (device
line transfer fixed at 1 GHz/V) and shaped by an envelope; an optional DRAG
coefficient turns the envelope complex, s -> s - i*delta*sdot/anharmonicity.
Waveforms are sampled at interval midpoints, so every sampled value is real
and every piecewise-constant step Hamiltonian is real symmetric.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .device import DeviceSpec
from .errors import DimensionError, InvalidInputError
from .linalg import fft_spectrum, ladder_ops

DEFAULT_SAMPLE_DT = 0.02  # ns

ENVELOPE_KINDS = ("gaussian", "rectangular", "flattop")


@dataclass(frozen=True)
class Envelope:
    """Shape of a tone: ``gaussian`` (t0, sigma), ``rectangular``, or
    ``flattop`` (cosine-ramped rise/fall of duration `rise`)."""

    kind: str
    t0: float | None = None
    sigma: float | None = None
    rise: float | None = None

    def __post_init__(self) -> None:
        if self.kind == "gaussian":
            if self.t0 is None or self.sigma is None:
                raise InvalidInputError("gaussian envelope requires t0 and sigma")
            if not (np.isfinite(self.sigma) and self.sigma > 0):
                raise InvalidInputError(f"sigma must be positive, got {self.sigma!r}")
            if not (np.isfinite(self.t0) and self.t0 >= 0):
                raise InvalidInputError(f"t0 must be >= 0, got {self.t0!r}")
        elif self.kind == "rectangular":
            if self.t0 is not None or self.sigma is not None or self.rise is not None:
                raise InvalidInputError("rectangular envelope takes no parameters")
        elif self.kind == "flattop":
            if self.rise is None or not (np.isfinite(self.rise) and self.rise >= 0):
                raise InvalidInputError(f"flattop envelope requires rise >= 0, got {self.rise!r}")
        else:
            raise InvalidInputError(f"unknown envelope kind {self.kind!r}")

    @classmethod
    def gaussian(cls, t0: float, sigma: float) -> "Envelope":
        return cls(kind="gaussian", t0=t0, sigma=sigma)

    @classmethod
    def rectangular(cls) -> "Envelope":
        return cls(kind="rectangular")

    @classmethod
    def flattop(cls, rise: float) -> "Envelope":
        return cls(kind="flattop", rise=rise)


@dataclass(frozen=True)
class Tone:
    """One carrier: frequency (GHz), phase (rad), amplitude (V), envelope,
    and DRAG coefficient (dimensionless)."""

    frequency: float
    phase: float
    amplitude: float
    envelope: Envelope
    drag_delta: float = 0.0

    def __post_init__(self) -> None:
        if not (np.isfinite(self.frequency) and self.frequency > 0):
            raise InvalidInputError(f"carrier frequency must be positive, got {self.frequency!r}")
        for name in ("phase", "amplitude", "drag_delta"):
            if not np.isfinite(getattr(self, name)):
                raise InvalidInputError(f"tone {name} must be finite, got {getattr(self, name)!r}")


@dataclass(frozen=True)
class PulseSchedule:
    """Per-transmon tone lists over a common gate time.

    gate_time/sample_dt must be an integer number of steps (1e-9 relative
    tolerance) and every carrier must stay below the Nyquist limit
    1/(2*sample_dt); the 0.02 ns default allows carriers up to 25 GHz.
    """

    gate_time: float
    channels: tuple[tuple[Tone, ...], ...]
    sample_dt: float = DEFAULT_SAMPLE_DT

    def __post_init__(self) -> None:
        if not (np.isfinite(self.gate_time) and self.gate_time > 0):
            raise InvalidInputError(f"gate_time must be positive, got {self.gate_time!r}")
        if not (np.isfinite(self.sample_dt) and self.sample_dt > 0):
            raise InvalidInputError(f"sample_dt must be positive, got {self.sample_dt!r}")
        ratio = self.gate_time / self.sample_dt
        if abs(ratio - round(ratio)) > 1e-9 * ratio or round(ratio) < 1:
            raise InvalidInputError(
                f"gate_time {self.gate_time!r} is not an integer multiple of "
                f"sample_dt {self.sample_dt!r}"
            )
        channels = tuple(tuple(ch) for ch in self.channels)
        object.__setattr__(self, "channels", channels)
        if not channels:
            raise InvalidInputError("schedule needs at least one channel")
        nyquist = 1.0 / (2.0 * self.sample_dt)
        for i, ch in enumerate(channels):
            for j, tone in enumerate(ch):
                if tone.frequency >= nyquist:
                    raise InvalidInputError(
                        f"channel {i} tone {j} carrier {tone.frequency} GHz is at or "
                        f"above the Nyquist limit {nyquist} GHz for sample_dt {self.sample_dt}"
                    )
                env = tone.envelope
                if env.kind == "gaussian" and not 0 <= env.t0 <= self.gate_time:
                    raise InvalidInputError(
                        f"channel {i} tone {j} gaussian t0 {env.t0} outside [0, {self.gate_time}]"
                    )

    @property
    def n_steps(self) -> int:
        return int(round(self.gate_time / self.sample_dt))


def envelope_value(env: Envelope, t, gate_time: float):
    """Envelope value s(t) on [0, gate_time]; scalar or array `t`.

    gaussian: exp(-(t-t0)^2 / (2 sigma^2)); rectangular: 1; flattop: unit
    plateau with cosine ramps of the configured rise time at both ends.
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0) or np.any(t_arr > gate_time):
        raise InvalidInputError(f"t outside [0, {gate_time}]")
    if env.kind == "gaussian":
        out = np.exp(-((t_arr - env.t0) ** 2) / (2.0 * env.sigma**2))
    elif env.kind == "rectangular":
        out = np.ones_like(t_arr)
    else:
        out = np.ones_like(t_arr)
        rise = env.rise
        if rise > 0:
            head = t_arr < rise
            tail = t_arr > gate_time - rise
            out = np.where(head, 0.5 * (1 - np.cos(np.pi * t_arr / rise)), out)
            out = np.where(tail, 0.5 * (1 - np.cos(np.pi * (gate_time - t_arr) / rise)), out)
    return out if out.ndim else float(out)


def _envelope_slope(env: Envelope, t, gate_time: float, fd_step: float):
    """ds/dt; analytic for gaussian, central finite difference otherwise."""
    t_arr = np.asarray(t, dtype=float)
    if env.kind == "gaussian":
        s = envelope_value(env, t_arr, gate_time)
        out = -(t_arr - env.t0) / env.sigma**2 * s
    else:
        hi = np.minimum(t_arr + fd_step, gate_time)
        lo = np.maximum(t_arr - fd_step, 0.0)
        out = (envelope_value(env, hi, gate_time) - envelope_value(env, lo, gate_time)) / (hi - lo)
    return out if out.ndim else float(out)


def drag_envelope(
    env: Envelope,
    t,
    anharmonicity: float,
    delta: float,
    gate_time: float,
    fd_step: float = DEFAULT_SAMPLE_DT,
):
    """Complex DRAG-corrected envelope s(t) - i*delta*sdot(t)/anharmonicity.

    Raises ZeroDivisionError for anharmonicity one could not divide by.
    """
    if anharmonicity == 0:
        raise ZeroDivisionError("DRAG correction divides by the anharmonicity, which is 0")
    s = envelope_value(env, t, gate_time)
    if delta == 0:
        return s + 0j if np.ndim(s) == 0 else s.astype(complex)
    sdot = _envelope_slope(env, t, gate_time, fd_step)
    return s - 1j * delta * sdot / anharmonicity


def sample_times(gate_time: float, dt: float) -> np.ndarray:
    """Midpoint sample times (k + 1/2)*dt for k = 0 .. N-1."""
    n = int(round(gate_time / dt))
    return (np.arange(n) + 0.5) * dt


def _tone_values(
    tones,
    t,
    gate_time: float,
    dt: float,
    anharmonicity: float | None,
) -> np.ndarray:
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    total = np.zeros_like(t_arr)
    for tone in tones:
        if tone.drag_delta != 0:
            if anharmonicity is None:
                raise InvalidInputError(
                    "tone has a DRAG coefficient but no anharmonicity was supplied"
                )
            env = drag_envelope(
                tone.envelope, t_arr, anharmonicity, tone.drag_delta, gate_time, fd_step=dt
            )
        else:
            env = envelope_value(tone.envelope, t_arr, gate_time).astype(complex)
        carrier = np.exp(1j * (2 * np.pi * tone.frequency * t_arr + tone.phase))
        total = total + tone.amplitude * (env * carrier).real
    return total


def sample_channel(
    tones,
    gate_time: float,
    dt: float,
    anharmonicity: float | None = None,
) -> np.ndarray:
    """Sampled waveform of one channel at interval midpoints.

    Sample k is sum over tones of Re[A * s~(t_k) * exp(i(2 pi f t_k + phi))]
    at t_k = (k + 1/2) dt, the I/Q-mixed form of a complex envelope on a
    real carrier. `anharmonicity` (GHz) is required when any tone carries a
    DRAG coefficient.
    """
    return _tone_values(tones, sample_times(gate_time, dt), gate_time, dt, anharmonicity)


def channel_waveforms(spec: DeviceSpec, schedule: PulseSchedule) -> np.ndarray:
    """All channel waveforms stacked as shape (n_channels, n_steps)."""
    if len(schedule.channels) != spec.n_transmons:
        raise DimensionError(
            f"schedule has {len(schedule.channels)} channels for "
            f"{spec.n_transmons} transmons"
        )
    return np.stack(
        [
            sample_channel(
                ch,
                schedule.gate_time,
                schedule.sample_dt,
                anharmonicity=spec.transmons[i].anharmonicity,
            )
            for i, ch in enumerate(schedule.channels)
        ]
    )


def drive_operators(spec: DeviceSpec) -> list[np.ndarray]:
    """Per-transmon drive operators a_i + a_i^dag embedded in the product space."""
    ops = []
    dims = [t.levels for t in spec.transmons]
    for i, t in enumerate(spec.transmons):
        a, ad = ladder_ops(t.levels)
        before = int(np.prod(dims[:i], initial=1))
        after = int(np.prod(dims[i + 1 :], initial=1))
        ops.append(np.kron(np.kron(np.eye(before), a + ad), np.eye(after)))
    return ops


def drive_hamiltonian_at(spec: DeviceSpec, schedule: PulseSchedule, t: float) -> np.ndarray:
    """Instantaneous drive Hamiltonian sum_i v_i(t) * (a_i + a_i^dag) in GHz."""
    if not 0 <= t <= schedule.gate_time:
        raise InvalidInputError(f"t {t!r} outside [0, {schedule.gate_time}]")
    if len(schedule.channels) != spec.n_transmons:
        raise DimensionError(
            f"schedule has {len(schedule.channels)} channels for "
            f"{spec.n_transmons} transmons"
        )
    ops = drive_operators(spec)
    h = np.zeros((spec.dimension, spec.dimension))
    for i, ch in enumerate(schedule.channels):
        v = _tone_values(
            ch, t, schedule.gate_time, schedule.sample_dt,
            spec.transmons[i].anharmonicity,
        )
        h = h + float(v[0]) * ops[i]
    return h


def _channel_headers(base: str, n: int) -> list[str]:
    if n == 1:
        return [base]
    return [f"{base}_ch{i + 1}" for i in range(n)]


def write_waveform_csv(path, spec: DeviceSpec, schedule: PulseSchedule) -> None:
    """Write the sampled waveforms as CSV with a time_ns column."""
    waves = channel_waveforms(spec, schedule)
    times = sample_times(schedule.gate_time, schedule.sample_dt)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time_ns"] + _channel_headers("value", waves.shape[0]))
        for k in range(times.size):
            writer.writerow([repr(float(times[k]))] + [repr(float(w[k])) for w in waves])


def write_spectrum_csv(path, spec: DeviceSpec, schedule: PulseSchedule) -> None:
    """Write the one-sided normalized waveform spectra as CSV in GHz."""
    waves = channel_waveforms(spec, schedule)
    mags = []
    freqs = None
    for w in waves:
        freqs, m = fft_spectrum(w, schedule.sample_dt)
        mags.append(m)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["freq_GHz"] + _channel_headers("normalized_magnitude", len(mags)))
        for k in range(freqs.size):
            writer.writerow([repr(float(freqs[k]))] + [repr(float(m[k])) for m in mags])
