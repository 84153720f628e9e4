import numpy as np
import pytest

from gatesynth.device import DeviceSpec, TransmonSpec
from gatesynth.errors import DimensionError, InvalidInputError
from gatesynth.pulses import (
    Envelope,
    PulseSchedule,
    Tone,
    channel_waveforms,
    drag_envelope,
    drive_hamiltonian_at,
    drive_operators,
    envelope_value,
    sample_channel,
    sample_times,
    write_spectrum_csv,
    write_waveform_csv,
)

from oracles import gaussian_symbolic_slope

T1 = TransmonSpec(omega=5.0, anharmonicity=0.3, levels=5)
T2 = TransmonSpec(omega=4.5, anharmonicity=0.25, levels=5)
GAUSS = Envelope.gaussian(t0=20.0, sigma=8.0)


def simple_schedule(**kwargs):
    tone = Tone(frequency=5.0, phase=0.0, amplitude=0.01, envelope=GAUSS)
    defaults = dict(gate_time=40.0, channels=((tone,),))
    defaults.update(kwargs)
    return PulseSchedule(**defaults)


def test_envelope_validation():
    with pytest.raises(InvalidInputError):
        Envelope(kind="gaussian", t0=20.0)
    with pytest.raises(InvalidInputError):
        Envelope.gaussian(t0=20.0, sigma=-1.0)
    with pytest.raises(InvalidInputError):
        Envelope(kind="rectangular", t0=5.0)
    with pytest.raises(InvalidInputError):
        Envelope(kind="flattop")
    with pytest.raises(InvalidInputError):
        Envelope(kind="cosine")


def test_envelope_values():
    assert envelope_value(GAUSS, 20.0, 40.0) == pytest.approx(1.0)
    assert envelope_value(GAUSS, 28.0, 40.0) == pytest.approx(np.exp(-0.5))
    assert envelope_value(Envelope.rectangular(), 13.0, 40.0) == 1.0
    flat = Envelope.flattop(rise=10.0)
    assert envelope_value(flat, 0.0, 40.0) == pytest.approx(0.0)
    assert envelope_value(flat, 5.0, 40.0) == pytest.approx(0.5)
    assert envelope_value(flat, 20.0, 40.0) == 1.0
    assert envelope_value(flat, 35.0, 40.0) == pytest.approx(0.5)
    with pytest.raises(InvalidInputError):
        envelope_value(GAUSS, 41.0, 40.0)
    with pytest.raises(InvalidInputError):
        envelope_value(GAUSS, -0.5, 40.0)


def test_tone_validation():
    with pytest.raises(InvalidInputError):
        Tone(frequency=0.0, phase=0.0, amplitude=0.01, envelope=GAUSS)
    with pytest.raises(InvalidInputError):
        Tone(frequency=5.0, phase=np.nan, amplitude=0.01, envelope=GAUSS)


def test_schedule_validation():
    with pytest.raises(InvalidInputError):
        simple_schedule(gate_time=40.01)  # not an integer step count
    with pytest.raises(InvalidInputError):
        simple_schedule(channels=())
    # carrier above Nyquist for dt = 0.02 (25 GHz)
    hot = Tone(frequency=30.0, phase=0.0, amplitude=0.01, envelope=GAUSS)
    with pytest.raises(InvalidInputError) as err:
        PulseSchedule(gate_time=40.0, channels=((hot,),))
    assert "Nyquist" in str(err.value)
    # gaussian center outside the gate window
    late = Tone(frequency=5.0, phase=0.0, amplitude=0.01,
                envelope=Envelope.gaussian(t0=50.0, sigma=8.0))
    with pytest.raises(InvalidInputError):
        PulseSchedule(gate_time=40.0, channels=((late,),))
    assert simple_schedule().n_steps == 2000


def test_sample_times_are_midpoints():
    t = sample_times(1.0, 0.25)
    assert np.allclose(t, [0.125, 0.375, 0.625, 0.875])


def test_drag_envelope_matches_symbolic_derivative():
    delta, lam = 0.7, 0.3
    for at in (5.0, 20.0, 33.0):
        val = drag_envelope(GAUSS, at, lam, delta, 40.0)
        sdot = gaussian_symbolic_slope(20.0, 8.0, at)
        expected = envelope_value(GAUSS, at, 40.0) - 1j * delta * sdot / lam
        assert val == pytest.approx(expected, abs=1e-12)


def test_drag_envelope_flattop_slope_is_finite_difference():
    flat = Envelope.flattop(rise=10.0)
    h = 0.02
    at = 5.0
    sdot = (envelope_value(flat, at + h, 40.0) - envelope_value(flat, at - h, 40.0)) / (2 * h)
    val = drag_envelope(flat, at, 0.3, 0.5, 40.0, fd_step=h)
    assert val.imag == pytest.approx(-0.5 * sdot / 0.3, abs=1e-12)


def test_drag_envelope_zero_anharmonicity():
    with pytest.raises(ZeroDivisionError):
        drag_envelope(GAUSS, 20.0, 0.0, 0.5, 40.0)


def test_drag_requires_anharmonicity_when_used():
    tone = Tone(frequency=5.0, phase=0.0, amplitude=0.01, envelope=GAUSS, drag_delta=0.3)
    with pytest.raises(InvalidInputError):
        sample_channel((tone,), 40.0, 0.02)
    # fine without DRAG
    plain = Tone(frequency=5.0, phase=0.0, amplitude=0.01, envelope=GAUSS)
    assert sample_channel((plain,), 40.0, 0.02).shape == (2000,)


def test_sample_channel_is_sum_of_tones():
    tone_a = Tone(frequency=5.0, phase=0.3, amplitude=0.01, envelope=GAUSS)
    tone_b = Tone(frequency=4.4, phase=-0.2, amplitude=0.02, envelope=Envelope.rectangular())
    both = sample_channel((tone_a, tone_b), 40.0, 0.02)
    separate = sample_channel((tone_a,), 40.0, 0.02) + sample_channel((tone_b,), 40.0, 0.02)
    assert np.allclose(both, separate, atol=1e-15)


def test_sample_channel_matches_closed_form():
    tone = Tone(frequency=5.0, phase=0.7, amplitude=0.013, envelope=GAUSS)
    t = sample_times(40.0, 0.02)
    expected = 0.013 * np.exp(-((t - 20.0) ** 2) / (2 * 64.0)) * np.cos(2 * np.pi * 5.0 * t + 0.7)
    assert np.allclose(sample_channel((tone,), 40.0, 0.02), expected, atol=1e-15)


def test_drag_shifts_quadrature():
    # with DRAG the sampled value picks up the sine quadrature of the slope
    tone = Tone(frequency=5.0, phase=0.0, amplitude=0.01, envelope=GAUSS, drag_delta=0.5)
    t = sample_times(40.0, 0.02)
    s = np.exp(-((t - 20.0) ** 2) / (2 * 64.0))
    sdot = -(t - 20.0) / 64.0 * s
    expected = 0.01 * (
        s * np.cos(2 * np.pi * 5.0 * t) + 0.5 * sdot / 0.3 * np.sin(2 * np.pi * 5.0 * t)
    )
    got = sample_channel((tone,), 40.0, 0.02, anharmonicity=0.3)
    assert np.allclose(got, expected, atol=1e-15)


def test_channel_waveforms_shape_and_mismatch():
    pair = DeviceSpec(transmons=(T1, T2), coupling=0.02)
    tone = Tone(frequency=5.0, phase=0.0, amplitude=0.01, envelope=GAUSS)
    sched = PulseSchedule(gate_time=40.0, channels=((tone,), (tone,)))
    assert channel_waveforms(pair, sched).shape == (2, 2000)
    single = DeviceSpec(transmons=(T1,))
    with pytest.raises(DimensionError):
        channel_waveforms(single, sched)


def test_drive_operators_embedding():
    pair = DeviceSpec(transmons=(T1, T2), coupling=0.02)
    ops = drive_operators(pair)
    assert len(ops) == 2
    a = np.diag(np.sqrt(np.arange(1.0, 5.0)), k=1)
    x = a + a.T
    assert np.allclose(ops[0], np.kron(x, np.eye(5)), atol=1e-15)
    assert np.allclose(ops[1], np.kron(np.eye(5), x), atol=1e-15)


def test_drive_hamiltonian_at():
    dev = DeviceSpec(transmons=(T1,))
    sched = simple_schedule()
    h = drive_hamiltonian_at(dev, sched, 20.0)
    # at the gaussian peak the 0-1 element is A*cos(2 pi f t + phi)
    assert h[0, 1] == pytest.approx(0.01 * np.cos(2 * np.pi * 5.0 * 20.0), abs=1e-12)
    assert np.allclose(h, h.T, atol=1e-15)
    with pytest.raises(InvalidInputError):
        drive_hamiltonian_at(dev, sched, 41.0)


def test_waveform_csv_round_trip(tmp_path):
    dev = DeviceSpec(transmons=(T1,))
    sched = simple_schedule()
    path = tmp_path / "waveform.csv"
    write_waveform_csv(path, dev, sched)
    rows = np.genfromtxt(path, delimiter=",", names=True)
    assert rows.dtype.names == ("time_ns", "value")
    assert rows["time_ns"].size == 2000
    assert np.allclose(rows["value"], sample_channel(sched.channels[0], 40.0, 0.02), atol=1e-15)


def test_spectrum_csv_peaks_at_carrier(tmp_path):
    dev = DeviceSpec(transmons=(T1, T2), coupling=0.02)
    tone1 = Tone(frequency=5.0, phase=0.0, amplitude=0.01, envelope=GAUSS)
    tone2 = Tone(frequency=4.0, phase=0.0, amplitude=0.01, envelope=GAUSS)
    sched = PulseSchedule(gate_time=40.0, channels=((tone1,), (tone2,)))
    path = tmp_path / "spectrum.csv"
    write_spectrum_csv(path, dev, sched)
    rows = np.genfromtxt(path, delimiter=",", names=True)
    assert rows.dtype.names == ("freq_GHz", "normalized_magnitude_ch1", "normalized_magnitude_ch2")
    f = rows["freq_GHz"]
    assert f[np.argmax(rows["normalized_magnitude_ch1"])] == pytest.approx(5.0, abs=f[1])
    assert f[np.argmax(rows["normalized_magnitude_ch2"])] == pytest.approx(4.0, abs=f[1])
