"""Pulse-level synthesis of qubit gates on driven transmons.

Each transmon hosts two effective qubits in its lowest four levels; a
fifth level tracks leakage. The library builds drive schedules from
parameterized tones, propagates the time-dependent Hamiltonian, scores
the result against ideal gates, and tunes pulse parameters by
gradient-based optimization, including frequency-comb pruning for
cross-transmon gates.
"""

from .config import (
    ExperimentConfig,
    OptimizerSettings,
    dump_config,
    load_config,
    parse_config,
    save_config,
)
from .device import (
    BasisMap,
    DeviceSpec,
    TransmonSpec,
    bare_map,
    dressed_map,
    drift_hamiltonian,
    pauli_decompose,
    pauli_reconstruct,
    relabel_map,
    transition_frequency,
)
from .dynamics import (
    UnitaryResult,
    error_matrix,
    fidelity,
    leakage,
    phase_alignment_times,
    project_to_computational,
    propagate,
    stark_shifted_spectrum,
    to_rotating_frame,
)
from .errors import (
    ConfigError,
    DegeneracyError,
    DimensionError,
    GateSynthError,
    GradientEvaluationError,
    InvalidInputError,
    NonHermitianError,
    PhaseAnchorError,
)
from .experiment import ExperimentOutcome, annotate_spectrum, run_experiment
from .gates import GateName, GateTarget, build_gate
from .linalg import expm_i, fft_spectrum, hermitian_eig, is_hermitian, kron, ladder_ops
from .optimize import (
    OptimizationReport,
    ParameterEntry,
    ParameterSpace,
    PruningSchedule,
    PruningStage,
    comb_parameter_space,
    evaluate_goal,
    gradient,
    initial_comb,
    make_evaluator,
    minimize,
    prune_and_reoptimize,
    prune_tones,
)
from .pulses import (
    Envelope,
    PulseSchedule,
    Tone,
    channel_waveforms,
    drag_envelope,
    drive_operators,
    envelope_value,
    sample_channel,
    sample_times,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
