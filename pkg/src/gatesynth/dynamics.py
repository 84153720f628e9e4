"""Piecewise-constant propagation, frames, projection and gate diagnostics.

The propagator is the time-ordered product of per-step unitaries
exp(-2*pi*i*H(t_k)*dt) with H sampled at interval midpoints. Because sampled
waveforms are real, every step Hamiltonian is real symmetric; the step
unitaries come from one batched eigendecomposition per chunk and are folded
with an ordered pairwise product, which is the parallel-map-then-ordered-
reduction shape at full numpy speed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .device import BasisMap, DeviceSpec, TransmonSpec, bare_map, drift_hamiltonian
from .errors import DimensionError, InvalidInputError, PhaseAnchorError
from .gates import GateTarget
from .linalg import hermitian_eig
from .pulses import PulseSchedule, channel_waveforms, drive_hamiltonian_at, drive_operators, sample_times

PROPAGATION_CHUNK = 4096


@dataclass(frozen=True)
class UnitaryResult:
    """A propagator with its basis metadata.

    `basis` is None for truncations too small to host the qubit register
    (used by analytic cross-checks); `frame` records the per-transmon
    rotating-frame frequencies once `to_rotating_frame` has been applied.
    """

    matrix: np.ndarray
    basis: BasisMap | None
    gate_time: float
    frame: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        u = np.asarray(self.matrix)
        dev = np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0]))
        if dev > 1e-8:
            raise InvalidInputError(
                f"propagator deviates from unitarity by {dev:.3e} (budget 1e-8)"
            )


def step_hamiltonians(
    spec: DeviceSpec, schedule: PulseSchedule, start: int = 0, count: int | None = None
) -> np.ndarray:
    """Midpoint-sampled step Hamiltonians H0 + H_d(t_k), shape (count, d, d)."""
    if len(schedule.channels) != spec.n_transmons:
        raise DimensionError(
            f"schedule has {len(schedule.channels)} channels for {spec.n_transmons} transmons"
        )
    n = schedule.n_steps
    if count is None:
        count = n - start
    if not 0 <= start <= start + count <= n:
        raise InvalidInputError(f"step range [{start}, {start + count}) outside [0, {n})")
    h0 = drift_hamiltonian(spec)
    waves = channel_waveforms(spec, schedule)[:, start : start + count]
    ops = drive_operators(spec)
    hs = np.broadcast_to(h0, (count,) + h0.shape).copy()
    for i, op in enumerate(ops):
        hs += waves[i][:, np.newaxis, np.newaxis] * op
    return hs


def _ordered_product(u: np.ndarray) -> np.ndarray:
    """Fold a stack of step unitaries into u[-1] @ ... @ u[0] pairwise."""
    while u.shape[0] > 1:
        m = u.shape[0]
        k = m // 2
        prod = np.matmul(u[1 : 2 * k : 2], u[0 : 2 * k : 2])
        u = np.concatenate([prod, u[-1:]]) if m % 2 else prod
    return u[0]


def propagate(spec: DeviceSpec, schedule: PulseSchedule) -> UnitaryResult:
    """Time-ordered propagator of drift plus drive over the gate time.

    Returns the bare-basis unitary U = prod_k exp(-2*pi*i*H(t_k)*dt), with
    steps processed in memory-bounded chunks.
    """
    n = schedule.n_steps
    dt = schedule.sample_dt
    total: np.ndarray | None = None
    for startk in range(0, n, PROPAGATION_CHUNK):
        hs = step_hamiltonians(spec, schedule, startk, min(PROPAGATION_CHUNK, n - startk))
        w, v = np.linalg.eigh(hs)
        # real-symmetric steps: build exp(-i*theta) = cos - i*sin with two
        # real matmuls instead of one complex one
        angle = (2 * np.pi * dt) * w[:, np.newaxis, :]
        vt = v.transpose(0, 2, 1)
        steps = (v * np.cos(angle)) @ vt - 1j * ((v * np.sin(angle)) @ vt)
        chunk_u = _ordered_product(steps)
        total = chunk_u if total is None else chunk_u @ total
    levels = tuple(t.levels for t in spec.transmons)
    basis = bare_map(spec.n_transmons, levels) if min(levels) >= 4 else None
    return UnitaryResult(matrix=total, basis=basis, gate_time=schedule.gate_time)


def _number_vector(spec: DeviceSpec) -> list[np.ndarray]:
    """Per-transmon occupation number of each bare product-basis index."""
    dims = [t.levels for t in spec.transmons]
    grids = np.indices(dims).reshape(len(dims), -1)
    return [g.astype(float) for g in grids]


def to_rotating_frame(
    result: UnitaryResult, spec: DeviceSpec, frame: float | tuple[float, ...]
) -> UnitaryResult:
    """Transform into the harmonic number-operator frame.

    With T(t) = exp(-2*pi*i*t*sum_i f_i n_i), returns T(T_gate)^dag U T(0);
    T(0) is the identity, so only the final-time phase twist acts. The drift
    anharmonicity is untouched by this frame.
    """
    freqs = (frame,) * spec.n_transmons if np.isscalar(frame) else tuple(frame)
    if len(freqs) != spec.n_transmons:
        raise DimensionError(
            f"got {len(freqs)} frame frequencies for {spec.n_transmons} transmons"
        )
    numbers = _number_vector(spec)
    phase_freq = sum(f * n for f, n in zip(freqs, numbers))
    twist = np.exp(2j * np.pi * result.gate_time * phase_freq)
    return UnitaryResult(
        matrix=twist[:, np.newaxis] * result.matrix,
        basis=result.basis,
        gate_time=result.gate_time,
        frame=tuple(float(f) for f in freqs),
    )


def project_to_computational(result: UnitaryResult | np.ndarray, basis: BasisMap) -> np.ndarray:
    """Submatrix of a propagator on the computational subspace.

    For a dressed map the propagator is first conjugated into the dressed
    basis. The result is NOT re-unitarized: leakage out of the subspace shows
    up as column norms below 1.
    """
    u = result.matrix if isinstance(result, UnitaryResult) else np.asarray(result)
    idx = list(basis.computational_indices)
    if max(idx) >= u.shape[0]:
        raise DimensionError(
            f"computational index {max(idx)} outside propagator dimension {u.shape[0]}"
        )
    if basis.kind == "dressed":
        t = basis.transform
        u = t.conj().T @ u @ t
    return u[np.ix_(idx, idx)]


def leakage(u_proj: np.ndarray) -> float:
    """Mean population lost outside the computational subspace, in [0, 1]."""
    norms2 = np.sum(np.abs(u_proj) ** 2, axis=0)
    return float(1.0 - norms2.mean())


def fidelity(u_proj: np.ndarray, target: GateTarget) -> float:
    """Global-phase-invariant overlap |tr(U^dag G)| / d on the subspace."""
    u_proj = np.asarray(u_proj)
    if u_proj.shape != target.ideal.shape:
        raise DimensionError(
            f"propagator shape {u_proj.shape} does not match target {target.ideal.shape}"
        )
    d = target.dimension
    return float(np.abs(np.trace(u_proj.conj().T @ target.ideal)) / d)


def error_matrix(u_proj: np.ndarray, target: GateTarget) -> np.ndarray:
    """Phase-anchored difference U*exp(i*phi) - G.

    phi = arg(G00) - arg(U00) aligns the (0,0) entries, exposing elementwise
    deviations with the global phase removed.
    """
    u_proj = np.asarray(u_proj)
    if u_proj.shape != target.ideal.shape:
        raise DimensionError(
            f"propagator shape {u_proj.shape} does not match target {target.ideal.shape}"
        )
    g = target.ideal
    if abs(u_proj[0, 0]) < 1e-12 or abs(g[0, 0]) < 1e-12:
        diag_floor = np.minimum(np.abs(np.diag(u_proj)), np.abs(np.diag(g)))
        alt = int(np.argmax(diag_floor))
        raise PhaseAnchorError(
            f"entry (0,0) too small to anchor the relative phase; "
            f"diagonal index {alt} would anchor"
        )
    phi = np.angle(g[0, 0]) - np.angle(u_proj[0, 0])
    return u_proj * np.exp(1j * phi) - g


def _alignment_residual(spec: TransmonSpec, frame: float, t, ns: tuple[int, ...]):
    t = np.asarray(t, dtype=float)
    worst = np.zeros_like(t)
    for n in ns:
        # ladder formula directly: alignment depends on omega and the
        # anharmonicity, not on where the simulation truncates
        e_n = n * spec.omega - n * (n - 1) / 2 * spec.anharmonicity
        x = (e_n - n * frame) * t
        worst = np.maximum(worst, np.abs(x - np.round(x)))
    return worst


def phase_alignment_times(
    spec: TransmonSpec,
    frame: float,
    t_max: float,
    tol: float,
    grid: float = 1.0,
    include_leakage_level: bool = False,
    refine: bool = False,
) -> list[float]:
    """Gate times at which all computational-level frame phases are integer.

    Scans multiples of `grid` (1 ns by default) up to `t_max` and accepts
    times where (E_n - n*frame)*t is within `tol` cycles of an integer for
    n in {1, 2, 3} (and n=4 when `include_leakage_level`). With `refine`,
    each grid cell is additionally searched for an interior alignment, which
    can land between grid points.
    """
    if not 0 < tol < 0.5:
        raise InvalidInputError(f"tol must lie in (0, 0.5), got {tol!r}")
    if grid <= 0 or t_max <= 0:
        raise InvalidInputError("grid and t_max must be positive")
    ns = (1, 2, 3, 4) if include_leakage_level else (1, 2, 3)
    candidates = np.arange(grid, t_max + grid * 1e-9, grid)
    residual = _alignment_residual(spec, frame, candidates, ns)
    times = [float(t) for t, r in zip(candidates, residual) if r < tol]
    if refine:
        for cell in candidates:
            lo, hi = max(cell - grid / 2, grid * 1e-6), min(cell + grid / 2, t_max)
            fine = np.linspace(lo, hi, 2001)
            r = _alignment_residual(spec, frame, fine, ns)
            k = int(np.argmin(r))
            a, b = fine[max(k - 1, 0)], fine[min(k + 1, fine.size - 1)]
            # golden-section polish of the piecewise-linear residual
            gr = (np.sqrt(5.0) - 1) / 2
            for _ in range(80):
                c, d = b - gr * (b - a), a + gr * (b - a)
                if _alignment_residual(spec, frame, c, ns) < _alignment_residual(spec, frame, d, ns):
                    b = d
                else:
                    a = c
            t_star = float((a + b) / 2)
            if _alignment_residual(spec, frame, t_star, ns) < tol and not any(
                abs(t_star - t) < grid * 1e-6 for t in times
            ):
                times.append(t_star)
        times.sort()
    return times


def stark_shifted_spectrum(spec: DeviceSpec, schedule: PulseSchedule) -> np.ndarray:
    """Eigenvalues (GHz, ascending) of drift plus drive frozen at T/2.

    The mid-pulse Hamiltonian stands in for the average dressing the drive
    imposes; its level differences are the shifted resonances.
    """
    h = drift_hamiltonian(spec) + drive_hamiltonian_at(spec, schedule, schedule.gate_time / 2)
    return hermitian_eig(h).eigenvalues


def write_propagator_csv(path, matrix: np.ndarray | UnitaryResult) -> None:
    """Write complex entries plus magnitude/phase as CSV."""
    u = matrix.matrix if isinstance(matrix, UnitaryResult) else np.asarray(matrix)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", "col", "re", "im", "abs", "phase"])
        for r in range(u.shape[0]):
            for c in range(u.shape[1]):
                z = complex(u[r, c])
                writer.writerow(
                    [r, c, repr(z.real), repr(z.imag), repr(abs(z)), repr(float(np.angle(z)))]
                )
