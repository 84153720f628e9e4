"""Parameter-vector mapping, goal evaluation, L-BFGS minimization, pruning.

The optimizer works in scaled coordinates (physical value divided by the
entry's scale factor) so that amplitudes in volts, frequencies in GHz and
times in ns condition comparably. Gradients are central finite differences;
the evaluation budget counts every goal call, stencil points included.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, replace

import numpy as np

from .device import BasisMap, DeviceSpec
from .dynamics import fidelity, project_to_computational, propagate
from .errors import GradientEvaluationError, InvalidInputError
from .gates import GateTarget
from .pulses import DEFAULT_SAMPLE_DT, Envelope, PulseSchedule, Tone

TONE_FIELDS = ("frequency", "phase", "amplitude", "drag_delta")
ENVELOPE_FIELDS = ("t0", "sigma", "rise")
SCHEDULE_FIELDS = ("gate_time",)


@dataclass(frozen=True)
class ParameterEntry:
    """One optimizable scalar: a tone/envelope/schedule field with bounds.

    `channel` and `tone` address into the schedule (None for gate_time).
    `scale` divides the physical value to form the optimizer coordinate.
    Frozen entries keep their initial value and get exact-zero gradients.
    """

    field: str
    channel: int | None = None
    tone: int | None = None
    lower: float = -np.inf
    upper: float = np.inf
    scale: float = 1.0
    frozen: bool = False

    def __post_init__(self) -> None:
        known = TONE_FIELDS + ENVELOPE_FIELDS + SCHEDULE_FIELDS
        if self.field not in known:
            raise InvalidInputError(f"unknown parameter field {self.field!r}")
        if self.field in SCHEDULE_FIELDS:
            if self.channel is not None or self.tone is not None:
                raise InvalidInputError(f"{self.field} is schedule-level; channel/tone must be None")
        else:
            if self.channel is None or self.tone is None:
                raise InvalidInputError(f"{self.field} needs channel and tone indices")
        if not (np.isfinite(self.lower) and np.isfinite(self.upper)):
            raise InvalidInputError(f"bounds must be finite, got [{self.lower}, {self.upper}]")
        if not self.lower < self.upper:
            raise InvalidInputError(f"lower bound {self.lower} must be below upper {self.upper}")
        if not (np.isfinite(self.scale) and self.scale > 0):
            raise InvalidInputError(f"scale must be positive, got {self.scale!r}")

    @property
    def name(self) -> str:
        if self.field in SCHEDULE_FIELDS:
            return self.field
        return f"channel {self.channel} tone {self.tone} {self.field}"


@dataclass(frozen=True)
class ParameterSpace:
    """An ordered set of parameter entries addressing one schedule."""

    entries: tuple[ParameterEntry, ...]

    def __post_init__(self) -> None:
        entries = tuple(self.entries)
        object.__setattr__(self, "entries", entries)
        if not entries:
            raise InvalidInputError("parameter space needs at least one entry")
        seen = set()
        for e in entries:
            key = (e.channel, e.tone, e.field)
            if key in seen:
                raise InvalidInputError(f"duplicate parameter address {e.name}")
            seen.add(key)

    def __len__(self) -> int:
        return len(self.entries)

    def _read(self, schedule: PulseSchedule, entry: ParameterEntry) -> float:
        if entry.field == "gate_time":
            return schedule.gate_time
        try:
            tone = schedule.channels[entry.channel][entry.tone]
        except IndexError:
            raise InvalidInputError(
                f"parameter {entry.name} does not resolve in the schedule"
            ) from None
        if entry.field in TONE_FIELDS:
            return getattr(tone, entry.field)
        value = getattr(tone.envelope, entry.field)
        if value is None:
            raise InvalidInputError(
                f"parameter {entry.name} does not apply to a "
                f"{tone.envelope.kind} envelope"
            )
        return value

    def initial_vector(self, schedule: PulseSchedule) -> np.ndarray:
        """Scaled coordinates of the schedule's current values."""
        return np.array([self._read(schedule, e) / e.scale for e in self.entries])

    def scaled_bounds(self, x0: np.ndarray) -> list[tuple[float, float]]:
        """Per-coordinate (lower, upper) in scaled units; frozen pins to x0."""
        out = []
        for e, x in zip(self.entries, x0):
            if e.frozen:
                out.append((float(x), float(x)))
            else:
                out.append((e.lower / e.scale, e.upper / e.scale))
        return out

    def apply(self, schedule: PulseSchedule, x: np.ndarray) -> PulseSchedule:
        """Schedule with the vector's physical values written in."""
        if len(x) != len(self.entries):
            raise InvalidInputError(f"expected {len(self.entries)} values, got {len(x)}")
        tone_updates: dict[tuple[int, int], dict[str, float]] = {}
        env_updates: dict[tuple[int, int], dict[str, float]] = {}
        gate_time = schedule.gate_time
        for e, xi in zip(self.entries, x):
            self._read(schedule, e)  # fails loudly on a dangling address
            value = float(xi) * e.scale
            if e.field == "gate_time":
                gate_time = value
            elif e.field in TONE_FIELDS:
                tone_updates.setdefault((e.channel, e.tone), {})[e.field] = value
            else:
                env_updates.setdefault((e.channel, e.tone), {})[e.field] = value
        channels = []
        for ci, ch in enumerate(schedule.channels):
            tones = []
            for ti, tone in enumerate(ch):
                env = tone.envelope
                if (ci, ti) in env_updates:
                    env = replace(env, **env_updates[(ci, ti)])
                fields = tone_updates.get((ci, ti), {})
                tones.append(replace(tone, envelope=env, **fields))
            channels.append(tuple(tones))
        return PulseSchedule(
            gate_time=gate_time, channels=tuple(channels), sample_dt=schedule.sample_dt
        )


@dataclass(frozen=True)
class OptimizationReport:
    """Outcome of one minimize call.

    `trace` holds the goal at the initial point and at every accepted
    iterate (non-increasing); `gradient_trace` the matching projected-
    gradient norms. `final_parameters` pairs each entry name with its
    optimized physical value.
    """

    initial_goal: float
    final_goal: float
    trace: tuple[float, ...]
    gradient_trace: tuple[float, ...]
    final_parameters: tuple[tuple[str, float], ...]
    final_point: np.ndarray
    gradient_norm: float
    termination: str
    n_evaluations: int
    wall_time_s: float


def evaluate_goal(
    spec: DeviceSpec, schedule: PulseSchedule, target: GateTarget, basis: BasisMap
) -> float:
    """Goal g = 1 - F of the schedule's propagator against the target."""
    u = project_to_computational(propagate(spec, schedule), basis)
    return 1.0 - fidelity(u, target)


def make_evaluator(
    spec: DeviceSpec,
    schedule: PulseSchedule,
    space: ParameterSpace,
    target: GateTarget,
    basis: BasisMap,
):
    """Pure map from a scaled parameter vector to the goal value."""

    def goal(x: np.ndarray) -> float:
        return evaluate_goal(spec, space.apply(schedule, x), target, basis)

    return goal


def gradient(space: ParameterSpace, point: np.ndarray, goal) -> np.ndarray:
    """Central finite-difference gradient in scaled coordinates.

    Step h_i = max(1e-7, 1e-7*|x_i|) per coordinate; frozen entries get an
    exact 0. A failing stencil evaluation is reported with the parameter
    name.
    """
    point = np.asarray(point, dtype=float)
    out = np.zeros(len(point))
    for i, entry in enumerate(space.entries):
        if entry.frozen:
            continue
        h = max(1e-7, 1e-7 * abs(point[i]))
        xp, xm = point.copy(), point.copy()
        xp[i] += h
        xm[i] -= h
        try:
            out[i] = (goal(xp) - goal(xm)) / (2 * h)
        except Exception as exc:
            raise GradientEvaluationError(
                f"goal evaluation failed while differencing {entry.name}: {exc}"
            ) from exc
    return out


class _BudgetExhausted(Exception):
    pass


class _GoalReached(Exception):
    pass


def _lbfgs_direction(pairs, g: np.ndarray) -> np.ndarray:
    """Two-loop recursion: -H·g from the stored curvature pairs."""
    q = g.copy()
    alphas = []
    for s, y, rho in reversed(pairs):
        a = rho * np.dot(s, q)
        q -= a * y
        alphas.append(a)
    if pairs:
        s, y, _ = pairs[-1]
        gamma = np.dot(s, y) / np.dot(y, y)
    else:
        # first step: unit-length steepest descent
        gamma = 1.0 / max(1.0, float(np.linalg.norm(g)))
    r = gamma * q
    for (s, y, rho), a in zip(pairs, reversed(alphas)):
        r += s * (a - rho * np.dot(y, r))
    return -r


def _backtrack(x, fx, g, d, lo, hi, feval, c1=1e-4, max_trials=40):
    """Projected backtracking line search with sufficient decrease.

    Trial steps are clipped onto the box before evaluation, so the Armijo
    test uses the realized step, not alpha*d. Rejected trials feed a
    quadratic (then cubic) interpolation of the step length. Returns
    (point, goal, accepted).
    """
    alpha = 1.0
    history = []
    for _ in range(max_trials):
        xt = np.clip(x + alpha * d, lo, hi)
        step = xt - x
        if not np.any(step):
            break
        ft = feval(xt)
        gstep = float(np.dot(g, step))
        if ft <= fx + c1 * gstep:
            return xt, ft, True
        slope = gstep / alpha
        if not history:
            denom = ft - fx - slope * alpha
            cand = -slope * alpha * alpha / (2 * denom) if denom > 0 else 0.5 * alpha
        else:
            a_prev, f_prev = history[-1]
            system = np.array([[alpha**2, alpha**3], [a_prev**2, a_prev**3]])
            rhs = np.array([ft - fx - slope * alpha, f_prev - fx - slope * a_prev])
            try:
                c2, c3 = np.linalg.solve(system, rhs)
                disc = c2 * c2 - 3 * c3 * slope
                if disc > 0 and abs(c3) > 1e-30:
                    cand = (-c2 + np.sqrt(disc)) / (3 * c3)
                else:
                    cand = 0.5 * alpha
            except np.linalg.LinAlgError:
                cand = 0.5 * alpha
        history.append((alpha, ft))
        alpha = float(np.clip(cand, 0.1 * alpha, 0.5 * alpha))
    return x, fx, False


def minimize(
    space: ParameterSpace,
    x0: np.ndarray,
    goal,
    budget: int,
    gtol: float = 1e-8,
    ftol: float = 1e-12,
    lbfgs_memory: int = 20,
    stop_goal: float | None = None,
) -> OptimizationReport:
    """Bounded limited-memory BFGS descent of the goal from x0.

    Search directions come from the two-loop recursion; trial points are
    projected onto the box and accepted by backtracking under sufficient
    decrease, so the accepted goal sequence is non-increasing and gradients
    are only ever computed at accepted iterates. Terminates when the
    projected gradient max-norm falls below `gtol`, the relative goal
    decrease per step falls below `ftol`, or the evaluation budget is spent
    (stencil evaluations included); budget exhaustion reports termination
    "budget" with the best in-bounds point seen, not an error. The
    initial-point evaluation is always performed and does not count against
    the budget, so a zero budget yields a report of the initial goal alone.
    With `stop_goal` set, descent also stops as soon as any in-bounds
    evaluation reaches that value (termination "goal"), which lets callers
    declare "converged enough" without spending the remaining budget.
    """
    x0 = np.asarray(x0, dtype=float)
    bounds = space.scaled_bounds(x0)
    for i, (xi, (lo_i, hi_i)) in enumerate(zip(x0, bounds)):
        if not lo_i - 1e-12 <= xi <= hi_i + 1e-12:
            raise InvalidInputError(
                f"initial value {xi} of {space.entries[i].name} outside [{lo_i}, {hi_i}] (scaled)"
            )
    start = time.perf_counter()
    initial_goal = float(goal(x0))
    cache: dict[bytes, float] = {x0.tobytes(): initial_goal}
    n_evals = 0
    best = {"x": x0.copy(), "f": initial_goal}
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])

    def counted_goal(x: np.ndarray) -> float:
        nonlocal n_evals
        x = np.asarray(x, dtype=float)
        key = x.tobytes()
        if key in cache:
            return cache[key]
        if n_evals >= budget:
            raise _BudgetExhausted
        n_evals += 1
        f = float(goal(x))
        cache[key] = f
        # stencil points may poke past the box; never report one as the result
        if f < best["f"] and np.all(x >= lo) and np.all(x <= hi):
            best["f"] = f
            best["x"] = x.copy()
            if stop_goal is not None and f <= stop_goal:
                raise _GoalReached
        return f

    def counted_grad(x: np.ndarray) -> np.ndarray:
        try:
            return gradient(space, x, counted_goal)
        except GradientEvaluationError as exc:
            if isinstance(exc.__cause__, (_BudgetExhausted, _GoalReached)):
                raise exc.__cause__ from None
            raise

    def projected(g: np.ndarray, x: np.ndarray) -> np.ndarray:
        pg = g.copy()
        pg[(x <= lo + 1e-12) & (g > 0)] = 0.0
        pg[(x >= hi - 1e-12) & (g < 0)] = 0.0
        return pg

    if stop_goal is not None and initial_goal <= stop_goal:
        physical = tuple(
            (e.name, float(x0[i]) * e.scale) for i, e in enumerate(space.entries)
        )
        return OptimizationReport(
            initial_goal=initial_goal,
            final_goal=initial_goal,
            trace=(initial_goal,),
            gradient_trace=(np.nan,),
            final_parameters=physical,
            final_point=x0.copy(),
            gradient_norm=np.nan,
            termination="goal",
            n_evaluations=0,
            wall_time_s=time.perf_counter() - start,
        )

    x = x0.copy()
    fx = initial_goal
    trace = [initial_goal]
    grad_trace = [np.nan]
    pairs: list[tuple[np.ndarray, np.ndarray, float]] = []
    grad_norm = np.nan
    termination = ""
    try:
        g = counted_grad(x)
        while True:
            grad_norm = float(np.max(np.abs(projected(g, x)))) if len(g) else 0.0
            grad_trace[-1] = grad_norm
            if grad_norm < gtol:
                termination = "converged_gradient"
                break
            if len(trace) >= 2:
                decrease = trace[-2] - trace[-1]
                if decrease <= ftol * max(abs(trace[-1]), abs(trace[-2]), 1.0):
                    termination = "converged_goal_change"
                    break
            d = _lbfgs_direction(pairs, g)
            if np.dot(d, g) >= 0.0:
                # stale curvature turned the step uphill; restart from scratch
                pairs.clear()
                d = -g / max(1.0, float(np.linalg.norm(g)))
            xt, ft, accepted = _backtrack(x, fx, g, d, lo, hi, counted_goal)
            if not accepted:
                termination = "converged_goal_change"
                break
            gt = counted_grad(xt)
            s = xt - x
            y = gt - g
            sy = float(np.dot(s, y))
            if sy > 1e-10 * float(np.linalg.norm(s)) * float(np.linalg.norm(y)):
                pairs.append((s, y, 1.0 / sy))
                if len(pairs) > lbfgs_memory:
                    pairs.pop(0)
            x, fx, g = xt, ft, gt
            trace.append(fx)
            grad_trace.append(np.nan)
    except _BudgetExhausted:
        termination = "budget"
    except _GoalReached:
        termination = "goal"

    final_x = best["x"]
    final_goal_value = best["f"]
    if trace[-1] > final_goal_value:
        trace.append(final_goal_value)
        grad_trace.append(grad_norm)
    physical = tuple(
        (e.name, float(final_x[i]) * e.scale) for i, e in enumerate(space.entries)
    )
    return OptimizationReport(
        initial_goal=initial_goal,
        final_goal=final_goal_value,
        trace=tuple(trace),
        gradient_trace=tuple(grad_trace),
        final_parameters=physical,
        final_point=final_x,
        gradient_norm=grad_norm,
        termination=termination,
        n_evaluations=n_evals,
        wall_time_s=time.perf_counter() - start,
    )


@dataclass(frozen=True)
class PruningSchedule:
    """Settings of the multi-tone comb and its iterative reduction.

    Tones start equally spaced across `band` with rectangular envelopes;
    channel 0 amplitudes start at `amplitude_scale` volts and every further
    channel two orders of magnitude below that. Each round removes the
    lowest-|amplitude| tones per channel (ties: lowest frequency first) and
    reoptimizes, until `min_tones` remain.

    `frozen_channels` pins every parameter of the named channels at its
    initial value (a weakly driven channel can be carried along without
    paying gradient evaluations for it). `frequency_scale` conditions the
    tone-frequency coordinates; None picks 1/gate_time, the spectral
    linewidth, so one optimizer unit is one resolvable frequency step.
    `stage_stop_goal` ends each stage's descent early once the goal is
    good enough, leaving budget for later stages. `warmup_budget` spends
    that many evaluations on a phases-frozen descent of the full comb
    before the first stage (phase gradients cost as much as the rest
    combined but matter only near the end, so amplitude/frequency-first
    reaches a given goal in fewer evaluations).
    """

    initial_tones: int = 200
    removal_fraction: float = 0.25
    removal_count: int | None = None
    min_tones: int = 1
    goal_threshold: float | None = None
    band: tuple[float, float] = (2.5, 5.5)
    amplitude_scale: float = 0.01
    amplitude_bound_factor: float = 20.0
    optimize_frequencies: bool = True
    budget_per_round: int = 2000
    seed: int = 0
    frozen_channels: tuple[int, ...] = ()
    frequency_scale: float | None = None
    stage_stop_goal: float | None = None
    warmup_budget: int = 0

    def __post_init__(self) -> None:
        if self.initial_tones < 1 or self.min_tones < 1:
            raise InvalidInputError("tone counts must stay >= 1")
        if self.min_tones > self.initial_tones:
            raise InvalidInputError("min_tones exceeds initial_tones")
        if self.removal_count is None and not 0 < self.removal_fraction < 1:
            raise InvalidInputError("removal_fraction must lie in (0, 1)")
        if self.band[0] <= 0 or self.band[1] <= self.band[0]:
            raise InvalidInputError(f"invalid frequency band {self.band!r}")
        object.__setattr__(self, "frozen_channels", tuple(self.frozen_channels))
        if any(c < 0 for c in self.frozen_channels):
            raise InvalidInputError("frozen channel indices must be >= 0")
        if self.frequency_scale is not None and not self.frequency_scale > 0:
            raise InvalidInputError("frequency_scale must be positive")
        if self.warmup_budget < 0:
            raise InvalidInputError("warmup_budget must be >= 0")


@dataclass(frozen=True)
class PruningStage:
    """One point of the pruning curve: reoptimized result at a tone count."""

    tone_count: int
    fidelity: float
    schedule: PulseSchedule
    report: OptimizationReport


def initial_comb(
    spec: DeviceSpec, pruning: PruningSchedule, gate_time: float, sample_dt: float
) -> PulseSchedule:
    """Seeded multi-tone starting schedule on the configured band."""
    rng = np.random.default_rng(pruning.seed)
    freqs = np.linspace(pruning.band[0], pruning.band[1], pruning.initial_tones)
    channels = []
    for _ in range(spec.n_transmons):
        amplitudes = pruning.amplitude_scale * rng.uniform(0.5, 1.0, size=freqs.size)
        phases = rng.uniform(-np.pi, np.pi, size=freqs.size)
        tones = tuple(
            Tone(
                frequency=float(f),
                phase=float(p),
                amplitude=float(a),
                envelope=Envelope.rectangular(),
            )
            for f, p, a in zip(freqs, phases, amplitudes)
        )
        channels.append(tones)
    return PulseSchedule(gate_time=gate_time, channels=tuple(channels), sample_dt=sample_dt)


def comb_parameter_space(
    spec: DeviceSpec, schedule: PulseSchedule, pruning: PruningSchedule
) -> ParameterSpace:
    """Amplitude/phase (optionally frequency) entries for every comb tone."""
    if any(c >= len(schedule.channels) for c in pruning.frozen_channels):
        raise InvalidInputError(
            f"frozen channels {pruning.frozen_channels} exceed the "
            f"{len(schedule.channels)} schedule channels"
        )
    f_scale = pruning.frequency_scale or 1.0 / schedule.gate_time
    entries = []
    for ci, ch in enumerate(schedule.channels):
        scale = pruning.amplitude_scale
        bound = pruning.amplitude_bound_factor * scale
        frozen = ci in pruning.frozen_channels
        for ti in range(len(ch)):
            entries.append(
                ParameterEntry(
                    field="amplitude", channel=ci, tone=ti,
                    lower=-bound, upper=bound, scale=scale, frozen=frozen,
                )
            )
            entries.append(
                ParameterEntry(
                    field="phase", channel=ci, tone=ti,
                    lower=-2 * np.pi, upper=2 * np.pi, scale=1.0, frozen=frozen,
                )
            )
            if pruning.optimize_frequencies:
                entries.append(
                    ParameterEntry(
                        field="frequency", channel=ci, tone=ti,
                        lower=pruning.band[0], upper=pruning.band[1],
                        scale=f_scale, frozen=frozen,
                    )
                )
    return ParameterSpace(entries=tuple(entries))


def prune_tones(schedule: PulseSchedule, remove_per_channel: int) -> PulseSchedule:
    """Drop the lowest-|amplitude| tones of each channel (ties: lowest frequency)."""
    channels = []
    for ch in schedule.channels:
        order = sorted(range(len(ch)), key=lambda j: (abs(ch[j].amplitude), ch[j].frequency))
        doomed = set(order[:remove_per_channel])
        channels.append(tuple(t for j, t in enumerate(ch) if j not in doomed))
        if not channels[-1]:
            raise InvalidInputError("pruning would remove every tone of a channel")
    return PulseSchedule(
        gate_time=schedule.gate_time, channels=tuple(channels), sample_dt=schedule.sample_dt
    )


def prune_and_reoptimize(
    spec: DeviceSpec,
    target: GateTarget,
    basis: BasisMap,
    pruning: PruningSchedule,
    gate_time: float,
    sample_dt: float = DEFAULT_SAMPLE_DT,
) -> list[PruningStage]:
    """Optimize a full comb, then alternate tone removal and reoptimization.

    Returns one stage per tone count from the initial comb down to
    `min_tones`. When `goal_threshold` is set it acts as a quality floor:
    pruning stops early once a reoptimized stage can no longer reach it
    (that failing stage is still recorded).
    """
    schedule = initial_comb(spec, pruning, gate_time, sample_dt)
    if pruning.warmup_budget > 0:
        space = comb_parameter_space(spec, schedule, pruning)
        space = ParameterSpace(
            entries=tuple(
                replace(e, frozen=True) if e.field == "phase" else e
                for e in space.entries
            )
        )
        goal = make_evaluator(spec, schedule, space, target, basis)
        report = minimize(
            space,
            space.initial_vector(schedule),
            goal,
            pruning.warmup_budget,
            stop_goal=pruning.stage_stop_goal,
        )
        schedule = space.apply(schedule, report.final_point)
    stages: list[PruningStage] = []
    while True:
        space = comb_parameter_space(spec, schedule, pruning)
        goal = make_evaluator(spec, schedule, space, target, basis)
        report = minimize(
            space,
            space.initial_vector(schedule),
            goal,
            pruning.budget_per_round,
            stop_goal=pruning.stage_stop_goal,
        )
        schedule = space.apply(schedule, report.final_point)
        count = len(schedule.channels[0])
        stages.append(
            PruningStage(
                tone_count=count,
                fidelity=1.0 - report.final_goal,
                schedule=schedule,
                report=report,
            )
        )
        if count <= pruning.min_tones:
            break
        if pruning.goal_threshold is not None and report.final_goal > pruning.goal_threshold:
            break
        if pruning.removal_count is not None:
            k = pruning.removal_count
        else:
            k = max(1, int(round(pruning.removal_fraction * count)))
        k = min(k, count - pruning.min_tones)
        schedule = prune_tones(schedule, k)
    return stages


def write_trace_csv(path, report: OptimizationReport) -> None:
    """Write the optimization trace as (iteration, goal, gradient_norm) rows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "goal", "gradient_norm"])
        for i, (g, gn) in enumerate(zip(report.trace, report.gradient_trace)):
            writer.writerow([i, repr(float(g)), repr(float(gn))])
