"""Gradient ascent over waveform knots for state-preparation problems.

The fidelity gradient is exact for the discretized dynamics: the derivative
of each step unitary ``exp(-i H τ)`` is evaluated in the step's eigenbasis
(divided-difference / sinc kernel), contracted against forward states and
backward costates, then chained through the midpoint average, the amplitude
clamp, and the linear spline map back to knot values.  Ascent moves along a
per-variable preconditioned direction with projection onto the bound and
slew constraints after every step; the trial step follows a secant
(Barzilai–Borwein) estimate and a backtracking line search keeps the
fidelity sequence non-decreasing.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from .hamiltonians import (
    ControlConfiguration,
    quadrature_operators,
    static_hamiltonian,
)
from . import waveform as wf
from .simulator import fidelity as state_fidelity
from .waveform import WaveformKnots

TWO_PI = 2.0 * np.pi

_ARMIJO_C1 = 1e-4
_STEP_GROWTH = 1.5
_MAX_BACKTRACKS = 25
_AUTO_STEP_FRACTION = 0.02
_BB_CLAMP = 1e3


# ---------------------------------------------------------------------------
# Problem and settings
# ---------------------------------------------------------------------------


def _normalized(vec: np.ndarray, name: str) -> np.ndarray:
    vec = np.asarray(vec, dtype=complex).reshape(-1)
    if abs(np.linalg.norm(vec) - 1.0) > 1e-8:
        raise ValueError(f"{name} must be normalized")
    return vec


@dataclass(frozen=True)
class StatePrepProblem:
    """Drive ``psi0`` to ``target`` over ``total_time`` µs on a ``dt`` grid."""

    config: ControlConfiguration
    psi0: np.ndarray
    target: np.ndarray
    total_time: float
    dt: float = wf.DEFAULT_DT

    def __post_init__(self) -> None:
        object.__setattr__(self, "psi0", _normalized(self.psi0, "psi0"))
        object.__setattr__(self, "target", _normalized(self.target, "target"))
        dim = self.config.system.dim
        if self.psi0.size != dim or self.target.size != dim:
            raise ValueError("state dimension does not match the system")
        slowest = max(
            (c.slew_time for c in self.config.active_channels), default=0.0
        )
        if self.total_time < slowest:
            raise ValueError("total_time must cover at least one slew interval")
        if self.dt <= 0:
            raise ValueError("dt must be positive")


@dataclass(frozen=True)
class OptimizerSettings:
    """Ascent hyperparameters; ``step_size=None`` scales from the first step.

    ``stop_fidelity`` short-circuits a multi-seed search (in seed order, so
    determinism is preserved) once a seed is good enough; ``None`` runs all.
    """

    step_size: float | None = None
    max_iterations: int = 2000
    gradient_tolerance: float = 1e-6
    fidelity_target: float = 0.9999
    seeds: int = 20
    line_search: bool = True
    stop_fidelity: float | None = None

    def __post_init__(self) -> None:
        if self.step_size is not None and self.step_size <= 0:
            raise ValueError("step_size must be positive")
        if self.seeds < 1:
            raise ValueError("seeds must be at least 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


@dataclass(frozen=True)
class SeedOutcome:
    """Result of one ascent run."""

    seed: int
    fidelity: float
    iterations: int
    reason: str


@dataclass(frozen=True)
class OptimizationResult:
    """Best waveform over the executed seeds, with per-seed bookkeeping."""

    best_knots: WaveformKnots
    best_fidelity: float
    best_seed: int
    outcomes: tuple[SeedOutcome, ...]
    fidelity_history: tuple[float, ...] = field(default=(), repr=False)

    def __post_init__(self) -> None:
        if not 0.0 <= self.best_fidelity <= 1.0 + 1e-12:
            raise ValueError("fidelity out of range")

    @property
    def seed_fidelities(self) -> dict[int, float]:
        return {o.seed: o.fidelity for o in self.outcomes}


# ---------------------------------------------------------------------------
# Workspace: everything reusable across evaluations of one problem
# ---------------------------------------------------------------------------


@dataclass
class _Stream:
    channel_row: int
    kind: str  # "amplitude" or "phase"
    offset: int  # start within the free-variable vector
    count: int


class _Workspace:
    def __init__(self, problem: StatePrepProblem):
        config = problem.config
        self.problem = problem
        self.times = wf.sample_times(problem.total_time, problem.dt)
        self.taus = np.diff(self.times)
        self.n_steps = self.taus.size
        dim = config.system.dim
        n_ch = len(config.channels)
        self.ops = np.zeros((2 * n_ch, dim, dim), dtype=complex)
        for row, spec in enumerate(config.channels):
            if spec.is_off:
                continue
            a, b = quadrature_operators(config.system, spec)
            self.ops[2 * row] = a
            self.ops[2 * row + 1] = b
        self.ops_flat = self.ops.reshape(2 * n_ch, dim * dim)
        self.h0 = static_hamiltonian(config)
        # One spline matrix per channel (streams of a channel share a grid).
        self.splines: list[np.ndarray | None] = []
        self.streams: list[_Stream] = []
        offset = 0
        for row, spec in enumerate(config.channels):
            if not (spec.controls_amplitude or spec.controls_phase):
                self.splines.append(None)
                continue
            grid = wf.knot_times(problem.total_time, spec.slew_time)
            self.splines.append(wf.interpolation_matrix(grid, self.times))
            if spec.controls_amplitude:
                self.streams.append(_Stream(row, "amplitude", offset, grid.size))
                offset += grid.size
            if spec.controls_phase:
                self.streams.append(_Stream(row, "phase", offset, grid.size))
                offset += grid.size
        self.n_free = offset

    # -- forward ------------------------------------------------------------

    def sample_streams(self, x: np.ndarray):
        """Knot vector → per-channel sample rows, with clamp bookkeeping."""
        config = self.problem.config
        n_t = self.times.size
        n_ch = len(config.channels)
        amps = np.zeros((n_ch, n_t))
        phases = np.zeros((n_ch, n_t))
        masks = np.ones((n_ch, n_t))
        for row, spec in enumerate(config.channels):
            if spec.is_off:
                continue
            amps[row] = spec.max_rabi
            phases[row] = spec.fixed_phase
        for stream in self.streams:
            spec = config.channels[stream.channel_row]
            S = self.splines[stream.channel_row]
            values = S @ x[stream.offset : stream.offset + stream.count]
            if stream.kind == "amplitude":
                inside = (values >= 0.0) & (values <= spec.max_rabi)
                masks[stream.channel_row] = inside
                amps[stream.channel_row] = np.clip(values, 0.0, spec.max_rabi)
            else:
                phases[stream.channel_row] = values
        return amps, phases, masks

    def evaluate(self, x: np.ndarray, need_gradient_cache: bool):
        """Fidelity (and a cache for the adjoint pass) at knot vector ``x``."""
        problem = self.problem
        amps, phases, masks = self.sample_streams(x)
        mid_amp = 0.5 * (amps[:, :-1] + amps[:, 1:])
        mid_phase = 0.5 * (phases[:, :-1] + phases[:, 1:])
        u = mid_amp * np.cos(mid_phase)
        v = mid_amp * np.sin(mid_phase)
        coeffs = np.empty((self.n_steps, self.ops.shape[0]))
        coeffs[:, 0::2] = u.T
        coeffs[:, 1::2] = v.T
        H = np.tensordot(coeffs, self.ops, axes=(1, 0))
        H += self.h0
        evals, evecs = np.linalg.eigh(H)
        phase_factors = np.exp(-1j * evals * self.taus[:, None])
        unitaries = (evecs * phase_factors[:, None, :]) @ evecs.conj().swapaxes(
            -1, -2
        )
        states = np.empty((self.n_steps + 1, problem.psi0.size), dtype=complex)
        states[0] = problem.psi0
        psi = problem.psi0
        for k in range(self.n_steps):
            psi = unitaries[k] @ psi
            states[k + 1] = psi
        overlap = complex(np.vdot(problem.target, psi))
        fid = abs(overlap) ** 2
        if not need_gradient_cache:
            return fid, None
        cache = {
            "states": states,
            "unitaries": unitaries,
            "evals": evals,
            "evecs": evecs,
            "overlap": overlap,
            "mid_amp": mid_amp,
            "mid_phase": mid_phase,
            "masks": masks,
        }
        return fid, cache

    # -- adjoint ------------------------------------------------------------

    def gradient_from_cache(self, cache: dict) -> np.ndarray:
        """Exact fidelity gradient with respect to the free knot vector."""
        problem = self.problem
        dim = problem.psi0.size
        n = self.n_steps
        evals, evecs = cache["evals"], cache["evecs"]
        unitaries = cache["unitaries"]
        states = cache["states"]
        # Costates: chi[k] applied after step k reconstructs the overlap.
        chis = np.empty((n, dim), dtype=complex)
        chi = problem.target.astype(complex)
        chis[n - 1] = chi
        for k in range(n - 1, 0, -1):
            chi = unitaries[k].conj().T @ chi
            chis[k - 1] = chi
        # Divided-difference kernel of exp(-i λ τ) in each step's eigenbasis.
        tau = self.taus[:, None, None]
        lam_diff = evals[:, :, None] - evals[:, None, :]
        lam_sum = evals[:, :, None] + evals[:, None, :]
        gamma = (
            -1j
            * tau
            * np.exp(-0.5j * tau * lam_sum)
            * np.sinc(tau * lam_diff / (2.0 * np.pi))
        )
        vdag = evecs.conj().swapaxes(-1, -2)
        xs = np.einsum("kij,kj->ki", vdag, states[:-1])
        ys = np.einsum("kij,kj->ki", vdag, chis)
        M = ys.conj()[:, :, None] * xs[:, None, :] * gamma
        K = evecs.conj() @ M @ evecs.swapaxes(-1, -2)
        # d(overlap)/d(quadrature value) for every channel direction and step.
        g_dirs = self.ops_flat @ K.reshape(n, dim * dim).T  # (2 n_ch, n)
        g_dirs = 2.0 * (np.conj(cache["overlap"]) * g_dirs).real
        gu, gv = g_dirs[0::2], g_dirs[1::2]
        mid_amp, mid_phase = cache["mid_amp"], cache["mid_phase"]
        cosp, sinp = np.cos(mid_phase), np.sin(mid_phase)
        d_mid_amp = cosp * gu + sinp * gv
        d_mid_phase = mid_amp * (cosp * gv - sinp * gu)
        # Midpoint average: half of each interval derivative to each endpoint.
        n_t = self.times.size
        n_ch = mid_amp.shape[0]
        d_amp = np.zeros((n_ch, n_t))
        d_phase = np.zeros((n_ch, n_t))
        for mid, full in ((d_mid_amp, d_amp), (d_mid_phase, d_phase)):
            full[:, :-1] += 0.5 * mid
            full[:, 1:] += 0.5 * mid
        d_amp *= cache["masks"]
        grad = np.zeros(self.n_free)
        for stream in self.streams:
            S = self.splines[stream.channel_row]
            row = d_amp if stream.kind == "amplitude" else d_phase
            grad[stream.offset : stream.offset + stream.count] = (
                S.T @ row[stream.channel_row]
            )
        return grad

    # -- feasibility and scaling --------------------------------------------

    def project(self, x: np.ndarray) -> np.ndarray:
        knots = wf.vector_to_knots(self.problem.config, self.problem.total_time, x)
        feasible = wf.project_feasible(self.problem.config, knots)
        return wf.knots_to_vector(self.problem.config, feasible)

    def scales(self) -> np.ndarray:
        """Natural range of each free variable (precondition + step sizing)."""
        s = np.empty(self.n_free)
        for stream in self.streams:
            spec = self.problem.config.channels[stream.channel_row]
            value = spec.max_rabi if stream.kind == "amplitude" else TWO_PI
            s[stream.offset : stream.offset + stream.count] = value
        return s


# ---------------------------------------------------------------------------
# Public entry points
# ---------------------------------------------------------------------------


def gradient(problem: StatePrepProblem, knots: WaveformKnots) -> np.ndarray:
    """Fidelity gradient at ``knots``, one entry per free knot variable."""
    violations = wf.validate(problem.config, knots)
    if violations:
        raise ValueError(
            "knots violate constraints: "
            + "; ".join(str(v) for v in violations[:3])
        )
    workspace = _Workspace(problem)
    x = wf.knots_to_vector(problem.config, knots)
    _, cache = workspace.evaluate(x, need_gradient_cache=True)
    return workspace.gradient_from_cache(cache)


def waveform_fidelity(problem: StatePrepProblem, knots: WaveformKnots) -> float:
    """Fidelity reached by a waveform on the problem's grid."""
    workspace = _Workspace(problem)
    x = wf.knots_to_vector(problem.config, knots)
    fid, _ = workspace.evaluate(x, need_gradient_cache=False)
    return fid


def ascend(
    problem: StatePrepProblem,
    settings: OptimizerSettings | None = None,
    seed: int = 0,
    initial: WaveformKnots | None = None,
) -> OptimizationResult:
    """Projected gradient ascent from one random start.

    The trial step adapts along the run (Barzilai–Borwein secant estimate in
    the preconditioned metric, clamped around the last accepted step); with
    ``line_search`` enabled a step is accepted only when it improves the
    fidelity (Armijo-style sufficient increase, halving on rejection), so
    the recorded fidelity history is non-decreasing.
    """
    settings = settings or OptimizerSettings()
    workspace = _Workspace(problem)
    if initial is None:
        initial = wf.random_knots(problem.config, problem.total_time, seed)
    x = workspace.project(wf.knots_to_vector(problem.config, initial))
    scales = workspace.scales()
    precond = scales**2
    fid, cache = workspace.evaluate(x, need_gradient_cache=True)
    history = [fid]
    step = settings.step_size
    prev_x: np.ndarray | None = None
    prev_grad: np.ndarray | None = None
    reason = "max_iterations"
    iterations = 0
    for iterations in range(1, settings.max_iterations + 1):
        if fid > settings.fidelity_target:
            iterations -= 1
            reason = "fidelity_reached"
            break
        grad = workspace.gradient_from_cache(cache)
        grad_norm = float(np.linalg.norm(grad))
        if grad_norm < settings.gradient_tolerance:
            iterations -= 1
            reason = "gradient_converged"
            break
        direction = precond * grad
        if step is None:
            largest = float(np.max(np.abs(direction) / scales))
            step = _AUTO_STEP_FRACTION / largest if largest > 0 else 1.0
        elif settings.step_size is None:
            # Secant (Barzilai–Borwein) step in the preconditioned metric;
            # fall back to mild growth when the curvature sign is unusable.
            trial = step * _STEP_GROWTH
            if prev_x is not None:
                s = x - prev_x
                curvature = -float(s @ (grad - prev_grad))
                if curvature > 0:
                    secant = float(s @ (s / precond)) / curvature
                    trial = min(max(secant, step / _BB_CLAMP), step * _BB_CLAMP)
            step = trial
        prev_x, prev_grad = x.copy(), grad
        if not settings.line_search:
            x = workspace.project(x + step * direction)
            fid, cache = workspace.evaluate(x, need_gradient_cache=True)
            history.append(fid)
            continue
        accepted = False
        trial_step = step
        for _ in range(_MAX_BACKTRACKS):
            x_new = workspace.project(x + trial_step * direction)
            fid_new, cache_new = workspace.evaluate(x_new, need_gradient_cache=True)
            gain_needed = _ARMIJO_C1 * float(grad @ (x_new - x))
            if fid_new > fid + max(gain_needed, 0.0):
                x, fid, cache = x_new, fid_new, cache_new
                step = trial_step
                accepted = True
                break
            trial_step *= 0.5
        history.append(fid)
        if not accepted:
            reason = "stalled"
            break
    final_knots = wf.vector_to_knots(problem.config, problem.total_time, x)
    outcome = SeedOutcome(
        seed=seed, fidelity=fid, iterations=iterations, reason=reason
    )
    return OptimizationResult(
        best_knots=final_knots,
        best_fidelity=fid,
        best_seed=seed,
        outcomes=(outcome,),
        fidelity_history=tuple(history),
    )


def _ascend_seed(
    problem: StatePrepProblem, settings: OptimizerSettings, seed: int
) -> OptimizationResult:
    """Module-level ascent wrapper so parallel maps can pickle the task."""
    return ascend(problem, settings, seed=seed)


def multi_seed_search(
    problem: StatePrepProblem,
    settings: OptimizerSettings | None = None,
    seed_list: tuple[int, ...] | None = None,
    map_fn=None,
) -> OptimizationResult:
    """Best-of-seeds ascent; deterministic for a fixed seed list.

    Seeds run in order; if ``settings.stop_fidelity`` is set, later seeds are
    skipped once it is reached (the executed prefix is still deterministic).
    ``map_fn`` (e.g. ``ProcessPoolExecutor.map``) parallelizes the seeds; it
    is only used when there is no stop fidelity, because early stopping is
    inherently sequential.  Results are identical either way.
    """
    settings = settings or OptimizerSettings()
    if seed_list is None:
        seed_list = tuple(range(settings.seeds))
    if not seed_list:
        raise ValueError("seed list must not be empty")
    if map_fn is not None and settings.stop_fidelity is None:
        run = functools.partial(_ascend_seed, problem, settings)
        results = list(map_fn(run, list(seed_list)))
    else:
        results = []
        for seed in seed_list:
            results.append(ascend(problem, settings, seed=seed))
            if (
                settings.stop_fidelity is not None
                and max(r.best_fidelity for r in results)
                >= settings.stop_fidelity
            ):
                break
    best: OptimizationResult | None = None
    outcomes: list[SeedOutcome] = []
    for result in results:
        outcomes.extend(result.outcomes)
        if best is None or result.best_fidelity > best.best_fidelity:
            best = result
    return OptimizationResult(
        best_knots=best.best_knots,
        best_fidelity=best.best_fidelity,
        best_seed=best.best_seed,
        outcomes=tuple(outcomes),
        fidelity_history=best.fidelity_history,
    )


def haar_random_state(dim: int, rng_seed: int) -> np.ndarray:
    """Haar-distributed pure state: normalized complex Gaussian vector."""
    if dim < 2:
        raise ValueError("dim must be at least 2")
    rng = np.random.default_rng(rng_seed)
    vec = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return vec / np.linalg.norm(vec)


# ---------------------------------------------------------------------------
# Benchmark sweeps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BenchmarkRun:
    """One underlying ascent inside a benchmark cell."""

    variant: str
    total_time: float
    state_index: int
    seed: int
    fidelity: float
    iterations: int


@dataclass(frozen=True)
class BenchmarkCell:
    """Mean best-of-seeds fidelity for one (variant, duration) pair."""

    variant: str
    total_time: float
    mean_fidelity: float
    std_error: float
    state_fidelities: tuple[float, ...]


@dataclass(frozen=True)
class BenchmarkTable:
    cells: tuple[BenchmarkCell, ...]
    runs: tuple[BenchmarkRun, ...]
    n_states: int
    n_seeds: int

    def cell(self, variant: str, total_time: float) -> BenchmarkCell:
        for c in self.cells:
            if c.variant == variant and c.total_time == total_time:
                return c
        raise KeyError(f"no cell ({variant}, {total_time})")


def _ascend_task(task) -> OptimizationResult:
    problem, settings, seed = task
    return ascend(problem, settings, seed=seed)


def benchmark(
    variants: list[tuple[str, ControlConfiguration]],
    time_grid: tuple[float, ...],
    n_states: int = 5,
    n_seeds: int = 5,
    dt: float = wf.DEFAULT_DT,
    settings: OptimizerSettings | None = None,
    state_seed: int = 2017,
    map_fn=None,
) -> BenchmarkTable:
    """Average best-of-seeds fidelity over shared Haar-random targets.

    The same target states pair every (variant, duration) cell so that
    comparisons between cells are paired rather than independent; each cell
    runs exactly ``n_states × n_seeds`` ascents.  ``map_fn`` (e.g.
    ``ProcessPoolExecutor.map``) spreads the independent ascents over
    workers without changing any result.
    """
    settings = settings or OptimizerSettings()
    tasks = []
    keys: list[tuple[str, float, int, int]] = []
    for name, config in variants:
        psi0 = config.system.stretched_state()
        dim = config.system.dim
        targets = [
            haar_random_state(dim, state_seed + i) for i in range(n_states)
        ]
        for total_time in time_grid:
            for i, target in enumerate(targets):
                problem = StatePrepProblem(
                    config=config,
                    psi0=psi0,
                    target=target,
                    total_time=total_time,
                    dt=dt,
                )
                for seed in range(n_seeds):
                    tasks.append((problem, settings, seed))
                    keys.append((name, total_time, i, seed))
    results = list((map_fn or map)(_ascend_task, tasks))
    runs = tuple(
        BenchmarkRun(
            variant=name,
            total_time=total_time,
            state_index=i,
            seed=seed,
            fidelity=result.best_fidelity,
            iterations=result.outcomes[0].iterations,
        )
        for (name, total_time, i, seed), result in zip(keys, results)
    )
    cells: list[BenchmarkCell] = []
    for name, _ in variants:
        for total_time in time_grid:
            per_state = [
                max(
                    run.fidelity
                    for run in runs
                    if run.variant == name
                    and run.total_time == total_time
                    and run.state_index == i
                )
                for i in range(n_states)
            ]
            values = np.asarray(per_state)
            cells.append(
                BenchmarkCell(
                    variant=name,
                    total_time=total_time,
                    mean_fidelity=float(values.mean()),
                    std_error=float(
                        values.std(ddof=1) / np.sqrt(values.size)
                        if values.size > 1
                        else 0.0
                    ),
                    state_fidelities=tuple(float(v) for v in values),
                )
            )
    return BenchmarkTable(
        cells=tuple(cells),
        runs=runs,
        n_states=n_states,
        n_seeds=n_seeds,
    )
