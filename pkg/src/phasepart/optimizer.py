"""Projected gradient descent with line search and the continuation driver.

One stage minimizes the relaxed energy at fixed (grid, eps) by

    u  <-  feasible(u - t * grad E(u))

where feasible alternates box clipping with the admissible projection,
and t is managed by a backtracking line search on the true discrete
energy (halve until any decrease, grow 1.2x on success).  The driver
chains stages with decreasing eps, refining the grid and interpolating
the previous minimizer in between.

Nonsmooth anisotropies (the l1 family at tiny delta) make plain descent
crawl: the landscape has kinks at the gradient scale delta.  The optional
smoothing continuation runs the early iterations of every stage against a
surrogate with delta raised to a fraction of the interface gradient scale
1/(4 eps), annealing down to the configured delta, at which the stage
always finishes and all reported stage energies are evaluated.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field as dfield
from typing import Callable, Optional, Sequence

import numpy as np

from .anisotropy import Anisotropy
from .constraints import make_feasible, mass_residual, partition_residual
from .energy import DoubleWell, PhaseSystem, energy_gradient, total_energy
from .grid import Field, Grid, Labels, refine_interpolate

LINE_SEARCH_FLOOR = 1e-14


@dataclass(frozen=True)
class Stage:
    n: int      # nodes per side
    eps: float

    def eps_band(self) -> tuple[float, float]:
        return 1.0 / self.n, 4.0 / self.n


@dataclass
class SmoothingContinuation:
    """Per-stage sub-phases (delta_factor, iterations) run before the final
    relaxation at the anisotropy's own delta.

    The surrogate delta for a factor c at interface width eps is
    c / (4 eps), the peak gradient of the default optimal profile.
    """

    first_stage: list[tuple[float, int]] = dfield(default_factory=list)
    later_stages: list[tuple[float, int]] = dfield(default_factory=list)

    def phases(self, stage_index: int) -> list[tuple[float, int]]:
        return self.first_stage if stage_index == 0 else self.later_stages


@dataclass
class ContinuationSchedule:
    stages: list[Stage]
    seed: int = 0
    max_iters: int = 2000
    grad_tol: float = 1e-6
    step0: float = 1.0
    enforce_eps_band: bool = True
    smoothing: Optional[SmoothingContinuation] = None

    def validate(self) -> None:
        if not self.stages:
            raise ValueError("schedule needs at least one stage")
        for k, st in enumerate(self.stages):
            if st.n < 2 or st.eps <= 0:
                raise ValueError(f"stage {k}: invalid (N, eps) = ({st.n}, {st.eps})")
            lo, hi = st.eps_band()
            if self.enforce_eps_band and not (lo <= st.eps <= hi):
                raise ValueError(
                    f"stage {k}: eps = {st.eps:.6g} outside the admissible band "
                    f"[1/N, 4/N] = [{lo:.6g}, {hi:.6g}] (set the override to allow it)")
        for a, b in zip(self.stages, self.stages[1:]):
            if b.n < a.n:
                raise ValueError("stage grids must be nondecreasing")
            if b.eps > a.eps:
                raise ValueError("stage eps must be nonincreasing")


def _round_odd(x: float) -> int:
    n = int(round(x))
    return n if n % 2 == 1 else n + 1


def make_schedule(n0: int, n_stages: int, refine: float = 1.5,
                  eps0: Optional[float] = None, **kwargs) -> ContinuationSchedule:
    """Default generator: N grows by `refine` per stage (rounded odd), eps
    scales down proportionally from eps0 (default 4/N0, the top of the band)."""
    if eps0 is None:
        eps0 = 4.0 / n0
    stages = []
    for k in range(n_stages):
        nk = max(_round_odd(n0 * refine ** k), stages[-1].n if stages else 2)
        stages.append(Stage(nk, eps0 * n0 / nk))
    return ContinuationSchedule(stages, **kwargs)


@dataclass
class IterationRecord:
    stage: int
    iter: int
    eps: float
    energy_scaled: float
    grad_norm: float
    sum_residual: float
    mass_residual: float
    step: float


@dataclass
class StageReport:
    n: int
    eps: float
    iterations: int
    energy_scaled: float
    sum_residual: float
    mass_residual: float
    wall_time_s: float


@dataclass
class RunReport:
    stages: list[StageReport]
    records: list[IterationRecord]
    seed: int
    warnings: list[str]
    labels: Labels
    config: Optional[dict] = None
    system: Optional[PhaseSystem] = dfield(default=None, repr=False)


@dataclass
class MinimizeConfig:
    max_iters: int = 2000
    grad_tol: float = 1e-6
    step0: float = 1.0
    weight: Optional[Field] = None
    stage_index: int = 0
    record_into: Optional[list] = None
    iter_offset: int = 0


@dataclass
class MinimizeResult:
    system: PhaseSystem
    iterations: int
    energy: float
    converged: bool
    warning: Optional[str] = None


def _stationarity(sys: PhaseSystem, g: np.ndarray, probe: float,
                  weight: Optional[Field]) -> float:
    """Norm of the projected-gradient displacement at a fixed probe step,
    normalized by h so it tracks an L2 quantity."""
    moved = make_feasible(sys.replace_u(sys.u - probe * g), weight)
    d = (sys.u - moved.u) / probe
    return sys.grid.h * float(np.linalg.norm(d.ravel()))


def minimize_at_eps(sys: PhaseSystem, aniso: Anisotropy, well: DoubleWell,
                    cfg: Optional[MinimizeConfig] = None) -> MinimizeResult:
    """Projected descent at fixed eps until stationarity or the budget runs out.

    The energy is nonincreasing across accepted iterations; a line search
    that cannot find any decrease above the step floor ends the stage with
    a warning rather than an error.
    """
    cfg = cfg or MinimizeConfig()
    weight = cfg.weight
    sys = make_feasible(sys, weight)
    E = total_energy(sys, aniso, well)
    t = cfg.step0
    warning = None
    converged = False
    it = 0
    while it < cfg.max_iters:
        g = energy_gradient(sys, aniso, well)
        pg = _stationarity(sys, g, cfg.step0, weight)
        if pg < cfg.grad_tol:
            converged = True
            break
        accepted = False
        while t >= LINE_SEARCH_FLOOR:
            trial = make_feasible(sys.replace_u(sys.u - t * g), weight)
            Et = total_energy(trial, aniso, well)
            if Et < E:
                sys, E = trial, Et
                t *= 1.2
                accepted = True
                break
            t *= 0.5
        if not accepted:
            warning = "line search found no decrease; treating the iterate as converged"
            converged = True
            break
        it += 1
        if cfg.record_into is not None:
            cfg.record_into.append(IterationRecord(
                stage=cfg.stage_index, iter=cfg.iter_offset + it, eps=sys.eps,
                energy_scaled=E / well.c_w, grad_norm=pg,
                sum_residual=partition_residual(sys),
                mass_residual=mass_residual(sys, weight), step=t))
    return MinimizeResult(sys, it, E, converged, warning)


def extract_labels(sys: PhaseSystem) -> Labels:
    """Per-node argmax phase (ties to the lowest index); masked nodes get 0."""
    lab = np.argmax(sys.u, axis=0).astype(np.int32) + 1
    return Labels(sys.grid, lab)


@dataclass
class Problem:
    """Everything run_continuation needs besides the schedule.

    grid_factory builds the stage grid from a node count (domain shape and
    boundary mode live in the closure).  weight_fn, when given, supplies
    the density for the weighted mass constraint as a function of (x, y).
    """

    n_phases: int
    aniso: Anisotropy
    well: DoubleWell
    grid_factory: Callable[[int], Grid]
    fractions: Optional[np.ndarray] = None     # of the (weighted) domain mass
    abs_targets: Optional[np.ndarray] = None   # absolute, stage-independent
    weight_fn: Optional[Callable] = None
    pin_boundary: bool = False
    init_kind: str = "iid"                     # iid | coarse | labels
    init_cells: int = 8
    init_labels: Optional[Labels] = None
    init_eta: float = 1e-3

    @property
    def partition(self) -> bool:
        return self.n_phases >= 2

    def targets_for(self, grid: Grid, weight: Optional[Field]) -> np.ndarray:
        if self.abs_targets is not None:
            return np.asarray(self.abs_targets, dtype=float)
        if self.fractions is None:
            raise ValueError("problem needs fractions or absolute targets")
        if weight is None:
            total = grid.domain_area
        else:
            total = grid.cell_area * float(np.sum(weight.values, where=grid.inside()))
        return np.asarray(self.fractions, dtype=float) * total


def _coarse_noise(rng: np.random.Generator, n: int, grid: Grid, cells: int) -> np.ndarray:
    """iid uniform noise on a coarse lattice, bilinearly interpolated to the
    grid, so local averages swing across the spinodal and phases nucleate."""
    z = rng.uniform(0.0, 1.0, (n, cells + 1, cells + 1))
    out = np.empty((n,) + grid.shape)
    sx = np.linspace(0.0, cells, grid.nx)
    sy = np.linspace(0.0, cells, grid.ny)
    i0 = np.clip(np.floor(sx).astype(int), 0, cells - 1)
    j0 = np.clip(np.floor(sy).astype(int), 0, cells - 1)
    tx = sx - i0
    ty = sy - j0
    for k in range(n):
        zi = z[k][i0, :] * (1 - tx)[:, None] + z[k][i0 + 1, :] * tx[:, None]
        out[k] = zi[:, j0] * (1 - ty)[None, :] + zi[:, j0 + 1] * ty[None, :]
    return out


def _resample_labels(labels: Labels, grid: Grid) -> Labels:
    """Nearest-neighbor resample of a label image onto a stage grid."""
    src = labels.values
    ix = np.clip(np.round(np.linspace(0, src.shape[0] - 1, grid.nx)).astype(int), 0, src.shape[0] - 1)
    iy = np.clip(np.round(np.linspace(0, src.shape[1] - 1, grid.ny)).astype(int), 0, src.shape[1] - 1)
    return Labels(grid, src[np.ix_(ix, iy)])


def _init_stage0(problem: Problem, grid: Grid, stage: Stage,
                 rng: np.random.Generator, targets: np.ndarray) -> PhaseSystem:
    n = problem.n_phases
    if problem.init_kind == "labels":
        if problem.init_labels is None:
            raise ValueError("labels initialization requires a label image")
        from .profile import recovery_init
        labs = _resample_labels(problem.init_labels, grid)
        return recovery_init(labs, problem.aniso, stage.eps, problem.init_eta,
                             targets=targets, well=problem.well,
                             pin_boundary=problem.pin_boundary)
    if problem.init_kind == "coarse":
        u = _coarse_noise(rng, n, grid, problem.init_cells)
    elif problem.init_kind == "iid":
        u = rng.uniform(0.0, 1.0, (n,) + grid.shape)
    else:
        raise ValueError(f"unknown init kind {problem.init_kind!r}")
    return PhaseSystem(grid, u, targets, stage.eps, problem.partition, problem.pin_boundary)


def run_continuation(problem: Problem, schedule: ContinuationSchedule,
                     config_echo: Optional[dict] = None) -> RunReport:
    """Chain the schedule's stages: init or interpolate, project, minimize.

    Always returns a report; stage-level line-search stalls and projection
    issues are collected as warnings.
    """
    schedule.validate()
    rng = np.random.default_rng(schedule.seed)
    records: list[IterationRecord] = []
    stage_reports: list[StageReport] = []
    warns: list[str] = []
    if not problem.aniso.convex:
        warns.append("non-convex anisotropy: outside the convex theory, results are empirical")

    sys: Optional[PhaseSystem] = None
    for k, stage in enumerate(schedule.stages):
        t0 = time.perf_counter()
        grid = problem.grid_factory(stage.n)
        weight = Field.from_function(grid, problem.weight_fn) if problem.weight_fn else None
        targets = problem.targets_for(grid, weight)
        if sys is None:
            sys = _init_stage0(problem, grid, stage, rng, targets)
        else:
            u = np.stack([refine_interpolate(f, grid).values for f in sys.phases()])
            sys = PhaseSystem(grid, u, targets, stage.eps, problem.partition,
                              problem.pin_boundary)
        sys = make_feasible(sys, weight)

        iters_used = 0
        phases = schedule.smoothing.phases(k) if schedule.smoothing else []
        for factor, iters in phases:
            surrogate_delta = max(factor / (4.0 * stage.eps), problem.aniso.delta)
            surrogate = problem.aniso.with_delta(surrogate_delta)
            res = minimize_at_eps(sys, surrogate, problem.well, MinimizeConfig(
                max_iters=iters, grad_tol=schedule.grad_tol, step0=schedule.step0,
                weight=weight, stage_index=k, record_into=records,
                iter_offset=iters_used))
            sys = res.system
            iters_used += res.iterations

        res = minimize_at_eps(sys, problem.aniso, problem.well, MinimizeConfig(
            max_iters=schedule.max_iters, grad_tol=schedule.grad_tol,
            step0=schedule.step0, weight=weight, stage_index=k,
            record_into=records, iter_offset=iters_used))
        sys = res.system
        iters_used += res.iterations
        if res.warning:
            warns.append(f"stage {k}: {res.warning}")

        stage_reports.append(StageReport(
            n=stage.n, eps=stage.eps, iterations=iters_used,
            energy_scaled=res.energy / problem.well.c_w,
            sum_residual=partition_residual(sys),
            mass_residual=mass_residual(sys, weight),
            wall_time_s=time.perf_counter() - t0))

    labels = extract_labels(sys)
    return RunReport(stage_reports, records, schedule.seed, warns, labels,
                     config=config_echo, system=sys)
