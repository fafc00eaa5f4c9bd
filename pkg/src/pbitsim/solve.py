"""Simulated annealing and parallel tempering over (model, group plan) pairs.

One iteration = one group update: a group is picked (uniformly at random by
default), every member's drive is computed from the frozen pre-update state,
and all members resample simultaneously. Repeats run on independent random
streams derived from the root seed, so serial and thread-pool execution give
identical per-repeat results.
"""

from __future__ import annotations

import configparser
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernel
from .coloring import GroupPlan
from .errors import ConfigError, FileFormatError
from .model import Clamp, EnergyModel, eval_energy, free_variables, full_clamp_mask


def linear_schedule(start: float, end: float, n: int) -> np.ndarray:
    """n values from start to end inclusive; n = 1 gives just the start."""
    if n < 1:
        raise ConfigError("schedule needs at least one point")
    if n == 1:
        return np.array([float(start)])
    return np.linspace(float(start), float(end), n)


def metropolis_swap_prob(delta_beta: float, delta_E: float) -> float:
    """min{1, exp(delta_beta * delta_E)}."""
    x = delta_beta * delta_E
    return 1.0 if x >= 0.0 else math.exp(x)


@dataclass(frozen=True)
class SaConfig:
    beta_start: float
    beta_end: float
    steps: int
    iters_per_step: int | None = None
    total_iters: int | None = None  # alternative to iters_per_step
    repeats: int = 1
    seed: int = 0
    round_robin: bool = False

    def __post_init__(self):
        if self.beta_start > self.beta_end:
            raise ConfigError("beta_start must not exceed beta_end")
        if self.steps < 1 or self.repeats < 1:
            raise ConfigError("steps and repeats must be >= 1")
        if (self.iters_per_step is None) == (self.total_iters is None):
            raise ConfigError("give exactly one of iters_per_step / total_iters")
        if self.iters_per_step is not None and self.iters_per_step < 1:
            raise ConfigError("iters_per_step must be >= 1")
        if self.total_iters is not None and self.total_iters < 1:
            raise ConfigError("total_iters must be >= 1")

    @property
    def n_iters(self) -> int:
        if self.iters_per_step is not None:
            return self.iters_per_step * self.steps
        return self.total_iters

    def beta_per_iteration(self) -> np.ndarray:
        """Inverse temperature for each iteration. When the total does not
        divide evenly into steps, iteration t sits at step floor(t*S/total)."""
        sched = linear_schedule(self.beta_start, self.beta_end, self.steps)
        total = self.n_iters
        if self.iters_per_step is not None:
            return np.repeat(sched, self.iters_per_step)
        idx = (np.arange(total, dtype=np.int64) * self.steps) // total
        return sched[idx]


@dataclass(frozen=True)
class PtConfig:
    beta_start: float
    beta_end: float
    replicas: int
    iters: int
    swap_interval: int
    repeats: int = 1
    seed: int = 0
    geometric: bool = False
    round_robin: bool = False

    def __post_init__(self):
        if self.replicas < 2:
            raise ConfigError("parallel tempering needs at least 2 replicas")
        if self.beta_start > self.beta_end:
            raise ConfigError("beta_start must not exceed beta_end")
        if self.iters < 1 or self.repeats < 1 or self.swap_interval < 1:
            raise ConfigError("iters, repeats and swap_interval must be >= 1")
        if self.geometric and self.beta_start <= 0:
            raise ConfigError("geometric spacing needs beta_start > 0")

    def replica_betas(self) -> np.ndarray:
        if self.geometric:
            return np.geomspace(self.beta_start, self.beta_end, self.replicas)
        return linear_schedule(self.beta_start, self.beta_end, self.replicas)


@dataclass
class SolveResult:
    method: str
    best_energy: float
    best_state: np.ndarray
    trajectory: np.ndarray  # pooled best-so-far per iteration (min over repeats)
    per_repeat_best: np.ndarray
    per_repeat_best_states: list[np.ndarray]
    seed: int
    backend: str
    num_groups: int
    avg_group_size: float
    config: dict = field(default_factory=dict)
    per_repeat_trajectories: list[np.ndarray] | None = None

    def iter_pairs(self) -> list[tuple[int, float]]:
        """Trajectory as (iteration, best_energy_so_far) with 1-based iterations."""
        return [(t + 1, float(e)) for t, e in enumerate(self.trajectory)]

    def to_json(self, path) -> None:
        payload = {
            "method": self.method,
            "best_energy": self.best_energy,
            "best_state": self.best_state.tolist(),
            "per_repeat_best": self.per_repeat_best.tolist(),
            "seed": self.seed,
            "backend": self.backend,
            "num_groups": self.num_groups,
            "avg_group_size": self.avg_group_size,
            "config": self.config,
            "trajectory": self.trajectory.tolist(),
        }
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=1)
            fh.write("\n")

    def trajectory_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("iteration,best_energy\n")
            for t, e in self.iter_pairs():
                fh.write(f"{t},{e!r}\n")


def _kernel_arrays(model: EnergyModel, plan: GroupPlan):
    coeffs, t_off, t_vars, v_off, v_terms = model.flat_arrays()
    sizes = plan.sizes()
    g_off = np.zeros(len(sizes) + 1, dtype=np.int64)
    np.cumsum(sizes, out=g_off[1:])
    g_vars = (
        np.concatenate(plan.groups).astype(np.int32)
        if plan.groups
        else np.empty(0, dtype=np.int32)
    )
    return coeffs, t_off, t_vars, v_off, v_terms, g_off, g_vars


def _init_state(model: EnergyModel, clamp: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    state = np.where(clamp == Clamp.ONE, 1, 0).astype(np.uint8)
    free = free_variables(clamp)
    if len(free):
        state[free] = (rng.random(len(free)) < 0.5).astype(np.uint8)
    return state


def _check_plan(model: EnergyModel, plan: GroupPlan, clamp: np.ndarray) -> None:
    n_free = int((clamp == Clamp.FREE).sum())
    if plan.num_free != n_free:
        raise ConfigError(
            f"plan covers {plan.num_free} free variables but the clamp mask has {n_free}"
        )
    if plan.num_groups == 0 and n_free > 0:
        raise ConfigError("empty group plan for a model with free variables")


def _finalise(model, traj, best_state):
    # incremental kernel energies can drift in the last ulps; recompute exactly
    best_energy = eval_energy(model, best_state)
    if np.any(np.diff(traj) > 0):
        raise AssertionError("best-energy trajectory must be non-increasing")
    return best_energy


def run_sa(
    model: EnergyModel,
    plan: GroupPlan,
    cfg: SaConfig,
    clamp: np.ndarray | None = None,
    threads: int = 1,
    keep_repeat_trajectories: bool = False,
) -> SolveResult:
    if clamp is None:
        clamp = full_clamp_mask(model.num_vars)
    _check_plan(model, plan, clamp)
    arrays = _kernel_arrays(model, plan)
    betas = cfg.beta_per_iteration()
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.repeats)

    def one_repeat(child):
        rng = np.random.default_rng(child)
        state = _init_state(model, clamp, rng)
        e0 = eval_energy(model, state)
        return kernel.sa_loop(*arrays, state, e0, betas, rng, cfg.round_robin)

    results = _run_repeats(one_repeat, seeds, threads)
    return _combine(model, plan, cfg, "sa", results, keep_repeat_trajectories)


def run_pt(
    model: EnergyModel,
    plan: GroupPlan,
    cfg: PtConfig,
    clamp: np.ndarray | None = None,
    threads: int = 1,
    keep_repeat_trajectories: bool = False,
) -> SolveResult:
    if clamp is None:
        clamp = full_clamp_mask(model.num_vars)
    _check_plan(model, plan, clamp)
    arrays = _kernel_arrays(model, plan)
    rbetas = cfg.replica_betas()
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.repeats)

    def one_repeat(child):
        rng = np.random.default_rng(child)
        states = np.stack([_init_state(model, clamp, rng) for _ in range(cfg.replicas)])
        energies = np.array([eval_energy(model, s) for s in states])
        return kernel.pt_loop(
            *arrays, states, energies, rbetas, cfg.iters, cfg.swap_interval, rng, cfg.round_robin
        )

    results = _run_repeats(one_repeat, seeds, threads)
    return _combine(model, plan, cfg, "pt", results, keep_repeat_trajectories)


def _run_repeats(fn, seeds, threads):
    if threads > 1 and len(seeds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, seeds))
    return [fn(child) for child in seeds]


def _combine(model, plan, cfg, method, results, keep_repeat_trajectories):
    per_best = np.array([eval_energy(model, st) for _, st, _ in results])
    trajs = [traj for _, _, traj in results]
    pooled = np.minimum.reduce(trajs)
    winner = int(np.argmin(per_best))
    best_state = results[winner][1]
    best_energy = _finalise(model, pooled, best_state)
    cfg_dict = {k: (v if not isinstance(v, np.ndarray) else v.tolist()) for k, v in vars(cfg).items()}
    return SolveResult(
        method=method,
        best_energy=best_energy,
        best_state=best_state,
        trajectory=pooled,
        per_repeat_best=per_best,
        per_repeat_best_states=[st for _, st, _ in results],
        seed=cfg.seed,
        backend=kernel.backend_name(),
        num_groups=plan.num_groups,
        avg_group_size=plan.avg_group_size,
        config=cfg_dict,
        per_repeat_trajectories=trajs if keep_repeat_trajectories else None,
    )


# -- solver config files -------------------------------------------------
#
# INI files with an [sa] or [pt] section; keys follow the hyperparameter
# table headings: iters, steps, reps, repls, swap, temp_range ("lo-hi",
# inverse temperatures).


def _parse_temp_range(text: str) -> tuple[float, float]:
    try:
        lo, hi = text.split("-", 1)
        return float(lo), float(hi)
    except ValueError as exc:
        raise FileFormatError(f"bad temp_range {text!r}; expected 'lo-hi'") from exc


def load_solver_config(path, seed: int | None = None, n_scale: int | None = None):
    """Parse an [sa] or [pt] config file; returns ('sa', SaConfig) or
    ('pt', PtConfig). Iteration counts may be written as e.g. '5*N' when the
    caller supplies n_scale (the problem's variable count)."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = parser.read(path)
    if not read:
        raise FileFormatError(f"cannot read config file {path}")

    def resolve_count(text: str) -> int:
        text = text.strip().lower().replace(" ", "")
        if text.endswith("*n") or text.startswith("n*") or text == "n":
            if n_scale is None:
                raise ConfigError(f"config uses N-scaled count {text!r} but no N was given")
            factor = text.replace("*n", "").replace("n*", "").replace("n", "") or "1"
            return int(round(float(factor) * n_scale))
        return int(float(text))

    if parser.has_section("sa"):
        sec = parser["sa"]
        lo, hi = _parse_temp_range(sec.get("temp_range", fallback="0.01-1.1"))
        return "sa", SaConfig(
            beta_start=lo,
            beta_end=hi,
            steps=sec.getint("steps", fallback=100),
            total_iters=resolve_count(sec.get("iters", fallback="100")),
            repeats=sec.getint("reps", fallback=1),
            seed=seed if seed is not None else sec.getint("seed", fallback=0),
        )
    if parser.has_section("pt"):
        sec = parser["pt"]
        lo, hi = _parse_temp_range(sec.get("temp_range", fallback="0.5-10"))
        return "pt", PtConfig(
            beta_start=lo,
            beta_end=hi,
            replicas=sec.getint("repls", fallback=2),
            iters=resolve_count(sec.get("iters", fallback="100")),
            swap_interval=sec.getint("swap", fallback=25),
            repeats=sec.getint("reps", fallback=1),
            seed=seed if seed is not None else sec.getint("seed", fallback=0),
        )
    raise FileFormatError(f"{path}: expected an [sa] or [pt] section")
