"""Quality experiments, iterations-to-quality extraction, hardware TTS
estimates, and the study runner that emits one CSV per figure/table plus a
JSON manifest sufficient to regenerate every byte.
"""

from __future__ import annotations

import configparser
import csv
import hashlib
import json
import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, kernel
from .coloring import group_count_sweep, plan_for, sweep_to_csv
from .errors import ConfigError, DimensionError, FileFormatError
from .hitting_set import (
    encode_hitting_set,
    gen_hypergraph,
    greedy_reference,
    hs_quality,
    solution_from_state,
)
from .solve import SaConfig, run_sa
from .spinglass import ErSpec, gen_er, ising_to_qubo, pt_baseline
from .transforms import metrics_for_sparsification, quadratise, sparsify, sparsify_ising


@dataclass(frozen=True)
class QualityCurve:
    reference: float
    provenance: str
    targets: tuple[float, ...]
    reached_at: dict[float, int | None]  # target -> first iteration, or None

    def reached(self, target: float) -> bool:
        return self.reached_at.get(target) is not None


def iterations_to_quality(traj, reference: float, targets, provenance: str = "unknown") -> QualityCurve:
    """First iteration whose best value meets each quality target.

    reference > 0: minimisation of a positive objective; target q is met
    when best/reference <= q. reference < 0 (energies): met when
    best/reference >= q, q in (0, 1]. Unreached targets stay None, never
    extrapolated.
    """
    if reference == 0:
        raise DimensionError("zero reference is not scoreable")
    pairs = list(traj)
    reached: dict[float, int | None] = {}
    for q in targets:
        hit = None
        for it, best in pairs:
            ratio = best / reference
            if (reference > 0 and ratio <= q) or (reference < 0 and ratio >= q):
                hit = int(it)
                break
        reached[float(q)] = hit
    return QualityCurve(float(reference), provenance, tuple(float(q) for q in targets), reached)


@dataclass(frozen=True)
class TtsEstimate:
    adjusted_iters: float  # iterations divided by the mean group size
    num_vars: int
    clock_hz: float
    overhead_cycles: float

    @property
    def cycles_per_update(self) -> float:
        return math.log2(self.num_vars) + self.overhead_cycles

    @property
    def seconds(self) -> float:
        return self.adjusted_iters * self.cycles_per_update / self.clock_hz


def estimate_tts(adjusted_iters: float, num_vars: int, clock_hz: float, overhead_cycles: float = 10.0) -> float:
    """Wall-clock estimate: adjusted_iters * (log2(N) + overhead) / f.

    The log2 reflects an adder-tree reduction of the drive sum; the overhead
    constant covers fixed per-update work.
    """
    if adjusted_iters <= 0 or num_vars <= 0 or clock_hz <= 0 or overhead_cycles < 0:
        raise DimensionError("all TTS inputs must be positive")
    return TtsEstimate(adjusted_iters, num_vars, clock_hz, overhead_cycles).seconds


# -- study runner -------------------------------------------------------------


def _write_csv(path: Path, fieldnames, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _resolve_scaled(text: str, n: int) -> int:
    text = str(text).strip().lower().replace(" ", "")
    if "n" in text:
        factor = text.replace("*n", "").replace("n*", "").replace("n", "") or "1"
        return int(round(float(factor) * n))
    return int(float(text))


def _parse_list(text: str, cast=float) -> list:
    return [cast(x) for x in str(text).replace(",", " ").split()]


def load_study_spec(path) -> dict:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    if not parser.read(path):
        raise FileFormatError(f"cannot read study spec {path}")
    spec: dict[str, dict[str, str]] = {s: dict(parser[s]) for s in parser.sections()}
    if "study" not in spec or "kind" not in spec["study"]:
        raise FileFormatError(f"{path}: missing [study] kind")
    return spec


def _solver_section(spec: dict) -> dict:
    """Solver settings with any [schedule] section folded in."""
    merged = dict(spec.get("solver", {}))
    merged.update(spec.get("schedule", {}))
    return merged


def run_study(spec_path, out_dir=None, threads: int = 1) -> dict:
    """Run a study spec and return its manifest (also written to disk)."""
    spec = load_study_spec(spec_path)
    kind = spec["study"]["kind"]
    seed = int(spec["study"].get("seed", 0))
    out = Path(out_dir or spec.get("output", {}).get("dir", "study-out"))
    out.mkdir(parents=True, exist_ok=True)
    runners = {
        "hs-scaling": _study_hs_scaling,
        "hs-hubo-qubo": _study_hs_hubo_qubo,
        "sg-er": _study_sg_er,
        "tsp-bench": _study_tsp_bench,
        "groups-heatmap": _study_groups_heatmap,
        "sparsify": _study_sparsify,
    }
    if kind not in runners:
        raise ConfigError(f"unknown study kind {kind!r}; have {sorted(runners)}")
    t0 = time.time()
    outputs, extra = runners[kind](spec, seed, out, threads)
    manifest = {
        "kind": kind,
        "seed": seed,
        "spec": spec,
        "outputs": [{"path": str(p), "sha256": _sha256(p)} for p in outputs],
        "wall_time_s": round(time.time() - t0, 3),
        "package_version": __version__,
        "backend": kernel.backend_name(),
    }
    manifest.update(extra)
    manifest_path = out / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return manifest


def replay_study(manifest_path, threads: int = 1) -> bool:
    """Re-run a study from its manifest into a scratch directory and compare
    the output hashes byte for byte."""
    manifest = json.loads(Path(manifest_path).read_text())
    scratch = Path(manifest_path).parent / "_replay"
    scratch.mkdir(exist_ok=True)
    spec_file = scratch / "spec.cfg"
    parser = configparser.ConfigParser()
    for section, values in manifest["spec"].items():
        parser[section] = {k: str(v) for k, v in values.items()}
    with open(spec_file, "w") as fh:
        parser.write(fh)
    new_manifest = run_study(spec_file, out_dir=scratch, threads=threads)
    old = {Path(o["path"]).name: o["sha256"] for o in manifest["outputs"]}
    new = {Path(o["path"]).name: o["sha256"] for o in new_manifest["outputs"]}
    return old == new


# -- individual studies -------------------------------------------------------


def _hs_sa_config(solver: dict, n: int, seed: int) -> SaConfig:
    lo, hi = (float(x) for x in solver.get("temp_range", "0.01-1.1").split("-"))
    return SaConfig(
        beta_start=lo,
        beta_end=hi,
        steps=int(solver.get("steps", 100)),
        total_iters=_resolve_scaled(solver.get("iters", "5*N"), n),
        repeats=int(solver.get("reps", 20)),
        seed=seed,
    )


def _best_valid_cover(h, result):
    """Smallest valid cover among the per-repeat best states, or None."""
    best = None
    for st in result.per_repeat_best_states:
        sol = solution_from_state(h, st)
        if sol.valid and (best is None or sol.size < best.size):
            best = sol
    return best


def _study_hs_scaling(spec, seed, out: Path, threads):
    """Mean solution quality and iterations-to-quality for random
    hitting-set instances.

    Iterations-to-quality uses the energy trajectory against B * reference
    size: once the best energy crosses B*q*|ref| the state is, up to one
    penalty-free repair, a cover of quality q (each uncovered edge costs
    A > B).
    """
    problem = spec.get("problem", {})
    solver = _solver_section(spec)
    k = int(problem.get("k", 5))
    sizes = _parse_list(problem.get("sizes", "50 100 200"), int)
    instances = int(problem.get("instances", 100))
    A = float(problem.get("a", 13))
    B = float(problem.get("b", 9))
    m_rule = problem.get("m", "0.4*N")
    targets = _parse_list(spec.get("output", {}).get("targets", "1.2 1.1 1.05"))

    quality_rows, scaling_rows = [], []
    root = np.random.SeedSequence(seed)
    for n in sizes:
        m = _resolve_scaled(m_rule, n)
        qs, invalid = [], 0
        iters_per_target: dict[float, list[int]] = {q: [] for q in targets}
        for child in root.spawn(instances):
            child_rng = np.random.default_rng(child)
            inst_seed = int(child.generate_state(1)[0])
            h = gen_hypergraph(n, m, k, rng=child_rng)
            ref = greedy_reference(h)
            model = encode_hitting_set(h, A, B)
            plan = plan_for(model)
            cfg = _hs_sa_config(solver, n, inst_seed)
            res = run_sa(model, plan, cfg, threads=threads)
            best = _best_valid_cover(h, res)
            if best is None:
                invalid += 1
                continue
            qs.append(hs_quality(best, ref))
            curve = iterations_to_quality(
                res.iter_pairs(), B * ref.size, targets, provenance="greedy"
            )
            for q in targets:
                it = curve.reached_at[float(q)]
                if it is not None:
                    iters_per_target[q].append(it)
        qs_arr = np.asarray(qs)
        quality_rows.append(
            {
                "N": n, "m": m, "k": k, "A": A, "B": B,
                "q_mean": float(qs_arr.mean()) if len(qs_arr) else float("nan"),
                "q_std": float(qs_arr.std()) if len(qs_arr) else float("nan"),
                "invalid_runs": invalid,
            }
        )
        for q in targets:
            hits = iters_per_target[q]
            scaling_rows.append(
                {
                    "N": n, "q_target": q,
                    "mean_iters": float(np.mean(hits)) if hits else float("nan"),
                    "std_iters": float(np.std(hits)) if hits else float("nan"),
                    "reached_fraction": len(hits) / max(1, len(qs)),
                }
            )
    quality_path = out / "hs_quality.csv"
    scaling_path = out / "hs_scaling.csv"
    _write_csv(quality_path, ["N", "m", "k", "A", "B", "q_mean", "q_std", "invalid_runs"], quality_rows)
    _write_csv(scaling_path, ["N", "q_target", "mean_iters", "std_iters", "reached_fraction"], scaling_rows)
    return [quality_path, scaling_path], {"reference": "greedy"}


def _study_hs_hubo_qubo(spec, seed, out: Path, threads):
    """Native higher-order solve vs quadratised solve at matched budgets.

    The quadratisation strength is grid-searched per instance (the per-pair
    default plus global multiples of it) and the best quadratic result is
    kept, so the comparison favours the quadratised side.
    """
    problem = spec.get("problem", {})
    solver = _solver_section(spec)
    k = int(problem.get("k", 5))
    n = int(problem.get("n", 100))
    instances = int(problem.get("instances", 20))
    A = float(problem.get("a", 13))
    B = float(problem.get("b", 9))
    m = _resolve_scaled(problem.get("m", "0.4*N"), n)
    strength_grid = [None] + _parse_list(problem.get("strength_grid", "13 26"))

    variants = {"hubo": [], "qubo_budget_nv": [], "qubo_budget_nvstar": []}
    var_counts = {"hubo": [], "qubo": []}
    root = np.random.SeedSequence(seed)
    for child in root.spawn(instances):
        child_rng = np.random.default_rng(child)
        inst_seed = int(child.generate_state(1)[0])
        h = gen_hypergraph(n, m, k, rng=child_rng)
        ref = greedy_reference(h)
        model = encode_hitting_set(h, A, B)
        plan = plan_for(model)
        res = run_sa(model, plan, _hs_sa_config(solver, n, inst_seed), threads=threads)
        best = _best_valid_cover(h, res)
        if best is not None:
            variants["hubo"].append(hs_quality(best, ref))
        var_counts["hubo"].append(model.num_vars)

        best_per_budget = {"qubo_budget_nv": None, "qubo_budget_nvstar": None}
        nvstar = None
        for strength in strength_grid:
            quad = quadratise(model, strength)
            nvstar = quad.model.num_vars
            qplan = plan_for(quad.model)
            for label, budget_n in (("qubo_budget_nv", n), ("qubo_budget_nvstar", nvstar)):
                qcfg = _hs_sa_config(solver, budget_n, inst_seed)
                qres = run_sa(quad.model, qplan, qcfg, threads=threads)
                qbest = None
                for st in qres.per_repeat_best_states:
                    sol = solution_from_state(h, quad.project(st))
                    if sol.valid and (qbest is None or sol.size < qbest.size):
                        qbest = sol
                if qbest is not None:
                    qq = hs_quality(qbest, ref)
                    if best_per_budget[label] is None or qq < best_per_budget[label]:
                        best_per_budget[label] = qq
        var_counts["qubo"].append(nvstar)
        for label, qq in best_per_budget.items():
            if qq is not None:
                variants[label].append(qq)

    rows = []
    for label, qs in variants.items():
        arr = np.asarray(qs)
        rows.append(
            {
                "variant": label, "N": n, "m": m, "k": k,
                "q_mean": float(arr.mean()) if len(arr) else float("nan"),
                "q_std": float(arr.std()) if len(arr) else float("nan"),
                "runs_scored": len(arr),
                "vars_mean": float(np.mean(var_counts["hubo" if label == "hubo" else "qubo"])),
            }
        )
    path = out / "hs_hubo_vs_qubo.csv"
    _write_csv(path, ["variant", "N", "m", "k", "q_mean", "q_std", "runs_scored", "vars_mean"], rows)
    return [path], {"reference": "greedy"}


def _study_sg_er(spec, seed, out: Path, threads):
    """Iterations for annealing to reach energy-quality targets on random
    spin glasses, against brute-force or long-tempering references."""
    problem = spec.get("problem", {})
    solver = _solver_section(spec)
    sizes = _parse_list(problem.get("sizes", "100"), int)
    probs = _parse_list(problem.get("p", "0.5 1.0"))
    instances = int(problem.get("instances", 20))
    targets = _parse_list(spec.get("output", {}).get("targets", "0.5 0.8"))
    lo, hi = (float(x) for x in solver.get("temp_range", "0.074-0.74").split("-"))
    total_iters = int(solver.get("iters", 10000))

    rows = []
    provenances = set()
    root = np.random.SeedSequence(seed)
    for n in sizes:
        for p in probs:
            iters_per_target: dict[float, list[int]] = {q: [] for q in targets}
            n_scored = 0
            for child in root.spawn(instances):
                child_rng = np.random.default_rng(child)
                inst_seed = int(child.generate_state(1)[0])
                inst = gen_er(ErSpec(n, p), rng=child_rng)
                ref = pt_baseline(inst, seed=inst_seed, threads=threads)
                if ref.energy >= 0:
                    continue  # degenerate reference; not scoreable
                provenances.add(ref.provenance)
                model = ising_to_qubo(inst)
                plan = plan_for(model)
                cfg = SaConfig(
                    beta_start=lo, beta_end=hi, steps=total_iters, iters_per_step=1,
                    repeats=int(solver.get("reps", 1)), seed=inst_seed + 1,
                )
                res = run_sa(model, plan, cfg, threads=threads)
                curve = iterations_to_quality(res.iter_pairs(), ref.energy, targets, ref.provenance)
                n_scored += 1
                for q in targets:
                    it = curve.reached_at[float(q)]
                    if it is not None:
                        iters_per_target[q].append(it)
            for q in targets:
                hits = iters_per_target[q]
                rows.append(
                    {
                        "N": n, "p": p, "q_target": q,
                        "mean_iterations": float(np.mean(hits)) if hits else float("nan"),
                        "std": float(np.std(hits)) if hits else float("nan"),
                        "reached_fraction": len(hits) / max(1, n_scored),
                    }
                )
    path = out / "sg_er_iterations.csv"
    _write_csv(path, ["N", "p", "q_target", "mean_iterations", "std", "reached_fraction"], rows)
    return [path], {"reference": sorted(provenances)}


def _study_tsp_bench(spec, seed, out: Path, threads):
    from .tsp import KNOWN_OPTIMA, default_kmc_config, held_karp, packaged_instance, run_tsp_plain

    problem = spec.get("problem", {})
    names = str(problem.get("instances", "burma14")).replace(",", " ").split()
    methods = str(problem.get("methods", "sa_kmc")).replace(",", " ").split()
    seeds_per = int(problem.get("seeds", 20))

    summary_rows, cost_rows = [], []
    references = {}
    root = np.random.SeedSequence(seed)
    for name in names:
        inst = packaged_instance(name)
        if inst.num_cities <= 18:
            reference, ref_prov = held_karp(inst.D)[0], "held-karp"
        else:
            reference, ref_prov = KNOWN_OPTIMA[name], "published-optimum"
        references[name] = {"value": reference, "provenance": ref_prov}
        for method in methods:
            ratios, n_valid = [], 0
            for child in root.spawn(seeds_per):
                run_seed = int(child.generate_state(1)[0])
                if method.endswith("_kmc"):
                    from .tsp import kmc_pipeline

                    cfg = default_kmc_config(name, method.split("_")[0], run_seed)
                    try:
                        kres = kmc_pipeline(inst, cfg, threads=threads)
                        valid, cost = kres.valid, kres.cost
                    except Exception:
                        valid, cost = False, None
                else:
                    valid, cost = run_tsp_plain(inst, name, method, run_seed, threads)
                if valid:
                    n_valid += 1
                    ratios.append(cost / reference)
                cost_rows.append(
                    {
                        "instance": name, "method": method, "seed": run_seed,
                        "cost": cost if cost is not None else "",
                        "ratio": (cost / reference) if cost is not None else "",
                        "valid": int(valid),
                    }
                )
            arr = np.asarray(ratios)
            summary_rows.append(
                {
                    "instance": name, "method": method,
                    "best": float(arr.min()) if len(arr) else float("nan"),
                    "ave": float(arr.mean()) if len(arr) else float("nan"),
                    "valid": n_valid, "seeds": seeds_per,
                }
            )
    summary_path = out / "tsp_bench.csv"
    costs_path = out / "tsp_costs.csv"
    _write_csv(summary_path, ["instance", "method", "best", "ave", "valid", "seeds"], summary_rows)
    _write_csv(costs_path, ["instance", "method", "seed", "cost", "ratio", "valid"], cost_rows)
    return [summary_path, costs_path], {"references": references}


def _study_groups_heatmap(spec, seed, out: Path, threads):
    problem = spec.get("problem", {})
    n = int(problem.get("n", 500))
    k_range = _parse_list(problem.get("k_range", "2 3 4 5 6"), int)
    m_range = _parse_list(problem.get("m_range", "25 50 100 200"), int)
    samples = int(problem.get("samples", 5))
    rows = group_count_sweep(n, k_range, m_range, samples, seed)
    path = out / f"group_counts_n{n}.csv"
    sweep_to_csv(rows, path)
    return [path], {}


def _study_sparsify(spec, seed, out: Path, threads):
    """Physical node counts and growth ratios across neighbour budgets."""
    problem = spec.get("problem", {})
    source = problem.get("source", "er")
    budgets = _parse_list(problem.get("budgets", "3 4 5 6 7 9 12 16 24 32 48 64 99"), int)
    rows = []
    if source == "er":
        n = int(problem.get("n", 100))
        probs = _parse_list(problem.get("p", "0.1 0.5 1.0"))
        root = np.random.SeedSequence(seed)
        for p, child in zip(probs, root.spawn(len(probs))):
            inst = gen_er(ErSpec(n, p), rng=np.random.default_rng(child))
            edges = [(i, j, w) for (i, j), w in sorted(inst.couplings.items())]
            for k in budgets:
                if k >= n:
                    continue
                sg = sparsify_ising(inst, k)
                gm = metrics_for_sparsification(n, [(i, j) for i, j, _ in edges], sg)
                rows.append(
                    {
                        "variant": f"p={p}", "budget": k,
                        "physical_nodes": sg.num_nodes, "r_N": gm.r_N, "r_S": gm.r_S,
                    }
                )
    elif source == "tsp":
        from .tsp import default_kmc_config, kmc_mask_for, packaged_instance, tsp_coupling_graph

        name = problem.get("instance", "burma14")
        inst = packaged_instance(name)
        masks = {"unmasked": None}
        if problem.get("masked", "true").lower() in ("true", "1", "yes"):
            masks["masked"] = kmc_mask_for(inst, default_kmc_config(name, "sa", seed))
        for variant, mask in masks.items():
            nv, edges = tsp_coupling_graph(inst, mask)
            for k in budgets:
                if k >= nv:
                    continue
                try:
                    sg = sparsify(nv, [(u, v, 1.0) for u, v in edges], k)
                except Exception:
                    continue
                gm = metrics_for_sparsification(nv, edges, sg)
                rows.append(
                    {
                        "variant": variant, "budget": k,
                        "physical_nodes": sg.num_nodes, "r_N": gm.r_N, "r_S": gm.r_S,
                    }
                )
    else:
        raise ConfigError(f"unknown sparsify source {source!r}")
    path = out / "sparsify_sweep.csv"
    _write_csv(path, ["variant", "budget", "physical_nodes", "r_N", "r_S"], rows)
    return [path], {}
