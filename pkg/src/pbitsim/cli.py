"""Command-line entry point.

Every run takes a --seed, writes only under its --out directory, and drops a
manifest.json recording the full effective configuration. Exit codes: 0 on
success, 1 on a domain error, 2 on a usage error (argparse's default).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, analysis, coloring, kernel, solve, transforms
from .errors import PbitError
from .hitting_set import gen_hypergraph, load_hypergraph, save_hypergraph
from .model import Clamp, full_clamp_mask, load_hubo, save_hubo
from .spinglass import ErSpec, gen_er, ising_to_qubo, load_instance, save_instance


def _out_dir(args) -> Path:
    out = Path(args.out or os.environ.get("PBITSIM_OUT", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(out: Path, args, extra=None) -> None:
    payload = {
        "command": args.command,
        "config": {k: v for k, v in vars(args).items() if k not in ("func",)},
        "package_version": __version__,
        "backend": kernel.backend_name(),
    }
    if extra:
        payload.update(extra)
    (out / "manifest.json").write_text(json.dumps(payload, indent=1, sort_keys=True, default=str) + "\n")


def _load_clamp(path, num_vars) -> np.ndarray:
    clamp = full_clamp_mask(num_vars)
    if path:
        data = json.loads(Path(path).read_text())
        for idx, val in data.items():
            clamp[int(idx)] = Clamp.ZERO if int(val) == 0 else Clamp.ONE
    return clamp


def cmd_gen_hs(args) -> int:
    out = _out_dir(args)
    h = gen_hypergraph(args.n, args.m, args.k, seed=args.seed)
    save_hypergraph(h, out / args.name)
    _write_manifest(out, args)
    print(f"wrote {out / args.name}: N={h.num_vertices} m={len(h.edges)} k={h.dimension}")
    return 0


def cmd_gen_er(args) -> int:
    out = _out_dir(args)
    inst = gen_er(ErSpec(args.n, args.p), seed=args.seed)
    save_instance(inst, out / args.name)
    _write_manifest(out, args)
    print(f"wrote {out / args.name}: N={inst.num_spins} edges={inst.num_edges}")
    return 0


def cmd_encode(args) -> int:
    from .hitting_set import encode_hitting_set

    out = _out_dir(args)
    if args.kind == "hs":
        a = args.a if args.a is not None else 13.0
        b = args.b if args.b is not None else 9.0
        model = encode_hitting_set(load_hypergraph(args.input), a, b)
    elif args.kind == "sg":
        model = ising_to_qubo(load_instance(args.input))
    elif args.kind == "tsp":
        from .tsp import encode_tsp, parse_tsplib

        inst = parse_tsplib(args.input)
        a = args.a if args.a is not None else 2.0 * float(inst.D.max())
        model, clamp = encode_tsp(inst, a, args.b if args.b is not None else 1.0)
    else:  # pragma: no cover - argparse restricts choices
        raise PbitError(f"unknown encode kind {args.kind}")
    save_hubo(model, out / args.name)
    _write_manifest(out, args, {"num_vars": model.num_vars, "num_terms": len(model.terms)})
    print(f"wrote {out / args.name}: N={model.num_vars} terms={len(model.terms)} order={model.max_order}")
    return 0


def _print_summary(args, fields: dict) -> None:
    if getattr(args, "format", "plain") == "json":
        print(json.dumps(fields, sort_keys=True))
    elif getattr(args, "format", "plain") == "csv":
        print(",".join(fields))
        print(",".join(repr(v) if isinstance(v, float) else str(v) for v in fields.values()))
    else:
        print(" ".join(f"{k}={v!r}" if isinstance(v, float) else f"{k}={v}" for k, v in fields.items()))


def cmd_colour(args) -> int:
    out = _out_dir(args)
    model = load_hubo(args.model)
    clamp = _load_clamp(args.clamp, model.num_vars)
    graph = coloring.build_conflict_graph(model, clamp)
    plan = coloring.greedy_colour(graph, clamp)
    coloring.verify_plan(graph, plan)
    payload = {
        "num_groups": plan.num_groups,
        "avg_group_size": plan.avg_group_size,
        "max_degree": graph.max_degree,
        "groups": [g.tolist() for g in plan.groups],
    }
    (out / "groups.json").write_text(json.dumps(payload, indent=1) + "\n")
    _write_manifest(out, args, {"num_groups": plan.num_groups})
    _print_summary(args, {
        "num_groups": plan.num_groups,
        "avg_group_size": plan.avg_group_size,
        "max_degree": graph.max_degree,
    })
    return 0


def _run_solver(args, kind: str) -> int:
    out = _out_dir(args)
    model = load_hubo(args.model)
    clamp = _load_clamp(args.clamp, model.num_vars)
    cfg_kind, cfg = solve.load_solver_config(args.config, seed=args.seed, n_scale=model.num_vars)
    if cfg_kind != kind:
        raise PbitError(f"config file holds a [{cfg_kind}] section but the command expects [{kind}]")
    graph = coloring.build_conflict_graph(model, clamp)
    plan = coloring.greedy_colour(graph, clamp)
    runner = solve.run_sa if kind == "sa" else solve.run_pt
    res = runner(model, plan, cfg, clamp=clamp, threads=args.threads)
    res.to_json(out / "result.json")
    res.trajectory_csv(out / "trajectory.csv")
    _write_manifest(out, args, {"best_energy": res.best_energy, "num_groups": plan.num_groups})
    _print_summary(args, {
        "best_energy": res.best_energy,
        "num_groups": plan.num_groups,
        "backend": res.backend,
    })
    return 0


def cmd_solve_sa(args) -> int:
    return _run_solver(args, "sa")


def cmd_solve_pt(args) -> int:
    return _run_solver(args, "pt")


def cmd_tsp_kmc(args) -> int:
    from .tsp import (
        DecodedTour,
        default_kmc_config,
        kmc_pipeline,
        packaged_instance,
        parse_tsplib,
        save_tour,
    )

    out = _out_dir(args)
    if Path(args.instance).exists():
        inst = parse_tsplib(args.instance)
    else:
        inst = packaged_instance(args.instance)
    cfg = default_kmc_config(inst.name if inst.name in ("burma14", "ulysses16", "ulysses22", "berlin52") else args.instance, args.method, args.seed)
    kres = kmc_pipeline(inst, cfg, threads=args.threads)
    save_tour(DecodedTour(kres.tour, kres.valid, kres.cost), out / "tour.txt")
    _write_manifest(out, args, {
        "valid": kres.valid, "cost": kres.cost,
        "levels": [vars(r) for r in kres.levels],
    })
    print(f"valid={kres.valid} cost={kres.cost}")
    return 0


def cmd_quadratise(args) -> int:
    out = _out_dir(args)
    model = load_hubo(args.model)
    result = transforms.quadratise(model, args.strength)
    save_hubo(result.model, out / args.name)
    per_term = {}
    for tup, _ in model.terms:
        if len(tup) > 2:
            per_term[len(tup)] = per_term.get(len(tup), 0) + 1
    _write_manifest(out, args, {
        "aux_count": result.aux_count,
        "original_vars": model.num_vars,
        "quadratic_vars": result.model.num_vars,
    })
    print(
        f"aux={result.aux_count} vars {model.num_vars} -> {result.model.num_vars}"
        + "".join(f"  order-{k} terms: {c} (k-2={k - 2} aux each alone)" for k, c in sorted(per_term.items()))
    )
    return 0


def cmd_sparsify(args) -> int:
    out = _out_dir(args)
    inst = load_instance(args.input)
    sg = transforms.sparsify_ising(inst, args.budget, args.ferro)
    edges = [(i, j) for (i, j) in sorted(inst.couplings)]
    gm = transforms.metrics_for_sparsification(inst.num_spins, edges, sg)
    save_instance(sg.as_ising(), out / args.name)
    rows = f"budget,physical_nodes,r_N,r_S\n{args.budget},{sg.num_nodes},{gm.r_N!r},{gm.r_S!r}\n"
    (out / "sparsify_metrics.csv").write_text(rows)
    _write_manifest(out, args, {"physical_nodes": sg.num_nodes, "max_degree": int(sg.degrees().max())})
    print(f"nodes {inst.num_spins} -> {sg.num_nodes}  r_N={gm.r_N:.3f} r_S={gm.r_S:.3f} lambda={sg.ferro_strength}")
    return 0


def cmd_tts(args) -> int:
    iters = args.iters / args.gbar
    seconds = analysis.estimate_tts(iters, args.n, args.freq, args.overhead)
    print(f"{seconds:.6e}")
    return 0


def cmd_study(args) -> int:
    if args.replay:
        ok = analysis.replay_study(args.replay, threads=args.threads)
        print("replay: outputs identical" if ok else "replay: MISMATCH")
        return 0 if ok else 1
    manifest = analysis.run_study(args.spec, out_dir=args.out, threads=args.threads)
    print(f"study {manifest['kind']}: {len(manifest['outputs'])} artifact(s) in {args.out or 'study-out'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pbitsim",
        description="p-bit sampling over binary energy models: generators, encoders, colourings, solvers, transforms, and studies.",
    )
    parser.add_argument("--version", action="version", version=f"pbitsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out=True):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--format", choices=["plain", "csv", "json"], default="plain",
                       help="summary print format")
        if out:
            p.add_argument("--out", default=None, help="output directory (default $PBITSIM_OUT or .)")

    p = sub.add_parser("gen-hs", help="random k-uniform hypergraph")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--name", default="instance.hg")
    common(p)
    p.set_defaults(func=cmd_gen_hs)

    p = sub.add_parser("gen-er", help="random ±1 spin glass")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--name", default="instance.ising")
    common(p)
    p.set_defaults(func=cmd_gen_er)

    p = sub.add_parser("encode", help="problem file -> energy model")
    p.add_argument("--kind", choices=["hs", "sg", "tsp"], required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--a", type=float, default=None)
    p.add_argument("--b", type=float, default=None)
    p.add_argument("--name", default="model.hubo")
    common(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("colour", help="conflict graph + greedy update groups")
    p.add_argument("--model", required=True)
    p.add_argument("--clamp", default=None, help="JSON {var: 0|1} of clamped variables")
    common(p)
    p.set_defaults(func=cmd_colour)

    for name in ("solve-sa", "solve-pt"):
        p = sub.add_parser(name, help=f"{name.split('-')[1].upper()} over a model file")
        p.add_argument("--model", required=True)
        p.add_argument("--config", required=True)
        p.add_argument("--clamp", default=None)
        common(p)
        p.set_defaults(func=cmd_solve_sa if name == "solve-sa" else cmd_solve_pt)

    p = sub.add_parser("tsp-kmc", help="clustered tour pipeline on a TSPLIB instance")
    p.add_argument("--instance", required=True, help="path or packaged name (burma14, ...)")
    p.add_argument("--method", choices=["sa", "pt"], default="sa")
    common(p)
    p.set_defaults(func=cmd_tsp_kmc)

    p = sub.add_parser("quadratise", help="reduce a model to order <= 2")
    p.add_argument("--model", required=True)
    p.add_argument("--strength", type=float, default=None)
    p.add_argument("--name", default="model_quadratic.hubo")
    common(p)
    p.set_defaults(func=cmd_quadratise)

    p = sub.add_parser("sparsify", help="neighbour-budget copy chains on a spin glass")
    p.add_argument("--input", required=True)
    p.add_argument("--budget", type=int, required=True)
    p.add_argument("--ferro", type=float, default=None, help="chain coupling strength (default 2*max|w|*(k-1))")
    p.add_argument("--name", default="sparse.ising")
    common(p)
    p.set_defaults(func=cmd_sparsify)

    p = sub.add_parser("tts", help="hardware time-to-solution estimate")
    p.add_argument("--iters", type=float, required=True, help="group iterations to target quality")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--freq", type=float, required=True, help="clock frequency in Hz")
    p.add_argument("--overhead", type=float, default=10.0)
    p.add_argument("--gbar", type=float, default=1.0, help="average group size divisor")
    p.set_defaults(func=cmd_tts)

    p = sub.add_parser("study", help="run a study spec (or --replay a manifest)")
    p.add_argument("--spec", default=None)
    p.add_argument("--replay", default=None, help="manifest.json to regenerate and compare")
    common(p)
    p.set_defaults(func=cmd_study)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "study" and not (args.spec or args.replay):
        parser.error("study needs --spec or --replay")
    try:
        return args.func(args)
    except PbitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
