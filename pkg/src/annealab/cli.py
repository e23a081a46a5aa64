"""Command-line front end.

Subcommands: generate, spectrum, anneal, sweep, scaling, baseline. Batch
subcommands read an ExperimentConfig JSON (or a previous run's manifest,
whose embedded config is reused verbatim for bit-exact replay) with flag
overrides on top. Every run directory gets a manifest.json.
"""

import argparse
import csv
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .coloring_qubo import build_coloring_qubo
from .experiments import (
    ConfigError,
    ExperimentConfig,
    baseline_run,
    config_hash,
    scaling_run,
    sweep_reverse_distance,
)
from .graphs import Graph, generate_er, greedy_color_largest_first
from .heuristic import (
    StatevectorBackend,
    SvmcBackend,
    assisted_reverse_anneal,
    resolve_backend,
)
from .schedules import ScheduleError, resolve_schedule
from .spectrum import SpectrumError, build_problem_diagonal, spectrum_sweep


def _write_simple_manifest(out_dir: Path, command: str, params: dict, outputs):
    import numpy
    import scipy

    payload = {k: v for k, v in params.items() if k != "out"}
    manifest = {
        "command": command,
        "config": params,
        "config_hash": hashlib.sha256(
            json.dumps(payload, sort_keys=True).encode()
        ).hexdigest()[:12],
        "versions": {
            "annealab": __version__,
            "numpy": numpy.__version__,
            "scipy": scipy.__version__,
        },
        "outputs": sorted(outputs),
    }
    if "seed" in params:
        manifest["seeds"] = {"master": params["seed"]}
    with open(out_dir / "manifest.json", "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_graph(path: str) -> Graph:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"graph file not found: {p}")
    return Graph.load(p)


def cmd_generate(args) -> int:
    out = _out_dir(args)
    params = dict(n_vertices=args.n_vertices, p=args.p, count=args.count,
                  seed=args.seed, out=str(out))
    names = []
    rows = []
    for i in range(args.count):
        g = generate_er(args.n_vertices, args.p, [args.seed, 0, i])
        k, _ = greedy_color_largest_first(g)
        name = f"graph_{i:03d}.json"
        g.save(out / name)
        names.append(name)
        rows.append({"index": i, "file": name, "n_vertices": g.n_vertices,
                     "n_edges": len(g.edges), "greedy_k": k, "n_vars": g.n_vertices * k})
    with open(out / "instances.csv", "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=["index", "file", "n_vertices", "n_edges",
                                          "greedy_k", "n_vars"])
        w.writeheader()
        w.writerows(rows)
    _write_simple_manifest(out, "generate", params, names + ["instances.csv"])
    print(f"wrote {args.count} graphs to {out}")
    return 0


def cmd_spectrum(args) -> int:
    sched = resolve_schedule(args.schedule)
    g = _load_graph(args.graph)
    problem = build_coloring_qubo(g, args.k)
    out = _out_dir(args)
    diag = build_problem_diagonal(problem)
    table = spectrum_sweep(sched, diag, grid=np.linspace(0.0, 1.0, args.grid),
                           m=args.levels)
    table.to_csv(out / "spectrum.csv")
    params = dict(graph=args.graph, k=args.k, schedule=args.schedule,
                  levels=args.levels, grid=args.grid, out=str(out))
    _write_simple_manifest(out, "spectrum", params, ["spectrum.csv"])
    print(f"wrote {out / 'spectrum.csv'} ({args.grid} rows x {args.levels} levels)")
    return 0


def cmd_anneal(args) -> int:
    sched = resolve_schedule(args.schedule)
    g = _load_graph(args.graph)
    k = args.k if args.k is not None else greedy_color_largest_first(g)[0]
    problem = build_coloring_qubo(g, k)
    backend, _ = resolve_backend(problem, _backend_from_name(args))
    out = _out_dir(args)
    record = assisted_reverse_anneal(
        problem, backend, sched, s_prime=args.s_prime,
        forward_shots=args.forward_shots, max_cycles=args.max_cycles,
        seed=args.seed, total_time=args.total_time,
        forward_time_scale=args.forward_time_scale,
        ra_time_scale=args.ra_time_scale, shots_per_cycle=args.shots_per_cycle,
        policy=args.policy,
    )
    with open(out / "anneal_record.jsonl", "w") as f:
        f.write(record.to_jsonl() + "\n")
    params = dict(graph=args.graph, k=k, schedule=args.schedule,
                  s_prime=args.s_prime, forward_shots=args.forward_shots,
                  max_cycles=args.max_cycles, seed=args.seed,
                  total_time=args.total_time,
                  forward_time_scale=args.forward_time_scale,
                  ra_time_scale=args.ra_time_scale,
                  shots_per_cycle=args.shots_per_cycle, policy=args.policy,
                  backend=args.backend, svmc_sweeps=args.svmc_sweeps,
                  svmc_beta=args.svmc_beta, out=str(out))
    _write_simple_manifest(out, "anneal", params, ["anneal_record.jsonl"])
    print(f"outcome: {record.outcome} after {len(record.cycles)} RA cycles "
          f"(forward valid {record.forward['valid_count']}/{record.forward['count']})")
    return 0


def _backend_from_name(args):
    if args.backend == "svmc":
        return SvmcBackend(sweeps_per_waypoint=args.svmc_sweeps, beta=args.svmc_beta)
    return StatevectorBackend()


def _load_config(args) -> ExperimentConfig:
    data = {}
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        with open(path) as f:
            loaded = json.load(f)
        # a manifest embeds the config it ran with; accept either shape
        data = loaded["config"] if "config" in loaded and "command" in loaded else loaded
    overrides = {
        name: getattr(args, name)
        for name in ("n_vertices", "p", "count", "seed", "k", "backend", "schedule",
                     "forward_shots", "ra_samples", "shots_per_cycle", "policy",
                     "svmc_sweeps", "svmc_beta", "total_time", "forward_time_scale",
                     "ra_time_scale")
        if getattr(args, name, None) is not None
    }
    if getattr(args, "s_grid", None):
        overrides["s_grid"] = tuple(args.s_grid)
    if getattr(args, "sizes", None):
        overrides["sizes"] = tuple(args.sizes)
    if args.out is not None:
        overrides["out_dir"] = args.out
    data.update(overrides)
    config = ExperimentConfig.from_dict(data)
    resolve_schedule(config.schedule)  # fail on a missing schedule before any run
    return config


def cmd_sweep(args) -> int:
    config = _load_config(args)
    summary = sweep_reverse_distance(config)
    solved = sum(1 for r in summary.rows if r.total_valid > 0)
    print(f"sweep: {len(summary.rows)} (problem, s') rows, {solved} with valid samples; "
          f"config {config_hash(config)} -> {config.out_dir}")
    return 0


def cmd_scaling(args) -> int:
    config = _load_config(args)
    rows = scaling_run(config)
    print(f"scaling: {len(rows)} qubit-count groups; config {config_hash(config)} "
          f"-> {config.out_dir}")
    return 0


def cmd_baseline(args) -> int:
    config = _load_config(args)
    rows = baseline_run(config)
    print(f"baseline: {len(rows)} series rows; config {config_hash(config)} "
          f"-> {config.out_dir}")
    return 0


def _add_batch_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="ExperimentConfig JSON or a manifest.json to replay")
    p.add_argument("--n-vertices", dest="n_vertices", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--count", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--backend", choices=["statevector", "svmc"])
    p.add_argument("--schedule")
    p.add_argument("--s-grid", dest="s_grid", type=float, nargs="+")
    p.add_argument("--forward-shots", dest="forward_shots", type=int)
    p.add_argument("--ra-samples", dest="ra_samples", type=int)
    p.add_argument("--total-time", dest="total_time", type=float)
    p.add_argument("--forward-time-scale", dest="forward_time_scale", type=float)
    p.add_argument("--ra-time-scale", dest="ra_time_scale", type=float)
    p.add_argument("--shots-per-cycle", dest="shots_per_cycle", type=int)
    p.add_argument("--policy", choices=["feed-last", "keep-best"])
    p.add_argument("--svmc-sweeps", dest="svmc_sweeps", type=int)
    p.add_argument("--svmc-beta", dest="svmc_beta", type=float)
    p.add_argument("--out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="annealab",
        description="Forward-assisted reverse annealing on graph-coloring QUBOs",
    )
    parser.add_argument("--version", action="version", version=f"annealab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a deterministic set of random graphs")
    p.add_argument("--n-vertices", dest="n_vertices", type=int, default=5)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="runs")
    p.set_defaults(fn=cmd_generate)

    p = sub.add_parser("spectrum", help="tabulate the low-lying spectrum over s")
    p.add_argument("--graph", required=True, help="graph JSON file")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--schedule", default="linear")
    p.add_argument("--levels", type=int, default=15)
    p.add_argument("--grid", type=int, default=100)
    p.add_argument("--out", default="runs")
    p.set_defaults(fn=cmd_spectrum)

    p = sub.add_parser("anneal", help="run the assisted reverse-anneal algorithm once")
    p.add_argument("--graph", required=True, help="graph JSON file")
    p.add_argument("--k", type=int, help="colors (default: greedy bound)")
    p.add_argument("--schedule", default="linear")
    p.add_argument("--s-prime", dest="s_prime", type=float, default=0.44)
    p.add_argument("--forward-shots", dest="forward_shots", type=int, default=100)
    p.add_argument("--max-cycles", dest="max_cycles", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--total-time", dest="total_time", type=float, default=100.0)
    p.add_argument("--forward-time-scale", dest="forward_time_scale", type=float)
    p.add_argument("--ra-time-scale", dest="ra_time_scale", type=float)
    p.add_argument("--shots-per-cycle", dest="shots_per_cycle", type=int, default=1)
    p.add_argument("--policy", choices=["feed-last", "keep-best"], default="feed-last")
    p.add_argument("--backend", choices=["statevector", "svmc"], default="statevector")
    p.add_argument("--svmc-sweeps", dest="svmc_sweeps", type=int, default=1000)
    p.add_argument("--svmc-beta", dest="svmc_beta", type=float, default=10.0)
    p.add_argument("--out", default="runs")
    p.set_defaults(fn=cmd_anneal)

    for name, fn, blurb in (
        ("sweep", cmd_sweep, "reverse-distance sweep over the s' grid"),
        ("scaling", cmd_scaling, "fixed s' = 0.44 across instance sizes"),
        ("baseline", cmd_baseline, "assisted vs random-bitstring comparison"),
    ):
        p = sub.add_parser(name, help=blurb)
        if name == "scaling":
            p.add_argument("--sizes", type=int, nargs="+")
        _add_batch_flags(p)
        p.set_defaults(fn=fn)
    return parser


def cli_entry(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.fn(args)
    except (ConfigError, ScheduleError, SpectrumError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_entry(sys.argv[1:]))


if __name__ == "__main__":
    main()
