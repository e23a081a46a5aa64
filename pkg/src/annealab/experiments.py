"""Batch protocols: reverse-distance sweep, size scaling, random baseline.

Every run is a pure function of its config. Randomness derives from the
master seed through fixed stage tags:

    graph of problem i          [master, 0, i]        (scaling: [master, 0, n, i])
    forward stage of problem i  [master, 1, i]
    initial selection           [master, 2, i]
    RA chain at grid index j    [master, 3, i, j]     (cycle c appends 2, c)
    random baseline initial     [master, 4, i]

The baseline arms share the chain seeds, so assisted vs random comparisons
differ only in the starting bitstring. Raw records are JSONL; aggregates
are CSV recomputable from the raw dumps; a manifest carrying the config and
its hash makes any run replayable bit for bit.

Per-s' sample budgets count reverse-anneal cycles (one chained sample per
cycle), not measurement shots.
"""

import csv
import hashlib
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__ as _pkg_version
from .coloring_qubo import QuboProblem, build_coloring_qubo, validate
from .graphs import generate_er, greedy_color_largest_first
from .heuristic import (
    FEED_LAST,
    KEEP_BEST,
    OUTCOME_EXHAUSTED,
    OUTCOME_RA,
    RunRecord,
    StatevectorBackend,
    SvmcBackend,
    problem_id,
    random_bits,
    resolve_backend,
    run_chain,
    select_initial,
)
from .schedules import make_reverse_path, resolve_schedule, reverse_distance_grid
from .svmc import DEFAULT_BETA, DEFAULT_SWEEPS_PER_WAYPOINT

SCALING_REVERSE_DISTANCE = 0.44
WORKERS_ENV = "ANNEALAB_WORKERS"


class ConfigError(ValueError):
    """Config rejected before any computation."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Serializable description of a batch run; hash covers everything but
    the output location."""

    n_vertices: int = 5
    p: float = 0.5
    count: int = 20
    seed: int = 0
    k: int | None = None  # None: per-instance greedy color count
    backend: str = "statevector"
    schedule: str = "linear"  # bundled name or CSV path
    s_grid: tuple[float, ...] = field(default_factory=lambda: tuple(reverse_distance_grid()))
    forward_shots: int = 100
    ra_samples: int = 100  # chained RA cycles per s'
    total_time: float = 100.0
    forward_time_scale: float | None = None
    ra_time_scale: float | None = None
    shots_per_cycle: int = 1
    policy: str = FEED_LAST
    svmc_sweeps: int = DEFAULT_SWEEPS_PER_WAYPOINT
    svmc_beta: float = DEFAULT_BETA
    sizes: tuple[int, ...] = ()  # scaling runs only
    out_dir: str = "runs"

    def __post_init__(self):
        object.__setattr__(self, "s_grid", tuple(float(s) for s in self.s_grid))
        object.__setattr__(self, "sizes", tuple(int(n) for n in self.sizes))
        self.validate()

    def validate(self):
        if self.n_vertices < 1:
            raise ConfigError(f"n_vertices must be >= 1, got {self.n_vertices}")
        if not 0.0 <= self.p <= 1.0:
            raise ConfigError(f"p must be in [0, 1], got {self.p}")
        if self.count < 1:
            raise ConfigError(f"count must be >= 1, got {self.count}")
        if self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")
        if self.k is not None and self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if self.backend not in ("statevector", "svmc"):
            raise ConfigError(f"unknown backend {self.backend!r}")
        if not self.s_grid or any(not 0.0 < s < 1.0 for s in self.s_grid):
            raise ConfigError(f"s_grid values must lie in (0, 1), got {self.s_grid}")
        if self.forward_shots < 1:
            raise ConfigError(f"forward_shots must be >= 1, got {self.forward_shots}")
        if self.ra_samples < 0:
            raise ConfigError(f"ra_samples must be >= 0, got {self.ra_samples}")
        if self.total_time <= 0:
            raise ConfigError(f"total_time must be positive, got {self.total_time}")
        for name in ("forward_time_scale", "ra_time_scale"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ConfigError(f"{name} must be positive, got {v}")
        if self.shots_per_cycle < 1:
            raise ConfigError(f"shots_per_cycle must be >= 1, got {self.shots_per_cycle}")
        if self.policy not in (FEED_LAST, KEEP_BEST):
            raise ConfigError(f"unknown feeding policy {self.policy!r}")
        if self.svmc_sweeps < 1 or self.svmc_beta <= 0:
            raise ConfigError("svmc calibration values must be positive")
        if any(n < 1 for n in self.sizes):
            raise ConfigError(f"sizes must be >= 1, got {self.sizes}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config fields: {sorted(extra)}")
        return cls(**d)


def config_hash(config: ExperimentConfig) -> str:
    """Hash of everything that affects results; output location excluded."""
    payload = config.to_dict()
    payload.pop("out_dir")
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:12]


def make_backend(config: ExperimentConfig):
    if config.backend == "svmc":
        return SvmcBackend(sweeps_per_waypoint=config.svmc_sweeps, beta=config.svmc_beta)
    return StatevectorBackend()


def instance(config: ExperimentConfig, i: int, size: int | None = None) -> QuboProblem:
    """Problem i of the configured set (deterministic in config.seed)."""
    n = config.n_vertices if size is None else size
    tag = [config.seed, 0, i] if size is None else [config.seed, 0, size, i]
    g = generate_er(n, config.p, tag)
    k = config.k if config.k is not None else max(greedy_color_largest_first(g)[0], 1)
    return build_coloring_qubo(g, k)


def _workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        w = int(raw)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}")
    return max(w, 1)


def _pmap(fn, items):
    """Map preserving order; fans out to processes when workers > 1."""
    items = list(items)
    w = _workers()
    if w <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=w) as pool:
        return list(pool.map(fn, items))


def _forward_stage(problem, backend, sched, config, i):
    kwargs = {}
    if config.forward_time_scale is not None:
        kwargs["time_scale"] = config.forward_time_scale
    return backend.forward(
        problem, sched, total_time=config.total_time, shots=config.forward_shots,
        seed=[config.seed, 1, i], **kwargs,
    )


def _chain_record(problem, backend, substituted, sched, config, initial, s_prime,
                  chain_seed, forward_summary, n_cycles) -> RunRecord:
    path = make_reverse_path(s_prime, config.total_time)
    cycles = run_chain(
        problem, backend, sched, path, initial, n_cycles, chain_seed,
        shots_per_cycle=config.shots_per_cycle, policy=config.policy,
        time_scale=config.ra_time_scale, halt_on_valid=False,
    )
    outcome = OUTCOME_RA if any(c.valid for c in cycles) else OUTCOME_EXHAUSTED
    return RunRecord(
        problem_id=problem_id(problem), k=problem.k, n_vars=problem.n_vars,
        backend_kind=backend.kind, backend_substituted=substituted,
        forward=forward_summary, initial_bits=initial, cycles=cycles,
        outcome=outcome,
        seeds={"master": config.seed, "chain": list(chain_seed)},
        schedule_name=sched.name,
        path_info={
            "kind": "reverse", "s_prime": s_prime, "total_time": config.total_time,
            "time_scale": config.ra_time_scale,
            "shots_per_cycle": config.shots_per_cycle, "policy": config.policy,
            "mode": "collect",
        },
        config_hash=config_hash(config),
    )


def _summary(samples) -> dict:
    return {
        "count": len(samples),
        "valid_count": sum(s.valid for s in samples),
        "min_energy": min(s.energy for s in samples),
    }


def _valid_counts(cycles) -> tuple[int, int]:
    valid_bits = [c.output_bits for c in cycles if c.valid]
    return len(valid_bits), len(set(valid_bits))


@dataclass(frozen=True)
class SweepRow:
    problem_index: int
    problem_id: str
    n_vars: int
    k: int
    s_prime: float
    initial_valid: bool
    case: str  # "AB" when the seed was valid, "CD" otherwise
    total_valid: int
    unique_valid: int
    n_cycles: int

    def __post_init__(self):
        if self.unique_valid > self.total_valid:
            raise ValueError("unique count cannot exceed total count")
        if self.case != ("AB" if self.initial_valid else "CD"):
            raise ValueError("case label inconsistent with seed validity")


@dataclass(frozen=True)
class SweepSummary:
    rows: tuple[SweepRow, ...]

    def to_csv(self, path):
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow([
                "problem_index", "problem_id", "n_vars", "k", "s_prime",
                "initial_valid", "case", "total_valid", "unique_valid", "n_cycles",
            ])
            for r in self.rows:
                w.writerow([
                    r.problem_index, r.problem_id, r.n_vars, r.k,
                    f"{r.s_prime:.10g}", int(r.initial_valid), r.case,
                    r.total_valid, r.unique_valid, r.n_cycles,
                ])


def _sweep_problem(config: ExperimentConfig, i: int):
    """Forward once, then one collect-mode chain per grid value."""
    problem = instance(config, i)
    backend, substituted = resolve_backend(problem, make_backend(config))
    sched = resolve_schedule(config.schedule)
    fwd = _forward_stage(problem, backend, sched, config, i)
    initial = select_initial(fwd, [config.seed, 2, i])
    initial_valid = validate(problem, initial)
    summary = _summary(fwd)
    rows, records = [], []
    for j, s_prime in enumerate(config.s_grid):
        rec = _chain_record(
            problem, backend, substituted, sched, config, initial, s_prime,
            (config.seed, 3, i, j), summary, config.ra_samples,
        )
        total, unique = _valid_counts(rec.cycles)
        rows.append(SweepRow(
            problem_index=i, problem_id=rec.problem_id, n_vars=problem.n_vars,
            k=problem.k, s_prime=s_prime, initial_valid=initial_valid,
            case="AB" if initial_valid else "CD",
            total_valid=total, unique_valid=unique, n_cycles=len(rec.cycles),
        ))
        records.append(rec)
    return rows, records


def sweep_reverse_distance(config: ExperimentConfig, out_dir=None) -> SweepSummary:
    """Forward stage per problem, then chains over the reverse-distance grid.

    Writes sweep_summary.csv, sweep_records.jsonl and manifest.json to the
    output directory and returns the summary.
    """
    out = _prepare_out(config, out_dir)
    results = _pmap(_SweepWorker(config), range(config.count))
    rows = [r for rows, _ in results for r in rows]
    records = [rec for _, recs in results for rec in recs]
    order = sorted(range(len(records)),
                   key=lambda ix: (records[ix].problem_id, records[ix].path_info["s_prime"]))
    summary = SweepSummary(tuple(rows[ix] for ix in order))
    summary.to_csv(out / "sweep_summary.csv")
    _write_jsonl(out / "sweep_records.jsonl", (records[ix] for ix in order))
    write_manifest(out, "sweep", config,
                   ["sweep_summary.csv", "sweep_records.jsonl"])
    return summary


class _SweepWorker:
    """Picklable problem-index worker for the process pool."""

    def __init__(self, config):
        self.config = config

    def __call__(self, i):
        return _sweep_problem(self.config, i)


class _ScalingWorker:
    def __init__(self, config):
        self.config = config

    def __call__(self, arg):
        return _scaling_problem(self.config, *arg)


class _BaselineWorker:
    def __init__(self, config):
        self.config = config

    def __call__(self, i):
        return _baseline_problem(self.config, i)


def _scaling_problem(config: ExperimentConfig, n: int, i: int):
    problem = instance(config, i, size=n)
    backend, substituted = resolve_backend(problem, make_backend(config))
    sched = resolve_schedule(config.schedule)
    fwd = _forward_stage(problem, backend, sched, config, i)
    initial = select_initial(fwd, [config.seed, 2, i])
    rec = _chain_record(
        problem, backend, substituted, sched, config, initial,
        SCALING_REVERSE_DISTANCE, (config.seed, 3, n, i), _summary(fwd),
        config.ra_samples,
    )
    fwd_bits = [s.bits for s in fwd if s.valid]
    ra_total, ra_unique = _valid_counts(rec.cycles)
    return {
        "n_vars": problem.n_vars,
        "forward_valid": len(fwd_bits),
        "forward_unique": len(set(fwd_bits)),
        "ra_valid": ra_total,
        "ra_unique": ra_unique,
    }, rec


def scaling_run(config: ExperimentConfig, out_dir=None) -> list[dict]:
    """Fixed reverse distance, instance sizes from config.sizes, averages
    grouped by logical qubit count (n_vars). Groups with no problems are
    omitted rather than zero-filled."""
    if not config.sizes:
        raise ConfigError("scaling run needs a non-empty sizes list")
    out = _prepare_out(config, out_dir)
    args = [(n, i) for n in config.sizes for i in range(config.count)]
    results = _pmap(_ScalingWorker(config), args)
    groups: dict[int, list[dict]] = {}
    for stats, _ in results:
        groups.setdefault(stats["n_vars"], []).append(stats)
    rows = []
    for n_vars in sorted(groups):
        batch = groups[n_vars]
        m = len(batch)
        rows.append({
            "n_vars": n_vars,
            "n_problems": m,
            "avg_forward_valid": sum(b["forward_valid"] for b in batch) / m,
            "avg_forward_unique": sum(b["forward_unique"] for b in batch) / m,
            "avg_ra_valid": sum(b["ra_valid"] for b in batch) / m,
            "avg_ra_unique": sum(b["ra_unique"] for b in batch) / m,
        })
    with open(out / "scaling.csv", "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=[
            "n_vars", "n_problems", "avg_forward_valid", "avg_forward_unique",
            "avg_ra_valid", "avg_ra_unique",
        ])
        w.writeheader()
        w.writerows(rows)
    records = [rec for _, rec in results]
    order = sorted(range(len(records)),
                   key=lambda ix: (records[ix].problem_id, records[ix].n_vars))
    _write_jsonl(out / "scaling_records.jsonl", (records[ix] for ix in order))
    write_manifest(out, "scaling", config, ["scaling.csv", "scaling_records.jsonl"])
    return rows


def _baseline_problem(config: ExperimentConfig, i: int):
    problem = instance(config, i)
    backend, substituted = resolve_backend(problem, make_backend(config))
    sched = resolve_schedule(config.schedule)
    fwd = _forward_stage(problem, backend, sched, config, i)
    best_initial = select_initial(fwd, [config.seed, 2, i])
    rand_initial = random_bits(problem.n_vars, [config.seed, 4, i])
    summary = _summary(fwd)
    out = []
    for j, s_prime in enumerate(config.s_grid):
        for series, initial, fsum in (
            ("best_bitstring", best_initial, summary),
            ("random_bitstring", rand_initial, None),
        ):
            rec = _chain_record(
                problem, backend, substituted, sched, config, initial, s_prime,
                (config.seed, 3, i, j), fsum, config.ra_samples,
            )
            total, unique = _valid_counts(rec.cycles)
            out.append((series, i, s_prime, total, unique, rec))
    return out


def baseline_run(config: ExperimentConfig, out_dir=None) -> list[dict]:
    """Paired comparison: chains seeded by the selected forward bitstring vs
    a random bitstring, sharing per-chain seed streams. Emits per-s' averages
    for both series."""
    out = _prepare_out(config, out_dir)
    results = _pmap(_BaselineWorker(config), range(config.count))
    flat = [item for batch in results for item in batch]
    agg: dict[tuple[str, float], list[tuple[int, int]]] = {}
    for series, _i, s_prime, total, unique, _rec in flat:
        agg.setdefault((series, s_prime), []).append((total, unique))
    rows = []
    for series in ("best_bitstring", "random_bitstring"):
        for s_prime in config.s_grid:
            counts = agg[(series, s_prime)]
            m = len(counts)
            rows.append({
                "series": series,
                "s_prime": f"{s_prime:.10g}",
                "n_problems": m,
                "avg_valid": sum(t for t, _ in counts) / m,
                "avg_unique": sum(u for _, u in counts) / m,
            })
    with open(out / "baseline.csv", "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=["series", "s_prime", "n_problems",
                                          "avg_valid", "avg_unique"])
        w.writeheader()
        w.writerows(rows)
    records = [(series, rec) for series, _i, _s, _t, _u, rec in flat]
    order = sorted(range(len(records)), key=lambda ix: (
        records[ix][1].problem_id, records[ix][1].path_info["s_prime"], records[ix][0],
    ))
    with open(out / "baseline_records.jsonl", "w") as f:
        for ix in order:
            series, rec = records[ix]
            d = rec.to_dict()
            d["series"] = series
            f.write(json.dumps(d, sort_keys=True) + "\n")
    write_manifest(out, "baseline", config, ["baseline.csv", "baseline_records.jsonl"])
    return rows


def _prepare_out(config: ExperimentConfig, out_dir) -> Path:
    out = Path(out_dir if out_dir is not None else config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_jsonl(path, records):
    with open(path, "w") as f:
        for rec in records:
            f.write(rec.to_jsonl() + "\n")


def write_manifest(out_dir, command: str, config: ExperimentConfig, outputs):
    """Everything needed to replay the run; no timestamps, so replays of the
    same config are byte-identical."""
    import numpy
    import scipy

    manifest = {
        "command": command,
        "config": config.to_dict(),
        "config_hash": config_hash(config),
        "seeds": {"master": config.seed},
        "sample_accounting": "ra_samples counts chained reverse-anneal cycles",
        "versions": {
            "annealab": _pkg_version,
            "numpy": numpy.__version__,
            "scipy": scipy.__version__,
        },
        "outputs": sorted(outputs),
    }
    with open(Path(out_dir) / "manifest.json", "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")


def load_manifest_config(path) -> tuple[str, ExperimentConfig]:
    """(command, config) from a manifest written by write_manifest."""
    with open(path) as f:
        data = json.load(f)
    if "config" not in data or "command" not in data:
        raise ConfigError(f"{path} is not a run manifest")
    return data["command"], ExperimentConfig.from_dict(data["config"])
