"""Forward anneal, validate, select, then iterate reverse anneals.

The algorithm: solve by forward annealing if any sample is valid; otherwise
pick a starting bitstring from the forward samples and run reverse-anneal
cycles, feeding each cycle's output into the next, halting on the first
valid output or when the cycle budget runs out.
"""

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from . import dynamics, svmc
from .coloring_qubo import QuboProblem, Sample, qubo_to_ising, validate
from .schedules import Schedule, make_forward_path, make_reverse_path
from .spectrum import QUBIT_CAP, build_problem_diagonal

OUTCOME_FORWARD = "solved-by-forward"
OUTCOME_RA = "solved-by-ra"
OUTCOME_EXHAUSTED = "exhausted"

FEED_LAST = "feed-last"
KEEP_BEST = "keep-best"


class BackendCapabilityError(ValueError):
    """Problem does not fit the backend."""


def problem_id(problem: QuboProblem) -> str:
    return hashlib.sha256(problem.to_json().encode()).hexdigest()[:12]


def _revalidate(problem: QuboProblem, samples: list[Sample]) -> list[Sample]:
    # backends report validity straight from the combinatorial check so
    # every stored flag can be re-derived from the bitstring alone
    return [
        Sample(bits=s.bits, energy=s.energy, valid=validate(problem, s.bits))
        for s in samples
    ]


class StatevectorBackend:
    """Unitary-evolution sampler; exact but capped at 20 qubits."""

    kind = "statevector"
    max_qubits = QUBIT_CAP

    def __init__(self):
        self._diag_cache: dict[QuboProblem, object] = {}

    def _diag(self, problem: QuboProblem):
        if problem.n_vars > self.max_qubits:
            raise BackendCapabilityError(
                f"{problem.n_vars} qubits exceeds the statevector cap of {self.max_qubits}"
            )
        if problem not in self._diag_cache:
            self._diag_cache[problem] = build_problem_diagonal(problem)
        return self._diag_cache[problem]

    def forward(self, problem, sched, total_time=dynamics.DEFAULT_TOTAL_TIME,
                shots=1000, seed=0, time_scale=dynamics.SLOW_TIME_SCALE):
        out = dynamics.forward_anneal(
            self._diag(problem), sched, total_time=total_time, shots=shots,
            seed=seed, time_scale=time_scale,
        )
        return _revalidate(problem, out)

    def reverse(self, problem, sched, path, initial, shots=1, seed=0,
                time_scale=dynamics.REVERSE_TIME_SCALE):
        out = dynamics.reverse_anneal(
            self._diag(problem), sched, path, initial, shots=shots, seed=seed,
            time_scale=time_scale,
        )
        return _revalidate(problem, out)


class SvmcBackend:
    """Rotor-sampler drop-in with the same call surface; no qubit cap.

    The rotor analog of annealing time is the sweep count, so time_scale
    multiplies sweeps_per_waypoint (rounded, floored at one sweep); a small
    time_scale freezes the chain just as a fast anneal does.
    """

    kind = "svmc"
    max_qubits = None

    def __init__(self, sweeps_per_waypoint: int = svmc.DEFAULT_SWEEPS_PER_WAYPOINT,
                 beta: float = svmc.DEFAULT_BETA):
        self.sweeps_per_waypoint = sweeps_per_waypoint
        self.beta = beta
        self._ising_cache: dict[QuboProblem, object] = {}

    def _ising(self, problem: QuboProblem):
        if problem not in self._ising_cache:
            self._ising_cache[problem] = qubo_to_ising(problem)
        return self._ising_cache[problem]

    def _sweeps(self, time_scale) -> int:
        if time_scale is None:
            return self.sweeps_per_waypoint
        if time_scale <= 0:
            raise ValueError(f"time_scale must be positive, got {time_scale}")
        return max(1, round(self.sweeps_per_waypoint * time_scale))

    def _batch(self, problem, sched, path, initial, shots, seed, time_scale):
        # every shot is an independent trajectory on its own child stream
        ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
        samples = [
            svmc.svmc_run(
                self._ising(problem), sched, path, initial=initial,
                sweeps_per_waypoint=self._sweeps(time_scale), beta=self.beta,
                seed=child,
            )
            for child in ss.spawn(shots)
        ]
        return _revalidate(problem, samples)

    def forward(self, problem, sched, total_time=dynamics.DEFAULT_TOTAL_TIME,
                shots=1000, seed=0, time_scale=None):
        return self._batch(problem, sched, make_forward_path(total_time), None,
                           shots, seed, time_scale)

    def reverse(self, problem, sched, path, initial, shots=1, seed=0, time_scale=None):
        return self._batch(problem, sched, path, initial, shots, seed, time_scale)


def resolve_backend(problem: QuboProblem, backend):
    """Swap in the rotor sampler when the problem exceeds the backend cap."""
    cap = getattr(backend, "max_qubits", None)
    if cap is not None and problem.n_vars > cap:
        return SvmcBackend(), True
    return backend, False


def select_initial(samples: list[Sample], seed) -> str:
    """Seeded uniform choice among valid samples; otherwise the lowest-energy
    sample, ties broken by lexicographically smallest bitstring."""
    if not samples:
        raise ValueError("cannot select from an empty sample list")
    valid = [s for s in samples if s.valid]
    if valid:
        rng = np.random.default_rng(seed)
        return valid[int(rng.integers(len(valid)))].bits
    return min(samples, key=lambda s: (s.energy, s.bits)).bits


@dataclass(frozen=True)
class CycleRecord:
    input_bits: str
    output_bits: str
    energy: float
    valid: bool

    def to_dict(self) -> dict:
        return {
            "input_bits": self.input_bits,
            "output_bits": self.output_bits,
            "energy": self.energy,
            "valid": self.valid,
        }


@dataclass(frozen=True)
class RunRecord:
    problem_id: str
    k: int
    n_vars: int
    backend_kind: str
    backend_substituted: bool
    forward: dict | None
    initial_bits: str | None
    cycles: tuple[CycleRecord, ...]
    outcome: str
    seeds: dict
    schedule_name: str
    path_info: dict
    config_hash: str | None = None

    def __post_init__(self):
        if self.outcome == OUTCOME_FORWARD and self.cycles:
            raise ValueError("solved-by-forward records must contain no cycles")
        if self.outcome == OUTCOME_RA and not any(c.valid for c in self.cycles):
            raise ValueError("solved-by-ra requires a valid cycle output")

    def to_dict(self) -> dict:
        return {
            "problem_id": self.problem_id,
            "k": self.k,
            "n_vars": self.n_vars,
            "backend_kind": self.backend_kind,
            "backend_substituted": self.backend_substituted,
            "forward": self.forward,
            "initial_bits": self.initial_bits,
            "cycles": [c.to_dict() for c in self.cycles],
            "outcome": self.outcome,
            "seeds": self.seeds,
            "schedule_name": self.schedule_name,
            "path_info": self.path_info,
            "config_hash": self.config_hash,
        }

    def to_jsonl(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _forward_summary(samples: list[Sample]) -> dict:
    return {
        "count": len(samples),
        "valid_count": sum(s.valid for s in samples),
        "min_energy": min(s.energy for s in samples),
    }


def _as_entropy(seed) -> tuple[int, ...]:
    """Normalize a seed (int or sequence of ints) to an entropy tuple."""
    if isinstance(seed, (int, np.integer)):
        parts = (int(seed),)
    else:
        try:
            parts = tuple(int(x) for x in seed)
        except (TypeError, ValueError):
            raise ValueError(f"seed must be an int or sequence of ints, got {seed!r}")
    if not parts or any(x < 0 for x in parts):
        raise ValueError(f"seed entries must be non-negative, got {seed!r}")
    return parts


def _cycle_seed(seed, c: int):
    return np.random.SeedSequence([*_as_entropy(seed), 2, c])


def _seed_json(seed):
    t = _as_entropy(seed)
    return t[0] if len(t) == 1 else list(t)


def run_chain(problem, backend, sched, path, initial: str, n_cycles: int, seed,
              shots_per_cycle: int = 1, policy: str = FEED_LAST,
              time_scale=None, halt_on_valid: bool = True):
    """Iterate reverse-anneal cycles from `initial`.

    Each cycle draws shots_per_cycle samples and keeps the lowest-energy one
    (ties to the lexicographically smaller bitstring). feed-last hands that
    output to the next cycle; keep-best instead re-feeds the best-energy
    bitstring seen so far. With halt_on_valid the chain stops at the first
    valid output; otherwise it always runs n_cycles (collection mode, used
    by the sweep protocols).
    """
    if policy not in (FEED_LAST, KEEP_BEST):
        raise ValueError(f"unknown feeding policy {policy!r}")
    if shots_per_cycle < 1:
        raise ValueError(f"need shots_per_cycle >= 1, got {shots_per_cycle}")
    kwargs = {} if time_scale is None else {"time_scale": time_scale}
    cycles: list[CycleRecord] = []
    current = initial
    best = (problem.energy(initial), initial)
    for c in range(1, n_cycles + 1):
        outs = backend.reverse(problem, sched, path, current,
                               shots=shots_per_cycle, seed=_cycle_seed(seed, c), **kwargs)
        chosen = min(outs, key=lambda s: (s.energy, s.bits))
        cycles.append(CycleRecord(current, chosen.bits, chosen.energy, chosen.valid))
        if chosen.valid and halt_on_valid:
            break
        if (chosen.energy, chosen.bits) < best:
            best = (chosen.energy, chosen.bits)
        current = chosen.bits if policy == FEED_LAST else best[1]
    return tuple(cycles)


def assisted_reverse_anneal(
    problem: QuboProblem,
    backend,
    sched: Schedule,
    s_prime: float,
    forward_shots: int = 1000,
    max_cycles: int = 50,
    seed=0,
    total_time: float = dynamics.DEFAULT_TOTAL_TIME,
    forward_time_scale=None,
    ra_time_scale=None,
    shots_per_cycle: int = 1,
    policy: str = FEED_LAST,
    config_hash: str | None = None,
) -> RunRecord:
    """Forward stage, early exit on any valid sample, else iterated RA."""
    if not 0.0 < s_prime < 1.0:
        raise ValueError(f"reverse distance must be in (0, 1), got {s_prime}")
    if forward_shots < 1:
        raise ValueError(f"need forward_shots >= 1, got {forward_shots}")
    if max_cycles < 0:
        raise ValueError(f"need max_cycles >= 0, got {max_cycles}")
    backend, substituted = resolve_backend(problem, backend)
    entropy = _as_entropy(seed)
    fwd_kwargs = {} if forward_time_scale is None else {"time_scale": forward_time_scale}
    fwd = backend.forward(problem, sched, total_time=total_time,
                          shots=forward_shots, seed=[*entropy, 0], **fwd_kwargs)
    seeds = {"master": _seed_json(seed), "forward": [*entropy, 0],
             "select": [*entropy, 1], "cycle_prefix": [*entropy, 2]}
    path_info = {
        "kind": "reverse", "s_prime": s_prime, "total_time": total_time,
        "time_scale": ra_time_scale, "shots_per_cycle": shots_per_cycle,
        "policy": policy, "mode": "halt",
    }
    common = dict(
        problem_id=problem_id(problem), k=problem.k, n_vars=problem.n_vars,
        backend_kind=backend.kind, backend_substituted=substituted,
        forward=_forward_summary(fwd), seeds=seeds, schedule_name=sched.name,
        path_info=path_info, config_hash=config_hash,
    )
    if any(s.valid for s in fwd):
        return RunRecord(initial_bits=None, cycles=(), outcome=OUTCOME_FORWARD, **common)
    initial = select_initial(fwd, [*entropy, 1])
    path = make_reverse_path(s_prime, total_time)
    cycles = run_chain(problem, backend, sched, path, initial, max_cycles, entropy,
                       shots_per_cycle=shots_per_cycle, policy=policy,
                       time_scale=ra_time_scale, halt_on_valid=True)
    solved = bool(cycles) and cycles[-1].valid
    return RunRecord(
        initial_bits=initial, cycles=cycles,
        outcome=OUTCOME_RA if solved else OUTCOME_EXHAUSTED, **common,
    )


def random_bits(n_vars: int, seed) -> str:
    rng = np.random.default_rng(seed)
    return "".join("1" if b else "0" for b in rng.integers(0, 2, n_vars))


def random_initial_baseline(
    problem: QuboProblem,
    backend,
    sched: Schedule,
    s_prime: float,
    max_cycles: int = 50,
    seed=0,
    total_time: float = dynamics.DEFAULT_TOTAL_TIME,
    ra_time_scale=None,
    shots_per_cycle: int = 1,
    policy: str = FEED_LAST,
    config_hash: str | None = None,
) -> RunRecord:
    """Same loop as the assisted run but seeded with a random bitstring and
    no forward stage; shares the per-cycle seed derivation for pairing."""
    if not 0.0 < s_prime < 1.0:
        raise ValueError(f"reverse distance must be in (0, 1), got {s_prime}")
    if max_cycles < 0:
        raise ValueError(f"need max_cycles >= 0, got {max_cycles}")
    backend, substituted = resolve_backend(problem, backend)
    entropy = _as_entropy(seed)
    initial = random_bits(problem.n_vars, [*entropy, 1])
    path = make_reverse_path(s_prime, total_time)
    cycles = run_chain(problem, backend, sched, path, initial, max_cycles, entropy,
                       shots_per_cycle=shots_per_cycle, policy=policy,
                       time_scale=ra_time_scale, halt_on_valid=True)
    solved = bool(cycles) and cycles[-1].valid
    return RunRecord(
        problem_id=problem_id(problem), k=problem.k, n_vars=problem.n_vars,
        backend_kind=backend.kind, backend_substituted=substituted,
        forward=None, initial_bits=initial, cycles=cycles,
        outcome=OUTCOME_RA if solved else OUTCOME_EXHAUSTED,
        seeds={"master": _seed_json(seed), "select": [*entropy, 1],
               "cycle_prefix": [*entropy, 2]},
        schedule_name=sched.name,
        path_info={
            "kind": "reverse", "s_prime": s_prime, "total_time": total_time,
            "time_scale": ra_time_scale, "shots_per_cycle": shots_per_cycle,
            "policy": policy, "mode": "halt",
        },
        config_hash=config_hash,
    )
