"""Genetic algorithm with tournament selection, structured two-point
crossover and multiplicative mutation, followed by greedy coordinate hill
climbing and final selection by integrated IPA.

All random decisions draw from named streams derived from one master seed,
and fitness values are gathered in submission order, so results do not
depend on the number of worker processes.
"""
from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .model import PARAM_NAMES, PARAM_RANGES, PulseKind

log = logging.getLogger(__name__)

#: 1-based (m1, m2) cut points; one scheme per tournament.
CUT_SCHEMES = {
    PulseKind.TRFOCI: ((4, 8), (4, 10), (8, 10), (3, 8)),
    PulseKind.CFOCI: ((2, 3), (2, 4), (2, 3), (2, 4)),
    PulseKind.HSC: ((2, 3), (1, 2), (2, 3), (1, 2)),
}

_STREAMS = {"pool": 1, "tournament": 2, "mutation": 3, "hillclimb": 4}


def rng_stream(seed: int, name: str, *key: int) -> np.random.Generator:
    """Independent generator for ``name`` (plus integer sub-keys)."""
    ss = np.random.SeedSequence(seed, spawn_key=(_STREAMS[name], *key))
    return np.random.Generator(np.random.PCG64(ss))


def coordinate_bounds(kind: PulseKind) -> tuple[np.ndarray, np.ndarray]:
    """Closed search bounds; open range ends are pulled in by one ulp."""
    kind = PulseKind(kind)
    lo, hi = [], []
    for name in PARAM_NAMES[kind]:
        a, b, a_open, b_open = PARAM_RANGES[kind][name]
        lo.append(np.nextafter(a, np.inf) if a_open else a)
        hi.append(np.nextafter(b, -np.inf) if b_open else b)
    return np.array(lo), np.array(hi)


@dataclass(frozen=True)
class GaConfig:
    pool_size: int = 5000
    pairs: int = 50
    group_size: int = 5
    initial_group_size: int = 7
    n_mutants: int = 50
    mutation_a: float = 0.05
    mutation_b: float = 50.0
    window: int = 10
    threshold: float = 0.005
    n_finalists: int = 10
    hill_samples: int = 20
    hill_min_samples: int = 5
    hill_max_sweeps: int = 20
    max_generations: int = 1000
    seed: int = 0

    def __post_init__(self):
        counts = ("pool_size", "pairs", "group_size", "initial_group_size",
                  "n_mutants", "window", "n_finalists", "hill_samples",
                  "hill_min_samples", "hill_max_sweeps", "max_generations")
        for name in counts:
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not 0 < self.mutation_a < 1:
            raise ValueError("mutation_a must lie in (0, 1)")
        if not self.mutation_b > 1:
            raise ValueError("mutation_b must exceed 1")
        if self.group_size < 2 or self.initial_group_size < 2:
            raise ValueError("tournament groups need at least two members")
        if 4 * self.pairs + self.n_mutants != self.population_size:
            raise ValueError("4*pairs + n_mutants must equal pairs*group_size")
        if self.initial_population > self.pool_size:
            raise ValueError("pool_size smaller than the initial population")

    @property
    def population_size(self) -> int:
        return self.pairs * self.group_size

    @property
    def initial_population(self) -> int:
        return self.pairs * self.initial_group_size

    @classmethod
    def reduced(cls, **kw) -> "GaConfig":
        """Desk-scale settings: pool 500, population 50, window 5."""
        base = dict(pool_size=500, pairs=10, n_mutants=10, window=5)
        base.update(kw)
        return cls(**base)


@dataclass(frozen=True)
class Candidate:
    vector: tuple[float, ...]
    wipa: float

    @property
    def valid(self) -> bool:
        return self.wipa > 0.0


@dataclass
class GaState:
    generation: int
    population: list[Candidate]
    best: Candidate
    history: list[dict] = field(default_factory=list)
    pool_best: float = 0.0
    children_count: int = 0
    mutant_count: int = 0

    def record(self):
        w = np.array([c.wipa for c in self.population])
        top = self.population[_order(self.population)[0]]
        self.history.append({
            "gen": self.generation,
            "max_wipa": float(w.max()),
            "mean_wipa": float(w.mean()),
            "best_vector": list(top.vector),
            "best_so_far_wipa": self.best.wipa,
        })


def _order(cands: Sequence[Candidate]) -> list[int]:
    """Indices by descending WIPA, ties broken by lower index."""
    return sorted(range(len(cands)), key=lambda i: (-cands[i].wipa, i))


class Evaluator:
    """Order-preserving, memoizing fitness map over an optional process pool."""

    def __init__(self, fitness: Callable, workers: int = 1):
        self.fitness = fitness
        self.workers = max(1, int(workers))
        self._pool = None
        self._cache: dict[tuple, float] = {}
        self.calls = 0

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def _map(self, fn, items):
        if self.workers == 1 or len(items) < 2:
            return [fn(x) for x in items]
        if self._pool is None:
            self._pool = ProcessPoolExecutor(self.workers)
        chunk = max(1, len(items) // (4 * self.workers))
        return list(self._pool.map(fn, items, chunksize=chunk))

    def __call__(self, vectors) -> list[float]:
        keys = [tuple(float(v) for v in vec) for vec in vectors]
        todo = list(dict.fromkeys(k for k in keys if k not in self._cache))
        for k, val in zip(todo, self._map(self.fitness, todo)):
            self._cache[k] = float(val)
        self.calls += len(todo)
        return [self._cache[k] for k in keys]

    def candidates(self, vectors) -> list[Candidate]:
        keys = [tuple(float(v) for v in vec) for vec in vectors]
        return [Candidate(k, w) for k, w in zip(keys, self(keys))]

    def map(self, fn, items) -> list:
        return self._map(fn, list(items))


def random_population(cfg: GaConfig, kind: PulseKind, evaluate: Evaluator,
                      bounds=None) -> tuple[list[Candidate], list[Candidate]]:
    """Draw the random pool and keep its best ``initial_population`` members.

    Returns ``(population, pool)``, the population sorted by descending WIPA.
    """
    lo, hi = coordinate_bounds(kind) if bounds is None else bounds
    rng = rng_stream(cfg.seed, "pool")
    draws = rng.uniform(lo, hi, size=(cfg.pool_size, len(lo)))
    draws = np.clip(draws, lo, hi)
    pool = evaluate.candidates(draws)
    order = _order(pool)
    return [pool[i] for i in order[: cfg.initial_population]], pool


def tournament_selection(pop: Sequence[Candidate], groups: int, group_size: int,
                         rng: np.random.Generator) -> list[tuple[Candidate, Candidate]]:
    """Random disjoint groups; winner is P1, P2 is a random loser."""
    if len(pop) != groups * group_size:
        raise ValueError(f"population of {len(pop)} cannot form {groups} groups of {group_size}")
    perm = rng.permutation(len(pop))
    pairs = []
    for g in range(groups):
        members = sorted(perm[g * group_size:(g + 1) * group_size].tolist())
        winner = min(members, key=lambda i: (-pop[i].wipa, i))
        losers = [i for i in members if i != winner]
        pairs.append((pop[winner], pop[losers[int(rng.integers(len(losers)))]]))
    return pairs


def two_point_crossover(p1, p2, m1: int, m2: int) -> tuple[float, ...]:
    """Child = P1[:m1-1] + P2[m1-1:m2-1] + P1[m2-1:] (1-based cut points)."""
    p1, p2 = tuple(p1), tuple(p2)
    if len(p1) != len(p2):
        raise ValueError("parents differ in length")
    if not 1 <= m1 < m2 <= len(p1) + 1:
        raise IndexError(f"invalid cut points ({m1}, {m2}) for length {len(p1)}")
    return p1[: m1 - 1] + p2[m1 - 1: m2 - 1] + p1[m2 - 1:]


def mutation_scale(a: float, b: float) -> float:
    """Largest relative perturbation, a * (1 - 1/b) ** a."""
    return a * (1.0 - 1.0 / b) ** a


def mutate(w, cfg: GaConfig, rng: np.random.Generator, bounds=None) -> tuple[float, ...]:
    """Scale each coordinate by 1 + R*a*(1-1/b)^a, R ~ U(-1, 1), then clamp."""
    w = np.asarray(w, dtype=float)
    r = rng.uniform(-1.0, 1.0, size=len(w))
    out = w * (1.0 + r * mutation_scale(cfg.mutation_a, cfg.mutation_b))
    if bounds is not None:
        out = np.clip(out, *bounds)
    return tuple(float(x) for x in out)


def initial_state(cfg: GaConfig, kind: PulseKind, evaluate: Evaluator, bounds=None) -> GaState:
    pop, pool = random_population(cfg, kind, evaluate, bounds)
    state = GaState(0, pop, pop[0], pool_best=pop[0].wipa)
    state.record()
    return state


def ga_iteration(state: GaState, cfg: GaConfig, kind: PulseKind, evaluate: Evaluator,
                 bounds=None) -> GaState:
    """One generation: 4 tournaments -> crossover children -> top children mutated."""
    bounds = coordinate_bounds(kind) if bounds is None else bounds
    gen = state.generation + 1
    group_size = len(state.population) // cfg.pairs
    vectors = []
    for t, (m1, m2) in enumerate(CUT_SCHEMES[PulseKind(kind)]):
        rng = rng_stream(cfg.seed, "tournament", gen, t)
        for p1, p2 in tournament_selection(state.population, cfg.pairs, group_size, rng):
            vectors.append(two_point_crossover(p1.vector, p2.vector, m1, m2))
    children = evaluate.candidates(vectors)
    rng = rng_stream(cfg.seed, "mutation", gen)
    top = [children[i] for i in _order(children)[: cfg.n_mutants]]
    mutants = evaluate.candidates([mutate(c.vector, cfg, rng, bounds) for c in top])
    population = children + mutants
    best = state.best
    lead = population[_order(population)[0]]
    if lead.wipa > best.wipa:
        best = lead
    new = GaState(gen, population, best, state.history, state.pool_best,
                  len(children), len(mutants))
    new.record()
    return new


def converged(history: Sequence[dict], window: int, threshold: float) -> bool:
    """True when best-so-far WIPA rose by less than ``threshold`` over ``window`` generations."""
    if len(history) <= window:
        return False
    now = history[-1]["best_so_far_wipa"]
    then = history[-1 - window]["best_so_far_wipa"]
    return now <= then * (1.0 + threshold)


def top_distinct(pop: Sequence[Candidate], n: int) -> list[Candidate]:
    seen, out = set(), []
    for i in _order(pop):
        if pop[i].vector not in seen:
            seen.add(pop[i].vector)
            out.append(pop[i])
        if len(out) == n:
            break
    return out


def run_ga(cfg: GaConfig, kind: PulseKind, evaluate: Evaluator, bounds=None,
           on_generation: Callable[[dict], None] | None = None):
    """Iterate until convergence; return the distinct best vectors of the
    final population and the final state."""
    state = initial_state(cfg, kind, evaluate, bounds)
    if on_generation:
        on_generation(state.history[-1])
    while not converged(state.history, cfg.window, cfg.threshold):
        if state.generation >= cfg.max_generations:
            log.warning("stopping at max_generations=%d without convergence", cfg.max_generations)
            break
        state = ga_iteration(state, cfg, kind, evaluate, bounds)
        log.info("gen %d max %.4g best %.4g", state.generation,
                 state.history[-1]["max_wipa"], state.best.wipa)
        if on_generation:
            on_generation(state.history[-1])
    return top_distinct(state.population, cfg.n_finalists), state


def hill_sample_counts(cfg: GaConfig, bounds) -> list[int]:
    lo, hi = bounds
    width = hi - lo
    return [max(cfg.hill_min_samples, math.ceil(cfg.hill_samples * w / width.max()))
            for w in width]


def greedy_hill_climb(c: Candidate, cfg: GaConfig, evaluate: Evaluator,
                      rng: np.random.Generator, bounds) -> Candidate:
    """Coordinate sweeps with random trial values; keep the best value per
    coordinate (the incumbent wins ties). Stops when a sweep gains < threshold."""
    lo, hi = bounds
    counts = hill_sample_counts(cfg, bounds)
    current = c
    for _ in range(cfg.hill_max_sweeps):
        start = current.wipa
        for j, count in enumerate(counts):
            trial_vals = rng.uniform(lo[j], hi[j], size=count)
            trials = []
            for v in trial_vals:
                vec = list(current.vector)
                vec[j] = float(v)
                trials.append(tuple(vec))
            scored = evaluate.candidates(trials)
            best = max(range(count), key=lambda i: (scored[i].wipa, -i))
            if scored[best].wipa > current.wipa:
                current = scored[best]
        if current.wipa <= start * (1.0 + cfg.threshold):
            break
    return current


class _Integrated:
    def __init__(self, fitness):
        self.fitness = fitness

    def __call__(self, vector):
        return self.fitness.integrated(vector)


def select_final(finalists: Sequence[Candidate], evaluate: Evaluator,
                 score: Callable | None = None) -> tuple[Candidate, list[float]]:
    """Pick the finalist with the largest integrated IPA (lowest index on ties)."""
    score = _Integrated(evaluate.fitness) if score is None else score
    values = evaluate.map(score, [f.vector for f in finalists])
    best = max(range(len(finalists)), key=lambda i: (values[i], -i))
    return finalists[best], [float(v) for v in values]


@dataclass
class OptimizationResult:
    best: Candidate
    finalists: list[Candidate]
    climbed: list[Candidate]
    integrated: list[float]
    state: GaState


def optimize(kind: PulseKind, fitness: Callable, cfg: GaConfig = GaConfig(),
             workers: int = 1, on_generation=None) -> OptimizationResult:
    """GA, hill climbing of each finalist, then integrated-IPA selection."""
    kind = PulseKind(kind)
    bounds = coordinate_bounds(kind)
    with Evaluator(fitness, workers) as ev:
        finalists, state = run_ga(cfg, kind, ev, bounds, on_generation)
        climbed = [greedy_hill_climb(f, cfg, ev, rng_stream(cfg.seed, "hillclimb", i), bounds)
                   for i, f in enumerate(finalists)]
        best, integrated = select_final(climbed, ev)
    return OptimizationResult(best, finalists, climbed, integrated, state)


def history_jsonl(history: Sequence[dict]) -> str:
    return "".join(json.dumps(rec) + "\n" for rec in history)
