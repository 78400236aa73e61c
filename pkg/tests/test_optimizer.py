import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from trfoci.model import PulseKind, PulseParams, validate_params
from trfoci.optimizer import (CUT_SCHEMES, Candidate, Evaluator, GaConfig, GaState,
                              coordinate_bounds, converged, ga_iteration,
                              greedy_hill_climb, hill_sample_counts, history_jsonl,
                              initial_state, mutate, mutation_scale, random_population,
                              rng_stream, run_ga, select_final, tournament_selection,
                              two_point_crossover)

TR_BOUNDS = coordinate_bounds(PulseKind.TRFOCI)
TR_CENTER = 0.5 * (TR_BOUNDS[0] + TR_BOUNDS[1])
SMALL = GaConfig(pool_size=200, pairs=10, n_mutants=10, window=3, n_finalists=3)


def bowl(v):
    """Smooth single-peak fitness over the TR-FOCI box (picklable)."""
    lo, hi = TR_BOUNDS
    d = (np.asarray(v) - TR_CENTER) / (hi - lo)
    return float(1.0 / (1.0 + 10.0 * np.sum(d * d)))


def flat(v):
    return 1.0


class FixedR:
    """Stand-in generator whose uniform draws are a constant."""
    def __init__(self, r):
        self.r = r

    def uniform(self, lo, hi, size):
        return np.full(size, float(self.r))


def pop_of(wipas):
    return [Candidate((float(i),), w) for i, w in enumerate(wipas)]


class TestCrossover:
    def test_identical_parents(self):
        p = tuple(range(11))
        for m1, m2 in CUT_SCHEMES[PulseKind.TRFOCI]:
            assert two_point_crossover(p, p, m1, m2) == p

    def test_slice_arithmetic(self):
        child = two_point_crossover([1] * 11, [2] * 11, 4, 8)
        assert child == (1, 1, 1, 2, 2, 2, 2, 1, 1, 1, 1)

    @pytest.mark.parametrize("cuts", [(0, 3), (5, 5), (8, 4), (3, 13)])
    def test_bad_cuts(self, cuts):
        with pytest.raises(IndexError):
            two_point_crossover([1] * 11, [2] * 11, *cuts)

    def test_cfoci_schemes_nontrivial(self):
        for m1, m2 in CUT_SCHEMES[PulseKind.CFOCI]:
            child = two_point_crossover((1, 1, 1), (2, 2, 2), m1, m2)
            assert 1 in child and 2 in child


class TestMutation:
    def test_scale(self):
        assert mutation_scale(0.05, 50) == pytest.approx(0.05 * 0.98 ** 0.05, rel=1e-15)
        assert mutation_scale(0.05, 50) == pytest.approx(0.04995, abs=1e-5)

    def test_zero_r(self):
        w = tuple(TR_CENTER)
        assert mutate(w, GaConfig(), FixedR(0.0), TR_BOUNDS) == w

    def test_clamp_upper(self):
        w = tuple(TR_BOUNDS[1])
        assert mutate(w, GaConfig(), FixedR(1.0), TR_BOUNDS) == w

    def test_bounded_perturbation(self):
        rng = rng_stream(1, "mutation", 0)
        w = np.array(TR_CENTER)
        for _ in range(200):
            out = np.array(mutate(w, GaConfig(), rng))
            assert np.all(np.abs(out / w - 1) <= mutation_scale(0.05, 50) + 1e-15)

    def test_config_checks(self):
        with pytest.raises(ValueError):
            GaConfig(mutation_a=0.0)
        with pytest.raises(ValueError):
            GaConfig(mutation_b=1.0)
        with pytest.raises(ValueError):
            GaConfig(n_mutants=49)


class TestTournament:
    def test_dominant_wins(self):
        pop = pop_of([1, 1, 9, 1, 1])
        for s in range(20):
            ((p1, p2),) = tournament_selection(pop, 1, 5, rng_stream(s, "tournament", 0))
            assert p1.wipa == 9 and p2 is not p1

    def test_tie_goes_to_lowest_index(self):
        pop = pop_of([2.0] * 5)
        ((p1, _),) = tournament_selection(pop, 1, 5, rng_stream(0, "tournament", 0))
        assert p1.vector == (0.0,)

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            tournament_selection(pop_of([1] * 249), 50, 5, rng_stream(0, "tournament", 0))

    def test_initial_groups_of_seven(self):
        cfg = GaConfig()
        assert cfg.initial_population == 350
        pairs = tournament_selection(pop_of(range(350)), 50, 350 // 50, rng_stream(0, "tournament", 0))
        assert len(pairs) == 50

    def test_every_member_used_once(self):
        pop = pop_of(np.arange(250.0))
        pairs = tournament_selection(pop, 50, 5, rng_stream(3, "tournament", 1))
        winners = [p1.wipa for p1, _ in pairs]
        assert len(set(winners)) == 50


class TestPopulation:
    def test_random_population(self):
        with Evaluator(bowl) as ev:
            pop, pool = random_population(GaConfig(), PulseKind.TRFOCI, ev)
            again, _ = random_population(GaConfig(), PulseKind.TRFOCI, Evaluator(bowl))
        assert len(pool) == 5000 and len(pop) == 350
        w = [c.wipa for c in pop]
        assert w == sorted(w, reverse=True)
        assert pop == again
        for c in pop:
            assert validate_params(PulseParams(PulseKind.TRFOCI, c.vector)) == []

    def test_accounting_and_best_so_far(self):
        cfg = GaConfig()
        with Evaluator(bowl) as ev:
            state = initial_state(cfg, PulseKind.TRFOCI, ev)
            for _ in range(3):
                state = ga_iteration(state, cfg, PulseKind.TRFOCI, ev)
                assert len(state.population) == 250
                assert (state.children_count, state.mutant_count) == (200, 50)
        best = [h["best_so_far_wipa"] for h in state.history]
        assert best == sorted(best)

    def test_identical_population_breeds_itself(self):
        cfg = GaConfig.reduced()
        v = tuple(TR_CENTER)
        state = GaState(0, [Candidate(v, 1.0)] * cfg.initial_population, Candidate(v, 1.0))
        with Evaluator(bowl) as ev:
            new = ga_iteration(state, cfg, PulseKind.TRFOCI, ev)
        assert all(c.vector == v for c in new.population[: 4 * cfg.pairs])

    def test_closure(self):
        ev = Evaluator(bowl)
        run_ga(SMALL, PulseKind.TRFOCI, ev)
        lo, hi = TR_BOUNDS
        for vec in ev._cache:
            assert np.all(np.array(vec) >= lo) and np.all(np.array(vec) <= hi)

    def test_cache_coherence(self):
        ev = Evaluator(bowl)
        _, state = run_ga(SMALL, PulseKind.TRFOCI, ev)
        cached = sorted(state.population, key=lambda c: -c.wipa)
        fresh = sorted(state.population, key=lambda c: -bowl(c.vector))
        assert [c.vector for c in cached] == [c.vector for c in fresh]


class TestRunGa:
    def test_constant_fitness_stops_after_window(self):
        _, state = run_ga(SMALL, PulseKind.TRFOCI, Evaluator(flat))
        assert state.generation == SMALL.window

    def test_same_seed_same_history(self):
        a_fin, a = run_ga(SMALL, PulseKind.TRFOCI, Evaluator(bowl))
        b_fin, b = run_ga(SMALL, PulseKind.TRFOCI, Evaluator(bowl))
        assert history_jsonl(a.history) == history_jsonl(b.history)
        assert a_fin == b_fin

    def test_workers_do_not_change_result(self):
        _, a = run_ga(SMALL, PulseKind.TRFOCI, Evaluator(bowl))
        with Evaluator(bowl, workers=2) as ev:
            _, b = run_ga(SMALL, PulseKind.TRFOCI, ev)
        assert history_jsonl(a.history) == history_jsonl(b.history)

    def test_seed_matters(self):
        _, a = run_ga(SMALL, PulseKind.TRFOCI, Evaluator(bowl))
        _, b = run_ga(GaConfig(**{**SMALL.__dict__, "seed": 1}), PulseKind.TRFOCI, Evaluator(bowl))
        assert a.history != b.history

    def test_distinct_finalists(self):
        fin, _ = run_ga(SMALL, PulseKind.TRFOCI, Evaluator(bowl))
        assert len({c.vector for c in fin}) == len(fin) == SMALL.n_finalists

    def test_history_jsonl_fields(self):
        _, state = run_ga(SMALL, PulseKind.CFOCI, Evaluator(flat))
        recs = [json.loads(line) for line in history_jsonl(state.history).splitlines()]
        assert [r["gen"] for r in recs] == list(range(len(recs)))
        assert {"gen", "max_wipa", "mean_wipa", "best_vector"} <= set(recs[0])
        assert len(recs[0]["best_vector"]) == 3


class TestConverged:
    def hist(self, values):
        return [{"best_so_far_wipa": v} for v in values]

    def test_needs_full_window(self):
        assert not converged(self.hist([1.0] * 10), 10, 0.005)
        assert converged(self.hist([1.0] * 11), 10, 0.005)

    def test_threshold(self):
        assert not converged(self.hist([1.0] + [1.006] * 10), 10, 0.005)
        assert converged(self.hist([1.0] + [1.004] * 10), 10, 0.005)


PEAK = np.array([3.0, 7.0, 5.0])
BOX = (np.zeros(3), np.full(3, 10.0))


def quadratic(v):
    return 100.0 - float(np.sum((np.asarray(v) - PEAK) ** 2))


class TestHillClimb:
    def test_sample_counts(self):
        counts = hill_sample_counts(GaConfig(), TR_BOUNDS)
        assert max(counts) == 20 and min(counts) == 5
        assert counts[0] == 20  # a_max has the widest range

    def test_flat_returns_input_after_one_sweep(self):
        ev = Evaluator(flat)
        start = ev.candidates([tuple(TR_CENTER)])[0]
        out = greedy_hill_climb(start, GaConfig(), ev, rng_stream(0, "hillclimb", 0), TR_BOUNDS)
        assert out == start
        assert ev.calls == 1 + sum(hill_sample_counts(GaConfig(), TR_BOUNDS))

    @given(st.integers(0, 2**31))
    def test_never_worse(self, seed):
        ev = Evaluator(bowl)
        rng = np.random.default_rng(seed)
        start = ev.candidates([tuple(rng.uniform(*TR_BOUNDS))])[0]
        out = greedy_hill_climb(start, GaConfig(hill_max_sweeps=2), ev,
                                rng_stream(seed, "hillclimb", 0), TR_BOUNDS)
        assert out.wipa >= start.wipa

    def test_quadratic_surrogate(self):
        # Trial values are uniform draws, so accuracy is a distribution over seeds.
        within, sweeps = [], []
        per_sweep = sum(hill_sample_counts(GaConfig(), BOX))
        for seed in range(200):
            ev = Evaluator(quadratic)
            start = ev.candidates([(9.0, 1.0, 1.0)])[0]
            out = greedy_hill_climb(start, GaConfig(), ev, rng_stream(seed, "hillclimb", 0), BOX)
            sweeps.append((ev.calls - 1) // per_sweep)
            within.append(np.all(np.abs(np.array(out.vector) - PEAK) <= 0.05 * 10.0))
        assert max(sweeps) <= 3
        assert np.mean(within) >= 0.9


class TestSelectFinal:
    def test_dominance(self):
        fin = pop_of([1.0, 1.0, 1.0])
        best, values = select_final(fin, Evaluator(flat), score=lambda v: [3, 9, 4][int(v[0])])
        assert best is fin[1] and values == [3, 9, 4]

    def test_tie_lowest_index(self):
        fin = pop_of([1.0, 1.0, 1.0])
        best, _ = select_final(fin, Evaluator(flat), score=lambda v: 5.0)
        assert best is fin[0]

    def test_integrated_curve_has_101_samples(self, monkeypatch):
        import trfoci.evaluate as ev_mod
        seen = []
        real = ev_mod.ipa_curve

        def spy(wf, cfg, levels=None, *a, **k):
            out = real(wf, cfg, levels, *a, **k)
            seen.append(len(out[0]))
            return out

        monkeypatch.setattr(ev_mod, "ipa_curve", spy)
        from trfoci.evaluate import WipaFitness
        from trfoci.fixtures import load_fixture
        fx = load_fixture("cfoci_5mm_13ms")
        fit = WipaFitness(PulseKind.CFOCI, fx.sequence)
        select_final([Candidate(fx.params.values, 1.0)], Evaluator(fit))
        assert seen == [101]
