import math

import numpy as np
import pytest

from cga_lab import engine, fitness
from conftest import ForcedRng, bits_to_uniforms, naive_one_step


class TestInitModel:
    def test_fresh_frequencies_are_half(self):
        m = engine.init_model(10, 5.0)
        assert m.freqs.tolist() == [0.5] * 10

    def test_minimal_n(self):
        assert engine.init_model(2, 1.0).freqs.tolist() == [0.5, 0.5]

    def test_rejects_zero_k(self):
        with pytest.raises(ValueError):
            engine.init_model(10, 0.0)

    def test_rejects_negative_k(self):
        with pytest.raises(ValueError):
            engine.init_model(10, -2.0)

    def test_rejects_small_n(self):
        with pytest.raises(ValueError):
            engine.init_model(1, 5.0)


class TestSample:
    def test_all_lower_border_expected_ones(self):
        n = 100
        m = engine.FrequencyModel(n, 10.0, np.full(n, 1.0 / n))
        rng = np.random.default_rng(5)
        total = sum(engine.sample(m, rng).ones for _ in range(20_000))
        mean = total / 20_000
        sigma = math.sqrt((1 - 1 / n) / 20_000)  # variance of ones is ~1-1/n
        assert abs(mean - 1.0) <= 3 * sigma

    def test_uniform_half_middle_count(self):
        m = engine.init_model(4, 10.0)
        rng = np.random.default_rng(6)
        hits = sum(engine.sample(m, rng).ones == 2 for _ in range(100_000))
        p = 6 / 16
        sigma = math.sqrt(p * (1 - p) / 100_000)
        assert abs(hits / 100_000 - p) <= 3 * sigma

    def test_bitwise_frequency_matches_model(self):
        n = 8
        rng = np.random.default_rng(7)
        freqs = 1 / n + (1 - 2 / n) * rng.random(n)
        m = engine.FrequencyModel(n, 10.0, freqs)
        counts = np.zeros(n)
        trials = 100_000
        for _ in range(trials):
            counts += engine.sample(m, rng).bits
        sigma = np.sqrt(freqs * (1 - freqs) / trials)
        assert np.all(np.abs(counts / trials - freqs) <= 3 * sigma + 1e-12)

    def test_ones_cached_correctly(self):
        m = engine.init_model(32, 4.0)
        rng = np.random.default_rng(8)
        for _ in range(100):
            s = engine.sample(m, rng)
            assert s.ones == int(s.bits.sum())


class TestStep:
    def test_winner_reinforced(self):
        m = engine.FrequencyModel(4, 4.0, np.full(4, 0.5))
        rng = ForcedRng(bits_to_uniforms([1, 0, 0, 0]), bits_to_uniforms([0, 0, 0, 0]))
        rec = engine.step(m, fitness.one_max(4), rng)
        assert m.freqs.tolist() == [0.75, 0.5, 0.5, 0.5]
        assert (rec.ones_x, rec.ones_y) == (1, 0)

    def test_tie_keeps_first_sample(self):
        m = engine.FrequencyModel(4, 4.0, np.full(4, 0.5))
        rng = ForcedRng(bits_to_uniforms([1, 0, 0, 0]), bits_to_uniforms([0, 1, 0, 0]))
        engine.step(m, fitness.one_max(4), rng)
        assert m.freqs.tolist() == [0.75, 0.25, 0.5, 0.5]

    def test_n_two_is_pinned_by_borders(self):
        # For n=2 the borders [1/n, 1-1/n] collapse to {1/2}: no update can move.
        m = engine.init_model(2, 4.0)
        rng = ForcedRng(bits_to_uniforms([1, 0]), bits_to_uniforms([0, 0]))
        engine.step(m, fitness.one_max(2), rng)
        assert m.freqs.tolist() == [0.5, 0.5]

    def test_upper_border_clamps(self):
        m = engine.FrequencyModel(4, 100.0, np.array([0.75, 0.5, 0.5, 0.5]))
        rng = ForcedRng(bits_to_uniforms([1, 1, 1, 1]), bits_to_uniforms([0, 1, 1, 1]))
        engine.step(m, fitness.one_max(4), rng)
        assert m.freqs[0] == 0.75  # 1 - 1/4, cannot rise further

    def test_swap_when_second_sample_fitter(self):
        m = engine.FrequencyModel(3, 10.0, np.array([0.5, 0.5, 0.5]))
        rng = ForcedRng(bits_to_uniforms([0, 0, 0]), bits_to_uniforms([1, 1, 0]))
        rec = engine.step(m, fitness.one_max(3), rng)
        assert (rec.ones_x, rec.ones_y) == (2, 0)
        assert m.freqs.tolist() == [0.6, 0.6, 0.5]

    def test_record_bookkeeping(self):
        m = engine.init_model(12, 7.0)
        f = fitness.cliff(12)
        rng = np.random.default_rng(11)
        for _ in range(200):
            before = m.freqs.copy()
            rec = engine.step(m, f, rng)
            assert rec.potential_before == pytest.approx(before.sum(), abs=1e-9)
            assert rec.potential_after == pytest.approx(m.freqs.sum(), abs=1e-9)
            assert rec.delta_potential == rec.potential_after - rec.potential_before
            assert abs(rec.delta_potential) <= 12 / 7.0 + 1e-12
            assert rec.evaluations_used == 2

    def test_event_classification(self):
        # n=9, boundary 6: M iff exactly one offspring has more than 6 ones.
        m = engine.FrequencyModel(9, 50.0, np.full(9, 0.5))
        f = fitness.cliff(9)
        cases = [
            ([1] * 6 + [0] * 3, [1] * 5 + [0] * 4, engine.EVENT_LEFT),
            ([1] * 7 + [0] * 2, [1] * 8 + [0], engine.EVENT_RIGHT),
            ([1] * 7 + [0] * 2, [1] * 5 + [0] * 4, engine.EVENT_MIXED),
        ]
        for bits_x, bits_y, expected in cases:
            rng = ForcedRng(bits_to_uniforms(bits_x), bits_to_uniforms(bits_y))
            rec = engine.step(m.copy(), f, rng)
            assert rec.event_class == expected

    def test_reinforced_offspring_at_least_as_fit(self):
        f = fitness.cliff(9)
        m = engine.init_model(9, 3.0)
        rng = np.random.default_rng(12)
        for _ in range(500):
            rec = engine.step(m, f, rng)
            assert f.value_at(rec.ones_x) >= f.value_at(rec.ones_y)

    def test_kernel_matches_naive_reference(self):
        rng = np.random.default_rng(13)
        for trial in range(300):
            n = int(rng.integers(2, 40))
            k = float(rng.choice([1.0, 2.0, 7.5, 100.0]))
            f = fitness.one_max(n) if n % 3 else fitness.cliff(n)
            freqs = np.clip(rng.random(n), 1 / n, 1 - 1 / n)
            u_x, u_y = rng.random(n), rng.random(n)
            expected, ones_x, ones_y, _ = naive_one_step(freqs, k, f.values, u_x, u_y)
            m = engine.FrequencyModel(n, k, freqs.copy())
            rec = engine.step(m, f, ForcedRng(u_x, u_y))
            assert np.array_equal(m.freqs, expected)
            assert {rec.ones_x, rec.ones_y} == {ones_x, ones_y}

    def test_equal_bits_never_move(self):
        rng = np.random.default_rng(14)
        for _ in range(100):
            n = 12
            freqs = np.clip(rng.random(n), 1 / n, 1 - 1 / n)
            m = engine.FrequencyModel(n, 5.0, freqs.copy())
            u_x, u_y = rng.random(n), rng.random(n)
            x = u_x < freqs
            y = u_y < freqs
            engine.step(m, fitness.one_max(n), ForcedRng(u_x, u_y))
            same = x == y
            assert np.array_equal(m.freqs[same], freqs[same])
            moved = m.freqs[~same] - freqs[~same]
            # each disagreeing bit moves by exactly 1/K unless clamped
            for before, delta in zip(freqs[~same], moved):
                assert abs(delta) <= 1 / 5.0 + 1e-15


class TestRun:
    def test_geometric_at_upper_borders(self):
        # With K huge the model is frozen at the upper borders, so the number
        # of evaluations is geometric with success rate (1 - 1/n)^n per sample.
        n = 4
        p_hit = (1 - 1 / n) ** n
        runs = 2000
        evals = []
        for r in range(runs):
            m = engine.FrequencyModel(n, 1e12, np.full(n, 1 - 1 / n))
            res = engine.run(m, fitness.one_max(n), engine.run_stream(55, r), 10_000)
            assert not res.censored
            evals.append(res.evaluations)
        mean = sum(evals) / runs
        expected = 1 / p_hit
        sigma = math.sqrt((1 - p_hit) / p_hit**2 / runs)
        assert abs(mean - expected) <= 3 * sigma

    def test_tiny_budget_censors_fresh_cliff(self):
        censored = 0
        for r in range(100):
            m = engine.init_model(15, 8.0)
            res = engine.run(m, fitness.cliff(15), engine.run_stream(56, r), 2)
            censored += res.censored
            if res.censored:
                assert res.evaluations == 2
        assert censored >= 99  # P(hit in 2 samples) = 2^-14

    def test_evaluation_parity_first_offspring(self):
        # Optimum sampled as x in iteration 0 (0-indexed): evaluations = 1.
        m = engine.FrequencyModel(3, 10.0, np.full(3, 2 / 3))
        rng = ForcedRng(bits_to_uniforms([1, 1, 1]), bits_to_uniforms([0, 0, 0]))
        res = engine.run(m, fitness.one_max(3), rng, 100)
        assert res.evaluations == 1 and res.iterations == 1 and not res.censored

    def test_evaluation_parity_second_offspring(self):
        m = engine.FrequencyModel(3, 10.0, np.full(3, 2 / 3))
        rng = ForcedRng(bits_to_uniforms([0, 0, 0]), bits_to_uniforms([1, 1, 1]),
                        bits_to_uniforms([0, 1, 0]), bits_to_uniforms([1, 1, 1]))
        res = engine.run(m, fitness.one_max(3), rng, 100)
        assert res.evaluations == 2

    def test_parity_later_iteration(self):
        m = engine.FrequencyModel(3, 1e9, np.full(3, 2 / 3))
        flat = bits_to_uniforms([0, 1, 0])
        rng = ForcedRng(flat, flat, flat, flat, bits_to_uniforms([1, 1, 1]), flat)
        res = engine.run(m, fitness.one_max(3), rng, 100)
        assert res.evaluations == 5 and res.iterations == 3  # first offspring of t=2

    def test_rejects_budget_below_two(self):
        m = engine.init_model(4, 2.0)
        with pytest.raises(ValueError):
            engine.run(m, fitness.one_max(4), engine.run_stream(1), 1)

    def test_censored_run_reports_budget(self):
        m = engine.init_model(15, 1e9, )
        res = engine.run(m, fitness.cliff(15), engine.run_stream(57), 1000)
        assert res.censored and res.evaluations == 1000 and res.iterations == 500

    def test_final_moments_match_freqs(self):
        m = engine.init_model(9, 3.0)
        res = engine.run(m, fitness.cliff(9), engine.run_stream(58), 5000)
        p = m.freqs
        assert res.final_potential == pytest.approx(p.sum(), abs=1e-12)
        assert res.final_variance == pytest.approx((p * (1 - p)).sum(), abs=1e-12)


class TestTraceRun:
    def test_every_iteration_recorded(self):
        m = engine.init_model(15, 50.0)
        recs = engine.trace_run(m, fitness.cliff(15), engine.run_stream(59), 10, 1)
        assert [r.t for r in recs] == list(range(10))

    def test_decimation(self):
        m = engine.init_model(15, 50.0)
        recs = engine.trace_run(m, fitness.cliff(15), engine.run_stream(60), 10, 5)
        assert [r.t for r in recs] == [0, 5]

    def test_rejects_bad_stride(self):
        m = engine.init_model(15, 50.0)
        with pytest.raises(ValueError):
            engine.trace_run(m, fitness.cliff(15), engine.run_stream(61), 10, 0)

    def test_one_step_change_bound(self):
        m = engine.init_model(12, 3.0)
        recs = engine.trace_run(m, fitness.cliff(12), engine.run_stream(62), 400, 1)
        for rec in recs:
            assert abs(rec.delta_potential) <= 12 / 3.0 + 1e-12

    def test_stops_when_optimum_sampled(self):
        m = engine.FrequencyModel(4, 10.0, np.full(4, 0.75))
        recs = engine.trace_run(m, fitness.one_max(4), engine.run_stream(63), 10_000, 1)
        assert recs[-1].optimum_sampled
        assert len(recs) < 10_000


class TestInvariants:
    def test_borders_hold_over_long_runs(self):
        rng = np.random.default_rng(64)
        for _ in range(15):
            n = int(rng.choice([6, 9, 12, 21]))
            k = float(rng.choice([0.5, 1.0, 3.0, 17.0]))
            m = engine.init_model(n, k)
            f = fitness.cliff(n)
            stream = engine.run_stream(int(rng.integers(1 << 30)))
            for _ in range(600):
                engine.step(m, f, stream)
                assert np.all(m.freqs >= 1 / n) and np.all(m.freqs <= 1 - 1 / n)

    def test_determinism_bit_identical(self):
        def one(seed):
            m = engine.init_model(9, 4.0)
            recs = engine.trace_run(m, fitness.cliff(9), engine.run_stream(seed), 300, 1)
            m2 = engine.init_model(9, 4.0)
            res = engine.run(m2, fitness.cliff(9), engine.run_stream(seed), 600)
            return recs, res, m.freqs.copy()

        recs_a, res_a, freqs_a = one(4242)
        recs_b, res_b, freqs_b = one(4242)
        assert res_a == res_b
        assert len(recs_a) == len(recs_b)
        assert all(a == b for a, b in zip(recs_a, recs_b))
        assert np.array_equal(freqs_a, freqs_b)

    def test_potential_bookkeeping_along_trace(self):
        m = engine.init_model(30, 11.0)
        recs = engine.trace_run(m, fitness.cliff(30), engine.run_stream(65), 2000, 1)
        # final record's potential must equal a from-scratch recomputation
        assert recs[-1].potential_after == pytest.approx(m.freqs.sum(), abs=1e-9)


class TestBatch:
    @pytest.mark.parametrize("n,kind,k,budget", [
        (9, "cliff", 2.0, 2000),
        (9, "cliff", 8.0, 100_000),
        (6, "onemax", 4.0, 5000),
        (6, "onemax", 1.0, 7),     # odd budget
        (15, "cliff", 64.0, 100_000),
    ])
    def test_matches_sequential(self, n, kind, k, budget):
        f = fitness.make(kind, n)
        base = 99
        specs = [engine.BatchSpec(k=k, stream_key=(n, 0, r),
                                  seed_tag=engine.stream_fingerprint(base, n, 0, r),
                                  max_evaluations=budget) for r in range(6)]
        batch = engine.run_batch(n, f, base, specs)
        for r, b in enumerate(batch):
            m = engine.init_model(n, k)
            s = engine.run(m, f, engine.run_stream(base, n, 0, r), budget,
                           seed_tag=engine.stream_fingerprint(base, n, 0, r))
            assert b == s

    def test_fixed_horizon_mode(self):
        n, k, horizon = 9, 3.0, 400
        f = fitness.cliff(n)
        specs = [engine.BatchSpec(k=k, stream_key=(n, 0, r), seed_tag=0,
                                  max_iterations=horizon) for r in range(4)]
        batch = engine.run_batch(n, f, 123, specs, stop_at_optimum=False)
        for r, res in enumerate(batch):
            assert res.iterations == horizon
            m = engine.init_model(n, k)
            g = engine.run_stream(123, n, 0, r)
            for _ in range(horizon):
                engine.step(m, f, g)
            assert res.final_potential == pytest.approx(m.freqs.sum(), abs=0)

    def test_stream_consumption_convention(self):
        # The batch path relies on random(n)+random(n) == random((B, 2n)) rows.
        g1 = engine.run_stream(321)
        g2 = engine.run_stream(321)
        a = np.concatenate([g1.random(5), g1.random(5), g1.random(5), g1.random(5)])
        b = g2.random((2, 10)).ravel()
        assert np.array_equal(a, b)


class TestStreams:
    def test_distinct_keys_give_distinct_streams(self):
        a = engine.run_stream(7, 1, 2, 3).random(4)
        b = engine.run_stream(7, 1, 2, 4).random(4)
        assert not np.array_equal(a, b)

    def test_fingerprint_is_stable(self):
        assert engine.stream_fingerprint(7, 1, 2) == engine.stream_fingerprint(7, 1, 2)
        assert engine.stream_fingerprint(7, 1, 2) != engine.stream_fingerprint(7, 2, 1)
