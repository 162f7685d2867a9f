"""Replay evaluation: windows, notice model, clicks, online updates."""

import numpy as np
import pytest

import dhondt_ensemble.simulation as simulation
from dhondt_ensemble.events import EventStream, InteractionEvent, sort_stream
from dhondt_ensemble.recommenders import RecommenderSpec, train, train_ensemble, default_roster
from dhondt_ensemble.simulation import (
    BehaviourModel,
    SimulationConfig,
    item_window,
    notice_probability,
    run,
    simulate_clicks,
)
from dhondt_ensemble.weights import ColdStartPolicy, Variant


def ev(t, user, item):
    return InteractionEvent(timestamp=t, user=user, item=item)


def stream(raw):
    return sort_stream([ev(t, u, i) for t, u, i in raw])


class ZeroDraws:
    """Stand-in generator whose uniform draws are all 0 (always below p)."""

    def random(self, n):
        return np.zeros(n)


class OneDraws:
    def random(self, n):
        return np.ones(n)


class TestBehaviourModel:
    def test_static_probabilities(self):
        for position in (1, 7, 20):
            assert notice_probability(BehaviourModel("stat08"), position) == 0.8
            assert notice_probability(BehaviourModel("stat06"), position) == 0.6

    def test_linear_endpoints(self):
        behaviour = BehaviourModel("lin0901", list_length=20)
        assert notice_probability(behaviour, 1) == pytest.approx(0.9)
        assert notice_probability(behaviour, 20) == pytest.approx(0.1)

    def test_linear_middle_position(self):
        behaviour = BehaviourModel("lin0901", list_length=20)
        assert notice_probability(behaviour, 11) == pytest.approx(0.9 - 10 * 0.8 / 19)
        assert notice_probability(behaviour, 11) == pytest.approx(0.47895, abs=1e-5)

    def test_position_out_of_range(self):
        behaviour = BehaviourModel("stat08", list_length=5)
        with pytest.raises(ValueError):
            notice_probability(behaviour, 0)
        with pytest.raises(ValueError):
            notice_probability(behaviour, 6)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            BehaviourModel("clicky")

    def test_probabilities_stay_in_unit_interval(self):
        for length in (1, 2, 5, 20, 50):
            behaviour = BehaviourModel("lin0901", list_length=length)
            for position in range(1, length + 1):
                assert 0.0 < notice_probability(behaviour, position) <= 0.9


class TestItemWindow:
    def test_first_five_future_events(self):
        items = ["z", "a", "b", "a", "c", "d", "e"]
        events = stream([(t, "u", item) for t, item in enumerate(items)])
        assert item_window(events, 0, 5) == {"a", "b", "c", "d"}

    def test_final_event_has_empty_window(self):
        events = stream([(1, "u", "a"), (2, "u", "b")])
        assert item_window(events, 1, 5) == set()

    def test_window_one_is_next_item(self):
        events = stream([(1, "u", "a"), (2, "u", "b"), (3, "u", "c")])
        assert item_window(events, 0, 1) == {"b"}

    def test_other_users_are_skipped(self):
        events = stream(
            [(1, "u", "a"), (2, "other", "x"), (3, "u", "b"), (4, "other", "y"), (5, "u", "c")]
        )
        assert item_window(events, 0, 2) == {"b", "c"}

    def test_cursor_out_of_range(self):
        events = stream([(1, "u", "a")])
        with pytest.raises(ValueError):
            item_window(events, 1, 5)


class TestSimulateClicks:
    def test_disjoint_window_never_clicks(self):
        behaviour = BehaviourModel("stat08", list_length=3)
        clicks = simulate_clicks(["a", "b", "c"], {"x"}, behaviour, ZeroDraws())
        assert clicks == [False, False, False]

    def test_forced_notice_clicks_every_window_item(self):
        behaviour = BehaviourModel("stat08", list_length=3)
        clicks = simulate_clicks(["a", "b", "c"], {"a", "b", "c"}, behaviour, ZeroDraws())
        assert clicks == [True, True, True]

    def test_draw_above_probability_misses(self):
        behaviour = BehaviourModel("stat08", list_length=2)
        clicks = simulate_clicks(["a", "b"], {"a", "b"}, behaviour, OneDraws())
        assert clicks == [False, False]

    def test_empirical_rate_tracks_probability(self):
        """100k draws per position land within +-0.01 of the model."""
        behaviour = BehaviourModel("lin0901", list_length=4)
        rng = np.random.default_rng(77)
        draws = 100_000
        counts = np.zeros(4)
        window = {"a", "b", "c", "d"}
        for _ in range(draws):
            clicked = simulate_clicks(["a", "b", "c", "d"], window, behaviour, rng)
            counts += clicked
        for position in range(4):
            expected = notice_probability(behaviour, position + 1)
            assert counts[position] / draws == pytest.approx(expected, abs=0.01)


class TestSimulationConfig:
    def test_list_n_mismatch_rejected(self):
        with pytest.raises(ValueError):
            SimulationConfig(behaviour=BehaviourModel("stat08", list_length=10), list_n=20)

    def test_eta_bounds(self):
        with pytest.raises(ValueError):
            SimulationConfig(eta_global=0.0)
        with pytest.raises(ValueError):
            SimulationConfig(eta_personal=1.0)


class ProbeRecommender:
    """Records every context it sees and recommends a fixed list."""

    def __init__(self, items):
        self.spec = RecommenderSpec("popularity")
        self.index = 0
        self.fixed = list(items)
        self.seen_contexts = []

    def recommend(self, ctx, k):
        self.seen_contexts.append((ctx.user, ctx.recent_items))
        from dhondt_ensemble.voting import CandidateList

        return CandidateList.from_ranking(self.index, self.fixed[:k])


class TestRun:
    def test_empty_eval_stream_gives_zero_counts(self):
        train_stream = stream([(1, "u", "a"), (2, "u", "b")])
        models = [train(RecommenderSpec("popularity"), train_stream)]
        report = run(models, train_stream, EventStream(()), SimulationConfig())
        assert report.total_events == 0
        assert report.total_recommendations == 0
        assert report.total_clicks == 0
        assert report.ctr == 0.0

    def test_hand_traced_three_event_ctr(self, monkeypatch):
        """Window size 1, notice forced to 1: clicks are exactly the
        list-window intersections, so ctr = (1 + 1 + 0) / 3."""
        monkeypatch.setattr(simulation, "notice_probability", lambda behaviour, k: 1.0)
        train_stream = stream([(1, "u", "a"), (2, "u", "a"), (3, "u", "b")])
        eval_stream = stream([(10, "u", "a"), (11, "u", "b"), (12, "u", "a")])
        models = [train(RecommenderSpec("popularity"), train_stream)]
        config = SimulationConfig(
            variant=Variant.GLOBAL_ONLY,
            behaviour=BehaviourModel("stat08", list_length=20),
            window_size=1,
            seed=0,
        )
        report = run(models, train_stream, eval_stream, config)
        assert report.total_recommendations == 3
        assert report.total_clicks == 2
        assert report.ctr == pytest.approx(2 / 3)

    def test_context_contains_only_past_events(self):
        """Replay context is the train history plus earlier eval events."""
        train_stream = stream([(1, "u", "t1"), (2, "u", "t2"), (3, "v", "s1")])
        eval_stream = stream([(10, "u", "e1"), (11, "v", "e2"), (12, "u", "e3")])
        probe = ProbeRecommender(["t1", "t2", "s1", "e1", "e2", "e3"])
        report = run([probe], train_stream, eval_stream, SimulationConfig())
        assert probe.seen_contexts == [
            ("u", ("t1", "t2")),
            ("v", ("s1",)),
            ("u", ("t1", "t2", "e1")),
        ]
        assert report.total_recommendations == 3

    def test_deterministic_given_seed(self):
        train_stream, eval_stream = _small_streams()
        models = train_ensemble(default_roster(), train_stream, seed=0)
        config = SimulationConfig(variant=Variant.FULL_PERSONAL, seed=5)
        a = run(models, train_stream, eval_stream, config)
        b = run(models, train_stream, eval_stream, config)
        assert a.total_clicks == b.total_clicks
        assert a.global_model.weights == b.global_model.weights
        assert a.global_trajectory == b.global_trajectory
        assert a.user_trajectory == b.user_trajectory
        assert a.click_rows == b.click_rows

    def test_seed_changes_click_pattern(self):
        train_stream, eval_stream = _small_streams()
        models = train_ensemble(default_roster(), train_stream, seed=0)
        a = run(models, train_stream, eval_stream, SimulationConfig(seed=1))
        b = run(models, train_stream, eval_stream, SimulationConfig(seed=2))
        assert a.click_rows != b.click_rows

    def test_single_recommender_ctr_invariant_to_eta(self):
        """With one voter there is no aggregation choice left to learn."""
        train_stream, eval_stream = _small_streams()
        models = [train(RecommenderSpec("popularity"), train_stream)]
        reports = [
            run(models, train_stream, eval_stream, SimulationConfig(eta_global=eta, seed=4))
            for eta in (0.01, 0.1, 0.4)
        ]
        assert len({r.total_clicks for r in reports}) == 1
        assert len({r.ctr for r in reports}) == 1

    def test_weight_vectors_logged_every_event_sum_to_one(self):
        train_stream, eval_stream = _small_streams()
        models = train_ensemble(default_roster(), train_stream, seed=0)
        config = SimulationConfig(variant=Variant.HYBRID, seed=9)
        report = run(models, train_stream, eval_stream, config)
        assert len(report.global_trajectory) == report.total_events
        for _, weights in report.global_trajectory:
            assert abs(sum(weights) - 1.0) <= 1e-9
        for _, _, weights in report.user_trajectory:
            assert abs(sum(weights) - 1.0) <= 1e-9

    def test_global_only_keeps_personal_store_empty(self):
        train_stream, eval_stream = _small_streams()
        models = [train(RecommenderSpec("popularity"), train_stream)]
        report = run(models, train_stream, eval_stream, SimulationConfig(variant=Variant.GLOBAL_ONLY))
        assert report.user_models == {}
        assert report.user_trajectory == []

    def test_personal_variant_develops_user_models(self):
        train_stream, eval_stream = _small_streams()
        models = train_ensemble(default_roster(), train_stream, seed=0)
        config = SimulationConfig(variant=Variant.FULL_PERSONAL, seed=2)
        report = run(models, train_stream, eval_stream, config)
        assert set(report.user_models) == {e.user for e in eval_stream}
        moved = [
            model.weights != tuple([1 / 6] * 6)
            for model in report.user_models.values()
        ]
        assert any(moved)

    def test_per_user_counts_sum_to_totals(self):
        train_stream, eval_stream = _small_streams()
        models = train_ensemble(default_roster(), train_stream, seed=0)
        report = run(models, train_stream, eval_stream, SimulationConfig(variant=Variant.HYBRID))
        assert sum(r for r, _ in report.per_user.values()) == report.total_recommendations
        assert sum(c for _, c in report.per_user.values()) == report.total_clicks

    def test_clone_cold_start_accepted(self):
        train_stream, eval_stream = _small_streams()
        models = [train(RecommenderSpec("popularity"), train_stream)]
        config = SimulationConfig(
            variant=Variant.FULL_PERSONAL,
            cold_start=ColdStartPolicy.CLONE_TOP_USER,
            seed=3,
        )
        report = run(models, train_stream, eval_stream, config)
        assert report.total_recommendations == len(eval_stream)


def _small_streams():
    rng = np.random.default_rng(55)
    raw = []
    t = 0
    for _ in range(900):
        t += int(rng.integers(1, 50_000))
        raw.append((t, f"u{int(rng.integers(0, 12)):02d}", f"i{int(rng.integers(0, 25)):02d}"))
    full = stream(raw)
    train_stream = EventStream(full.events[:450])
    eval_stream = EventStream(full.events[750:])
    return train_stream, eval_stream
