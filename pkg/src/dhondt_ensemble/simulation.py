"""Sequential replay of an evaluation stream with simulated clicks.

Each evaluation event triggers one aggregated recommendation list for the
event's user. A behaviour model decides, position by position, whether the
user notices an item; a notice turns into a click only when the item also
appears among the user's next few real interactions. Clicks reward the
recommender judged most responsible, misses shrink every contributor in
proportion to its stored responsibility share.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .events import EventStream, ItemId, UserId, user_histories
from .recommenders import RecommendationContext, Recommender
from .voting import AggregatedList, aggregate
from .weights import (
    ColdStartPolicy,
    MixingSchedule,
    UserModelStore,
    Variant,
    VoteModel,
    penalize,
    reward,
    select_model,
    uniform_model,
)

BEHAVIOUR_KINDS = ("stat08", "stat06", "lin0901")


@dataclass(frozen=True)
class BehaviourModel:
    """Position-dependent probability that a displayed item gets noticed."""

    kind: str = "stat08"
    list_length: int = 20

    def __post_init__(self) -> None:
        if self.kind not in BEHAVIOUR_KINDS:
            raise ValueError(f"unknown behaviour kind {self.kind!r}; expected one of {BEHAVIOUR_KINDS}")
        if self.list_length < 1:
            raise ValueError("list_length must be positive")


def notice_probability(behaviour: BehaviourModel, position: int) -> float:
    """Probability of noticing the item at 1-based ``position``."""
    n = behaviour.list_length
    if not 1 <= position <= n:
        raise ValueError(f"position {position} outside 1..{n}")
    if behaviour.kind == "stat08":
        return 0.8
    if behaviour.kind == "stat06":
        return 0.6
    if n == 1:
        return 0.9
    return 0.9 - (position - 1) * 0.8 / (n - 1)


def item_window(
    eval_stream: EventStream, event_index: int, window_size: int
) -> set:
    """Items of the user's next ``window_size`` events strictly after the cursor."""
    if not 0 <= event_index < len(eval_stream):
        raise ValueError(f"event_index {event_index} outside stream of {len(eval_stream)}")
    if window_size < 0:
        raise ValueError("window_size must be >= 0")
    user = eval_stream[event_index].user
    window = set()
    taken = 0
    for later in eval_stream.events[event_index + 1 :]:
        if later.user != user:
            continue
        window.add(later.item)
        taken += 1
        if taken == window_size:
            break
    return window


def simulate_clicks(
    items: Sequence[ItemId],
    window: set,
    behaviour: BehaviourModel,
    rng: np.random.Generator,
) -> List[bool]:
    """One noticing draw per displayed position, in position order."""
    draws = rng.random(len(items))
    return [
        item in window and draws[k] < notice_probability(behaviour, k + 1)
        for k, item in enumerate(items)
    ]


@dataclass(frozen=True)
class SimulationConfig:
    variant: Variant = Variant.GLOBAL_ONLY
    behaviour: BehaviourModel = field(default_factory=BehaviourModel)
    window_size: int = 5
    candidates_k: int = 100
    list_n: int | None = None  # must agree with behaviour.list_length when given
    eta_global: float = 0.05
    eta_personal: float = 0.1
    normalize_responsibility: bool = True
    skip_underdeveloped: bool = False
    cold_start: ColdStartPolicy = ColdStartPolicy.UNIFORM
    mixing: MixingSchedule = field(default_factory=MixingSchedule)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.window_size < 1:
            raise ValueError("window_size must be positive")
        if self.candidates_k < 1:
            raise ValueError("candidates_k must be positive")
        if self.list_n is not None and self.list_n != self.behaviour.list_length:
            raise ValueError(
                f"list_n={self.list_n} conflicts with behaviour list_length={self.behaviour.list_length}"
            )
        for name in ("eta_global", "eta_personal"):
            eta = getattr(self, name)
            if not 0.0 < eta < 1.0:
                raise ValueError(f"{name} must be in (0, 1), got {eta}")

    @property
    def slots(self) -> int:
        return self.behaviour.list_length

    @property
    def ramp_length(self) -> int:
        return self.mixing.ramp_length


@dataclass
class SimulationReport:
    variant: str
    behaviour_kind: str
    recommender_kinds: Tuple[str, ...]
    total_events: int = 0
    total_recommendations: int = 0
    total_clicks: int = 0
    global_model: VoteModel | None = None
    user_models: Dict[UserId, VoteModel] = field(default_factory=dict)
    per_user: Dict[UserId, List[int]] = field(default_factory=dict)
    global_trajectory: List[Tuple[int, Tuple[float, ...]]] = field(default_factory=list)
    user_trajectory: List[Tuple[int, UserId, Tuple[float, ...]]] = field(default_factory=list)
    click_rows: List[Tuple[int, UserId, int, ItemId, int]] = field(default_factory=list)

    @property
    def ctr(self) -> float:
        if self.total_recommendations == 0:
            return 0.0
        return self.total_clicks / self.total_recommendations

    def user_ctr(self, user: UserId) -> float:
        shown, clicked = self.per_user.get(user, [0, 0])
        return clicked / shown if shown else 0.0

    def dominant_global(self) -> int:
        if self.global_model is None:
            raise ValueError("report has no final weights")
        return self.global_model.dominant()

    def dominant_personal_majority(self) -> int | None:
        """Recommender index most often dominant across personal models."""
        if not self.user_models:
            return None
        counts = [0] * len(self.recommender_kinds)
        for model in self.user_models.values():
            counts[model.dominant()] += 1
        return max(range(len(counts)), key=lambda i: (counts[i], -i))


def _event_rng(seed: int, event_index: int) -> np.random.Generator:
    return np.random.default_rng([seed, event_index])


def run(
    models: Sequence[Recommender],
    train_stream: EventStream,
    eval_stream: EventStream,
    config: SimulationConfig,
) -> SimulationReport:
    """Replay the evaluation stream once, learning vote weights online."""
    if not models:
        raise ValueError("at least one base recommender is required")
    n = len(models)
    global_model = uniform_model(n)
    store = UserModelStore(n_recommenders=n, cold_start=config.cold_start)
    track_users = config.variant is not Variant.GLOBAL_ONLY

    report = SimulationReport(
        variant=config.variant.value,
        behaviour_kind=config.behaviour.kind,
        recommender_kinds=tuple(model.spec.kind for model in models),
        total_events=len(eval_stream),
    )

    # replay context: training history first, then eval events already consumed
    contexts: Dict[UserId, List[ItemId]] = {
        user: list(items) for user, items in user_histories(train_stream).items()
    }

    for index, event in enumerate(eval_stream):
        user = event.user
        recent = contexts.setdefault(user, [])
        context = RecommendationContext(user=user, recent_items=tuple(recent))

        votes = select_model(
            store,
            user,
            config.variant,
            skip_underdeveloped=config.skip_underdeveloped,
            schedule=config.mixing,
            global_model=global_model,
        )
        state = store.ensure(user)

        candidates = [model.recommend(context, config.candidates_k) for model in models]
        aggregated: AggregatedList = aggregate(
            candidates,
            votes.weights,
            n_slots=config.behaviour.list_length,
            normalize_responsibility=config.normalize_responsibility,
            k=config.candidates_k,
        )

        report.total_recommendations += 1
        shown_clicks = 0
        if len(aggregated) > 0:
            window = item_window(eval_stream, index, config.window_size)
            rng = _event_rng(config.seed, index)
            clicked = simulate_clicks(aggregated.items(), window, config.behaviour, rng)

            for entry, was_clicked in zip(aggregated.entries, clicked):
                if was_clicked:
                    shown_clicks += 1
                    winner = entry.responsibility.winner()
                    global_model = reward(global_model, winner, config.eta_global)
                    if track_users:
                        state.model = reward(state.model, winner, config.eta_personal)
                else:
                    global_model = penalize(global_model, entry.responsibility, config.eta_global)
                    if track_users:
                        state.model = penalize(state.model, entry.responsibility, config.eta_personal)
                report.click_rows.append(
                    (index, user, entry.position, entry.item, int(was_clicked))
                )

        state.event_count += 1
        state.click_count += shown_clicks
        report.total_clicks += shown_clicks
        totals = report.per_user.setdefault(user, [0, 0])
        totals[0] += 1
        totals[1] += shown_clicks

        report.global_trajectory.append((index, global_model.weights))
        if track_users:
            report.user_trajectory.append((index, user, state.model.weights))

        recent.append(event.item)

    report.global_model = global_model
    if track_users:
        report.user_models = {user: store.get(user).model for user in store.users()}
    return report
