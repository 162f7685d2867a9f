"""Vote-weight models and their online reward/penalty updates.

A vote model is a normalized positive weight vector over the base
recommenders. Three deployment variants exist: one shared global model,
one model per user, and a hybrid that blends both with a per-user mixing
coefficient that ramps up with the user's event count. Updates follow a
multiplicative reward-and-punishment rule driven by the responsibility
shares attached to recommended items.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

from .events import UserId
from .voting import ResponsibilityVector

# Raw weights are clamped here before normalization so that no recommender
# can collapse to exactly zero and become unrecoverable.
WEIGHT_FLOOR = 1e-6

_SUM_TOLERANCE = 1e-9


class Variant(str, enum.Enum):
    GLOBAL_ONLY = "global-only"
    FULL_PERSONAL = "full-personal"
    HYBRID = "hybrid"


class ColdStartPolicy(str, enum.Enum):
    UNIFORM = "uniform"
    CLONE_TOP_USER = "clone-top-user"


@dataclass(frozen=True)
class VoteModel:
    """Normalized positive weights, one per base recommender."""

    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.weights:
            raise ValueError("vote model needs at least one weight")
        if any(w <= 0 for w in self.weights):
            raise ValueError("all weights must be positive")
        total = sum(self.weights)
        if abs(total - 1.0) > _SUM_TOLERANCE:
            raise ValueError(f"weights must sum to 1, got {total!r}")

    def __len__(self) -> int:
        return len(self.weights)

    def dominant(self) -> int:
        """Index of the largest weight (ties: lowest index)."""
        return max(range(len(self.weights)), key=lambda i: (self.weights[i], -i))


def _normalized(raw: Sequence[float]) -> VoteModel:
    floored = [max(w, WEIGHT_FLOOR) for w in raw]
    total = sum(floored)
    return VoteModel(tuple(w / total for w in floored))


def uniform_model(n: int) -> VoteModel:
    """Each of ``n`` recommenders starts with the same vote share."""
    if n < 1:
        raise ValueError(f"need at least one recommender, got {n}")
    return VoteModel((1.0 / n,) * n)


def reward(model: VoteModel, winner: int, eta: float) -> VoteModel:
    """Multiply the winner's weight by (1 + eta) and re-normalize."""
    _check_eta(eta)
    if not 0 <= winner < len(model):
        raise ValueError(f"winner index {winner} out of range for {len(model)} weights")
    raw = list(model.weights)
    raw[winner] *= 1.0 + eta
    return _normalized(raw)


def penalize(model: VoteModel, responsibility: ResponsibilityVector, eta: float) -> VoteModel:
    """Shrink each weight by its responsibility share: w_r *= (1 - eta*share_r).

    Recommenders with zero share keep their relative mass against each
    other; the subsequent re-normalization only redistributes what the
    responsible ones lost.
    """
    _check_eta(eta)
    shares = responsibility.shares
    if len(shares) != len(model):
        raise ValueError(f"got {len(shares)} shares for {len(model)} weights")
    factors = [1.0 - eta * share for share in shares]
    if any(f <= 0 for f in factors):
        raise ValueError("penalty factor dropped to <= 0; shares too large for eta")
    return _normalized([w * f for w, f in zip(model.weights, factors)])


def _check_eta(eta: float) -> None:
    if not 0.0 < eta < 1.0:
        raise ValueError(f"eta must be in (0, 1), got {eta}")


@dataclass(frozen=True)
class MixingSchedule:
    """Linear ramp from all-global to all-personal over ``ramp_length`` events."""

    ramp_length: int = 100
    kind: str = "linear-ramp"

    def __post_init__(self) -> None:
        if self.ramp_length <= 0:
            raise ValueError(f"ramp_length must be > 0, got {self.ramp_length}")
        if self.kind != "linear-ramp":
            raise ValueError(f"unknown mixing schedule kind {self.kind!r}")


def mixing_coefficient(user_event_count: int, schedule: MixingSchedule) -> float:
    """Personalisation share in [0, 1]: 0 for a fresh user, 1 past the ramp."""
    if user_event_count < 0:
        raise ValueError("event count must be >= 0")
    return min(1.0, user_event_count / schedule.ramp_length)


def hybrid_votes(global_model: VoteModel, personal: VoteModel, alpha: float) -> VoteModel:
    """Convex combination (1 - alpha) * global + alpha * personal."""
    if len(global_model) != len(personal):
        raise ValueError("global and personal models must have the same dimension")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    mixed = tuple(
        (1.0 - alpha) * g + alpha * p
        for g, p in zip(global_model.weights, personal.weights)
    )
    return VoteModel(mixed)


@dataclass
class UserModelState:
    model: VoteModel
    click_count: int = 0
    event_count: int = 0


class UserModelStore:
    """Per-user vote models with click/event counters.

    Registration order is preserved (plain dict semantics) so that
    clone-top-user tie-breaking is deterministic. Updates require exclusive
    access; the replay loop drives the store single-threaded.
    """

    def __init__(self, n_recommenders: int, cold_start: ColdStartPolicy = ColdStartPolicy.UNIFORM):
        if n_recommenders < 1:
            raise ValueError("need at least one recommender")
        self.n_recommenders = n_recommenders
        self.cold_start = cold_start
        self._states: dict[UserId, UserModelState] = {}

    def __len__(self) -> int:
        return len(self._states)

    def __contains__(self, user: UserId) -> bool:
        return user in self._states

    def users(self) -> list[UserId]:
        return list(self._states)

    def get(self, user: UserId) -> UserModelState | None:
        return self._states.get(user)

    def ensure(self, user: UserId) -> UserModelState:
        """Fetch the user's state, creating it via the cold-start policy."""
        state = self._states.get(user)
        if state is None:
            state = UserModelState(model=cold_start_init(self, self.cold_start, self.n_recommenders))
            self._states[user] = state
        return state

    def top_click_user(self) -> UserId | None:
        """User with the highest click count (ties: earliest registered)."""
        best: UserId | None = None
        best_clicks = -1
        for user, state in self._states.items():
            if state.click_count > best_clicks:
                best, best_clicks = user, state.click_count
        return best


def cold_start_init(store: UserModelStore, policy: ColdStartPolicy, n: int) -> VoteModel:
    """Initial model for a first-seen user.

    ``clone-top-user`` duplicates the model of the user with the highest
    click count so far and falls back to uniform on an empty store.
    """
    if policy is ColdStartPolicy.CLONE_TOP_USER:
        top = store.top_click_user()
        if top is not None:
            return store.get(top).model
    return uniform_model(n)


def select_model(
    store: UserModelStore,
    user: UserId,
    variant: Variant,
    skip_underdeveloped: bool,
    schedule: MixingSchedule,
    global_model: VoteModel,
) -> VoteModel:
    """Pick the vote model used to aggregate for ``user`` at this event.

    Personal models are created on first sight (also under the hybrid
    variant, where they start with zero influence). When
    ``skip_underdeveloped`` is set, users with fewer than three clicks fall
    back to the global model regardless of variant.
    """
    if variant is Variant.GLOBAL_ONLY:
        return global_model
    state = store.ensure(user)
    if skip_underdeveloped and state.click_count < 3:
        return global_model
    if variant is Variant.FULL_PERSONAL:
        return state.model
    alpha = mixing_coefficient(state.event_count, schedule)
    return hybrid_votes(global_model, state.model, alpha)
