"""Ensemble recommendation via proportional-voting aggregation.

Ranked lists from several base recommenders are fused with a fuzzy
highest-averages allocation; each recommender's vote weight is learned
online from simulated clicks, either globally, per user, or as a blend.
"""

from .events import (
    EventKind,
    EventStream,
    InteractionEvent,
    ItemId,
    UserId,
    lexical_key,
    sort_stream,
    user_histories,
)
from .ingestion import (
    DatasetConfig,
    DatasetError,
    SyntheticSpec,
    generate_synthetic,
    load,
    load_item_attributes,
    split,
)
from .recommenders import (
    KINDS,
    RecommendationContext,
    Recommender,
    RecommenderSpec,
    default_roster,
    train,
    train_ensemble,
)
from .simulation import (
    BEHAVIOUR_KINDS,
    BehaviourModel,
    SimulationConfig,
    SimulationReport,
    item_window,
    notice_probability,
    run,
    simulate_clicks,
)
from .voting import (
    AggregatedItem,
    AggregatedList,
    CandidateList,
    ResponsibilityVector,
    aggregate,
    dhondt_seats,
    relevance_from_rank,
)
from .weights import (
    ColdStartPolicy,
    MixingSchedule,
    UserModelState,
    UserModelStore,
    Variant,
    VoteModel,
    cold_start_init,
    hybrid_votes,
    mixing_coefficient,
    penalize,
    reward,
    select_model,
    uniform_model,
)

__version__ = "0.1.0"

__all__ = [
    "AggregatedItem",
    "AggregatedList",
    "BEHAVIOUR_KINDS",
    "BehaviourModel",
    "CandidateList",
    "ColdStartPolicy",
    "DatasetConfig",
    "DatasetError",
    "EventKind",
    "EventStream",
    "InteractionEvent",
    "ItemId",
    "KINDS",
    "MixingSchedule",
    "RecommendationContext",
    "Recommender",
    "RecommenderSpec",
    "ResponsibilityVector",
    "SimulationConfig",
    "SimulationReport",
    "SyntheticSpec",
    "UserId",
    "UserModelState",
    "UserModelStore",
    "Variant",
    "VoteModel",
    "aggregate",
    "cold_start_init",
    "default_roster",
    "dhondt_seats",
    "generate_synthetic",
    "hybrid_votes",
    "item_window",
    "lexical_key",
    "load",
    "load_item_attributes",
    "mixing_coefficient",
    "notice_probability",
    "penalize",
    "relevance_from_rank",
    "reward",
    "run",
    "select_model",
    "simulate_clicks",
    "sort_stream",
    "split",
    "train",
    "train_ensemble",
    "uniform_model",
    "user_histories",
]
