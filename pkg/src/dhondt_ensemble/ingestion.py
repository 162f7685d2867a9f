"""Load, filter and split interaction logs; generate synthetic datasets.

Supported sources: RetailRocket-style event CSVs, a minimal generic CSV,
and a seeded synthetic generator with two user segments (majority /
minority) drawing from mostly disjoint item pools. The generator stands in
for proprietary logs in tests and demos.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .events import EventKind, EventStream, InteractionEvent, UserId, sort_stream

RETAILROCKET_COLUMNS = ["timestamp", "visitorid", "event", "itemid", "transactionid"]
GENERIC_COLUMNS = ["timestamp", "user", "item"]

_KIND_ALIASES = {
    "view": EventKind.VIEW,
    "addtocart": EventKind.ADD_TO_CART,
    "add-to-cart": EventKind.ADD_TO_CART,
    "transaction": EventKind.TRANSACTION,
    "other": EventKind.OTHER,
}

SOURCES = ("retailrocket-csv", "generic-csv", "synthetic")

# 2020-01-01T00:00:00Z; synthetic timestamps span one year from here
SYNTHETIC_EPOCH_MS = 1_577_836_800_000
SYNTHETIC_SPAN_MS = 365 * 24 * 3600 * 1000

MAJORITY, MINORITY = "majority", "minority"


class DatasetError(ValueError):
    """Raised for malformed dataset files or invalid dataset configs."""


@dataclass(frozen=True)
class SyntheticSpec:
    n_users: int = 1000
    n_items: int = 2000
    n_events: int = 100_000
    minority_fraction: float = 0.2
    preference_skew: float = 9.0
    seed: int = 0
    user_activity: str = "uniform"  # or "heavy-tail", for skewed per-user event counts

    def __post_init__(self) -> None:
        if min(self.n_users, self.n_events) < 1:
            raise DatasetError("n_users and n_events must be positive")
        if self.n_items < 2:
            raise DatasetError("n_items must be >= 2 so both item pools are non-empty")
        if not 0.0 <= self.minority_fraction <= 1.0:
            raise DatasetError("minority_fraction must be in [0, 1]")
        if self.preference_skew < 1.0:
            raise DatasetError("preference_skew must be >= 1")
        if self.user_activity not in ("uniform", "heavy-tail"):
            raise DatasetError(f"unknown user_activity {self.user_activity!r}")


@dataclass(frozen=True)
class DatasetConfig:
    source: str
    path: str | None = None
    min_user_events: int = 0
    train_fraction: float = 0.5
    eval_fraction: float = 0.1
    views_only: bool = False
    item_attributes: str | None = None
    synthetic: SyntheticSpec = field(default_factory=SyntheticSpec)

    def __post_init__(self) -> None:
        if self.source not in SOURCES:
            raise DatasetError(f"unknown dataset source {self.source!r}; expected one of {SOURCES}")
        if self.source != "synthetic" and not self.path:
            raise DatasetError(f"dataset source {self.source!r} requires a path")
        if self.min_user_events < 0:
            raise DatasetError("min_user_events must be >= 0")
        validate_fractions(self.train_fraction, self.eval_fraction)


def validate_fractions(train_fraction: float, eval_fraction: float) -> None:
    if not 0.0 < train_fraction <= 1.0:
        raise DatasetError(f"train_fraction must be in (0, 1], got {train_fraction}")
    if not 0.0 < eval_fraction <= 1.0:
        raise DatasetError(f"eval_fraction must be in (0, 1], got {eval_fraction}")
    if train_fraction + eval_fraction > 1.0 + 1e-12:
        raise DatasetError("train_fraction + eval_fraction must not exceed 1")


def _parse_kind(token: str) -> EventKind:
    return _KIND_ALIASES.get(token.strip().lower(), EventKind.OTHER)


def _parse_timestamp(token: str, path: str, line: int) -> int:
    try:
        value = int(token)
    except ValueError as exc:
        raise DatasetError(f"{path}:{line}: bad timestamp {token!r}") from exc
    if value < 0:
        raise DatasetError(f"{path}:{line}: negative timestamp {value}")
    return value


def _parse_id(token: str, path: str, line: int, column: str):
    token = token.strip()
    if not token:
        raise DatasetError(f"{path}:{line}: empty {column}")
    return int(token) if token.isdigit() else token


def _read_rows(path: str, required: list[str]):
    file_path = Path(path)
    if not file_path.exists():
        raise DatasetError(f"dataset file not found: {path}")
    with file_path.open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames or []
        missing = [column for column in required if column not in header]
        if missing:
            raise DatasetError(f"{path}:1: missing columns {missing}; header was {header}")
        for line, row in enumerate(reader, start=2):
            if any(row.get(column) is None for column in required):
                raise DatasetError(f"{path}:{line}: expected {len(header)} fields")
            yield line, row


def _load_retailrocket(path: str) -> list[InteractionEvent]:
    events = []
    for line, row in _read_rows(path, RETAILROCKET_COLUMNS[:4]):
        events.append(
            InteractionEvent(
                timestamp=_parse_timestamp(row["timestamp"], path, line),
                user=_parse_id(row["visitorid"], path, line, "visitorid"),
                item=_parse_id(row["itemid"], path, line, "itemid"),
                kind=_parse_kind(row["event"]),
            )
        )
    return events


def _load_generic(path: str) -> list[InteractionEvent]:
    events = []
    for line, row in _read_rows(path, GENERIC_COLUMNS):
        kind = row.get("kind")
        events.append(
            InteractionEvent(
                timestamp=_parse_timestamp(row["timestamp"], path, line),
                user=_parse_id(row["user"], path, line, "user"),
                item=_parse_id(row["item"], path, line, "item"),
                kind=_parse_kind(kind) if kind else EventKind.VIEW,
            )
        )
    return events


def load(config: DatasetConfig) -> EventStream:
    """Parse, filter and sort a dataset into an event stream.

    Users with at most ``min_user_events`` events are dropped entirely
    (strictly-more-than semantics), before any train/eval splitting.
    """
    if config.source == "retailrocket-csv":
        events = _load_retailrocket(config.path)
    elif config.source == "generic-csv":
        events = _load_generic(config.path)
    else:
        events = list(generate_synthetic(config.synthetic)[0])
    if config.views_only:
        events = [e for e in events if e.kind is EventKind.VIEW]
    if config.min_user_events > 0:
        counts: dict[UserId, int] = {}
        for event in events:
            counts[event.user] = counts.get(event.user, 0) + 1
        events = [e for e in events if counts[e.user] > config.min_user_events]
    return sort_stream(events)


def split(stream: EventStream, train_fraction: float, eval_fraction: float) -> tuple[EventStream, EventStream]:
    """First ``train_fraction`` of events for training, last ``eval_fraction``
    for sequential evaluation; anything in between is used by neither."""
    validate_fractions(train_fraction, eval_fraction)
    n = len(stream)
    train_end = math.floor(train_fraction * n)
    eval_start = n - math.ceil(eval_fraction * n)
    return EventStream(stream.events[:train_end]), EventStream(stream.events[eval_start:])


def generate_synthetic(spec: SyntheticSpec) -> tuple[EventStream, dict[UserId, str]]:
    """Seeded two-segment interaction log with ground-truth segment labels.

    Majority and minority users draw from the lower and upper half of the
    item range respectively; a draw lands in the user's own pool with odds
    ``preference_skew`` to 1. Timestamps are uniform over a synthetic year.
    """
    rng = np.random.default_rng(spec.seed)
    users = [f"u{i:05d}" for i in range(spec.n_users)]
    items = [f"i{i:05d}" for i in range(spec.n_items)]

    n_minority = int(round(spec.minority_fraction * spec.n_users))
    minority_users = set(rng.permutation(spec.n_users)[:n_minority].tolist())
    labels = {user: (MINORITY if i in minority_users else MAJORITY) for i, user in enumerate(users)}

    half = spec.n_items // 2
    pool_of = np.array([1 if i in minority_users else 0 for i in range(spec.n_users)])
    pool_bounds = [(0, half), (half, spec.n_items)]  # majority pool, minority pool

    if spec.user_activity == "heavy-tail":
        activity = 1.0 / np.arange(1, spec.n_users + 1)
        activity /= activity.sum()
        user_draws = rng.choice(spec.n_users, size=spec.n_events, p=activity)
    else:
        user_draws = rng.integers(0, spec.n_users, size=spec.n_events)

    in_pool_prob = spec.preference_skew / (spec.preference_skew + 1.0)
    in_pool = rng.random(spec.n_events) < in_pool_prob
    uniform = rng.random(spec.n_events)
    timestamps = np.sort(rng.integers(0, SYNTHETIC_SPAN_MS, size=spec.n_events)) + SYNTHETIC_EPOCH_MS

    events = []
    for k in range(spec.n_events):
        u = int(user_draws[k])
        own_pool = pool_of[u]
        pool = own_pool if in_pool[k] else 1 - own_pool
        lo, hi = pool_bounds[pool]
        item = items[lo + int(uniform[k] * (hi - lo))]
        events.append(
            InteractionEvent(timestamp=int(timestamps[k]), user=users[u], item=item)
        )
    return EventStream(tuple(events)), labels


def load_item_attributes(path: str) -> dict:
    """Read an ``item,attr1;attr2;...`` attribute table.

    A leading header row whose first cell is ``item`` is skipped.
    """
    file_path = Path(path)
    if not file_path.exists():
        raise DatasetError(f"attribute file not found: {path}")
    attributes = {}
    with file_path.open(newline="", encoding="utf-8") as handle:
        for line, row in enumerate(csv.reader(handle), start=1):
            if not row:
                continue
            if line == 1 and row[0].strip().lower() == "item":
                continue
            if len(row) < 2:
                raise DatasetError(f"{path}:{line}: expected 'item,attr1;attr2;...'")
            item = _parse_id(row[0], path, line, "item")
            tokens = tuple(t.strip() for t in row[1].split(";") if t.strip())
            attributes[item] = tokens
    return attributes
