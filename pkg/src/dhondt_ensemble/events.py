"""Core identifiers and event-stream types shared by all modules."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence, Union

ItemId = Union[str, int]
UserId = Union[str, int]


def lexical_key(token: ItemId) -> str:
    """Deterministic total order over opaque ids, used for all tie-breaking."""
    return str(token)


class EventKind(str, enum.Enum):
    VIEW = "view"
    ADD_TO_CART = "add-to-cart"
    TRANSACTION = "transaction"
    OTHER = "other"


@dataclass(frozen=True)
class InteractionEvent:
    """One timestamped user-item interaction from a log.

    ``timestamp`` is integer milliseconds since epoch (RetailRocket's native
    unit); ``kind`` distinguishes event types but carries no special weight
    by default.
    """

    timestamp: int
    user: UserId
    item: ItemId
    kind: EventKind = EventKind.VIEW

    def __post_init__(self) -> None:
        if self.timestamp < 0:
            raise ValueError(f"timestamp must be >= 0, got {self.timestamp}")
        if self.user == "" or self.item == "":
            raise ValueError("user and item ids must be non-empty")


@dataclass(frozen=True)
class EventStream:
    """Immutable sequence of events sorted non-decreasing by timestamp."""

    events: tuple[InteractionEvent, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        for prev, cur in zip(self.events, self.events[1:]):
            if cur.timestamp < prev.timestamp:
                raise ValueError("events must be sorted by timestamp")

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self) -> Iterator[InteractionEvent]:
        return iter(self.events)

    def __getitem__(self, index: int) -> InteractionEvent:
        return self.events[index]


def sort_stream(events: Iterable[InteractionEvent]) -> EventStream:
    """Sort events by timestamp, keeping input order among equal timestamps."""
    ordered = sorted(events, key=lambda e: e.timestamp)
    return EventStream(tuple(ordered))


def user_histories(stream: Sequence[InteractionEvent]) -> dict[UserId, list[ItemId]]:
    """Per-user item sequences in stream order."""
    histories: dict[UserId, list[ItemId]] = {}
    for event in stream:
        histories.setdefault(event.user, []).append(event.item)
    return histories
