"""Proportional voting aggregation of ranked candidate lists.

Classic d'Hondt seat allocation plus a fuzzy variant that merges several
recommenders' top-K lists into a single top-N list. The fuzzy variant keeps
a fractional per-recommender seat count and attributes a responsibility
share to every recommender for every emitted item; those shares drive the
online weight updates in :mod:`dhondt_ensemble.weights`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .events import ItemId, lexical_key

RelevanceFn = Callable[[int, int], float]


def relevance_from_rank(rank: int, k: int) -> float:
    """Map a 1-based list rank to a relevance score in (0, 1].

    Linear map: rank 1 scores 1.0, rank K scores 1/K.
    """
    if rank < 1 or rank > k:
        raise ValueError(f"rank must be in 1..{k}, got {rank}")
    return (k - rank + 1) / k


def dhondt_seats(votes: Sequence[float], n_seats: int) -> list[int]:
    """Allocate ``n_seats`` among parties by the highest-averages rule.

    Each seat goes to the party with the maximal quotient v_i / (s_i + 1),
    where s_i is the party's current seat count. Quotient ties go to the
    lowest party index.
    """
    if n_seats < 0:
        raise ValueError(f"n_seats must be >= 0, got {n_seats}")
    if any(v < 0 for v in votes):
        raise ValueError("votes must be non-negative")
    seats = [0] * len(votes)
    if n_seats == 0:
        return seats
    if not any(v > 0 for v in votes):
        raise ValueError("at least one vote must be positive to allocate seats")
    for _ in range(n_seats):
        best = max(range(len(votes)), key=lambda i: (votes[i] / (seats[i] + 1), -i))
        seats[best] += 1
    return seats


@dataclass(frozen=True)
class CandidateList:
    """One recommender's ranked top-K items.

    Ranks are 1..len(entries), strictly increasing, no duplicate items.
    """

    recommender_index: int
    entries: tuple[tuple[ItemId, int], ...]

    def __post_init__(self) -> None:
        seen: set[ItemId] = set()
        for position, (item, rank) in enumerate(self.entries, start=1):
            if rank != position:
                raise ValueError(f"ranks must be 1..{len(self.entries)}, got {rank} at {position}")
            if item in seen:
                raise ValueError(f"duplicate item {item!r} in candidate list")
            seen.add(item)

    @classmethod
    def from_ranking(cls, recommender_index: int, items: Sequence[ItemId]) -> "CandidateList":
        return cls(recommender_index, tuple((item, rank) for rank, item in enumerate(items, start=1)))

    def items(self) -> list[ItemId]:
        return [item for item, _ in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class ResponsibilityVector:
    """Per-recommender credit shares for one recommended item."""

    shares: tuple[float, ...]

    def __post_init__(self) -> None:
        if any(s < 0 for s in self.shares):
            raise ValueError("responsibility shares must be non-negative")

    def winner(self) -> int:
        """Index of the recommender with the largest share (ties: lowest index)."""
        return int(np.argmax(self.shares))


@dataclass(frozen=True)
class AggregatedItem:
    item: ItemId
    position: int
    responsibility: ResponsibilityVector


@dataclass(frozen=True)
class AggregatedList:
    entries: tuple[AggregatedItem, ...]

    def items(self) -> list[ItemId]:
        return [entry.item for entry in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


def aggregate(
    candidates: Sequence[CandidateList],
    votes: Sequence[float],
    n_slots: int,
    normalize_responsibility: bool = True,
    k: int | None = None,
    relevance: RelevanceFn = relevance_from_rank,
) -> AggregatedList:
    """Fuzzy d'Hondt selection of a top-``n_slots`` list.

    Iterative procedure with per-recommender fractional seat counts s_r
    (initially 0). At each step:

    * effective vote e_r = v_r / (1 + s_r);
    * support of a not-yet-selected item i is sigma(i) = sum_r e_r * rel_r(i),
      where rel_r(i) is the relevance of i's rank in list r (0 if absent);
    * the item with maximal support is selected (ties: lexicographically
      smallest item id);
    * recommender r's raw responsibility for the item is e_r * rel_r(i),
      its normalized responsibility raw / sigma(i), and s_r grows by the
      normalized share.

    Selection always advances seats by normalized shares; the
    ``normalize_responsibility`` flag only controls which form is stored in
    the output. Selection stops early once no remaining item has positive
    support, so fewer than ``n_slots`` entries may be returned. With
    disjoint lists and relevance pinned to 1 the procedure degenerates to
    classic :func:`dhondt_seats`.

    ``k`` is the rank-denominator handed to ``relevance`` (the candidate
    funnel's K); it defaults to the longest list present.
    """
    if n_slots < 1:
        raise ValueError(f"n_slots must be >= 1, got {n_slots}")
    if len(votes) != len(candidates):
        raise ValueError(f"got {len(votes)} votes for {len(candidates)} candidate lists")
    vote_arr = np.asarray(votes, dtype=float)
    if np.any(vote_arr < 0):
        raise ValueError("votes must be non-negative")
    if not candidates or all(len(c) == 0 for c in candidates):
        return AggregatedList(())
    if not np.any(vote_arr > 0):
        raise ValueError("vote vector must not be all zeros")

    if k is None:
        k = max(len(c) for c in candidates)

    # Union of candidate items in first-seen order; relevance matrix R[r, i].
    item_index: dict[ItemId, int] = {}
    for cand in candidates:
        for item, _rank in cand.entries:
            if item not in item_index:
                item_index[item] = len(item_index)
    items = list(item_index)
    n_rec, n_items = len(candidates), len(items)
    rel = np.zeros((n_rec, n_items))
    for r, cand in enumerate(candidates):
        for item, rank in cand.entries:
            rel[r, item_index[item]] = relevance(rank, k)

    sort_keys = [lexical_key(item) for item in items]
    seats = np.zeros(n_rec)
    remaining = np.ones(n_items, dtype=bool)
    selected: list[AggregatedItem] = []

    for position in range(1, n_slots + 1):
        if not remaining.any():
            break
        effective = vote_arr / (1.0 + seats)
        support = effective @ rel
        support[~remaining] = -1.0
        best = support.max()
        if best <= 0.0:
            break
        tied = np.flatnonzero(support == best)
        choice = int(min(tied, key=lambda idx: sort_keys[idx]))
        raw = effective * rel[:, choice]
        normalized = raw / best
        seats += normalized
        shares = normalized if normalize_responsibility else raw
        selected.append(
            AggregatedItem(items[choice], position, ResponsibilityVector(tuple(shares.tolist())))
        )
        remaining[choice] = False

    return AggregatedList(tuple(selected))
