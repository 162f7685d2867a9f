"""Base recommenders trained offline on the training slice.

Six algorithms produce ranked top-K candidate lists for the aggregator:
training frequency, content cosine similarity, item-based KNN, session
KNN, pairwise-ranking matrix factorization, and skip-gram item embeddings.
All of them are deterministic given (hyperparameters, data, seed), train
once on the training slice and never mutate afterwards; only the
aggregator's vote weights learn online.

Every recommender falls back to the training popularity order when its own
score is undefined for a context (cold user, unseen items), so candidate
lists are rarely empty. Already-consumed items are deliberately not
filtered out: the replay evaluation counts repeated interactions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .events import EventStream, InteractionEvent, ItemId, UserId, lexical_key
from .voting import CandidateList

KINDS = ("popularity", "cosine-content", "item-knn", "session-knn", "bpr-mf", "item2vec")

SESSION_GAP_MS = 30 * 60 * 1000

ItemAttributes = Mapping[ItemId, Sequence[str]]


@dataclass(frozen=True)
class RecommenderSpec:
    kind: str
    hyperparameters: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown recommender kind {self.kind!r}; expected one of {KINDS}")

    def param(self, name: str, default):
        return self.hyperparameters.get(name, default)


@dataclass(frozen=True)
class RecommendationContext:
    """The user and their interaction history visible at the replay cursor."""

    user: UserId
    recent_items: tuple[ItemId, ...] = ()


def split_sessions(events: Sequence[InteractionEvent], gap_ms: int = SESSION_GAP_MS) -> list[list[ItemId]]:
    """Per-user item sequences cut at inactivity gaps longer than ``gap_ms``."""
    last_seen: dict[UserId, int] = {}
    open_sessions: dict[UserId, list[ItemId]] = {}
    sessions: list[list[ItemId]] = []
    for event in events:
        previous = last_seen.get(event.user)
        if previous is not None and event.timestamp - previous > gap_ms:
            sessions.append(open_sessions.pop(event.user))
        open_sessions.setdefault(event.user, []).append(event.item)
        last_seen[event.user] = event.timestamp
    # flush in first-opened order for determinism
    sessions.extend(open_sessions.values())
    return sessions


class Recommender:
    """Shared vocabulary handling and popularity fallback.

    Subclasses fit in ``__init__`` and implement ``_scores`` returning one
    score per vocabulary item (aligned with ``self._items``), or ``None``
    to request the popularity fallback.
    """

    kind: str = "base"

    def __init__(self, spec: RecommenderSpec, events: Sequence[InteractionEvent]):
        self.spec = spec
        self.index = 0
        counts: dict[ItemId, int] = {}
        for event in events:
            counts[event.item] = counts.get(event.item, 0) + 1
        # lexical vocabulary order makes a stable argsort break score ties by id
        self._items: list[ItemId] = sorted(counts, key=lexical_key)
        self._item_pos: dict[ItemId, int] = {item: i for i, item in enumerate(self._items)}
        self._counts = np.array([counts[item] for item in self._items], dtype=float)

    def _known(self, items: Sequence[ItemId]) -> list[int]:
        return [self._item_pos[i] for i in items if i in self._item_pos]

    def _scores(self, ctx: RecommendationContext) -> np.ndarray | None:
        raise NotImplementedError

    def recommend(self, ctx: RecommendationContext, k: int = 100) -> CandidateList:
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        if not self._items:
            return CandidateList(self.index, ())
        scores = self._scores(ctx)
        if scores is None:
            scores = self._counts
        order = np.argsort(-scores, kind="stable")[:k]
        return CandidateList.from_ranking(self.index, [self._items[i] for i in order])


class PopularityRecommender(Recommender):
    """Items ranked by raw interaction count on the training slice."""

    kind = "popularity"

    def __init__(self, spec: RecommenderSpec, events: Sequence[InteractionEvent]):
        super().__init__(spec, events)

    def _scores(self, ctx: RecommendationContext) -> np.ndarray | None:
        return self._counts


def _user_item_matrix(events: Sequence[InteractionEvent], item_pos: dict[ItemId, int]) -> sp.csr_matrix:
    """Binary user-item incidence matrix (users in first-seen order)."""
    user_pos: dict[UserId, int] = {}
    rows, cols = [], []
    for event in events:
        if event.user not in user_pos:
            user_pos[event.user] = len(user_pos)
        rows.append(user_pos[event.user])
        cols.append(item_pos[event.item])
    data = np.ones(len(rows), dtype=np.float64)
    matrix = sp.csr_matrix((data, (rows, cols)), shape=(len(user_pos), len(item_pos)))
    matrix.data[:] = 1.0  # collapse repeated interactions to incidence
    return matrix


class CosineContentRecommender(Recommender):
    """Cosine between the user's mean item profile and every item vector.

    Item vectors come from an attribute catalog when one is provided
    (multi-hot over attribute tokens) and from co-occurrence rows of the
    user-item matrix otherwise.
    """

    kind = "cosine-content"

    def __init__(
        self,
        spec: RecommenderSpec,
        events: Sequence[InteractionEvent],
        item_attributes: ItemAttributes | None = None,
    ):
        super().__init__(spec, events)
        self.profile_items = int(spec.param("profile_items", 50))
        if item_attributes:
            vocab: dict[str, int] = {}
            rows, cols = [], []
            for pos, item in enumerate(self._items):
                for token in item_attributes.get(item, ()):
                    if token not in vocab:
                        vocab[token] = len(vocab)
                    rows.append(pos)
                    cols.append(vocab[token])
            data = np.ones(len(rows))
            self._vectors = sp.csr_matrix(
                (data, (rows, cols)), shape=(len(self._items), max(len(vocab), 1))
            )
        else:
            users = _user_item_matrix(events, self._item_pos)
            self._vectors = (users.T @ users).tocsr()
        norms = np.sqrt(np.asarray(self._vectors.multiply(self._vectors).sum(axis=1)).ravel())
        self._norms = np.where(norms > 0, norms, 1.0)

    def _scores(self, ctx: RecommendationContext) -> np.ndarray | None:
        known = self._known(ctx.recent_items[-self.profile_items:])
        if not known:
            return None
        profile = np.asarray(self._vectors[known].mean(axis=0)).ravel()
        norm = np.linalg.norm(profile)
        if norm == 0:
            return None
        return (self._vectors @ profile) / (self._norms * norm)


class ItemKnnRecommender(Recommender):
    """Score items by summed co-occurrence cosine to the user's recent items."""

    kind = "item-knn"

    def __init__(self, spec: RecommenderSpec, events: Sequence[InteractionEvent]):
        super().__init__(spec, events)
        self.history_length = int(spec.param("history_length", 10))
        users = _user_item_matrix(events, self._item_pos)
        self._cooc = (users.T @ users).tocsc()
        diag = self._cooc.diagonal()
        self._norms = np.sqrt(np.where(diag > 0, diag, 1.0))

    def _scores(self, ctx: RecommendationContext) -> np.ndarray | None:
        known = self._known(ctx.recent_items[-self.history_length:])
        if not known:
            return None
        accumulated = self._cooc[:, known] @ (1.0 / self._norms[known])
        return accumulated / self._norms


class SessionKnnRecommender(Recommender):
    """Similarity-weighted item frequency over the nearest training sessions.

    Training events are cut into sessions at 30-minute inactivity gaps; the
    query is the user's most recent items compared by binary cosine.
    """

    kind = "session-knn"

    def __init__(self, spec: RecommenderSpec, events: Sequence[InteractionEvent]):
        super().__init__(spec, events)
        self.n_neighbors = int(spec.param("n_neighbors", 50))
        self.query_items = int(spec.param("query_items", 10))
        sessions = split_sessions(events, int(spec.param("session_gap_ms", SESSION_GAP_MS)))
        rows, cols = [], []
        for s, session in enumerate(sessions):
            for pos in {self._item_pos[item] for item in session}:
                rows.append(s)
                cols.append(pos)
        data = np.ones(len(rows))
        self._sessions = sp.csr_matrix(
            (data, (rows, cols)), shape=(max(len(sessions), 1), len(self._items))
        )
        sizes = np.asarray(self._sessions.sum(axis=1)).ravel()
        self._session_norms = np.sqrt(np.where(sizes > 0, sizes, 1.0))

    def _scores(self, ctx: RecommendationContext) -> np.ndarray | None:
        known = self._known(ctx.recent_items[-self.query_items:])
        if not known:
            return None
        query_positions = sorted(set(known))
        query = np.zeros(len(self._items))
        query[query_positions] = 1.0
        sims = (self._sessions @ query) / (self._session_norms * np.sqrt(len(query_positions)))
        if not np.any(sims > 0):
            return None
        top = np.argsort(-sims, kind="stable")[: self.n_neighbors]
        top = top[sims[top] > 0]
        weights = np.zeros(self._sessions.shape[0])
        weights[top] = sims[top]
        return self._sessions.T @ weights


class BprMfRecommender(Recommender):
    """Matrix factorization trained with a pairwise ranking objective.

    SGD over (user, positive, sampled negative) triples; negatives are drawn
    uniformly and re-drawn while they hit one of the user's positives.
    Per-epoch mean pairwise loss is kept in ``epoch_losses``.
    """

    kind = "bpr-mf"

    def __init__(self, spec: RecommenderSpec, events: Sequence[InteractionEvent], seed: int = 0):
        super().__init__(spec, events)
        self.factors = int(spec.param("factors", 32))
        self.epochs = int(spec.param("epochs", 10))
        self.learning_rate = float(spec.param("learning_rate", 0.05))
        self.regularization = float(spec.param("regularization", 0.01))
        self.batch_size = int(spec.param("batch_size", 512))
        self.epoch_losses: list[float] = []

        self._user_pos: dict[UserId, int] = {}
        pairs: set[tuple[int, int]] = set()
        for event in events:
            if event.user not in self._user_pos:
                self._user_pos[event.user] = len(self._user_pos)
            pairs.add((self._user_pos[event.user], self._item_pos[event.item]))
        n_users, n_items = len(self._user_pos), len(self._items)
        self._user_factors = np.zeros((max(n_users, 1), self.factors))
        self._item_factors = np.zeros((max(n_items, 1), self.factors))
        if not pairs or n_items < 2:
            return

        ordered = sorted(pairs)
        users = np.array([u for u, _ in ordered])
        positives = np.array([i for _, i in ordered])
        seen = sp.csr_matrix(
            (np.ones(len(ordered)), (users, positives)), shape=(n_users, n_items)
        )
        rng = np.random.default_rng(seed)
        self._user_factors = rng.normal(0, 0.1, (n_users, self.factors))
        self._item_factors = rng.normal(0, 0.1, (n_items, self.factors))

        for _ in range(self.epochs):
            order = rng.permutation(len(ordered))
            total_loss = 0.0
            for start in range(0, len(order), self.batch_size):
                idx = order[start : start + self.batch_size]
                u, i = users[idx], positives[idx]
                j = self._draw_negatives(u, seen, n_items, rng)
                pu, qi, qj = self._user_factors[u], self._item_factors[i], self._item_factors[j]
                x = np.sum(pu * (qi - qj), axis=1)
                total_loss += float(np.sum(np.logaddexp(0.0, -x)))
                g = 1.0 / (1.0 + np.exp(np.clip(x, -35.0, 35.0)))
                lr, reg = self.learning_rate, self.regularization
                np.add.at(self._user_factors, u, lr * (g[:, None] * (qi - qj) - reg * pu))
                np.add.at(self._item_factors, i, lr * (g[:, None] * pu - reg * qi))
                np.add.at(self._item_factors, j, lr * (-g[:, None] * pu - reg * qj))
            self.epoch_losses.append(total_loss / len(order))

    @property
    def user_factors(self) -> np.ndarray:
        return self._user_factors

    @property
    def item_factors(self) -> np.ndarray:
        return self._item_factors

    @staticmethod
    def _draw_negatives(
        u: np.ndarray, seen: sp.csr_matrix, n_items: int, rng: np.random.Generator
    ) -> np.ndarray:
        j = rng.integers(0, n_items, size=len(u))
        for _ in range(100):
            clash = np.asarray(seen[u, j]).ravel() > 0
            if not clash.any():
                break
            j[clash] = rng.integers(0, n_items, size=int(clash.sum()))
        return j

    def _scores(self, ctx: RecommendationContext) -> np.ndarray | None:
        row = self._user_pos.get(ctx.user)
        if row is None:
            return None
        return self._item_factors @ self._user_factors[row]


class Item2vecRecommender(Recommender):
    """Skip-gram item embeddings with negative sampling over sessions.

    Scores items by embedding cosine to the mean embedding of the user's
    last few items.
    """

    kind = "item2vec"

    def __init__(self, spec: RecommenderSpec, events: Sequence[InteractionEvent], seed: int = 0):
        super().__init__(spec, events)
        self.dimension = int(spec.param("dimension", 32))
        self.window = int(spec.param("window", 3))
        self.negatives = int(spec.param("negatives", 5))
        self.epochs = int(spec.param("epochs", 5))
        self.learning_rate = float(spec.param("learning_rate", 0.05))
        # small batches matter: tiny corpora need many fresh SGD steps
        self.batch_size = int(spec.param("batch_size", 128))
        self.profile_items = int(spec.param("profile_items", 5))

        sessions = split_sessions(events, int(spec.param("session_gap_ms", SESSION_GAP_MS)))
        centers: list[int] = []
        contexts: list[int] = []
        for session in sessions:
            positions = [self._item_pos[item] for item in session]
            for t, center in enumerate(positions):
                lo, hi = max(0, t - self.window), min(len(positions), t + self.window + 1)
                for o in range(lo, hi):
                    if o != t:
                        centers.append(center)
                        contexts.append(positions[o])
        n_items = len(self._items)
        rng = np.random.default_rng(seed)
        self._in_vecs = (rng.random((max(n_items, 1), self.dimension)) - 0.5) / self.dimension
        self._context_vecs = np.zeros_like(self._in_vecs)
        if not centers or n_items < 2:
            self._finish_fit()
            return

        center_arr = np.array(centers)
        context_arr = np.array(contexts)
        frequency = np.bincount(context_arr, minlength=n_items).astype(float)
        noise = frequency**0.75
        noise_cdf = np.cumsum(noise / noise.sum())

        for epoch in range(self.epochs):
            # linear decay keeps the tiny-vocab case from blowing up
            lr = self.learning_rate * (1.0 - epoch / self.epochs)
            order = rng.permutation(len(center_arr))
            for start in range(0, len(order), self.batch_size):
                idx = order[start : start + self.batch_size]
                c, o = center_arr[idx], context_arr[idx]
                negs = np.searchsorted(noise_cdf, rng.random((len(idx), self.negatives)))
                negs = np.minimum(negs, n_items - 1)
                wc, co, cn = self._in_vecs[c], self._context_vecs[o], self._context_vecs[negs]
                s_pos = np.clip(np.sum(wc * co, axis=1), -6.0, 6.0)
                s_neg = np.clip(np.einsum("bnd,bd->bn", cn, wc), -6.0, 6.0)
                g_pos = 1.0 / (1.0 + np.exp(s_pos))  # sigma(-s_pos)
                g_neg = 1.0 / (1.0 + np.exp(-s_neg))  # sigma(s_neg)
                grad_wc = g_pos[:, None] * co - np.einsum("bn,bnd->bd", g_neg, cn)
                np.add.at(self._in_vecs, c, lr * grad_wc)
                np.add.at(self._context_vecs, o, lr * g_pos[:, None] * wc)
                np.add.at(
                    self._context_vecs,
                    negs.ravel(),
                    (-lr * g_neg[..., None] * wc[:, None, :]).reshape(-1, self.dimension),
                )
        self._finish_fit()

    def _finish_fit(self) -> None:
        # input + context vectors make direct session co-occurrence visible
        # to the cosine, not just shared-context similarity
        self._embeddings = self._in_vecs + self._context_vecs
        norms = np.linalg.norm(self._embeddings, axis=1)
        self._embedding_norms = np.where(norms > 0, norms, 1.0)

    @property
    def embeddings(self) -> np.ndarray:
        return self._embeddings

    def similarity(self, a: ItemId, b: ItemId) -> float:
        """Embedding cosine between two items (0 when either is unknown)."""
        if a not in self._item_pos or b not in self._item_pos:
            return 0.0
        va = self._embeddings[self._item_pos[a]]
        vb = self._embeddings[self._item_pos[b]]
        return float(va @ vb / (np.linalg.norm(va) * np.linalg.norm(vb)))

    def _scores(self, ctx: RecommendationContext) -> np.ndarray | None:
        known = self._known(ctx.recent_items[-self.profile_items:])
        if not known:
            return None
        profile = self._embeddings[known].mean(axis=0)
        norm = np.linalg.norm(profile)
        if norm == 0:
            return None
        return (self._embeddings @ profile) / (self._embedding_norms * norm)


def train(
    spec: RecommenderSpec,
    train_events: EventStream | Sequence[InteractionEvent],
    item_attributes: ItemAttributes | None = None,
    seed: int = 0,
) -> Recommender:
    """Fit one recommender on the training slice. Deterministic given seed."""
    events = list(train_events)
    if spec.kind == "popularity":
        return PopularityRecommender(spec, events)
    if spec.kind == "cosine-content":
        return CosineContentRecommender(spec, events, item_attributes)
    if spec.kind == "item-knn":
        return ItemKnnRecommender(spec, events)
    if spec.kind == "session-knn":
        return SessionKnnRecommender(spec, events)
    if spec.kind == "bpr-mf":
        return BprMfRecommender(spec, events, seed)
    if spec.kind == "item2vec":
        return Item2vecRecommender(spec, events, seed)
    raise ValueError(f"unknown recommender kind {spec.kind!r}")


def default_roster() -> list[RecommenderSpec]:
    """The standard six-recommender ensemble."""
    return [RecommenderSpec(kind) for kind in KINDS]


def train_ensemble(
    specs: Sequence[RecommenderSpec],
    train_events: EventStream | Sequence[InteractionEvent],
    item_attributes: ItemAttributes | None = None,
    seed: int = 0,
) -> list[Recommender]:
    """Train a roster, assigning each model its stable recommender index."""
    models = []
    for index, spec in enumerate(specs):
        model = train(spec, train_events, item_attributes, seed=seed + index)
        model.index = index
        models.append(model)
    return models
