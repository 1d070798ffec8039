"""Pairwise similarity measures and same-gender projection networks.

Two families of similarity are provided:

* content similarity over profile attributes, either on bucketed values
  (every attribute compared nominally after numeric values are binned) or
  with numeric attributes scored by normalized absolute difference;
* graph similarity as the Jaccard overlap of two same-gender users'
  contact sets: shared receivers (interest) or shared senders
  (attractiveness).

Projection networks materialize the shared-neighbor counts behind the
Jaccard numerators as weighted same-gender graphs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .model import Gender, InteractionGraph, UserId, UserProfile

NUMERIC = "numeric"
NOMINAL = "nominal"

#: (width, origin) bucketing defaults for the common numeric attributes
DEFAULT_BIN_SPECS = {
    "age": (5.0, 20.0),
    "height": (5.0, 0.0),
    "weight": (5.0, 0.0),
    "photos": (5.0, 0.0),
}


@dataclass(frozen=True)
class Binning:
    """Maps numeric attribute values to integer buckets of fixed width.

    Attributes without an explicit (width, origin) spec fall back to
    ``default_width``/``default_origin``.
    """

    specs: Mapping[str, tuple[float, float]] = field(default_factory=dict)
    default_width: float = 5.0
    default_origin: float = 0.0

    @classmethod
    def default(cls) -> "Binning":
        return cls(specs=dict(DEFAULT_BIN_SPECS))

    def spec_for(self, attribute: str) -> tuple[float, float]:
        return self.specs.get(attribute, (self.default_width, self.default_origin))

    def index(self, attribute: str, value: float) -> int:
        width, origin = self.spec_for(attribute)
        return math.floor((value - origin) / width)


@dataclass(frozen=True)
class AttributeSchema:
    """Attribute kinds plus the population-wide spread of each numeric one.

    ``normalizers[a]`` is the maximum absolute difference of attribute ``a``
    between any two users with a known value (equivalently max minus min).
    """

    kinds: dict[str, str]
    normalizers: dict[str, float]

    def is_numeric(self, attribute: str) -> bool:
        return self.kinds.get(attribute) == NUMERIC


def build_schema(profiles: "Mapping[UserId, UserProfile] | Iterable[UserProfile]") -> AttributeSchema:
    """Scan profiles and derive attribute kinds and numeric normalizers.

    Kind is inferred from the stored value type; an attribute mixing numeric
    and nominal values across users is rejected. Attributes that are missing
    everywhere simply do not appear in the schema.
    """
    if isinstance(profiles, Mapping):
        profiles = profiles.values()
    kinds: dict[str, str] = {}
    lo: dict[str, float] = {}
    hi: dict[str, float] = {}
    for p in profiles:
        for name, value in p.attributes.items():
            kind = NUMERIC if isinstance(value, (int, float)) and not isinstance(value, bool) else NOMINAL
            prev = kinds.setdefault(name, kind)
            if prev != kind:
                raise ValueError(f"attribute {name!r} has both numeric and nominal values")
            if kind == NUMERIC:
                v = float(value)
                lo[name] = v if name not in lo else min(lo[name], v)
                hi[name] = v if name not in hi else max(hi[name], v)
    normalizers = {name: hi[name] - lo[name] for name in lo}
    return AttributeSchema(kinds=kinds, normalizers=normalizers)


def content_similarity_a(
    x: UserProfile,
    y: UserProfile,
    schema: AttributeSchema,
    bins: Binning,
) -> float:
    """Fraction of shared known attributes that match after binning.

    Numeric values are bucketed with ``bins`` and compared for bucket
    equality; nominal values compare as tokens. The schema defines the
    attribute universe; returns 0 when the users share no known attribute.
    """
    shared = x.attributes.keys() & y.attributes.keys() & schema.kinds.keys()
    if not shared:
        return 0.0
    hits = 0
    for name in shared:
        vx, vy = x.attributes[name], y.attributes[name]
        if schema.is_numeric(name):
            if bins.index(name, float(vx)) == bins.index(name, float(vy)):
                hits += 1
        elif vx == vy:
            hits += 1
    return hits / len(shared)


def content_similarity_b(x: UserProfile, y: UserProfile, schema: AttributeSchema) -> float:
    """Attribute similarity keeping numeric values continuous.

    A shared numeric attribute contributes ``(v* - |vx - vy|) / v*`` where
    ``v*`` is the schema's population-wide spread (1.0 when the spread is
    zero, since both values are then necessarily equal); nominal attributes
    contribute exact-match 0/1. Returns 0 when no attribute is shared.
    """
    shared = x.attributes.keys() & y.attributes.keys() & schema.kinds.keys()
    if not shared:
        return 0.0
    total = 0.0
    for name in shared:
        vx, vy = x.attributes[name], y.attributes[name]
        if schema.is_numeric(name):
            spread = schema.normalizers[name]
            if spread == 0.0:
                total += 1.0
            else:
                total += (spread - abs(float(vx) - float(vy))) / spread
        elif vx == vy:
            total += 1.0
    return total / len(shared)


def _jaccard(a: "set[UserId] | frozenset[UserId]", b: "set[UserId] | frozenset[UserId]") -> float:
    inter = len(a & b)
    union = len(a) + len(b) - inter
    return inter / union if union else 0.0


def _require_same_gender(x: UserId, y: UserId, graph: InteractionGraph) -> None:
    if graph.users[x].gender is not graph.users[y].gender:
        raise ValueError(f"users {x} and {y} are of opposite genders; similarity undefined")


def interest_similarity(x: UserId, y: UserId, graph: InteractionGraph) -> float:
    """Jaccard overlap of the receiver sets of two same-gender users."""
    _require_same_gender(x, y, graph)
    return _jaccard(graph.sent_to[x], graph.sent_to[y])


def attractiveness_similarity(x: UserId, y: UserId, graph: InteractionGraph) -> float:
    """Jaccard overlap of the sender sets of two same-gender users."""
    _require_same_gender(x, y, graph)
    return _jaccard(graph.received_from[x], graph.received_from[y])


class ProjectionDirection(Enum):
    SENDING = "sending"
    RECEIVING = "receiving"


@dataclass
class ProjectionNetwork:
    """Weighted same-gender graph of shared-receiver or shared-sender counts.

    ``edges[(u, v)]`` with u < v counts the common receivers (sending
    direction) or common senders (receiving direction) of u and v; only
    positive weights are stored.
    """

    gender: Gender
    direction: ProjectionDirection
    edges: dict[tuple[UserId, UserId], int]

    def weight(self, u: UserId, v: UserId) -> int:
        return self.edges.get((min(u, v), max(u, v)), 0)

    def nodes(self) -> set[UserId]:
        return {u for e in self.edges for u in e}

    def degrees(self) -> dict[UserId, int]:
        deg: dict[UserId, int] = {}
        for u, v in self.edges:
            deg[u] = deg.get(u, 0) + 1
            deg[v] = deg.get(v, 0) + 1
        return deg


def build_projection(
    graph: InteractionGraph,
    gender: Gender,
    direction: ProjectionDirection,
) -> ProjectionNetwork:
    """Project the bipartite graph onto one gender via shared neighbors.

    The weight of (u, v) is |sent_to(u) ∩ sent_to(v)| in the sending
    direction and |received_from(u) ∩ received_from(v)| in the receiving
    direction. Computed by grouping users on each shared opposite-gender
    neighbor, so runtime scales with the number of co-neighbor pairs rather
    than all same-gender pairs.
    """
    ids = graph.users_of_gender(gender)
    pos = {u: i for i, u in enumerate(ids)}
    opp_ids = graph.users_of_gender(gender.opposite)
    opp_pos = {u: j for j, u in enumerate(opp_ids)}
    # Incidence matrix M[i, j] = 1 iff member i has opposite-gender neighbor j;
    # M @ M.T then counts shared neighbors for every co-neighbor pair at once.
    rows: list[int] = []
    cols: list[int] = []
    for u in ids:
        neigh = graph.sent_to[u] if direction is ProjectionDirection.SENDING else graph.received_from[u]
        for w in neigh:
            rows.append(pos[u])
            cols.append(opp_pos[w])
    m = sp.csr_matrix(
        (np.ones(len(rows), dtype=np.int64), (rows, cols)),
        shape=(len(ids), len(opp_ids)),
    )
    overlap = sp.triu(m @ m.T, k=1).tocoo()
    edges = {
        (ids[i], ids[j]): int(w)
        for i, j, w in zip(overlap.row, overlap.col, overlap.data)
        if w > 0
    }
    return ProjectionNetwork(gender=gender, direction=direction, edges=edges)


def ccdf(values: Sequence[float]) -> list[tuple[float, float]]:
    """Complementary cumulative distribution of a sample.

    Returns (value, fraction of observations >= value) for each distinct
    value in ascending order; empty input yields an empty table.
    """
    arr = np.asarray(list(values), dtype=float)
    if arr.size == 0:
        return []
    uniq, counts = np.unique(arr, return_counts=True)
    at_least = counts[::-1].cumsum()[::-1]
    return [(float(v), float(c) / arr.size) for v, c in zip(uniq, at_least)]


def message_counts(
    graph: InteractionGraph,
    *,
    direction: str = "sent",
    gender: "Gender | None" = None,
    window_days: "int | None" = None,
    per_week: bool = False,
) -> list[int]:
    """Raw message-event counts per user (or per user-week).

    Counts every event where the user is the sender (``direction="sent"``)
    or receiver (``"received"``), restricted to events within
    ``window_days`` of that user's own registration when given. With
    ``per_week`` the result holds one count per (user, week-of-membership)
    with at least one message; otherwise one total per user, zeros included.
    """
    if direction not in ("sent", "received"):
        raise ValueError(f"direction must be 'sent' or 'received', got {direction!r}")
    users = graph.users if gender is None else {
        u: p for u, p in graph.users.items() if p.gender is gender
    }
    horizon = None if window_days is None else window_days * 86400
    if per_week:
        weekly: dict[tuple[UserId, int], int] = {}
        for ev in graph.events:
            uid = ev.sender if direction == "sent" else ev.receiver
            if uid not in users:
                continue
            offset = ev.sent_at - users[uid].registered_at
            if offset < 0 or (horizon is not None and offset > horizon):
                continue
            week = offset // (7 * 86400)
            weekly[(uid, week)] = weekly.get((uid, week), 0) + 1
        return [weekly[k] for k in sorted(weekly)]
    totals = {u: 0 for u in users}
    for ev in graph.events:
        uid = ev.sender if direction == "sent" else ev.receiver
        if uid not in users:
            continue
        offset = ev.sent_at - users[uid].registered_at
        if offset < 0 or (horizon is not None and offset > horizon):
            continue
        totals[uid] += 1
    return [totals[u] for u in sorted(totals)]
