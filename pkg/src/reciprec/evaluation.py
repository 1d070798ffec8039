"""Experiment protocol: train/test split, ranking metrics, and diagnostics.

The split keeps a message in training when it falls within a fixed window
of its sender's registration; everything later is test data. Service users
are those active enough in training. Recommendations generated from the
training graph are then compared against the users each service user
actually contacted (I) and exchanged messages with (R) in the test period.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .engine import (
    AlgorithmConfig,
    CandidatePolicy,
    RecommendationList,
    Scorer,
    recommend_batch,
)
from .model import Gender, InteractionGraph, MessageEvent, UserId, derive_contact_pairs
from .similarity import AttributeSchema, Binning, build_schema

DEFAULT_K_GRID = (1, 5, 10, 20, 50, 100)


@dataclass(frozen=True)
class SplitSpec:
    """Training window (seconds since the sender's registration) and the
    minimum training activity for a user to be evaluated."""

    training_window: int = 10 * 86400
    min_activity: int = 5

    def __post_init__(self) -> None:
        if self.training_window <= 0:
            raise ValueError("training_window must be positive")
        if self.min_activity < 1:
            raise ValueError("min_activity must be >= 1")


def split_train_test(
    graph: InteractionGraph, spec: SplitSpec
) -> tuple[InteractionGraph, list[MessageEvent]]:
    """Split events into a training graph and a list of test events.

    An event belongs to training iff it was sent within the window of its
    *sender's* registration. An event predating its sender's registration is
    rejected outright.
    """
    train_events: list[MessageEvent] = []
    test_events: list[MessageEvent] = []
    for ev in graph.events:
        offset = ev.sent_at - graph.users[ev.sender].registered_at
        if offset < 0:
            raise ValueError(
                f"event {ev.sender}->{ev.receiver} at {ev.sent_at} predates "
                f"sender registration {graph.users[ev.sender].registered_at}"
            )
        if offset <= spec.training_window:
            train_events.append(ev)
        else:
            test_events.append(ev)
    return InteractionGraph(graph.users, train_events), test_events


def select_service_users(train_graph: InteractionGraph, spec: SplitSpec) -> set[UserId]:
    """Users who sent or replied to at least ``min_activity`` contacts in training."""
    replies_sent = Counter(y for _x, y in train_graph.replies)
    return {
        u
        for u in train_graph.users
        if len(train_graph.sent_to[u]) + replies_sent[u] >= spec.min_activity
    }


@dataclass
class ObservedActivity:
    """Per service user: who they contacted in test (I) and who replied (R)."""

    contacted: set[UserId] = field(default_factory=set)
    replied: set[UserId] = field(default_factory=set)


def build_test_activity(
    test_events: Sequence[MessageEvent],
    service_users: set[UserId],
    *,
    both_endpoints_service: bool = False,
) -> dict[UserId, ObservedActivity]:
    """Derive I and R sets from test events, per service user.

    Contact/reply semantics are re-derived within the test period on its
    own. By default any receiver counts; with ``both_endpoints_service`` the
    receiver must be a service user too.
    """
    contacts, replies = derive_contact_pairs(test_events)
    activity = {u: ObservedActivity() for u in service_users}
    for x, y in contacts:
        if x in activity and (not both_endpoints_service or y in service_users):
            activity[x].contacted.add(y)
    for x, y in replies:
        if x in activity and (not both_endpoints_service or y in service_users):
            activity[x].replied.add(y)
    return activity


@dataclass
class MetricSummary:
    """Averages of the four top-K metrics over eligible service users.

    Precision averages skip users with an empty recommendation list; I
    metrics skip users with empty I, R metrics users with empty R. ``None``
    means no user was eligible.
    """

    i_precision: "float | None"
    i_recall: "float | None"
    r_precision: "float | None"
    r_recall: "float | None"
    n_i_precision: int
    n_i_recall: int
    n_r_precision: int
    n_r_recall: int


def _mean(values: list[float]) -> "float | None":
    return sum(values) / len(values) if values else None


def metrics_at_k(
    recommendations: Mapping[UserId, Sequence[UserId]],
    activity: Mapping[UserId, ObservedActivity],
    *,
    count_inactive_as_zero: bool = False,
) -> MetricSummary:
    """Exact set-arithmetic precision/recall, averaged over eligible users.

    By default users with no test contacts (or no test replies) are left out
    of the I (or R) averages; ``count_inactive_as_zero`` includes them as
    zeros instead, conflating inactivity with ranking failure.
    """
    ip: list[float] = []
    ir: list[float] = []
    rp: list[float] = []
    rr: list[float] = []
    for u, rec in recommendations.items():
        act = activity.get(u)
        if act is None:
            continue
        t = set(rec)
        i_hits = len(act.contacted & t)
        r_hits = len(act.replied & t)
        if act.contacted or count_inactive_as_zero:
            ir.append(i_hits / len(act.contacted) if act.contacted else 0.0)
            if t:
                ip.append(i_hits / len(t))
        if act.replied or count_inactive_as_zero:
            rr.append(r_hits / len(act.replied) if act.replied else 0.0)
            if t:
                rp.append(r_hits / len(t))
    return MetricSummary(
        i_precision=_mean(ip),
        i_recall=_mean(ir),
        r_precision=_mean(rp),
        r_recall=_mean(rr),
        n_i_precision=len(ip),
        n_i_recall=len(ir),
        n_r_precision=len(rp),
        n_r_recall=len(rr),
    )


def relevant_positions(
    lists: Mapping[UserId, RecommendationList],
    activity: Mapping[UserId, ObservedActivity],
) -> tuple["float | None", int]:
    """Mean normalized rank of relevant recommendations, and their count.

    A relevant recommendation is a listed candidate the service user
    contacted and who replied in the test period; its normalized position is
    (1-based rank) / (list length). Users contributing none are skipped;
    (None, 0) when nothing is relevant anywhere.
    """
    positions: list[float] = []
    for u, rl in lists.items():
        act = activity.get(u)
        if act is None or not act.replied or not rl.ranked:
            continue
        length = len(rl.ranked)
        for rank, cand in enumerate(rl.candidate_ids(), start=1):
            if cand in act.replied:
                positions.append(rank / length)
    return _mean(positions), len(positions)


def expected_random_precision(
    graph: InteractionGraph,
    activity: Mapping[UserId, ObservedActivity],
    policy: "CandidatePolicy | None" = None,
) -> "float | None":
    """Expected I-Precision of a uniformly random recommendation list.

    For a random size-K subset of a user's candidate pool the expected
    precision is |I ∩ pool| / |pool| independent of K; averaged over users
    with test contacts and a non-empty pool, it is the floor any informative
    ranker must beat.
    """
    policy = policy or CandidatePolicy()
    values: list[float] = []
    for u, act in activity.items():
        if not act.contacted:
            continue
        pool = policy.candidates_for(graph, u)
        if pool:
            values.append(len(act.contacted & set(pool)) / len(pool))
    return _mean(values)


# -- attribute distributions and Bhattacharyya diagnostics -------------------

def attribute_distribution(
    profiles: Iterable,
    attribute: str,
    schema: AttributeSchema,
    bins: "Binning | None" = None,
    weights: "Mapping[UserId, float] | None" = None,
    support: "Sequence | None" = None,
) -> dict:
    """Normalized histogram of one attribute over a user population.

    Numeric attributes are bucketed with ``bins``; nominal ones use their
    tokens. ``weights`` reweights users (e.g. one count per message
    received); missing-attribute users contribute nothing. ``support`` pins
    the key set (zeros included) so two distributions can be compared.
    """
    if isinstance(profiles, Mapping):
        profiles = profiles.values()
    if attribute not in schema.kinds:
        raise ValueError(f"attribute {attribute!r} is unknown or missing for every user")
    bins = bins or Binning.default()
    numeric = schema.is_numeric(attribute)
    mass: dict = {} if support is None else {key: 0.0 for key in support}
    total = 0.0
    for p in profiles:
        if attribute not in p.attributes:
            continue
        w = 1.0 if weights is None else float(weights.get(p.user_id, 0.0))
        if w == 0.0:
            continue
        value = p.attributes[attribute]
        key = bins.index(attribute, float(value)) if numeric else value
        if support is not None and key not in mass:
            raise ValueError(f"value {value!r} falls outside the fixed support")
        mass[key] = mass.get(key, 0.0) + w
        total += w
    if total == 0.0:
        raise ValueError(f"attribute {attribute!r} has no observations (all missing or zero weight)")
    return {key: mass[key] / total for key in sorted(mass)}


def bhattacharyya_distance(p: Mapping, q: Mapping) -> float:
    """-ln of the Bhattacharyya coefficient between two aligned distributions.

    Both must be over the same key set and each sum to 1 (within 1e-9).
    Disjoint supports give +infinity.
    """
    if set(p) != set(q):
        raise ValueError("distributions are over different bins")
    for name, dist in (("p", p), ("q", q)):
        total = sum(dist.values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"distribution {name} sums to {total}, not 1")
    coefficient = sum(math.sqrt(p[k] * q[k]) for k in sorted(p))
    if coefficient <= 0.0:
        return math.inf
    return max(0.0, -math.log(coefficient))


# -- end-to-end evaluation runs ----------------------------------------------

@dataclass
class ReportRow:
    config: str
    gender: str
    k: int
    n_service: int
    metrics: MetricSummary
    mean_position: "float | None"
    n_positions: int


@dataclass
class EvalReport:
    spec: SplitSpec
    ks: tuple[int, ...]
    rows: list[ReportRow]
    n_service_users: int
    n_train_events: int
    n_test_events: int


def run_evaluation(
    graph: InteractionGraph,
    split: SplitSpec,
    configs: Sequence[AlgorithmConfig],
    ks: Sequence[int] = DEFAULT_K_GRID,
    *,
    schema: "AttributeSchema | None" = None,
    bins: "Binning | None" = None,
    policy: "CandidatePolicy | None" = None,
    both_endpoints_service: bool = False,
    threads: int = 1,
) -> EvalReport:
    """Full protocol: split, select service users, recommend, measure.

    Each config is scored once at max(ks); smaller K values reuse prefixes
    of the same ranking, which also guarantees the recall-vs-K monotonicity
    the metrics promise.
    """
    ks = tuple(sorted(set(int(k) for k in ks)))
    if not ks or ks[0] < 1:
        raise ValueError("K values must be >= 1")
    train_graph, test_events = split_train_test(graph, split)
    service = select_service_users(train_graph, split)
    if not service:
        raise ValueError("no service user meets the activity threshold")
    activity = build_test_activity(
        test_events, service, both_endpoints_service=both_endpoints_service
    )
    schema = schema if schema is not None else build_schema(graph.users)
    bins = bins or Binning.default()
    policy = policy or CandidatePolicy()
    scorer = Scorer(train_graph, schema, bins)
    by_gender: dict[Gender, list[UserId]] = {
        g: sorted(u for u in service if graph.users[u].gender is g) for g in Gender
    }

    rows: list[ReportRow] = []
    k_max = ks[-1]
    for config in configs:
        lists = recommend_batch(
            config, sorted(service), k_max, train_graph, schema, bins,
            policy=policy, threads=threads, scorer=scorer,
        )
        for gender in Gender:
            users = by_gender[gender]
            for k in ks:
                truncated = {u: lists[u].truncated(k) for u in users}
                summary = metrics_at_k(
                    {u: rl.candidate_ids() for u, rl in truncated.items()}, activity
                )
                mean_pos, n_pos = relevant_positions(truncated, activity)
                rows.append(ReportRow(
                    config=config.name,
                    gender=gender.value,
                    k=k,
                    n_service=len(users),
                    metrics=summary,
                    mean_position=mean_pos,
                    n_positions=n_pos,
                ))
    return EvalReport(
        spec=split,
        ks=ks,
        rows=rows,
        n_service_users=len(service),
        n_train_events=len(train_graph.events),
        n_test_events=len(test_events),
    )


REPORT_COLUMNS = (
    "config", "gender", "k", "n_service",
    "i_precision", "i_recall", "r_precision", "r_recall",
    "n_i_precision", "n_i_recall", "n_r_precision", "n_r_recall",
    "mean_relevant_position", "n_relevant_positions",
)


def _fmt(value: "float | int | str | None") -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def report_to_rows(report: EvalReport) -> list[list[str]]:
    """Flatten a report into delimited-text rows (header first)."""
    out = [list(REPORT_COLUMNS)]
    for r in report.rows:
        m = r.metrics
        out.append([
            r.config, r.gender, str(r.k), str(r.n_service),
            _fmt(m.i_precision), _fmt(m.i_recall), _fmt(m.r_precision), _fmt(m.r_recall),
            str(m.n_i_precision), str(m.n_i_recall), str(m.n_r_precision), str(m.n_r_recall),
            _fmt(r.mean_position), str(r.n_positions),
        ])
    return out


def format_report(report: EvalReport) -> str:
    """Human-readable summary, stable across runs."""
    lines = [
        f"service users: {report.n_service_users}  "
        f"train events: {report.n_train_events}  test events: {report.n_test_events}",
        f"training window: {report.spec.training_window}s  "
        f"min activity: {report.spec.min_activity}  K grid: {list(report.ks)}",
    ]
    for r in report.rows:
        m = r.metrics
        lines.append(
            f"{r.config} gender={r.gender} K={r.k}: "
            f"I-P={_fmt(m.i_precision) or 'n/a'} I-R={_fmt(m.i_recall) or 'n/a'} "
            f"R-P={_fmt(m.r_precision) or 'n/a'} R-R={_fmt(m.r_recall) or 'n/a'} "
            f"pos={_fmt(r.mean_position) or 'n/a'} "
            f"(users: {r.n_service}, rel: {r.n_positions})"
        )
    return "\n".join(lines) + "\n"
