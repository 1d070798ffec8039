"""Domain model: user profiles, message events, and the bipartite interaction graph.

The interaction graph is built once from profile and message records and is
immutable afterwards; every derived index (who contacted whom, who replied)
is computed at construction time. Message semantics follow the
first-contact/first-reply convention: for an ordered pair of users there is
at most one initial contact, and the first counter-direction message after
it is the reply. Later messages between the same pair carry no additional
edge semantics.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Iterable, Mapping

log = logging.getLogger(__name__)

UserId = int

#: column names with fixed meaning in profile / message files
PROFILE_RESERVED = ("id", "gender", "registered_at")
MESSAGE_COLUMNS = ("sender", "receiver", "sent_at")


class IngestError(ValueError):
    """Malformed or inconsistent input records."""


class Gender(Enum):
    MALE = "M"
    FEMALE = "F"

    @classmethod
    def parse(cls, token: str) -> "Gender":
        try:
            return cls(token.strip().upper())
        except ValueError:
            raise IngestError(f"unknown gender token {token!r} (expected M or F)") from None

    @property
    def opposite(self) -> "Gender":
        return Gender.FEMALE if self is Gender.MALE else Gender.MALE


def parse_timestamp(token: str) -> int:
    """Parse epoch seconds or an ISO-8601 datetime into integer epoch seconds.

    Naive ISO timestamps are interpreted as UTC.
    """
    token = token.strip()
    try:
        return int(token)
    except ValueError:
        pass
    try:
        dt = datetime.fromisoformat(token.replace("Z", "+00:00"))
    except ValueError:
        raise IngestError(f"unparseable timestamp {token!r}") from None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


@dataclass
class UserProfile:
    """A user with gender, registration time and a sparse attribute map.

    ``attributes`` holds only *known* values; a missing attribute is simply
    absent. Numeric attributes are stored as float, nominal ones as str.
    """

    user_id: UserId
    gender: Gender
    registered_at: int
    attributes: dict[str, "str | float"] = field(default_factory=dict)

    @property
    def known_attributes(self) -> frozenset[str]:
        return frozenset(self.attributes)


@dataclass(frozen=True)
class MessageEvent:
    sender: UserId
    receiver: UserId
    sent_at: int


def ingest_profiles(
    records: Iterable[Mapping[str, str]],
    numeric_attributes: Iterable[str] = (),
    *,
    source: str = "<records>",
) -> dict[UserId, UserProfile]:
    """Parse profile records into a ``user_id -> UserProfile`` map.

    Attribute columns are every key except the reserved ``id``, ``gender``
    and ``registered_at``. Empty cells are missing. A value in a numeric
    column that does not parse as a number is treated as missing and logged
    as a warning rather than rejected.

    Raises IngestError on duplicate ids, unknown gender tokens or
    unparseable required fields.
    """
    numeric = set(numeric_attributes)
    profiles: dict[UserId, UserProfile] = {}
    for i, rec in enumerate(records, start=1):
        where = f"{source} record {i}"
        try:
            uid = int(str(rec["id"]).strip())
        except (KeyError, ValueError):
            raise IngestError(f"{where}: missing or non-integer id") from None
        if uid in profiles:
            raise IngestError(f"{where}: duplicate user id {uid}")
        try:
            gender = Gender.parse(str(rec["gender"]))
        except KeyError:
            raise IngestError(f"{where}: missing gender") from None
        except IngestError as exc:
            raise IngestError(f"{where}: {exc}") from None
        try:
            registered = parse_timestamp(str(rec["registered_at"]))
        except KeyError:
            raise IngestError(f"{where}: missing registered_at") from None
        except IngestError as exc:
            raise IngestError(f"{where}: {exc}") from None

        attrs: dict[str, str | float] = {}
        for name, raw in rec.items():
            if name in PROFILE_RESERVED or raw is None:
                continue
            value = str(raw).strip()
            if not value:
                continue
            if name in numeric:
                try:
                    attrs[name] = float(value)
                except ValueError:
                    log.warning(
                        "%s: attribute %r value %r is not numeric; treated as missing",
                        where, name, value,
                    )
            else:
                attrs[name] = value
        profiles[uid] = UserProfile(uid, gender, registered, attrs)
    return profiles


def derive_contact_pairs(
    events: Iterable[MessageEvent],
) -> tuple[set[tuple[UserId, UserId]], set[tuple[UserId, UserId]]]:
    """Derive (initial_contacts, replies) from time-ordered events.

    ``(x, y)`` is an initial contact iff x's first message to y precedes any
    message from y to x. ``(x, y)`` is in replies iff additionally y later
    messaged x. Messages beyond the first in each direction are ignored.
    """
    contacts: set[tuple[UserId, UserId]] = set()
    replies: set[tuple[UserId, UserId]] = set()
    for ev in events:
        back = (ev.receiver, ev.sender)
        if back in contacts:
            replies.add(back)
        elif (ev.sender, ev.receiver) not in contacts:
            contacts.add((ev.sender, ev.receiver))
    return contacts, replies


class InteractionGraph:
    """Immutable bipartite message graph with derived contact structure.

    Attributes
    ----------
    users : dict mapping user id to UserProfile
    events : list of MessageEvent, sorted by timestamp (stable for ties)
    sent_to : per user, the set of users they made an initial contact to
    received_from : per user, the set of users who made an initial contact to them
    initial_contacts : set of ordered (sender, receiver) pairs
    replies : subset of initial_contacts whose receiver replied
    """

    def __init__(self, users: dict[UserId, UserProfile], events: Iterable[MessageEvent]):
        self.users = users
        self.events = sorted(events, key=lambda e: e.sent_at)
        self.initial_contacts, self.replies = derive_contact_pairs(self.events)
        self.sent_to: dict[UserId, set[UserId]] = {u: set() for u in users}
        self.received_from: dict[UserId, set[UserId]] = {u: set() for u in users}
        for x, y in self.initial_contacts:
            self.sent_to[x].add(y)
            self.received_from[y].add(x)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, InteractionGraph):
            return NotImplemented
        return self.users == other.users and self.events == other.events

    def __repr__(self) -> str:
        return (
            f"InteractionGraph({len(self.users)} users, {len(self.events)} events, "
            f"{len(self.initial_contacts)} contacts, {len(self.replies)} replies)"
        )

    def users_of_gender(self, gender: Gender) -> list[UserId]:
        """Ids of all users of one gender, ascending."""
        return sorted(u for u, p in self.users.items() if p.gender is gender)

    def received_message_counts(self) -> dict[UserId, int]:
        """Raw count of message events received per user (repeats included)."""
        counts = {u: 0 for u in self.users}
        for ev in self.events:
            counts[ev.receiver] += 1
        return counts


def derive_replies(graph: InteractionGraph) -> set[tuple[UserId, UserId]]:
    """Reply pairs of a graph: (x, y) means y answered x's initial contact."""
    return set(graph.replies)


def ingest_messages(
    records: Iterable[Mapping[str, str]],
    profiles: dict[UserId, UserProfile],
    *,
    source: str = "<records>",
) -> InteractionGraph:
    """Parse message records against known profiles and build the graph.

    Raises IngestError for unknown user ids and for sender/receiver pairs of
    the same gender (the network is bipartite by construction).
    """
    events: list[MessageEvent] = []
    for i, rec in enumerate(records, start=1):
        where = f"{source} record {i}"
        try:
            sender = int(str(rec["sender"]).strip())
            receiver = int(str(rec["receiver"]).strip())
        except (KeyError, ValueError):
            raise IngestError(f"{where}: missing or non-integer sender/receiver") from None
        for uid in (sender, receiver):
            if uid not in profiles:
                raise IngestError(f"{where}: unknown user id {uid}")
        if profiles[sender].gender is profiles[receiver].gender:
            raise IngestError(
                f"{where}: same-gender message {sender}->{receiver} violates bipartiteness"
            )
        try:
            sent_at = parse_timestamp(str(rec["sent_at"]))
        except KeyError:
            raise IngestError(f"{where}: missing sent_at") from None
        except IngestError as exc:
            raise IngestError(f"{where}: {exc}") from None
        events.append(MessageEvent(sender, receiver, sent_at))
    return InteractionGraph(profiles, events)


# -- snapshot round-trip ----------------------------------------------------

def write_snapshot(graph: InteractionGraph, path) -> None:
    """Dump a graph to a line-oriented text file (users then events)."""
    with open(path, "w", encoding="utf-8") as fh:
        for uid in sorted(graph.users):
            p = graph.users[uid]
            attrs = json.dumps(p.attributes, sort_keys=True, separators=(",", ":"))
            fh.write(f"U\t{uid}\t{p.gender.value}\t{p.registered_at}\t{attrs}\n")
        for ev in graph.events:
            fh.write(f"E\t{ev.sender}\t{ev.receiver}\t{ev.sent_at}\n")


def read_snapshot(path) -> InteractionGraph:
    """Rebuild a graph from a snapshot file written by ``write_snapshot``."""
    users: dict[UserId, UserProfile] = {}
    events: list[MessageEvent] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if parts[0] == "U" and len(parts) == 5:
                uid = int(parts[1])
                if uid in users:
                    raise IngestError(f"{path} line {lineno}: duplicate user id {uid}")
                attrs = json.loads(parts[4])
                users[uid] = UserProfile(uid, Gender.parse(parts[2]), int(parts[3]), attrs)
            elif parts[0] == "E" and len(parts) == 4:
                events.append(MessageEvent(int(parts[1]), int(parts[2]), int(parts[3])))
            else:
                raise IngestError(f"{path} line {lineno}: malformed snapshot line")
    return InteractionGraph(users, events)
