import random

import pytest

from reciprec.model import Gender, InteractionGraph, MessageEvent, UserProfile

CITIES = ("north", "south", "east", "west")
LEVELS = ("low", "mid", "high")


def demo_users() -> dict[int, UserProfile]:
    """Three males (1-3) and three females (101-103) with mixed attributes."""
    users = {}
    for i, age in zip((1, 2, 3), (24.0, 31.0, 27.0)):
        users[i] = UserProfile(i, Gender.MALE, 0, {"age": age, "city": CITIES[i % 2]})
    for i, age in zip((101, 102, 103), (25.0, 22.0, 29.0)):
        users[i] = UserProfile(i, Gender.FEMALE, 0, {"age": age, "city": CITIES[i % 3]})
    return users


def demo_graph() -> InteractionGraph:
    """The worked-example topology: M1->{F1,F2}, M2->{F2,F3}, M3->{F1,F2}."""
    pairs = [(1, 101), (1, 102), (2, 102), (2, 103), (3, 101), (3, 102)]
    events = [MessageEvent(s, r, 1000 + t) for t, (s, r) in enumerate(pairs)]
    return InteractionGraph(demo_users(), events)


@pytest.fixture
def small_graph() -> InteractionGraph:
    return demo_graph()


def random_dataset(seed: int, max_side: int = 15, max_events: int = 120):
    """A random bipartite dataset with sparse attributes and message noise.

    Returns (profiles, events) with events in timestamp order; both genders
    send, repeat messages and mutual contacts occur, and attributes are
    missing at random so content similarities hit their edge cases.
    """
    rng = random.Random(seed)
    n_m = rng.randint(2, max_side)
    n_f = rng.randint(2, max_side)
    profiles: dict[int, UserProfile] = {}
    for uid in range(1, n_m + n_f + 1):
        gender = Gender.MALE if uid <= n_m else Gender.FEMALE
        attrs = {}
        if rng.random() < 0.85:
            attrs["age"] = float(rng.randint(18, 60))
        if rng.random() < 0.7:
            attrs["height"] = float(rng.randint(150, 198))
        if rng.random() < 0.8:
            attrs["city"] = rng.choice(CITIES)
        if rng.random() < 0.6:
            attrs["education"] = rng.choice(LEVELS)
        profiles[uid] = UserProfile(uid, gender, 0, attrs)
    males = list(range(1, n_m + 1))
    females = list(range(n_m + 1, n_m + n_f + 1))
    events = []
    for _ in range(rng.randint(0, max_events)):
        if rng.random() < 0.7:
            s, r = rng.choice(males), rng.choice(females)
        else:
            s, r = rng.choice(females), rng.choice(males)
        events.append(MessageEvent(s, r, rng.randint(0, 5000)))
    events.sort(key=lambda e: e.sent_at)
    return profiles, events


def random_graph(seed: int, max_side: int = 15, max_events: int = 120) -> InteractionGraph:
    profiles, events = random_dataset(seed, max_side, max_events)
    return InteractionGraph(profiles, events)
