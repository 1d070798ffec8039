"""Walk through scoring on a six-contact toy network.

Three males (1, 2, 3) and three females (101, 102, 103). Arrows are initial
contacts:

    1 -> 101, 102      2 -> 102, 103      3 -> 101, 102

Run with: python demos/walkthrough_small_network.py
"""

from reciprec import (
    Gender,
    InteractionGraph,
    MessageEvent,
    PRESETS,
    ProjectionDirection,
    UserProfile,
    attractiveness_similarity,
    build_projection,
    build_schema,
    interest_similarity,
    reciprocal_score_parts,
    recommend_top_k,
)

# -- build the graph in code (normally this comes from CSV ingestion) --------

users = {}
for uid, age, city in [(1, 24.0, "north"), (2, 31.0, "south"), (3, 27.0, "north")]:
    users[uid] = UserProfile(uid, Gender.MALE, 0, {"age": age, "city": city})
for uid, age, city in [(101, 25.0, "north"), (102, 22.0, "south"), (103, 29.0, "east")]:
    users[uid] = UserProfile(uid, Gender.FEMALE, 0, {"age": age, "city": city})

contacts = [(1, 101), (1, 102), (2, 102), (2, 103), (3, 101), (3, 102)]
events = [MessageEvent(s, r, 1000 + t) for t, (s, r) in enumerate(contacts)]
graph = InteractionGraph(users, events)

print(graph)
print("receivers of user 1:", sorted(graph.sent_to[1]))
print("senders to user 102:", sorted(graph.received_from[102]))

# -- graph similarities -------------------------------------------------------
# Users 1 and 2 contacted three distinct females, one of them shared, so
# their interest similarity is 1/3. Females 101 and 102 share two of their
# three distinct contacters: attractiveness similarity 2/3.

print("\ninterest_similarity(1, 2)        =", interest_similarity(1, 2, graph))
print("attractiveness_similarity(101, 102) =", attractiveness_similarity(101, 102, graph))

# -- the sending projection makes those overlaps explicit ---------------------

net = build_projection(graph, Gender.MALE, ProjectionDirection.SENDING)
print("\nmale sending projection (u, v) -> shared receivers:")
for (u, v), w in sorted(net.edges.items()):
    print(f"  ({u}, {v}) -> {w}")

# -- reciprocal scores under each preset --------------------------------------
# The score of (x, y) is the harmonic mean of two directed compatible
# scores; a zero on either side zeroes the pair. With no female-initiated
# messages in this network, presets that need female activity gate to zero.

schema = build_schema(users)
print("\nreciprocal scores for the pair (1, 103):")
for name in sorted(PRESETS):
    score, s_xy, s_yx = reciprocal_score_parts(PRESETS[name], 1, 103, graph, schema)
    print(f"  {name}: score={score:.6f}  s_xy={s_xy:.6f}  s_yx={s_yx:.6f}")

# -- a ranked list -------------------------------------------------------------
# CF4 ranks candidates for user 1; already-contacted users are excluded by
# the default candidate policy, leaving only 103 with a positive score.

top = recommend_top_k(PRESETS["CF4"], 1, 3, graph, schema)
print("\nCF4 top-3 for user 1:")
for rank, cand in enumerate(top.ranked, start=1):
    print(f"  {rank}. user {cand.candidate} score={cand.reciprocal_score:.6f}")
