"""Network statistics: projections, CCDF tables, attribute separability.

Projects the bipartite contact graph onto each gender, summarizes degree
and edge-weight distributions as CCDF tables, and measures how much the
attribute mix of message receivers differs from the population at large
(Bhattacharyya distance; near zero means the attribute carries little
signal for recommendations).

Run with: python demos/projection_and_stats.py
"""

from reciprec import (
    GenConfig,
    Gender,
    ProjectionDirection,
    attribute_distribution,
    bhattacharyya_distance,
    build_projection,
    build_schema,
    ccdf,
    generate_dataset,
    message_counts,
)

dataset = generate_dataset(GenConfig(seed=4, n_male=700, n_female=300))
graph = dataset.graph()
print(graph)


def show_ccdf(label, table, limit=6):
    print(f"{label}:")
    for value, fraction in table[:limit]:
        print(f"  >= {value:g}: {fraction:.3f}")
    if len(table) > limit:
        print(f"  ... {len(table) - limit} more rows")


# -- message-volume distributions ----------------------------------------------
# Heavy tails: most users send few messages, a few send many. The per-week
# variant conditions on weeks with at least one message.

sent = message_counts(graph, direction="sent", gender=Gender.MALE, window_days=56)
show_ccdf("\nCCDF of messages sent per male (8-week window)", ccdf(sent))
weekly = message_counts(graph, direction="sent", gender=Gender.MALE, per_week=True)
show_ccdf("CCDF of messages per active male-week", ccdf(weekly))

# -- projection networks ---------------------------------------------------------
# Two same-gender users are linked when they contacted (sending) or were
# contacted by (receiving) at least one common user; the weight counts the
# common neighbors. Most projection edges have weight 1.

for direction in ProjectionDirection:
    net = build_projection(graph, Gender.MALE, direction)
    degrees = list(net.degrees().values())
    weights = list(net.edges.values())
    frac_w1 = sum(1 for w in weights if w == 1) / len(weights) if weights else 0.0
    print(f"\nmale {direction.value} projection: {len(net.nodes())} nodes, "
          f"{len(net.edges)} edges, {frac_w1:.1%} of edges have weight 1")
    show_ccdf("degree CCDF", ccdf(degrees), limit=4)
    show_ccdf("weight CCDF", ccdf(weights), limit=4)

# -- attribute separability -------------------------------------------------------
# Compare each attribute's distribution over all users of a gender with the
# message-weighted distribution of receivers. A small Bhattacharyya distance
# means receiving many messages barely shifts the attribute mix, i.e. the
# attribute alone cannot explain who gets contacted.

schema = build_schema(graph.users)
received = graph.received_message_counts()
print("\nBhattacharyya distance, all users vs message receivers:")
for attribute in ("age", "height", "city", "education", "income", "marriage"):
    for gender in Gender:
        users = {u: graph.users[u] for u in graph.users_of_gender(gender)}
        p_all = attribute_distribution(users, attribute, schema)
        p_recv = attribute_distribution(users, attribute, schema,
                                        weights=received, support=list(p_all))
        d = bhattacharyya_distance(p_all, p_recv)
        print(f"  {attribute:<10} {gender.value}: {d:.4f}")
