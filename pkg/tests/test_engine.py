import pytest

from reciprec.engine import (
    CandidatePolicy,
    NeighborKind,
    PRESETS,
    Scorer,
    SimilarityKind,
    compatible_score,
    config_from_spec,
    get_preset,
    recommend_batch,
    recommend_top_k,
    reciprocal_score,
    reciprocal_score_parts,
    score_matrix,
)
from reciprec.model import Gender, InteractionGraph, MessageEvent, UserProfile
from reciprec.similarity import build_schema

from .conftest import random_graph
from .oracle import Oracle

SYMMETRIC_PRESETS = ("CB1", "CB2", "CF1", "CF2")


def bare(uid, gender):
    return UserProfile(uid, gender, 0, {})


def graph_from_pairs(users, pairs):
    events = [MessageEvent(s, r, 10 + t) for t, (s, r) in enumerate(pairs)]
    return InteractionGraph(users, events)


def harmonic_fixture():
    """Hand-built graph where CF1 gives s(x,y)=0.2, s(y,x)=0.6 for x=201, y=8.

    Receiver sets are sized so the two attractiveness means come out to
    exactly 1/5 and 3/5.
    """
    users = {}
    for uid in (1, 2, 3, 4, 8, 9):
        users[uid] = bare(uid, Gender.MALE)
    for uid in (201, 202, 203, 204, 205, 206):
        users[uid] = bare(uid, Gender.FEMALE)
    pairs = [
        (1, 201), (2, 201), (3, 201), (4, 201),   # Re(201) = {1,2,3,4}
        (1, 202), (8, 202),                        # Re(202) = {1,8}; Se(8) = {202}
        (201, 9),                                  # Se(201) = {9}
        (203, 9), (204, 9), (205, 9),              # Re(9) = {201,203,204,205}
        (203, 8), (204, 8), (205, 8), (206, 8),    # Re(8) = {203,204,205,206}
    ]
    return graph_from_pairs(users, pairs)


class TestPresets:
    def test_quadruples(self):
        n, s = NeighborKind, SimilarityKind
        expected = {
            "CB1": (n.SENT_TO, n.SENT_TO, s.CONTENT_A, s.CONTENT_A),
            "CB2": (n.SENT_TO, n.SENT_TO, s.CONTENT_B, s.CONTENT_B),
            "CF1": (n.SENT_TO, n.SENT_TO, s.ATTRACTIVENESS, s.ATTRACTIVENESS),
            "CF2": (n.RECEIVED_FROM, n.RECEIVED_FROM, s.INTEREST, s.INTEREST),
            "CF3": (n.SENT_TO, n.RECEIVED_FROM, s.ATTRACTIVENESS, s.INTEREST),
            "CF4": (n.RECEIVED_FROM, n.SENT_TO, s.INTEREST, s.ATTRACTIVENESS),
        }
        assert set(PRESETS) == set(expected)
        for name, quad in expected.items():
            cfg = PRESETS[name]
            assert (cfg.neighbor1, cfg.neighbor2, cfg.similarity1, cfg.similarity2) == quad

    def test_lookup(self):
        assert get_preset("cf3") is PRESETS["CF3"]
        with pytest.raises(ValueError, match="unknown preset"):
            get_preset("CF9")

    def test_explicit_quadruple(self):
        cfg = config_from_spec({
            "name": "mine", "neighbor1": "sent_to", "neighbor2": "received_from",
            "similarity1": "interest", "similarity2": "content_b",
        })
        assert cfg.neighbor1 is NeighborKind.SENT_TO
        assert cfg.similarity2 is SimilarityKind.CONTENT_B


class TestCompatibleScore:
    def test_mean_of_two_attractiveness_values(self):
        graph = harmonic_fixture()
        schema = build_schema(graph.users)
        # attractiveness(201, 202) = 1/5 and Se(8) = {202}
        assert compatible_score(201, 8, NeighborKind.SENT_TO,
                                SimilarityKind.ATTRACTIVENESS, graph, schema) == 0.2
        # two-neighbor mean: add a user whose sole neighbor matches exactly
        users = {
            1: bare(1, Gender.MALE), 2: bare(2, Gender.MALE), 8: bare(8, Gender.MALE),
            201: bare(201, Gender.FEMALE), 202: bare(202, Gender.FEMALE),
        }
        pairs = [(1, 201), (2, 201), (1, 202), (2, 202), (8, 202)]
        graph2 = graph_from_pairs(users, pairs)
        # attractiveness(201, 202): {1,2} vs {1,2,8} -> 2/3; Se(8)={202}
        got = compatible_score(201, 8, NeighborKind.SENT_TO,
                               SimilarityKind.ATTRACTIVENESS, graph2, build_schema(users))
        assert got == pytest.approx(2 / 3, abs=1e-15)

    def test_empty_neighbor_set_scores_zero(self, small_graph):
        schema = build_schema(small_graph.users)
        # females sent nothing, so Se of any female is empty
        assert compatible_score(1, 101, NeighborKind.SENT_TO,
                                SimilarityKind.ATTRACTIVENESS, small_graph, schema) == 0.0

    def test_single_identical_neighbor_scores_one(self):
        users = {
            1: bare(1, Gender.MALE),
            201: bare(201, Gender.FEMALE), 202: bare(202, Gender.FEMALE),
        }
        # Se(202) = {1} and the sole neighbor is x itself with non-empty Re,
        # so the similarity being averaged is an exact self-match
        pairs = [(201, 1), (202, 1)]
        graph = graph_from_pairs(users, pairs)
        got = compatible_score(1, 202, NeighborKind.SENT_TO,
                               SimilarityKind.ATTRACTIVENESS, graph, build_schema(users))
        assert got == 1.0


class TestReciprocalScore:
    def test_harmonic_mean_of_unequal_sides(self):
        graph = harmonic_fixture()
        schema = build_schema(graph.users)
        score, s_xy, s_yx = reciprocal_score_parts(PRESETS["CF1"], 201, 8, graph, schema)
        assert s_xy == 0.2
        assert s_yx == 0.6
        assert abs(score - 0.3) <= 1e-12

    def test_equal_sides(self):
        # every cross-pair shares two attributes with exactly one match, so
        # both compatible scores are exactly 0.5 under the bucketed content
        # preset and the harmonic mean must reproduce 0.5
        users = {
            1: UserProfile(1, Gender.MALE, 0, {"city": "north", "education": "e1"}),
            2: UserProfile(2, Gender.MALE, 0, {"city": "north", "education": "e2"}),
            201: UserProfile(201, Gender.FEMALE, 0, {"city": "north", "education": "e3"}),
            202: UserProfile(202, Gender.FEMALE, 0, {"city": "north", "education": "e4"}),
        }
        pairs = [(1, 201), (202, 2)]
        graph = graph_from_pairs(users, pairs)
        schema = build_schema(users)
        score, s_xy, s_yx = reciprocal_score_parts(PRESETS["CB1"], 1, 202, graph, schema)
        assert s_xy == 0.5 and s_yx == 0.5
        assert score == 0.5

    def test_zero_side_gates_to_zero(self):
        graph = harmonic_fixture()
        schema = build_schema(graph.users)
        # candidate 9 never sent anything: Se(9) empty -> s(x,9) = 0
        score, s_xy, s_yx = reciprocal_score_parts(PRESETS["CF1"], 201, 9, graph, schema)
        assert s_xy == 0.0
        assert score == 0.0
        assert reciprocal_score(PRESETS["CF1"], 201, 9, graph, schema) == 0.0

    def test_same_gender_pair_rejected(self, small_graph):
        schema = build_schema(small_graph.users)
        with pytest.raises(ValueError, match="same gender"):
            reciprocal_score(PRESETS["CF1"], 1, 2, small_graph, schema)


class TestRecommendTopK:
    def test_all_zero_scores_empty_list(self, small_graph):
        schema = build_schema(small_graph.users)
        # no female ever sent a message, so CF1 side one is always zero
        rl = recommend_top_k(PRESETS["CF1"], 1, 3, small_graph, schema)
        assert rl.ranked == []

    def test_tie_breaks_ascending_id(self):
        users = {}
        for uid in (1, 2, 5):
            users[uid] = bare(uid, Gender.MALE)
        for uid in (201, 202, 203, 204):
            users[uid] = bare(uid, Gender.FEMALE)
        # candidates 202 and 203 are structurally identical for service user 5,
        # so their CF1 scores tie exactly (0.4 each); 201 and 204 score 0
        pairs = [
            (202, 1), (203, 1),
            (201, 5), (201, 1),
            (5, 204), (2, 204), (2, 202), (2, 203),
        ]
        graph = graph_from_pairs(users, pairs)
        schema = build_schema(users)
        rl = recommend_top_k(PRESETS["CF1"], 5, 2, graph, schema)
        assert len(rl.ranked) == 2
        assert rl.ranked[0].reciprocal_score == rl.ranked[1].reciprocal_score
        assert rl.ranked[0].reciprocal_score == pytest.approx(0.4, abs=1e-15)
        assert [c.candidate for c in rl.ranked] == [202, 203]

    def test_unknown_service_user(self, small_graph):
        schema = build_schema(small_graph.users)
        with pytest.raises(ValueError, match="unknown service user"):
            recommend_top_k(PRESETS["CF1"], 999, 3, small_graph, schema)

    def test_k_must_be_positive(self, small_graph):
        schema = build_schema(small_graph.users)
        with pytest.raises(ValueError, match="K must be"):
            recommend_batch(PRESETS["CF1"], [1], 0, small_graph, schema)

    def test_matches_oracle_on_random_graphs(self):
        for seed in range(12):
            graph = random_graph(seed + 400)
            schema = build_schema(graph.users)
            oracle = Oracle(graph.users, graph.events)
            scorer = Scorer(graph, schema)
            for preset in PRESETS.values():
                for x in list(graph.users)[:6]:
                    rl = recommend_top_k(preset, x, 5, graph, schema, scorer=scorer)
                    assert rl.candidate_ids() == oracle.top_k(preset.name, x, 5)

    def test_excluded_contacted_respected(self, small_graph):
        schema = build_schema(small_graph.users)
        rl = recommend_top_k(PRESETS["CF4"], 1, 3, small_graph, schema)
        assert set(rl.candidate_ids()).isdisjoint(small_graph.sent_to[1])
        rl_all = recommend_top_k(PRESETS["CF4"], 1, 3, small_graph, schema,
                                 policy=CandidatePolicy(exclude_contacted=False))
        assert set(rl_all.candidate_ids()) & small_graph.sent_to[1]

    def test_pool_policy(self, small_graph):
        schema = build_schema(small_graph.users)
        policy = CandidatePolicy(exclude_contacted=False, pool=frozenset({102}))
        rl = recommend_top_k(PRESETS["CF4"], 1, 3, small_graph, schema, policy=policy)
        assert set(rl.candidate_ids()) <= {102}

    def test_no_opposite_gender_users(self):
        users = {1: bare(1, Gender.MALE), 2: bare(2, Gender.MALE)}
        graph = InteractionGraph(users, [])
        schema = build_schema(users)
        for preset in PRESETS.values():
            rl = recommend_top_k(preset, 1, 5, graph, schema)
            assert rl.ranked == []


class TestScoreMatrix:
    def test_single_pair_equals_pairwise(self, small_graph):
        schema = build_schema(small_graph.users)
        policy = CandidatePolicy(exclude_contacted=False)
        for preset in PRESETS.values():
            sm = score_matrix(preset, [1], small_graph, schema, policy=policy)
            for y in (101, 102, 103):
                direct = reciprocal_score(preset, 1, y, small_graph, schema)
                assert sm[(1, y)] == pytest.approx(direct, abs=1e-12)

    def test_parallel_equals_sequential(self):
        graph = random_graph(777, max_side=12, max_events=100)
        schema = build_schema(graph.users)
        users = sorted(graph.users)
        for preset in (PRESETS["CF3"], PRESETS["CB2"]):
            seq = score_matrix(preset, users, graph, schema, threads=1)
            par = score_matrix(preset, users, graph, schema, threads=4)
            assert seq == par

    def test_empty_service_users_rejected(self, small_graph):
        schema = build_schema(small_graph.users)
        with pytest.raises(ValueError, match="non-empty"):
            score_matrix(PRESETS["CF1"], [], small_graph, schema)


class TestAlgorithmContracts:
    def pairs_of(self, graph):
        males = graph.users_of_gender(Gender.MALE)
        females = graph.users_of_gender(Gender.FEMALE)
        return [(x, y) for x in males for y in females]

    def test_symmetric_presets_are_symmetric(self):
        for seed in range(8):
            graph = random_graph(seed + 900)
            schema = build_schema(graph.users)
            for name in SYMMETRIC_PRESETS:
                for x, y in self.pairs_of(graph)[:40]:
                    a = reciprocal_score(PRESETS[name], x, y, graph, schema)
                    b = reciprocal_score(PRESETS[name], y, x, graph, schema)
                    assert a == pytest.approx(b, abs=1e-12)

    def test_mirror_pair_cf3_cf4(self):
        for seed in range(8):
            graph = random_graph(seed + 950)
            schema = build_schema(graph.users)
            for x, y in self.pairs_of(graph)[:40]:
                a = reciprocal_score(PRESETS["CF3"], x, y, graph, schema)
                b = reciprocal_score(PRESETS["CF4"], y, x, graph, schema)
                assert a == pytest.approx(b, abs=1e-12)

    def test_harmonic_bounds_and_zero_gate(self):
        for seed in range(8):
            graph = random_graph(seed + 150)
            schema = build_schema(graph.users)
            for preset in PRESETS.values():
                for x, y in self.pairs_of(graph)[:30]:
                    score, s1, s2 = reciprocal_score_parts(preset, x, y, graph, schema)
                    if s1 > 0 and s2 > 0:
                        lo, hi = min(s1, s2), 2 * min(s1, s2)
                        assert lo - 1e-12 <= score <= hi + 1e-12
                    else:
                        assert score == 0.0

    def test_untouched_pairs_keep_scores_when_messages_added(self):
        graph = random_graph(123, max_side=10, max_events=60)
        schema = build_schema(graph.users)
        before = {}
        pairs = self.pairs_of(graph)
        for preset in PRESETS.values():
            for x, y in pairs:
                before[(preset.name, x, y)] = reciprocal_score(preset, x, y, graph, schema)
        # two brand-new users exchanging a message touch no existing neighbor set
        users = dict(graph.users)
        nm = max(users) + 1
        nf = max(users) + 2
        users[nm] = bare(nm, Gender.MALE)
        users[nf] = bare(nf, Gender.FEMALE)
        bigger = InteractionGraph(users, graph.events + [MessageEvent(nm, nf, 10 ** 6)])
        schema2 = build_schema(users)
        for preset in PRESETS.values():
            for x, y in pairs:
                assert reciprocal_score(preset, x, y, bigger, schema2) == pytest.approx(
                    before[(preset.name, x, y)], abs=0
                )
