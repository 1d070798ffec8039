"""Acceptance suite: one test per release criterion.

Each test pins the tolerances it must meet and prints a one-line PASS
summary with the measured values (visible under ``pytest -v -s`` or in the
captured output of a failing run).
"""

import math
import time

import numpy as np

from reciprec.cli import EXIT_OK, main
from reciprec.engine import (
    CandidatePolicy,
    PRESETS,
    Scorer,
    recommend_batch,
    score_matrix,
)
from reciprec.evaluation import (
    SplitSpec,
    bhattacharyya_distance,
    build_test_activity,
    expected_random_precision,
    metrics_at_k,
    run_evaluation,
    select_service_users,
    split_train_test,
)
from reciprec.model import Gender, UserProfile
from reciprec.similarity import (
    Binning,
    attractiveness_similarity,
    build_schema,
    content_similarity_a,
    content_similarity_b,
    interest_similarity,
)
from reciprec.synthgen import GenConfig, generate_dataset, write_dataset

from .conftest import demo_graph, random_graph
from .oracle import Oracle

CF_PRESETS = ("CF1", "CF2", "CF3", "CF4")
SYMMETRIC_PRESETS = ("CB1", "CB2", "CF1", "CF2")
K_GRID = (1, 5, 10, 20, 50, 100)


def test_criterion_1_worked_similarity_values():
    """Interest(M1,M2) = 1/3 and attractiveness(F1,F2) = 2/3, in under 1s."""
    start = time.perf_counter()
    graph = demo_graph()
    interest = interest_similarity(1, 2, graph)
    attract = attractiveness_similarity(101, 102, graph)
    elapsed = time.perf_counter() - start
    assert interest == 1 / 3
    assert attract == 2 / 3
    assert elapsed < 1.0
    print(f"criterion 1 PASS: interest=1/3 attract=2/3 in {elapsed * 1e3:.1f} ms")


def test_criterion_2_content_similarity_boundary():
    """Ages 24 vs 25: bucketed similarity 0, continuous similarity 48/49."""
    population = {
        1: UserProfile(1, Gender.MALE, 0, {"age": 24.0}),
        2: UserProfile(2, Gender.FEMALE, 0, {"age": 25.0}),
        3: UserProfile(3, Gender.MALE, 0, {"age": 20.0}),
        4: UserProfile(4, Gender.FEMALE, 0, {"age": 69.0}),
    }
    schema = build_schema(population)
    assert schema.normalizers["age"] == 49.0
    bins = Binning.default()  # age buckets of width 5 from 20
    a_value = content_similarity_a(population[1], population[2], schema, bins)
    b_value = content_similarity_b(population[1], population[2], schema)
    assert a_value == 0.0
    assert abs(b_value - 48 / 49) <= 1e-12
    print(f"criterion 2 PASS: bucketed=0 continuous={b_value!r} (48/49)")


def test_criterion_3_oracle_equivalence():
    """100 random graphs x 6 presets: scores within 1e-12, lists identical."""
    start = time.perf_counter()
    n_scores = 0
    max_dev = 0.0
    include_all = CandidatePolicy(exclude_contacted=False)
    for seed in range(100):
        graph = random_graph(seed, max_side=15, max_events=120)
        schema = build_schema(graph.users)
        oracle = Oracle(graph.users, graph.events)
        scorer = Scorer(graph, schema)
        users = sorted(graph.users)
        for preset in PRESETS.values():
            matrix = score_matrix(preset, users, graph, schema,
                                  policy=include_all, scorer=scorer)
            for (x, y), got in matrix.items():
                want = oracle.reciprocal(preset.name, x, y)
                max_dev = max(max_dev, abs(got - want))
                n_scores += 1
            lists = recommend_batch(preset, users, 5, graph, schema, scorer=scorer)
            for x in users:
                assert lists[x].candidate_ids() == oracle.top_k(preset.name, x, 5), (
                    seed, preset.name, x
                )
    elapsed = time.perf_counter() - start
    assert max_dev <= 1e-12
    assert elapsed < 60.0
    print(
        f"criterion 3 PASS: {n_scores} scores across 100 graphs x 6 presets, "
        f"max deviation {max_dev:.2e}, lists identical, {elapsed:.1f}s"
    )


def test_criterion_4_algorithm_contract_properties():
    """Zero-gate, harmonic bounds, preset symmetry and the CF3/CF4 mirror."""
    n_pairs = 0
    for seed in range(60):
        graph = random_graph(seed + 10_000, max_side=40, max_events=240)
        schema = build_schema(graph.users)
        scorer = Scorer(graph, schema)
        males = graph.users_of_gender(Gender.MALE)
        females = graph.users_of_gender(Gender.FEMALE)
        if not males or not females:
            continue
        blocks = {}
        for name in PRESETS:
            _, score_m, s1_m, s2_m = scorer.score_block(PRESETS[name], males)
            _, score_f, _s1f, _s2f = scorer.score_block(PRESETS[name], females)
            blocks[name] = (score_m, s1_m, s2_m, score_f)
            n_pairs += score_m.size
        for name, (score, s1, s2, _) in blocks.items():
            gated = (s1 > 0) & (s2 > 0)
            assert np.all(score[~gated] == 0.0)
            if gated.any():
                lo = np.minimum(s1[gated], s2[gated])
                assert np.all(score[gated] >= lo - 1e-12)
                assert np.all(score[gated] <= 2 * lo + 1e-12)
        for name in SYMMETRIC_PRESETS:
            score_m, _, _, score_f = blocks[name]
            assert np.max(np.abs(score_m - score_f.T), initial=0.0) <= 1e-12
        assert np.max(
            np.abs(blocks["CF3"][0] - blocks["CF4"][3].T), initial=0.0
        ) <= 1e-12
        assert np.max(
            np.abs(blocks["CF4"][0] - blocks["CF3"][3].T), initial=0.0
        ) <= 1e-12
    assert n_pairs >= 100_000
    print(f"criterion 4 PASS: zero violations over {n_pairs} scored pairs")


def test_criterion_5_metric_properties():
    """Metrics in range, recalls monotone in K, |R∩T| <= |I∩T| everywhere."""
    ds = generate_dataset(GenConfig(seed=77, n_male=600, n_female=260))
    graph = ds.graph()
    split = SplitSpec()
    configs = [PRESETS[name] for name in ("CF1", "CF4", "CB2")]
    report = run_evaluation(graph, split, configs, ks=K_GRID)
    for row in report.rows:
        m = row.metrics
        for value in (m.i_precision, m.i_recall, m.r_precision, m.r_recall):
            if value is not None:
                assert 0.0 <= value <= 1.0
        if row.mean_position is not None:
            assert 0.0 < row.mean_position <= 1.0
    by_key = {}
    for row in report.rows:
        by_key.setdefault((row.config, row.gender), []).append(row)
    for rows in by_key.values():
        rows.sort(key=lambda r: r.k)
        for metric in ("i_recall", "r_recall"):
            values = [getattr(r.metrics, metric) for r in rows]
            values = [v for v in values if v is not None]
            assert all(a <= b + 1e-12 for a, b in zip(values, values[1:]))
    # per-user set containment, recomputed from the raw lists
    train, test_events = split_train_test(graph, split)
    service = select_service_users(train, split)
    activity = build_test_activity(test_events, service)
    schema = build_schema(graph.users)
    lists = recommend_batch(PRESETS["CF1"], sorted(service), 100, train, schema)
    for u, rl in lists.items():
        t = set(rl.candidate_ids())
        act = activity[u]
        assert act.replied <= act.contacted
        assert len(act.replied & t) <= len(act.contacted & t)
    print(f"criterion 5 PASS: {len(report.rows)} report rows, recalls monotone over K={list(K_GRID)}")


def test_criterion_6_planted_structure_recovery():
    """CF1-CF4 beat the random baseline 3x on the strong-signal synthetic data."""
    start = time.perf_counter()
    precisions = {name: [] for name in CF_PRESETS}
    baselines = []
    for seed in range(10):
        ds = generate_dataset(GenConfig(seed=seed))  # 1000 males, 430 females
        graph = ds.graph()
        train, test_events = split_train_test(graph, SplitSpec())
        service = select_service_users(train, SplitSpec())
        activity = build_test_activity(test_events, service)
        baselines.append(expected_random_precision(train, activity))
        schema = build_schema(graph.users)
        scorer = Scorer(train, schema)
        for name in CF_PRESETS:
            lists = recommend_batch(PRESETS[name], sorted(service), 10, train,
                                    schema, scorer=scorer)
            summary = metrics_at_k(
                {u: rl.candidate_ids() for u, rl in lists.items()}, activity
            )
            precisions[name].append(summary.i_precision)
    elapsed = time.perf_counter() - start
    baseline = float(np.mean(baselines))
    ratios = {}
    for name in CF_PRESETS:
        mean_precision = float(np.mean(precisions[name]))
        ratios[name] = mean_precision / baseline
        assert mean_precision >= 3.0 * baseline, (name, mean_precision, baseline)
    assert elapsed < 120.0
    pretty = " ".join(f"{n}={ratios[n]:.1f}x" for n in CF_PRESETS)
    print(f"criterion 6 PASS: {pretty} over random ({elapsed:.1f}s, 10 seeds)")


def test_criterion_7_bhattacharyya():
    """Identity at 0 within 1e-12, disjoint at +inf, symmetric within 1e-12."""
    rng = np.random.default_rng(5)
    p = {"a": 0.25, "b": 0.5, "c": 0.25}
    assert bhattacharyya_distance(p, dict(p)) <= 1e-12
    assert bhattacharyya_distance({"a": 1.0, "b": 0.0}, {"a": 0.0, "b": 1.0}) == math.inf
    worst = 0.0
    for _ in range(300):
        n = int(rng.integers(2, 12))
        raw_p = rng.random(n) + 1e-9
        raw_q = rng.random(n) + 1e-9
        dp = {i: v / raw_p.sum() for i, v in enumerate(raw_p)}
        dq = {i: v / raw_q.sum() for i, v in enumerate(raw_q)}
        d1 = bhattacharyya_distance(dp, dq)
        d2 = bhattacharyya_distance(dq, dp)
        worst = max(worst, abs(d1 - d2))
        assert d1 >= 0.0
    assert worst <= 1e-12
    print(f"criterion 7 PASS: identity 0, disjoint inf, max asymmetry {worst:.2e}")


def test_criterion_8_determinism_and_performance(tmp_path):
    """cmd_evaluate on 10k users / ~100k messages: <60s, byte-identical output."""
    data_dir = tmp_path / "data"
    ds = generate_dataset(GenConfig.with_total_users(10_000, seed=2024))
    assert 90_000 <= len(ds.events) <= 112_000
    profiles_path, messages_path, _ = write_dataset(ds, data_dir)

    runs = []
    elapsed = {}
    for label, threads in (("run1", "1"), ("run2", "4")):
        out_dir = tmp_path / label
        start = time.perf_counter()
        rc = main([
            "--threads", threads, "--out-dir", str(out_dir), "evaluate",
            "--profiles", str(profiles_path), "--messages", str(messages_path),
            "-K", ",".join(str(k) for k in K_GRID),
        ])
        elapsed[label] = time.perf_counter() - start
        assert rc == EXIT_OK
        runs.append((
            (out_dir / "report.csv").read_bytes(),
            (out_dir / "summary.txt").read_bytes(),
        ))
    assert runs[0] == runs[1], "reports differ across runs/thread counts"
    assert elapsed["run1"] < 60.0, f"evaluation took {elapsed['run1']:.1f}s"
    print(
        f"criterion 8 PASS: {len(ds.events)} messages, all six presets, "
        f"{elapsed['run1']:.1f}s (threads=1) vs {elapsed['run2']:.1f}s (threads=4), "
        "byte-identical reports"
    )
