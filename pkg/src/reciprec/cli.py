"""Command-line entry point.

Subcommands: ingest, recommend, evaluate, project, stats, synth. Data goes
to delimited text files under --out-dir (or stdout for ingest summaries);
diagnostics go to stderr. Outputs are deterministic given inputs, seed and
configuration, regardless of --threads.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import fields
from pathlib import Path

from .engine import (
    CandidatePolicy,
    PRESETS,
    SimilarityKind,
    config_from_spec,
    recommend_batch,
)
from .evaluation import (
    DEFAULT_K_GRID,
    SplitSpec,
    attribute_distribution,
    bhattacharyya_distance,
    format_report,
    report_to_rows,
    run_evaluation,
)
from .model import Gender, IngestError, ingest_messages, ingest_profiles, write_snapshot
from .similarity import (
    Binning,
    ProjectionDirection,
    build_projection,
    build_schema,
    ccdf,
    message_counts,
)
from .synthgen import GenConfig, generate_dataset, write_dataset

log = logging.getLogger("reciprec")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_EMPTY = 3

DEFAULT_NUMERIC_ATTRS = ("age", "height", "weight", "photos")


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INPUT):
        super().__init__(message)
        self.code = code


def _read_csv_records(path: Path, delimiter: str = ","):
    try:
        fh = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise CliError(f"cannot open {path}: {exc}") from None
    with fh:
        reader = csv.DictReader(fh, delimiter=delimiter)
        yield from reader


def _write_csv(path: Path, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerows(rows)


def _load_config(path: "str | None") -> dict:
    if not path:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise CliError(f"cannot open config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise CliError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise CliError(f"config {path} must hold a JSON object")
    return cfg


def _bins_from_config(cfg: dict) -> Binning:
    section = cfg.get("bins", {})
    base = Binning.default()
    if not section:
        return base
    specs = dict(base.specs)
    for attr, spec in section.items():
        specs[attr] = (float(spec.get("width", base.default_width)),
                       float(spec.get("origin", base.default_origin)))
    return Binning(specs=specs)


def _load_graph(args, cfg: dict):
    numeric = args.numeric_attrs.split(",") if args.numeric_attrs else (
        cfg.get("ingest", {}).get("numeric_attributes", list(DEFAULT_NUMERIC_ATTRS))
    )
    try:
        profiles = ingest_profiles(
            _read_csv_records(Path(args.profiles)),
            numeric_attributes=numeric,
            source=str(args.profiles),
        )
        graph = ingest_messages(
            _read_csv_records(Path(args.messages)),
            profiles,
            source=str(args.messages),
        )
    except IngestError as exc:
        raise CliError(str(exc)) from None
    return graph


def _parse_gender(token: str) -> Gender:
    try:
        return Gender.parse(token)
    except IngestError as exc:
        raise CliError(str(exc)) from None


def _parse_direction(token: str) -> ProjectionDirection:
    try:
        return ProjectionDirection(token.lower())
    except ValueError:
        raise CliError(f"unknown direction {token!r} (expected sending or receiving)") from None


def _engine_settings(args, cfg: dict):
    section = cfg.get("engine", {})
    if getattr(args, "preset", None):
        names = [t.strip() for t in args.preset.split(",") if t.strip()]
        configs = [config_from_spec(name) for name in names]
    elif "quad" in section:
        configs = [config_from_spec(section["quad"])]
    elif section.get("presets"):
        configs = [config_from_spec(name) for name in section["presets"]]
    else:
        configs = [PRESETS[name] for name in sorted(PRESETS)]
    if getattr(args, "k", None):
        ks = [int(t) for t in args.k.split(",")]
    else:
        ks = [int(v) for v in section.get("k", list(DEFAULT_K_GRID))]
    policy_token = getattr(args, "policy", None) or section.get("policy", "exclude-contacted")
    try:
        policy = CandidatePolicy.parse(policy_token)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    return configs, ks, policy


def cmd_ingest(args, cfg: dict) -> int:
    graph = _load_graph(args, cfg)
    counts = {g: len(graph.users_of_gender(g)) for g in Gender}
    by_direction = {"m2f": [0, 0], "f2m": [0, 0]}
    for x, y in graph.initial_contacts:
        key = "m2f" if graph.users[x].gender is Gender.MALE else "f2m"
        by_direction[key][0] += 1
    for x, y in graph.replies:
        key = "m2f" if graph.users[x].gender is Gender.MALE else "f2m"
        by_direction[key][1] += 1

    print(f"users: {len(graph.users)} ({counts[Gender.MALE]} male, {counts[Gender.FEMALE]} female)")
    print(f"messages: {len(graph.events)}")
    print(f"initial contacts: {len(graph.initial_contacts)}")
    for key, label in (("m2f", "male->female"), ("f2m", "female->male")):
        contacts, replies = by_direction[key]
        rate = f"{replies / contacts:.4f}" if contacts else "n/a"
        print(f"{label}: initial {contacts}, reciprocal {replies} (reply rate {rate})")
    if args.snapshot:
        write_snapshot(graph, args.snapshot)
        log.info("snapshot written to %s", args.snapshot)
    return EXIT_OK


def cmd_recommend(args, cfg: dict) -> int:
    graph = _load_graph(args, cfg)
    configs, ks, policy = _engine_settings(args, cfg)
    bins = _bins_from_config(cfg)
    schema = build_schema(graph.users)
    k = max(ks)
    if args.users:
        users = [int(t) for t in args.users.split(",")]
        unknown = [u for u in users if u not in graph.users]
        if unknown:
            raise CliError(f"unknown service users: {unknown}")
    else:
        users = sorted(u for u in graph.users if graph.sent_to[u])
    if not users:
        raise CliError("no service users to recommend for", EXIT_EMPTY)

    out_dir = Path(args.out_dir)
    for config in configs:
        lists = recommend_batch(
            config, users, k, graph, schema, bins,
            policy=policy, threads=args.threads,
        )
        rows = [["service_user", "rank", "candidate", "score", "s_xy", "s_yx"]]
        for uid in users:
            for rank, cand in enumerate(lists[uid].ranked, start=1):
                rows.append([
                    str(uid), str(rank), str(cand.candidate),
                    f"{cand.reciprocal_score:.12g}", f"{cand.s_xy:.12g}", f"{cand.s_yx:.12g}",
                ])
        path = out_dir / f"recommendations_{config.name}.csv"
        _write_csv(path, rows)
        log.info("wrote %s", path)
    return EXIT_OK


def cmd_evaluate(args, cfg: dict) -> int:
    graph = _load_graph(args, cfg)
    configs, ks, policy = _engine_settings(args, cfg)
    bins = _bins_from_config(cfg)
    schema = build_schema(graph.users)
    for config in configs:
        needs_content = SimilarityKind.CONTENT_A in (config.similarity1, config.similarity2) or \
            SimilarityKind.CONTENT_B in (config.similarity1, config.similarity2)
        if needs_content and not schema.kinds:
            raise CliError(
                f"{config.name} needs profile attributes but the dataset has none"
            )
    section = cfg.get("split", {})
    window_days = args.window_days if args.window_days is not None else section.get("window_days", 10)
    min_activity = args.min_activity if args.min_activity is not None else section.get("min_activity", 5)
    try:
        split = SplitSpec(training_window=int(window_days) * 86400, min_activity=int(min_activity))
        report = run_evaluation(
            graph, split, configs, ks,
            schema=schema, bins=bins, policy=policy,
            both_endpoints_service=args.both_endpoints_service,
            threads=args.threads,
        )
    except ValueError as exc:
        if "no service user" in str(exc):
            raise CliError(str(exc), EXIT_EMPTY) from None
        raise CliError(str(exc)) from None

    out_dir = Path(args.out_dir)
    _write_csv(out_dir / "report.csv", report_to_rows(report))
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "summary.txt", "w", encoding="utf-8") as fh:
        fh.write(format_report(report))
    log.info("wrote %s and %s", out_dir / "report.csv", out_dir / "summary.txt")
    return EXIT_OK


def cmd_project(args, cfg: dict) -> int:
    graph = _load_graph(args, cfg)
    gender = _parse_gender(args.gender)
    direction = _parse_direction(args.direction)
    network = build_projection(graph, gender, direction)
    rows = [["u", "v", "weight"]]
    for (u, v) in sorted(network.edges):
        rows.append([str(u), str(v), str(network.edges[(u, v)])])
    path = Path(args.out_dir) / f"projection_{gender.value}_{direction.value}.csv"
    _write_csv(path, rows)
    log.info("wrote %s (%d edges)", path, len(network.edges))
    return EXIT_OK


def _ccdf_rows(values) -> list[list[str]]:
    rows = [["value", "ccdf"]]
    for value, fraction in ccdf(values):
        rows.append([f"{value:.12g}", f"{fraction:.12g}"])
    return rows


def cmd_stats(args, cfg: dict) -> int:
    graph = _load_graph(args, cfg)
    out_dir = Path(args.out_dir)
    if args.kind == "messages":
        gender = _parse_gender(args.gender) if args.gender and args.gender != "all" else None
        counts = message_counts(
            graph,
            direction=args.direction or "sent",
            gender=gender,
            window_days=args.window_days,
            per_week=args.per_week,
        )
        suffix = args.gender or "all"
        path = out_dir / f"messages_{args.direction or 'sent'}_{suffix}_ccdf.csv"
        _write_csv(path, _ccdf_rows(counts))
        log.info("wrote %s", path)
        return EXIT_OK
    if args.kind == "projection":
        gender = _parse_gender(args.gender or "M")
        direction = _parse_direction(args.direction or "sending")
        network = build_projection(graph, gender, direction)
        degrees = list(network.degrees().values())
        weights = list(network.edges.values())
        base = f"projection_{gender.value}_{direction.value}"
        _write_csv(out_dir / f"{base}_degree_ccdf.csv", _ccdf_rows(degrees))
        _write_csv(out_dir / f"{base}_weight_ccdf.csv", _ccdf_rows(weights))
        log.info("wrote %s degree/weight CCDFs", base)
        return EXIT_OK
    if args.kind == "attributes":
        if not args.attribute:
            raise CliError("stats --kind attributes requires --attribute")
        schema = build_schema(graph.users)
        bins = _bins_from_config(cfg)
        received = graph.received_message_counts()
        for gender in Gender:
            users = {u: graph.users[u] for u in graph.users_of_gender(gender)}
            try:
                p_all = attribute_distribution(users, args.attribute, schema, bins)
                p_recv = attribute_distribution(
                    users, args.attribute, schema, bins,
                    weights=received, support=list(p_all),
                )
            except ValueError as exc:
                raise CliError(str(exc)) from None
            rows = [["bin", "p_all", "p_receivers"]]
            for key in p_all:
                rows.append([str(key), f"{p_all[key]:.12g}", f"{p_recv[key]:.12g}"])
            rows.append(["bhattacharyya", f"{bhattacharyya_distance(p_all, p_recv):.12g}", ""])
            path = out_dir / f"attribute_{args.attribute}_{gender.value}.csv"
            _write_csv(path, rows)
            log.info("wrote %s", path)
        return EXIT_OK
    raise CliError(f"unknown stats kind {args.kind!r}")


def cmd_synth(args, cfg: dict) -> int:
    section = dict(cfg.get("synth", {}))
    known = {f.name for f in fields(GenConfig)}
    bad = sorted(set(section) - known)
    if bad:
        raise CliError(f"unknown synth config keys: {bad}")
    if args.seed is not None:
        section["seed"] = args.seed
    try:
        if args.users is not None:
            extra = {k: v for k, v in section.items() if k not in ("n_male", "n_female")}
            config = GenConfig.with_total_users(
                args.users, male_fraction=args.male_fraction, **extra
            )
        else:
            if args.males is not None:
                section["n_male"] = args.males
            if args.females is not None:
                section["n_female"] = args.females
            config = GenConfig(**section)
    except (TypeError, ValueError) as exc:
        raise CliError(f"bad synth configuration: {exc}") from None
    try:
        dataset = generate_dataset(config)
    except ValueError as exc:
        raise CliError(f"generation failed: {exc}") from None
    paths = write_dataset(dataset, args.out_dir)
    log.info("wrote %s, %s, %s", *paths)
    log.info(
        "messages: %d (m2f contacts %d, reply rate %.4f; f2m contacts %d, reply rate %.4f)",
        len(dataset.events),
        dataset.n_initial_contacts.get("m2f", 0), dataset.reply_rate("m2f"),
        dataset.n_initial_contacts.get("f2m", 0), dataset.reply_rate("f2m"),
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reciprec",
        description="Reciprocal recommendation toolkit for two-sided messaging networks",
    )
    parser.add_argument("--config", help="JSON configuration file")
    parser.add_argument("--seed", type=int, default=None, help="random seed (synth)")
    parser.add_argument("--threads", type=int, default=1, help="worker threads for scoring")
    parser.add_argument("--out-dir", default=".", help="directory for output files")
    parser.add_argument("-v", "--verbose", action="store_true", help="verbose diagnostics")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_dataset_args(p):
        p.add_argument("--profiles", required=True, help="profiles CSV")
        p.add_argument("--messages", required=True, help="messages CSV")
        p.add_argument("--numeric-attrs", help="comma-separated numeric attribute names")

    p = sub.add_parser("ingest", help="load a dataset and print summary counts")
    add_dataset_args(p)
    p.add_argument("--snapshot", help="write a graph snapshot to this path")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("recommend", help="write top-K recommendation lists")
    add_dataset_args(p)
    p.add_argument("--preset", help="preset name(s), comma separated")
    p.add_argument("-K", "--k", dest="k", help="list size")
    p.add_argument("--users", help="comma-separated service user ids (default: all senders)")
    p.add_argument("--policy", help="candidate policy: exclude-contacted | include-all")
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("evaluate", help="run the split/recommend/measure protocol")
    add_dataset_args(p)
    p.add_argument("--preset", help="preset name(s), comma separated (default: all six)")
    p.add_argument("-K", "--k", dest="k", help="comma-separated K grid")
    p.add_argument("--window-days", type=int, default=None, help="training window in days")
    p.add_argument("--min-activity", type=int, default=None, help="service-user threshold")
    p.add_argument("--policy", help="candidate policy")
    p.add_argument("--both-endpoints-service", action="store_true",
                   help="count test contacts only between service users")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("project", help="export a same-gender projection network")
    add_dataset_args(p)
    p.add_argument("--gender", required=True, help="M or F")
    p.add_argument("--direction", required=True, help="sending or receiving")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("stats", help="CCDF tables and attribute distributions")
    add_dataset_args(p)
    p.add_argument("--kind", required=True, choices=["messages", "projection", "attributes"])
    p.add_argument("--gender", help="M, F or all")
    p.add_argument("--direction", help="sent/received or sending/receiving")
    p.add_argument("--window-days", type=int, default=None)
    p.add_argument("--per-week", action="store_true",
                   help="count per user-week with at least one message")
    p.add_argument("--attribute", help="attribute name for --kind attributes")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--users", type=int, help="total users, split by --male-fraction")
    p.add_argument("--male-fraction", type=float, default=0.697)
    p.add_argument("--males", type=int, help="explicit male count")
    p.add_argument("--females", type=int, help="explicit female count")
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = _load_config(args.config)
        return args.func(args, cfg)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
