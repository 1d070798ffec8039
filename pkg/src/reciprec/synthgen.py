"""Seeded generator of synthetic two-sided messaging datasets.

Each user gets a latent trait vector (who they are), a latent preference
vector (whom they like) and an attractiveness scalar. Contact targets are
drawn proportionally to preference-trait alignment times target
attractiveness, out-degrees follow a truncated heavy-tailed distribution,
and reply propensities are calibrated by bisection so the realized
aggregate reply rate per direction hits a configurable target. Latents are
persisted separately for diagnostics and are never visible to recommenders.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model import Gender, InteractionGraph, MessageEvent, UserProfile

NUMERIC_ATTRIBUTES = ("age", "height")
NOMINAL_ATTRIBUTES = ("city", "education", "income", "marriage")
#: extra attributes emitted with ``extended_attributes``; together with the
#: compact schema they form a 20-column profile
EXTENDED_NUMERIC = ("weight", "photos")
EXTENDED_NOMINAL = (
    "house", "car", "occupation", "religion", "smoking", "drinking",
    "looks", "children", "parents", "dating", "wedding", "blood",
)

_DAY = 86400


@dataclass(frozen=True)
class GenConfig:
    seed: int = 7
    n_male: int = 1000
    n_female: int = 430
    latent_dim: int = 2
    #: pareto tail index of the activity draw; lower is heavier-tailed
    activity_tail: float = 2.2
    #: mean initial contacts per user before truncation, at base rate 1
    mean_contacts: float = 9.5
    max_contacts: int = 100
    base_contact_rate: float = 1.0
    #: concentration of target choice on compatible/attractive users
    choice_sharpness: float = 2.0
    attractiveness_sigma: float = 0.75
    reply_sharpness: float = 3.0
    reply_rate_m2f: float = 0.095
    reply_rate_f2m: float = 0.179
    attr_noise: float = 0.5
    attr_missing_rate: float = 0.05
    #: emit the full 20-attribute profile schema instead of the compact one
    extended_attributes: bool = False
    horizon_days: int = 56
    #: mean delay (days) between a user's registration and each contact
    activity_days: float = 7.0
    start_time: int = 1_300_000_000

    def __post_init__(self) -> None:
        if self.n_male <= 0 or self.n_female <= 0:
            raise ValueError("user counts must be positive")
        for name in ("reply_rate_m2f", "reply_rate_f2m"):
            rate = getattr(self, name)
            if not 0.0 < rate < 1.0:
                raise ValueError(f"{name}={rate} must lie strictly inside (0, 1)")
        if self.base_contact_rate < 0:
            raise ValueError("base_contact_rate must be >= 0")
        if self.latent_dim < 1:
            raise ValueError("latent_dim must be >= 1")
        if self.horizon_days < 7:
            raise ValueError("horizon must cover at least a week")

    @classmethod
    def with_total_users(cls, total: int, male_fraction: float = 0.697, **kwargs) -> "GenConfig":
        """Split a total user count by gender ratio (default 69.7% male)."""
        n_male = round(total * male_fraction)
        return cls(n_male=n_male, n_female=total - n_male, **kwargs)


@dataclass
class SynthDataset:
    config: GenConfig
    profiles: dict[int, UserProfile]
    events: list[MessageEvent]
    #: per user id: (attractiveness, trait vector, preference vector)
    latents: dict[int, tuple[float, np.ndarray, np.ndarray]]
    n_initial_contacts: dict[str, int] = field(default_factory=dict)
    n_replies: dict[str, int] = field(default_factory=dict)

    def reply_rate(self, direction: str) -> float:
        contacts = self.n_initial_contacts.get(direction, 0)
        return self.n_replies.get(direction, 0) / contacts if contacts else 0.0

    def graph(self) -> InteractionGraph:
        return InteractionGraph(self.profiles, self.events)


def _calibrate_scale(propensities: np.ndarray, target: float) -> float:
    """Bisect a scale s so that mean(min(1, s*q)) reaches the target rate."""
    if propensities.size == 0:
        return 0.0
    achievable = float(np.mean(propensities > 0))
    if achievable < target:
        raise ValueError(
            f"reply-rate target {target} infeasible: only {achievable:.3f} of "
            "contact pairs have positive reply propensity"
        )

    def realized(s: float) -> float:
        return float(np.minimum(1.0, s * propensities).mean())

    hi = 1.0
    while realized(hi) < target:
        hi *= 2.0
        if hi > 2.0 ** 60:
            raise ValueError(f"reply-rate target {target} not reachable by scaling")
    lo = 0.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if realized(mid) < target:
            lo = mid
        else:
            hi = mid
    return hi


def _nominal_levels(z: np.ndarray, n_levels: int, prefix: str) -> list[str]:
    """Bucket a latent projection into equal-population nominal levels."""
    ranks = np.argsort(np.argsort(z, kind="stable"), kind="stable")
    levels = (ranks * n_levels) // len(z)
    return [f"{prefix}{int(v)}" for v in levels]


def generate_dataset(config: GenConfig) -> SynthDataset:
    """Build the full dataset in memory; deterministic in the seed."""
    rng = np.random.default_rng(config.seed)
    n = config.n_male + config.n_female
    genders = [Gender.MALE] * config.n_male + [Gender.FEMALE] * config.n_female
    male_idx = np.arange(config.n_male)
    female_idx = np.arange(config.n_male, n)

    d = config.latent_dim
    sqrt_d = math.sqrt(d)
    traits = rng.normal(size=(n, d))
    prefs = rng.normal(size=(n, d))
    attractiveness = rng.lognormal(mean=0.0, sigma=config.attractiveness_sigma, size=n)
    log_attr = np.log(attractiveness)

    horizon = config.horizon_days * _DAY
    registered = config.start_time + rng.integers(0, horizon // 2, size=n)
    latest_contact = config.start_time + horizon - 3 * _DAY

    # heavy-tailed out-degrees, truncated; fixed-point rescaling keeps the
    # realized mean near the target despite the truncation
    raw = rng.pareto(config.activity_tail, size=n) + 0.05
    target_mean = config.base_contact_rate * config.mean_contacts
    k_out = np.zeros(n, dtype=np.int64)
    if target_mean > 0:
        scale = target_mean / raw.mean()
        for _ in range(4):
            clipped = np.minimum(config.max_contacts, np.floor(raw * scale + 0.5))
            realized = clipped.mean()
            if realized <= 0:
                break
            scale *= target_mean / realized
        k_out = np.minimum(config.max_contacts, np.floor(raw * scale + 0.5)).astype(np.int64)
    opp_count = np.where([g is Gender.MALE for g in genders], config.n_female, config.n_male)
    k_out = np.minimum(k_out, opp_count)

    # initial contacts: weighted sampling without replacement per sender
    # (largest log(u)/w keys win, w = preference-alignment times attractiveness)
    events: list[MessageEvent] = []
    contacts: dict[str, list[tuple[int, int]]] = {"m2f": [], "f2m": []}
    for i in range(n):
        k = int(k_out[i])
        if k == 0:
            continue
        is_male = genders[i] is Gender.MALE
        opp = female_idx if is_male else male_idx
        align = traits[opp] @ prefs[i] / sqrt_d
        logw = config.choice_sharpness * align + log_attr[opp]
        w = np.exp(logw - logw.max())
        u = np.maximum(rng.random(opp.size), 1e-300)
        keys = np.log(u) / np.maximum(w, 1e-300)
        top = np.argpartition(keys, opp.size - k)[opp.size - k:]
        offsets = rng.exponential(config.activity_days * _DAY, size=k)
        times = np.minimum(registered[i] + offsets, latest_contact).astype(np.int64)
        direction = "m2f" if is_male else "f2m"
        for j, t in zip(top, times):
            target = int(opp[j])
            events.append(MessageEvent(i + 1, target + 1, int(t)))
            contacts[direction].append((i, target))

    # replies, calibrated per direction on the realized contact pairs
    n_initial = {direction: len(pairs) for direction, pairs in contacts.items()}
    n_replies = {"m2f": 0, "f2m": 0}
    event_time = {(ev.sender - 1, ev.receiver - 1): ev.sent_at for ev in events}
    for direction in ("m2f", "f2m"):
        pairs = contacts[direction]
        if not pairs:
            continue
        target = config.reply_rate_m2f if direction == "m2f" else config.reply_rate_f2m
        senders = np.array([a for a, _ in pairs])
        receivers = np.array([b for _, b in pairs])
        align = (prefs[receivers] * traits[senders]).sum(axis=1) / sqrt_d
        propensity = 1.0 / (1.0 + np.exp(-config.reply_sharpness * align))
        scale = _calibrate_scale(propensity, target)
        prob = np.minimum(1.0, scale * propensity)
        hit = rng.random(len(pairs)) < prob
        delays = rng.integers(3600, 2 * _DAY, size=len(pairs))
        for idx in np.flatnonzero(hit):
            a, b = pairs[idx]
            # a reply can only happen once the replier is registered and the
            # initial contact has been made
            t0 = max(event_time[(a, b)], int(registered[b]))
            events.append(MessageEvent(b + 1, a + 1, int(t0 + delays[idx])))
        n_replies[direction] = int(hit.sum())

    # profile attributes correlated with the latents
    noise = config.attr_noise
    is_male_arr = np.array([g is Gender.MALE for g in genders])
    ages = np.clip(np.round(28 + 6 * traits[:, 0] + 3 * noise * rng.normal(size=n)), 18, 60)
    height_base = np.where(is_male_arr, 176.0, 163.0)
    heights = np.clip(
        np.round(height_base + 6 * traits[:, 1 % d] + 4 * noise * rng.normal(size=n)),
        145, 200,
    )
    proj = rng.normal(size=(3, d))
    city = _nominal_levels(traits @ proj[0] + noise * rng.normal(size=n), 6, "city")
    education = _nominal_levels(traits @ proj[1] + noise * rng.normal(size=n), 4, "edu")
    income = _nominal_levels(log_attr + noise * rng.normal(size=n), 5, "inc")
    marriage = _nominal_levels(traits @ proj[2] + noise * rng.normal(size=n), 3, "mar")
    columns: list[tuple[str, list]] = [
        ("age", [float(v) for v in ages]),
        ("height", [float(v) for v in heights]),
        ("city", city),
        ("education", education),
        ("income", income),
        ("marriage", marriage),
    ]
    if config.extended_attributes:
        weights_kg = np.clip(
            np.round(heights - 105 + 5 * noise * rng.normal(size=n)), 40, 130
        )
        photos = np.clip(np.round(3 * attractiveness + noise * rng.normal(size=n)), 0, 50)
        columns.append(("weight", [float(v) for v in weights_kg]))
        columns.append(("photos", [float(v) for v in photos]))
        extra_proj = rng.normal(size=(len(EXTENDED_NOMINAL), d))
        for j, name in enumerate(EXTENDED_NOMINAL):
            z = traits @ extra_proj[j] + noise * rng.normal(size=n)
            columns.append((name, _nominal_levels(z, 3 + j % 3, name[:3])))
    missing = rng.random((n, len(columns))) < config.attr_missing_rate

    profiles: dict[int, UserProfile] = {}
    latents: dict[int, tuple[float, np.ndarray, np.ndarray]] = {}
    for i in range(n):
        attrs = {
            name: values[i]
            for c, (name, values) in enumerate(columns)
            if not missing[i, c]
        }
        uid = i + 1
        profiles[uid] = UserProfile(uid, genders[i], int(registered[i]), attrs)
        latents[uid] = (float(attractiveness[i]), traits[i].copy(), prefs[i].copy())

    events.sort(key=lambda e: (e.sent_at, e.sender, e.receiver))
    return SynthDataset(
        config=config,
        profiles=profiles,
        events=events,
        latents=latents,
        n_initial_contacts=n_initial,
        n_replies=n_replies,
    )


def write_dataset(dataset: SynthDataset, out_dir) -> tuple[Path, Path, Path]:
    """Write profiles/messages/latents files; byte-identical for equal seeds."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    profiles_path = out / "profiles.csv"
    messages_path = out / "messages.csv"
    latents_path = out / "latents.csv"

    with open(profiles_path, "w", encoding="utf-8") as fh:
        columns = NUMERIC_ATTRIBUTES + NOMINAL_ATTRIBUTES
        if dataset.config.extended_attributes:
            columns = columns + EXTENDED_NUMERIC + EXTENDED_NOMINAL
        fh.write("id,gender,registered_at," + ",".join(columns) + "\n")
        for uid in sorted(dataset.profiles):
            p = dataset.profiles[uid]
            cells = [str(uid), p.gender.value, str(p.registered_at)]
            for name in columns:
                value = p.attributes.get(name)
                if value is None:
                    cells.append("")
                elif isinstance(value, float):
                    cells.append(f"{value:g}")
                else:
                    cells.append(str(value))
            fh.write(",".join(cells) + "\n")

    with open(messages_path, "w", encoding="utf-8") as fh:
        fh.write("sender,receiver,sent_at\n")
        for ev in dataset.events:
            fh.write(f"{ev.sender},{ev.receiver},{ev.sent_at}\n")

    d = dataset.config.latent_dim
    with open(latents_path, "w", encoding="utf-8") as fh:
        trait_cols = ",".join(f"trait_{j}" for j in range(d))
        pref_cols = ",".join(f"pref_{j}" for j in range(d))
        fh.write(f"id,attractiveness,{trait_cols},{pref_cols}\n")
        for uid in sorted(dataset.latents):
            a, trait, pref = dataset.latents[uid]
            values = [f"{a:.17g}"] + [f"{v:.17g}" for v in trait] + [f"{v:.17g}" for v in pref]
            fh.write(f"{uid}," + ",".join(values) + "\n")

    return profiles_path, messages_path, latents_path


def generate(config: GenConfig, out_dir) -> tuple[Path, Path, Path]:
    """Generate and persist a dataset; returns the three file paths."""
    return write_dataset(generate_dataset(config), out_dir)
