"""End-to-end runs: stream articles through extraction, reflection, and
clustering per query; or build the concatenation baseline; then score
predictions against ground truth.

Reproducibility is a hard requirement here: given a seed and a scripted
backend, rerunning into the same output directory rewrites byte-identical
files. Nothing in the outputs depends on wall-clock time or dict iteration
quirks, and the only randomness (baseline article sampling, significance
trials) flows from explicit seeds.
"""

from __future__ import annotations

import json
import random
import re
import sys
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

from .clustering import ClusterEngine
from .corpus import (
    Article,
    GroundTruthTimeline,
    TopicQuery,
    load_article_pool,
    load_ground_truth,
)
from .evaluation import EvalReport, EvaluationError, evaluate_timelines
from .extractor import (
    ExtractionLog,
    adhere_to_constraint,
    constrained_topic_sum,
)
from .gateway import GatewayError, LLMGateway, TEMPLATE_MAX_TOKENS
from .prompts import render_baseline
from .temporal import sentence_spans
from .timeline import Timeline, build_timeline, load_timeline_json, save_timeline_json

MODES = ("reacts", "reacts_no_sr", "baseline")
SNAPSHOT_EVERY = 100
DEFAULT_CONTEXT_TOKENS = 8192
_CHARS_PER_TOKEN = 4
_BUDGET_MARGIN = 0.9  # keep 10% headroom — chars/4 is only an estimate


class PipelineError(ValueError):
    """Configuration or orchestration problem (not a backend failure)."""


@dataclass(frozen=True)
class RunConfig:
    """Everything one `run` invocation needs besides the gateway."""

    pool_path: Path
    gold_path: Path
    out_dir: Path
    mode: str = "reacts"
    topic: str | None = None
    constraint: str | None = None
    l_override: int | None = None
    k_override: int | None = None
    n: int = 20
    seed: int | None = None
    few_shot_path: Path | None = None
    context_tokens: int = DEFAULT_CONTEXT_TOKENS
    snapshot_every: int = SNAPSHOT_EVERY
    extra_manifest: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise PipelineError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.mode == "baseline" and self.seed is None:
            raise PipelineError("baseline mode samples articles and needs --seed")
        if self.n < 1:
            raise PipelineError("retrieval limit n must be >= 1")


def slugify(text: str) -> str:
    words = re.findall(r"[0-9a-z]+", text.lower())
    return "-".join(words) or "untitled"


def _sentence_count(text: str) -> int:
    return max(1, len(sentence_spans(text)))


def derive_query(
    gold: GroundTruthTimeline, l_override: int | None, k_override: int | None
) -> TopicQuery:
    """Build the query for one gold timeline. Defaults come from the gold
    side: l = its event count, k = its average sentences per event."""
    l = l_override if l_override is not None else len(gold.events)
    if k_override is not None:
        k = k_override
    else:
        counts = [_sentence_count(text) for _, text in gold.events]
        k = max(1, round(sum(counts) / len(counts))) if counts else 1
    return TopicQuery(keyword=gold.topic, constraint=gold.constraint, l=l, k=k)


def select_gold_timelines(
    gold_path: Path, topic: str | None, constraint: str | None
) -> list[GroundTruthTimeline]:
    timelines = load_ground_truth(gold_path)
    if topic is not None:
        timelines = [t for t in timelines if t.topic == topic]
    if constraint is not None:
        timelines = [t for t in timelines if t.constraint == constraint]
    if not timelines:
        raise PipelineError("no ground-truth timelines match the given filters")
    return timelines


def timeline_basename(gold_timelines: list[GroundTruthTimeline], index: int) -> str:
    """`<topic-slug>__<constraint-index>` where the constraint index counts
    within that topic, in ground-truth order."""
    target = gold_timelines[index]
    nth = sum(1 for t in gold_timelines[:index] if t.topic == target.topic)
    return f"{slugify(target.topic)}__{nth}"


def run_single_stream(
    gateway: LLMGateway,
    articles: list[Article],
    query: TopicQuery,
    use_reflection: bool,
    n: int = 20,
    log: ExtractionLog | None = None,
    snapshot_path: Path | None = None,
    snapshot_every: int = SNAPSHOT_EVERY,
) -> Timeline:
    """One pass of the full pipeline over the chronological article stream.

    Crash behavior: on a backend failure the engine state and stream cursor
    are written to `snapshot_path` before the error propagates, and a later
    call resumes from that snapshot instead of repaying every model call.
    """
    start = 0
    if snapshot_path is not None and snapshot_path.exists():
        saved = json.loads(snapshot_path.read_text("utf-8"))
        engine = ClusterEngine.from_snapshot(gateway, query, saved["engine"])
        start = int(saved["cursor"])
    else:
        engine = ClusterEngine(gateway, query, n=n)

    def checkpoint(cursor: int) -> None:
        if snapshot_path is None:
            return
        snapshot_path.parent.mkdir(parents=True, exist_ok=True)
        snapshot_path.write_text(
            json.dumps({"cursor": cursor, "engine": engine.to_snapshot()}),
            encoding="utf-8",
        )

    idx = start
    try:
        for idx in range(start, len(articles)):
            article = articles[idx]
            summary = constrained_topic_sum(gateway, article, query, idx, log=log)
            if summary is None:
                pass
            elif use_reflection and not adhere_to_constraint(gateway, summary, query):
                if log:
                    log.write(article.id, "rejected_reflection")
            else:
                if log:
                    log.write(
                        article.id, "accepted", date=summary.event_date.isoformat()
                    )
                vector = gateway.embed([summary.description])[0]
                engine.assign(summary, vector)
            if snapshot_every and (idx + 1) % snapshot_every == 0:
                checkpoint(idx + 1)
    except GatewayError:
        checkpoint(idx)
        raise
    timeline = build_timeline(engine.clusters, engine.summaries, query)
    if snapshot_path is not None and snapshot_path.exists():
        snapshot_path.unlink()
    return timeline


def run_single_baseline(
    gateway: LLMGateway,
    articles: list[Article],
    query: TopicQuery,
    seed: int,
    context_tokens: int = DEFAULT_CONTEXT_TOKENS,
) -> Timeline:
    """Sample articles (seeded, without replacement), concatenate them into
    one prompt up to the estimated context budget, and parse the single
    response into a timeline."""
    if not articles:
        return Timeline(topic=query.keyword, constraint=query.constraint, entries=())
    separator = "\n#################\n"
    probe = "x"
    instruction_chars = len(
        render_baseline([probe], query.keyword, query.constraint, query.l, query.k)
    ) - len(probe) - len(separator)
    budget_chars = (
        (context_tokens - TEMPLATE_MAX_TOKENS["baseline"])
        * _CHARS_PER_TOKEN
        * _BUDGET_MARGIN
    )
    remaining = budget_chars - instruction_chars

    def article_text(a: Article) -> str:
        return f"Published: {a.publication_date.isoformat()}\n{a.title}\n\n{a.text}"

    rng = random.Random(seed)
    picked: list[str] = []
    for article in rng.sample(articles, len(articles)):
        text = article_text(article)
        cost = len(text) + len(separator)
        if cost > remaining:
            if not picked:
                raise PipelineError(
                    "context budget too small: no article fits the baseline prompt"
                )
            break
        picked.append(text)
        remaining -= cost
    response = gateway.chat(
        "baseline",
        articles=picked,
        keyword=query.keyword,
        constraint=query.constraint,
        l=query.l,
        k=query.k,
    )
    entries = _parse_baseline_response(response, query.l)
    if not entries:
        print(
            f"warning: baseline response for {query.keyword!r} contained no "
            "well-formed date lines",
            file=sys.stderr,
        )
    return Timeline(topic=query.keyword, constraint=query.constraint, entries=entries)


_BASELINE_LINE = re.compile(r"^\s*(\d{4})-(\d{2})-(\d{2})\s*:\s*(.*\S)\s*$")


def _parse_baseline_response(text: str, l: int) -> tuple:
    entries = []
    for line in text.splitlines():
        m = _BASELINE_LINE.match(line)
        if not m:
            continue
        try:
            day = date(int(m.group(1)), int(m.group(2)), int(m.group(3)))
        except ValueError:
            continue
        entries.append((day, m.group(4)))
        if len(entries) == l:
            break
    entries.sort(key=lambda e: e[0])
    return tuple(entries)


def run(cfg: RunConfig, gateway: LLMGateway) -> list[tuple[GroundTruthTimeline, Timeline]]:
    """Run the configured mode for every selected (topic, constraint) and
    write timelines, logs, and a manifest under cfg.out_dir."""
    articles = load_article_pool(cfg.pool_path)
    gold_timelines = select_gold_timelines(cfg.gold_path, cfg.topic, cfg.constraint)
    out = Path(cfg.out_dir)
    (out / "logs").mkdir(parents=True, exist_ok=True)
    results: list[tuple[GroundTruthTimeline, Timeline]] = []
    produced: list[str] = []
    for i, gold in enumerate(gold_timelines):
        query = derive_query(gold, cfg.l_override, cfg.k_override)
        base = timeline_basename(gold_timelines, i)
        if cfg.mode == "baseline":
            timeline = run_single_baseline(
                gateway, articles, query, seed=cfg.seed, context_tokens=cfg.context_tokens
            )
        else:
            with ExtractionLog(path=out / "logs" / f"{base}.jsonl") as log:
                timeline = run_single_stream(
                    gateway,
                    articles,
                    query,
                    use_reflection=cfg.mode == "reacts",
                    n=cfg.n,
                    log=log,
                    snapshot_path=out / "snapshots" / f"{base}.json",
                    snapshot_every=cfg.snapshot_every,
                )
        save_timeline_json(timeline, out / f"{base}.json")
        (out / f"{base}.txt").write_text(timeline.to_text(), encoding="utf-8")
        produced.append(base)
        results.append((gold, timeline))
    manifest = {
        "mode": cfg.mode,
        "pool": str(cfg.pool_path),
        "gold": str(cfg.gold_path),
        "topic_filter": cfg.topic,
        "constraint_filter": cfg.constraint,
        "l": cfg.l_override,
        "k": cfg.k_override,
        "n": cfg.n,
        "seed": cfg.seed,
        "few_shot": str(cfg.few_shot_path) if cfg.few_shot_path else None,
        "context_tokens": cfg.context_tokens,
        "timelines": produced,
        **cfg.extra_manifest,
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return results


def evaluate_run(pred_dir: Path, gold_path: Path) -> EvalReport:
    """Score every prediction file in pred_dir against its gold timeline.

    Predictions are matched to gold by the (topic, constraint) stored in
    the prediction JSON itself; a prediction with no gold counterpart is an
    error. Gold timelines that were never predicted are simply not scored,
    so filtered runs evaluate cleanly.
    """
    pred_dir = Path(pred_dir)
    files = sorted(pred_dir.glob("*.json"))
    files = [f for f in files if f.name not in ("manifest.json", "report.json")]
    if not files:
        raise EvaluationError(f"no prediction files in {pred_dir}")
    gold_by_key = {
        (t.topic, t.constraint): t for t in load_ground_truth(gold_path)
    }
    pairs = []
    orphans = []
    for path in files:
        predicted = load_timeline_json(path)
        gold = gold_by_key.get((predicted.topic, predicted.constraint))
        if gold is None:
            orphans.append(path.name)
            continue
        pairs.append((predicted, gold))
    if orphans:
        raise EvaluationError(
            "predictions without a matching gold timeline: " + ", ".join(orphans)
        )
    return evaluate_timelines(pairs)
