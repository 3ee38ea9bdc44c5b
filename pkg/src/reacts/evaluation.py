"""Timeline evaluation: alignment-based ROUGE, date F1, and a paired
randomization significance test.

Text is normalized the way the classic ROUGE tooling does with stemming and
stopword removal switched on: lowercase, split on non-alphanumerics, drop
stopwords, Porter-stem the rest. Predicted events are aligned many-to-one
to ground-truth events by a score that weighs unigram overlap against date
distance; precision is then averaged over predicted events and recall over
ground-truth events (under the reverse alignment), so padding a timeline
with junk hurts precision and omitting events hurts recall.
"""

from __future__ import annotations

import json
import random
from collections import Counter
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import GroundTruthTimeline
from .textnorm import normalize, tokenize  # re-exported: they are metric preprocessing
from .timeline import Timeline

__all__ = [
    "EvaluationError", "tokenize", "normalize", "TokenizedEvent", "Score",
    "rouge_scores", "alignment_score", "align_many_to_one", "alignment_rouge",
    "date_f1", "METRIC_NAMES", "TimelineResult", "EvalReport", "save_report",
    "load_report", "score_timeline", "evaluate_timelines",
    "SignificanceResult", "approximate_randomization", "significance_from_reports",
]


class EvaluationError(ValueError):
    """Malformed evaluation input (empty gold, mismatched report rows...)."""


@dataclass(frozen=True)
class TokenizedEvent:
    """One dated event description reduced to n-gram multisets."""

    event_date: date
    unigrams: tuple[str, ...]
    bigrams: tuple[tuple[str, str], ...]

    @classmethod
    def build(cls, event_date: date, text: str) -> "TokenizedEvent":
        tokens = normalize(text)
        return cls(
            event_date=event_date,
            unigrams=tuple(tokens),
            bigrams=tuple(zip(tokens, tokens[1:])),
        )

    def ngrams(self, order: int) -> tuple:
        if order == 1:
            return self.unigrams
        if order == 2:
            return self.bigrams
        raise ValueError(f"unsupported n-gram order {order}")


@dataclass(frozen=True)
class Score:
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_pr(cls, precision: float, recall: float) -> "Score":
        if precision < 0 or recall < 0:
            raise ValueError("precision/recall must be non-negative")
        total = precision + recall
        f1 = 2 * precision * recall / total if total > 0 else 0.0
        return cls(precision, recall, f1)

    def as_dict(self) -> dict[str, float]:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1}


def _overlap(a: Sequence, b: Sequence) -> int:
    """Clipped multiset intersection size."""
    return sum((Counter(a) & Counter(b)).values())


def rouge_scores(pred: TokenizedEvent, gold: TokenizedEvent, order: int) -> Score:
    """Plain ROUGE-n P/R/F1 between two tokenized events."""
    p_grams, g_grams = pred.ngrams(order), gold.ngrams(order)
    shared = _overlap(p_grams, g_grams)
    precision = shared / len(p_grams) if p_grams else 0.0
    recall = shared / len(g_grams) if g_grams else 0.0
    return Score.from_pr(precision, recall)


def alignment_score(pred: TokenizedEvent, gold: TokenizedEvent) -> float:
    """Unigram F1 discounted by date distance: f1 / (1 + |days apart|)."""
    f1 = rouge_scores(pred, gold, 1).f1
    if f1 == 0.0:
        return 0.0
    return f1 / (1 + abs((pred.event_date - gold.event_date).days))


def align_many_to_one(
    source: list[TokenizedEvent], target: list[TokenizedEvent]
) -> list[int | None]:
    """For each source event, the index of its best-scoring target event.

    Many source events may share one target. A source event with no
    positive-scoring target aligns to nothing. Ties go to the earlier
    target index, which makes alignment deterministic.
    """
    alignment: list[int | None] = []
    for src in source:
        best_idx, best_score = None, 0.0
        for idx, tgt in enumerate(target):
            score = alignment_score(src, tgt)
            if score > best_score:
                best_idx, best_score = idx, score
        alignment.append(best_idx)
    return alignment


def _tokenized_events(timeline: Timeline | GroundTruthTimeline) -> list[TokenizedEvent]:
    if isinstance(timeline, Timeline):
        pairs: Iterable[tuple[date, str]] = timeline.entries
    else:
        pairs = timeline.events
    return [TokenizedEvent.build(d, text) for d, text in pairs]


def alignment_rouge(
    predicted: Timeline, gold: GroundTruthTimeline, order: int
) -> Score:
    """Alignment-based ROUGE-n over a predicted/gold timeline pair.

    Precision averages each predicted event's ROUGE-n precision against the
    gold event it aligns to; recall averages each gold event's ROUGE-n
    recall against the predicted event that gold event aligns to under the
    reverse alignment. Unaligned events contribute zero on their side.
    """
    gold_events = _tokenized_events(gold)
    if not gold_events:
        raise EvaluationError(f"gold timeline for {gold.topic!r} has no events")
    pred_events = _tokenized_events(predicted)
    if not pred_events:
        return Score.from_pr(0.0, 0.0)

    forward = align_many_to_one(pred_events, gold_events)
    precision = sum(
        rouge_scores(p, gold_events[g], order).precision
        for p, g in zip(pred_events, forward)
        if g is not None
    ) / len(pred_events)

    reverse = align_many_to_one(gold_events, pred_events)
    recall = sum(
        rouge_scores(pred_events[p], g, order).recall
        for g, p in zip(gold_events, reverse)
        if p is not None
    ) / len(gold_events)

    return Score.from_pr(precision, recall)


def date_f1(predicted: Timeline, gold: GroundTruthTimeline) -> Score:
    """Exact-match F1 over the two timelines' date sets."""
    gold_dates = gold.dates()
    if not gold_dates:
        raise EvaluationError(f"gold timeline for {gold.topic!r} has no events")
    pred_dates = predicted.dates()
    shared = len(pred_dates & gold_dates)
    precision = shared / len(pred_dates) if pred_dates else 0.0
    recall = shared / len(gold_dates)
    return Score.from_pr(precision, recall)


METRIC_NAMES = ("ar1", "ar2", "date_f1")


@dataclass(frozen=True)
class TimelineResult:
    topic: str
    constraint: str
    scores: dict[str, Score]  # keyed by METRIC_NAMES

    def key(self) -> tuple[str, str]:
        return (self.topic, self.constraint)


@dataclass(frozen=True)
class EvalReport:
    rows: tuple[TimelineResult, ...]
    macro: dict[str, Score]
    timelines: int
    topics: int

    def to_json_obj(self) -> dict:
        return {
            "timelines": self.timelines,
            "topics": self.topics,
            "macro": {m: s.as_dict() for m, s in self.macro.items()},
            "rows": [
                {
                    "topic": r.topic,
                    "constraint": r.constraint,
                    "scores": {m: s.as_dict() for m, s in r.scores.items()},
                }
                for r in self.rows
            ],
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "EvalReport":
        rows = tuple(
            TimelineResult(
                topic=r["topic"],
                constraint=r["constraint"],
                scores={
                    m: Score(d["precision"], d["recall"], d["f1"])
                    for m, d in r["scores"].items()
                },
            )
            for r in obj["rows"]
        )
        macro = {
            m: Score(d["precision"], d["recall"], d["f1"])
            for m, d in obj["macro"].items()
        }
        return cls(rows=rows, macro=macro, timelines=obj["timelines"], topics=obj["topics"])


def save_report(report: EvalReport, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(report.to_json_obj(), indent=2) + "\n", encoding="utf-8"
    )


def load_report(path: str | Path) -> EvalReport:
    return EvalReport.from_json_obj(json.loads(Path(path).read_text("utf-8")))


def score_timeline(predicted: Timeline, gold: GroundTruthTimeline) -> TimelineResult:
    return TimelineResult(
        topic=gold.topic,
        constraint=gold.constraint,
        scores={
            "ar1": alignment_rouge(predicted, gold, 1),
            "ar2": alignment_rouge(predicted, gold, 2),
            "date_f1": date_f1(predicted, gold),
        },
    )


def evaluate_timelines(
    pairs: list[tuple[Timeline, GroundTruthTimeline]]
) -> EvalReport:
    """Score every (predicted, gold) pair and macro-average.

    Macro precision/recall are plain means over timelines; the aggregate F1
    is the harmonic mean of those two means, not the mean of per-timeline
    F1 values.
    """
    if not pairs:
        raise EvaluationError("nothing to evaluate")
    rows = tuple(score_timeline(pred, gold) for pred, gold in pairs)
    macro = {}
    for metric in METRIC_NAMES:
        precision = sum(r.scores[metric].precision for r in rows) / len(rows)
        recall = sum(r.scores[metric].recall for r in rows) / len(rows)
        macro[metric] = Score.from_pr(precision, recall)
    return EvalReport(
        rows=rows,
        macro=macro,
        timelines=len(rows),
        topics=len({r.topic for r in rows}),
    )


@dataclass(frozen=True)
class SignificanceResult:
    metric: str
    observed_diff: float
    p_value: float
    trials: int
    alpha: float

    @property
    def significant(self) -> bool:
        return self.p_value < self.alpha


def approximate_randomization(
    scores_a: Sequence[float],
    scores_b: Sequence[float],
    trials: int = 100,
    alpha: float = 0.05,
    seed: int = 0,
    metric: str = "",
) -> SignificanceResult:
    """Paired randomization test on the difference of means.

    Each trial flips each (a_i, b_i) pair with probability 1/2 and
    recomputes the absolute difference of means; the p-value is
    (#{trials with |permuted| >= |observed|} + 1) / (trials + 1).
    When the full swap space (2^n patterns) is no larger than the requested
    trial count, it is enumerated exactly instead of sampled, and the
    reported trial count is 2^n.
    """
    if len(scores_a) != len(scores_b):
        raise EvaluationError(
            f"paired test needs equal lengths, got {len(scores_a)} and {len(scores_b)}"
        )
    n = len(scores_a)
    if n < 1:
        raise EvaluationError("paired test needs at least one unit")
    if trials < 1:
        raise EvaluationError("trials must be >= 1")
    a = [float(x) for x in scores_a]
    b = [float(x) for x in scores_b]
    observed = sum(a) / n - sum(b) / n
    threshold = abs(observed)

    def flipped_diff(mask: int) -> float:
        total = 0.0
        for i in range(n):
            total += b[i] - a[i] if mask >> i & 1 else a[i] - b[i]
        return total / n

    if n <= 30 and 2**n <= trials:
        masks: Iterable[int] = range(2**n)
        used = 2**n
    else:
        rng = random.Random(seed)
        masks = (rng.getrandbits(n) for _ in range(trials))
        used = trials
    count = sum(1 for m in masks if abs(flipped_diff(m)) >= threshold - 1e-12)
    return SignificanceResult(
        metric=metric,
        observed_diff=observed,
        p_value=(count + 1) / (used + 1),
        trials=used,
        alpha=alpha,
    )


def significance_from_reports(
    report_a: EvalReport,
    report_b: EvalReport,
    metric: str,
    trials: int = 100,
    alpha: float = 0.05,
    seed: int = 0,
) -> SignificanceResult:
    """Paired test over per-timeline F1 values of two evaluation reports.

    The reports must cover exactly the same (topic, constraint) set; rows
    are paired by that key, not by file order.
    """
    if metric not in METRIC_NAMES:
        raise EvaluationError(f"unknown metric {metric!r}; expected one of {METRIC_NAMES}")
    keys_a = {r.key() for r in report_a.rows}
    keys_b = {r.key() for r in report_b.rows}
    if keys_a != keys_b or len(keys_a) != len(report_a.rows) or len(keys_b) != len(report_b.rows):
        missing = sorted(keys_a ^ keys_b)
        raise EvaluationError(
            "reports cover different timeline sets; mismatched keys: "
            + ", ".join(f"{t}/{c[:40]}" for t, c in missing[:10])
        )
    by_key_b = {r.key(): r for r in report_b.rows}
    ordered = sorted(report_a.rows, key=lambda r: r.key())
    a_scores = [r.scores[metric].f1 for r in ordered]
    b_scores = [by_key_b[r.key()].scores[metric].f1 for r in ordered]
    return approximate_randomization(
        a_scores, b_scores, trials=trials, alpha=alpha, seed=seed, metric=metric
    )
