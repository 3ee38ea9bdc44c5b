"""Turning clusters into a timeline: pick the l largest clusters, order
them chronologically, and compress each one to k sentences with TextRank.

Cluster size is the only importance signal. Sentence selection is purely
extractive: every emitted sentence is verbatim one of the cluster's member
descriptions, and every emitted date is a cluster date, which (by date
homogeneity) originated in some accepted event summary.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from datetime import date
from pathlib import Path

import numpy as np

from .clustering import ClusterSet
from .corpus import TopicQuery, parse_iso_date
from .extractor import EventSummary
from .textnorm import normalize

TEXTRANK_DAMPING = 0.85
TEXTRANK_EPSILON = 1e-4
TEXTRANK_MAX_ITER = 100


@dataclass(frozen=True)
class Timeline:
    """An ordered sequence of (date, description) entries for one query."""

    topic: str
    constraint: str
    entries: tuple[tuple[date, str], ...]

    def __post_init__(self) -> None:
        dates = [d for d, _ in self.entries]
        if dates != sorted(dates):
            raise ValueError("timeline entries must be sorted by date")
        if any(not text.strip() for _, text in self.entries):
            raise ValueError("timeline entries must have non-empty text")

    def dates(self) -> set[date]:
        return {d for d, _ in self.entries}

    def to_text(self) -> str:
        return "".join(f"{d.isoformat()}: {text}\n" for d, text in self.entries)

    def to_json_obj(self) -> dict:
        return {
            "topic": self.topic,
            "constraint": self.constraint,
            "events": [
                {"date": d.isoformat(), "text": text} for d, text in self.entries
            ],
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "Timeline":
        entries = tuple(
            (parse_iso_date(e["date"]), e["text"]) for e in obj["events"]
        )
        return cls(topic=obj["topic"], constraint=obj["constraint"], entries=entries)


def save_timeline_json(timeline: Timeline, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(timeline.to_json_obj(), ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )


def load_timeline_json(path: str | Path) -> Timeline:
    return Timeline.from_json_obj(json.loads(Path(path).read_text("utf-8")))


def rank_clusters(clusters: ClusterSet, l: int) -> list[int]:
    """The min(l, count) largest cluster roots; earlier-founded wins ties."""
    if l < 1:
        raise ValueError("l must be >= 1")
    roots = sorted(
        clusters.roots(),
        key=lambda r: (-clusters.size(r), clusters.creation_index(r)),
    )
    return roots[:l]


def sort_by_time(clusters: ClusterSet, roots: list[int]) -> list[int]:
    """Roots ascending by cluster date; earlier-founded wins ties."""
    return sorted(roots, key=lambda r: (clusters.date_of(r), clusters.creation_index(r)))


def similarity_matrix(token_lists: list[list[str]]) -> np.ndarray:
    """Symmetric sentence-similarity weights: count of distinct shared
    tokens, normalized by the sum of log sentence lengths. Sentences with
    fewer than two tokens take weight 0 everywhere (their log-length would
    make the normalization degenerate)."""
    n = len(token_lists)
    sets = [set(toks) for toks in token_lists]
    weights = np.zeros((n, n))
    for i in range(n):
        if len(token_lists[i]) < 2:
            continue
        for j in range(i + 1, n):
            if len(token_lists[j]) < 2:
                continue
            shared = len(sets[i] & sets[j])
            if shared:
                denom = math.log(len(token_lists[i])) + math.log(len(token_lists[j]))
                weights[i, j] = weights[j, i] = shared / denom
    return weights


def textrank_scores(
    token_lists: list[list[str]],
    damping: float = TEXTRANK_DAMPING,
    epsilon: float = TEXTRANK_EPSILON,
    max_iter: int = TEXTRANK_MAX_ITER,
) -> np.ndarray:
    """Stationary importance scores of the weighted sentence graph.

    Power iteration on s[i] = (1-d) + d * Σ_j w[i][j]/rowsum[j] * s[j],
    stopping when the largest per-sentence change drops below epsilon.
    Isolated sentences stay at the 1-d floor.
    """
    n = len(token_lists)
    weights = similarity_matrix(token_lists)
    rowsums = weights.sum(axis=1)
    transition = np.divide(
        weights, rowsums[np.newaxis, :], out=np.zeros_like(weights),
        where=rowsums[np.newaxis, :] > 0,
    )
    scores = np.ones(n)
    for _ in range(max_iter):
        updated = (1 - damping) + damping * transition @ scores
        delta = float(np.max(np.abs(updated - scores))) if n else 0.0
        scores = updated
        if delta < epsilon:
            break
    return scores


def textrank_select(sentences: list[str], k: int) -> list[str]:
    """Choose k sentences, returned in their original order.

    Exact duplicates collapse to their first occurrence before ranking so
    repeated near-identical summaries cannot vote themselves up. If k or
    fewer distinct sentences remain, all of them are returned.
    """
    if not sentences:
        raise ValueError("textrank_select needs at least one sentence")
    if k < 1:
        raise ValueError("k must be >= 1")
    seen: set[str] = set()
    distinct = [s for s in sentences if not (s in seen or seen.add(s))]
    if len(distinct) <= k:
        return distinct
    tokens = [normalize(s) for s in distinct]
    scores = textrank_scores(tokens)
    ranked = sorted(range(len(distinct)), key=lambda i: (-scores[i], i))
    chosen = sorted(ranked[:k])
    return [distinct[i] for i in chosen]


def build_timeline(
    clusters: ClusterSet,
    summaries: dict[int, EventSummary],
    query: TopicQuery,
) -> Timeline:
    """Assemble the final timeline from a finished cluster set."""
    roots = sort_by_time(clusters, rank_clusters(clusters, query.l))
    entries = []
    for root in roots:
        descriptions = [summaries[m].description for m in sorted(clusters.members(root))]
        selected = textrank_select(descriptions, query.k)
        entries.append((clusters.date_of(root), " ".join(selected)))
    return Timeline(topic=query.keyword, constraint=query.constraint, entries=tuple(entries))
