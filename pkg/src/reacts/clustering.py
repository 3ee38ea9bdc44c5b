"""Incremental event clustering.

Each accepted event summary is embedded, its nearest stored neighbors are
retrieved by cosine similarity, and the summary joins the cluster of the
first neighbor judged to describe the same event — judged by exact date
equality first (free), then by an LLM yes/no check (expensive). Summaries
matching no neighbor found their own cluster.

State is a brute-force vector store plus a union-find forest. Brute force
is deliberate: streams are at most a few thousand summaries per query, and
exact retrieval keeps the whole engine deterministic under a scripted
backend.
"""

from __future__ import annotations

import json
from datetime import date
from pathlib import Path

import numpy as np

from .corpus import TopicQuery, parse_iso_date
from .extractor import EventSummary
from .gateway import LLMGateway

DEFAULT_RETRIEVAL_LIMIT = 20


class ClusterError(ValueError):
    """Violation of vector-store or cluster-set preconditions."""


class VectorStore:
    """Append-only store of (summary_id, unit vector) with exact top-n
    cosine retrieval. The first insert fixes the dimension."""

    def __init__(self, dimension: int | None = None):
        if dimension is not None and dimension < 1:
            raise ClusterError("dimension must be positive")
        self.dimension = dimension
        self._ids: list[int] = []
        self._rows: list[np.ndarray] = []
        self._known: set[int] = set()

    def __len__(self) -> int:
        return len(self._ids)

    def _unit(self, vector) -> np.ndarray:
        vec = np.asarray(vector, dtype=np.float64)
        if vec.ndim != 1:
            raise ClusterError(f"expected a 1-d vector, got shape {vec.shape}")
        if self.dimension is None:
            self.dimension = int(vec.shape[0])
        elif vec.shape[0] != self.dimension:
            raise ClusterError(
                f"vector dimension {vec.shape[0]} != store dimension {self.dimension}"
            )
        norm = float(np.linalg.norm(vec))
        return vec / norm if norm > 0 else vec

    def insert(self, summary_id: int, vector) -> None:
        if summary_id in self._known:
            raise ClusterError(f"duplicate summary_id {summary_id}")
        unit = self._unit(vector)
        self._known.add(summary_id)
        self._ids.append(summary_id)
        self._rows.append(unit)

    def retrieve(self, query_vector, n: int) -> list[int]:
        """The min(n, size) stored ids most cosine-similar to the query,
        descending; ties broken by lower summary_id."""
        if n < 1:
            raise ClusterError("retrieval limit must be >= 1")
        unit = self._unit(query_vector)
        if not self._ids:
            return []
        sims = np.stack(self._rows) @ unit
        ids = np.asarray(self._ids)
        order = np.lexsort((ids, -sims))
        return [int(i) for i in ids[order[:n]]]

    def vectors(self) -> dict[int, list[float]]:
        return {i: row.tolist() for i, row in zip(self._ids, self._rows)}


class ClusterSet:
    """Union-find forest over summary ids with per-cluster metadata.

    Every cluster is date-homogeneous by construction: union refuses to
    merge members whose event dates differ. The root carries the member
    list, the shared date, and the creation index (smallest arrival index
    of any member, i.e. the founding member after merges).
    """

    def __init__(self):
        self._parent: dict[int, int] = {}
        self._rank: dict[int, int] = {}
        self._members: dict[int, list[int]] = {}
        self._date: dict[int, date] = {}
        self._creation: dict[int, int] = {}
        self._member_date: dict[int, date] = {}

    def __len__(self) -> int:
        return len(self._members)

    def __contains__(self, summary_id: int) -> bool:
        return summary_id in self._parent

    def add(self, summary_id: int, event_date: date) -> None:
        if summary_id in self._parent:
            raise ClusterError(f"summary_id {summary_id} already present")
        self._parent[summary_id] = summary_id
        self._rank[summary_id] = 0
        self._members[summary_id] = [summary_id]
        self._date[summary_id] = event_date
        self._creation[summary_id] = summary_id
        self._member_date[summary_id] = event_date

    def find(self, summary_id: int) -> int:
        root = summary_id
        while self._parent[root] != root:
            root = self._parent[root]
        while self._parent[summary_id] != root:  # path compression
            self._parent[summary_id], summary_id = root, self._parent[summary_id]
        return root

    def union(self, a: int, b: int) -> int:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if self._date[ra] != self._date[rb]:
            raise ClusterError(
                f"refusing to merge clusters dated {self._date[ra]} and {self._date[rb]}"
            )
        if self._rank[ra] < self._rank[rb]:
            ra, rb = rb, ra
        elif self._rank[ra] == self._rank[rb]:
            self._rank[ra] += 1
        self._parent[rb] = ra
        self._members[ra].extend(self._members.pop(rb))
        self._creation[ra] = min(self._creation[ra], self._creation.pop(rb))
        del self._date[rb]
        return ra

    def roots(self) -> list[int]:
        return list(self._members)

    def members(self, root: int) -> list[int]:
        return list(self._members[root])

    def size(self, root: int) -> int:
        return len(self._members[root])

    def date_of(self, root: int) -> date:
        return self._date[root]

    def creation_index(self, root: int) -> int:
        return self._creation[root]

    def check_invariants(self) -> None:
        """Assert the partition and date-homogeneity invariants."""
        seen: set[int] = set()
        for root, members in self._members.items():
            if self.find(root) != root:
                raise AssertionError(f"{root} is stored as a root but is not one")
            for m in members:
                if m in seen:
                    raise AssertionError(f"summary {m} appears in two clusters")
                seen.add(m)
                if self.find(m) != root:
                    raise AssertionError(f"summary {m} does not reach its root {root}")
                if self._member_date[m] != self._date[root]:
                    raise AssertionError(f"summary {m} breaks date homogeneity")
            if self._creation[root] != min(members):
                raise AssertionError(f"cluster {root} has a stale creation index")
        if seen != set(self._parent):
            raise AssertionError("member lists do not partition the id universe")


def same_event(
    gateway: LLMGateway, a: EventSummary, b: EventSummary, query: TopicQuery
) -> bool:
    """Whether two summaries describe one event.

    Different dates settle it immediately without a model call — same
    description on different days means distinct occurrences here. Equal
    dates defer to the model's yes/no answer.
    """
    if a.event_date != b.event_date:
        return False
    answer = gateway.chat(
        "similarity",
        keyword=query.keyword,
        event1=a.stamped(),
        event2=b.stamped(),
    )
    return answer.strip().lower().startswith("yes")


class ClusterEngine:
    """Streaming state: vector store + clusters + the summaries seen so far."""

    def __init__(
        self,
        gateway: LLMGateway,
        query: TopicQuery,
        n: int = DEFAULT_RETRIEVAL_LIMIT,
        dimension: int | None = None,
    ):
        if n < 1:
            raise ClusterError("retrieval limit must be >= 1")
        self.gateway = gateway
        self.query = query
        self.n = n
        self.store = VectorStore(dimension)
        self.clusters = ClusterSet()
        self.summaries: dict[int, EventSummary] = {}

    def assign(self, summary: EventSummary, vector) -> int:
        """Insert one summary, joining the first matching neighbor's cluster.

        Neighbors are scanned in descending-similarity order and scanning
        stops at the first match, so at most one union happens. All model
        calls complete before any state mutation: a gateway failure leaves
        the engine untouched.
        """
        if summary.arrival_index in self.summaries:
            raise ClusterError(f"arrival_index {summary.arrival_index} already assigned")
        match: int | None = None
        for neighbor_id in self.store.retrieve(vector, self.n):
            if same_event(self.gateway, summary, self.summaries[neighbor_id], self.query):
                match = neighbor_id
                break
        self.store.insert(summary.arrival_index, vector)
        self.clusters.add(summary.arrival_index, summary.event_date)
        self.summaries[summary.arrival_index] = summary
        if match is not None:
            self.clusters.union(summary.arrival_index, match)
        return self.clusters.find(summary.arrival_index)

    def to_snapshot(self) -> dict:
        """JSON-serializable full state (vectors, summaries, partition)."""
        return {
            "n": self.n,
            "dimension": self.store.dimension,
            "summaries": [
                {
                    "id": s.arrival_index,
                    "date": s.event_date.isoformat(),
                    "description": s.description,
                    "article_id": s.source_article_id,
                }
                for s in sorted(self.summaries.values(), key=lambda s: s.arrival_index)
            ],
            "vectors": {str(i): v for i, v in self.store.vectors().items()},
            "clusters": sorted(
                sorted(self.clusters.members(r)) for r in self.clusters.roots()
            ),
        }

    @classmethod
    def from_snapshot(
        cls, gateway: LLMGateway, query: TopicQuery, data: dict
    ) -> "ClusterEngine":
        engine = cls(gateway, query, n=int(data["n"]), dimension=data.get("dimension"))
        for row in data["summaries"]:
            summary = EventSummary(
                event_date=parse_iso_date(row["date"]),
                description=row["description"],
                source_article_id=row["article_id"],
                topic=query.keyword,
                constraint=query.constraint,
                arrival_index=int(row["id"]),
            )
            engine.store.insert(summary.arrival_index, data["vectors"][str(row["id"])])
            engine.clusters.add(summary.arrival_index, summary.event_date)
            engine.summaries[summary.arrival_index] = summary
        for group in data["clusters"]:
            for other in group[1:]:
                engine.clusters.union(group[0], other)
        return engine

    def save_snapshot(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_snapshot()), encoding="utf-8")

    @classmethod
    def load_snapshot(
        cls, gateway: LLMGateway, query: TopicQuery, path: str | Path
    ) -> "ClusterEngine":
        return cls.from_snapshot(
            gateway, query, json.loads(Path(path).read_text("utf-8"))
        )
