"""Constrained timeline summarization over a pluggable LLM/embedding backend.

The pipeline turns a chronological pool of news articles plus a (keyword,
constraint) query into a timeline of dated one-event summaries:

    summarize each article under the constraint
    -> self-reflect (discard summaries that do not satisfy the constraint)
    -> cluster summaries that describe the same event
    -> pick the l largest clusters and compress each to k sentences

An evaluation suite (alignment-based ROUGE-1/2, date F1, approximate
randomization significance testing) and a concatenate-everything baseline
ship alongside the pipeline.
"""

__version__ = "0.1.0"

from .corpus import Article, GroundTruthTimeline, TopicQuery
from .extractor import EventSummary
from .timeline import Timeline

__all__ = [
    "Article",
    "EventSummary",
    "GroundTruthTimeline",
    "Timeline",
    "TopicQuery",
    "__version__",
]
