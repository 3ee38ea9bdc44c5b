"""Prompt templates for the four LLM calls the pipeline makes.

Four templates exist:

* ``summary`` — extract one constraint-adhering event summary from an article.
* ``self_reflect`` — yes/no check that a summary adheres to the constraint.
* ``similarity`` — yes/no check that two event summaries describe one event.
* ``baseline`` — single-shot timeline over a batch of concatenated articles.

Fixed template text is frozen here; everything that varies per call (and the
few-shot demonstration blocks, which ship as replaceable JSON) is a slot.
Rendering is strict: a missing or empty slot raises instead of producing a
silently malformed prompt.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from string import Template


class TemplateError(ValueError):
    """A prompt could not be rendered (unknown template, unfilled slot)."""


TEMPLATE_NAMES = ("summary", "self_reflect", "similarity", "baseline")

_SUMMARY_HEADER = (
    "### Instruction\n"
    "Review the news article associated with the provided keyword and"
    " constraint. If the article's content does not relate to the keyword"
    " and specified constraint, output 'None'. Otherwise, summarize the most"
    " significant event related to the keyword while adhering to the"
    " constraint.\n"
    "\n"
    "### Format\n"
    "YYYY-MM-DD: One-sentence Summary\n"
    "\n"
)

_SUMMARY_BLOCK = Template(
    "#################\n"
    "### Keyword\n"
    "$keyword\n"
    "\n"
    "### Constraint\n"
    "$constraint\n"
    "\n"
    "### Content\n"
    "$content\n"
    "\n"
    "### Related Event Summary\n"
)

_SELF_REFLECT = Template(
    "Review the timestamped event description related to $keyword,"
    " accompanied by a constraint. Please determine whether the event"
    " description complies with or corresponds to the constraint. Respond"
    " with 'Yes' if the event description aligns with the constraint, or"
    " with 'No' if it does not.\n"
    "#################\n"
    "$positive\n"
    "\n"
    "#################\n"
    "$negative\n"
    "\n"
    "#################\n"
    "### Event\n"
    "$event\n"
    "\n"
    "### Constraint\n"
    "$constraint\n"
    "### Answer\n"
)

_SIMILARITY = Template(
    "Taking the timestamps into account, evaluate whether two prior news"
    " events are referring to the same event related to the keyword. If the"
    " two events occur on the same date, and they are about the same topic"
    " related to the keyword, then they should be considered as referring to"
    " the same event. If so, please respond directly with 'yes'. If not,"
    " respond with 'no'. Then explain your answer.\n"
    "----\n"
    "$example_1\n"
    "----\n"
    "$example_2\n"
    "----\n"
    "$example_3\n"
    "----\n"
    "# Keyword\n"
    "$keyword\n"
    "# Event 1\n"
    "$event1\n"
    "# Event 2\n"
    "$event2\n"
    "# Answer\n"
)

_BASELINE_TAIL = Template(
    "### Instruction\n"
    "Using the articles about $keyword above, please create a concise"
    " timeline with $l events following the constraint below. Using only the"
    " information from the articles, provide the date and a $k-sentence"
    " summary for each important event.\n"
    "\n"
    "### Constraint\n"
    "$constraint\n"
    "\n"
    "### Format\n"
    "YYYY-MM-DD: One-sentence Summary\n"
    "YYYY-MM-DD: One-sentence Summary\n"
    "\n"
    "### Answer\n"
)


@dataclass(frozen=True)
class SummaryDemo:
    """One worked example for the summary prompt."""

    keyword: str
    constraint: str
    content: str
    answer: str


@dataclass(frozen=True)
class FewShotSet:
    """Demonstration blocks for the three few-shot prompts.

    These are replaceable data, not fixed template text: the stock set under
    ``reacts/data/few_shot.json`` was written for this implementation, and a
    different JSON file with the same shape can be swapped in per run.
    """

    summary: tuple[SummaryDemo, ...]
    self_reflect_positive: str
    self_reflect_negative: str
    similarity: tuple[str, str, str]


def load_few_shot(path: str | Path | None = None) -> FewShotSet:
    """Load few-shot blocks from a JSON file, or the packaged defaults."""
    if path is None:
        raw = resources.files("reacts.data").joinpath("few_shot.json").read_text("utf-8")
    else:
        raw = Path(path).read_text("utf-8")
    try:
        data = json.loads(raw)
        summary = tuple(
            SummaryDemo(
                keyword=d["keyword"],
                constraint=d["constraint"],
                content=d["content"],
                answer=d["answer"],
            )
            for d in data["summary"]
        )
        reflect = data["self_reflect"]
        similarity = data["similarity"]
        if len(similarity) != 3:
            raise TemplateError(
                f"similarity prompt needs exactly 3 examples, got {len(similarity)}"
            )
        return FewShotSet(
            summary=summary,
            self_reflect_positive=reflect["positive"],
            self_reflect_negative=reflect["negative"],
            similarity=(similarity[0], similarity[1], similarity[2]),
        )
    except (KeyError, TypeError) as exc:
        raise TemplateError(f"malformed few-shot file: {exc!r}") from exc


def _require(name: str, **slots: object) -> dict[str, str]:
    filled = {}
    for key, value in slots.items():
        if value is None or (isinstance(value, str) and not value.strip()):
            raise TemplateError(f"{name} prompt: slot {key!r} is unfilled")
        filled[key] = str(value)
    return filled


def render_summary(
    keyword: str, constraint: str, content: str, few_shot: FewShotSet
) -> str:
    """Summary-extraction prompt: instruction, demos, then the query block."""
    parts = [_SUMMARY_HEADER]
    for demo in few_shot.summary:
        slots = _require(
            "summary",
            keyword=demo.keyword,
            constraint=demo.constraint,
            content=demo.content,
        )
        parts.append(_SUMMARY_BLOCK.substitute(slots))
        parts.append(f"{demo.answer}\n\n")
    slots = _require("summary", keyword=keyword, constraint=constraint, content=content)
    parts.append(_SUMMARY_BLOCK.substitute(slots))
    return "".join(parts)


def render_self_reflect(
    keyword: str, event: str, constraint: str, few_shot: FewShotSet
) -> str:
    """Constraint-adherence check prompt over one event description."""
    slots = _require(
        "self_reflect",
        keyword=keyword,
        event=event,
        constraint=constraint,
        positive=few_shot.self_reflect_positive,
        negative=few_shot.self_reflect_negative,
    )
    return _SELF_REFLECT.substitute(slots)


def render_similarity(
    keyword: str, event1: str, event2: str, few_shot: FewShotSet
) -> str:
    """Same-event check prompt over two timestamped event descriptions."""
    slots = _require(
        "similarity",
        keyword=keyword,
        event1=event1,
        event2=event2,
        example_1=few_shot.similarity[0],
        example_2=few_shot.similarity[1],
        example_3=few_shot.similarity[2],
    )
    return _SIMILARITY.substitute(slots)


def render_baseline(
    articles: list[str], keyword: str, constraint: str, l: int, k: int
) -> str:
    """Concatenate articles, then instruct a single timeline generation."""
    if not articles:
        raise TemplateError("baseline prompt: slot 'articles' is unfilled")
    for i, article in enumerate(articles):
        if not article.strip():
            raise TemplateError(f"baseline prompt: article #{i} is empty")
    slots = _require("baseline", keyword=keyword, constraint=constraint, l=l, k=k)
    head = "".join(f"{a}\n#################\n" for a in articles)
    return head + _BASELINE_TAIL.substitute(slots)


def render(name: str, few_shot: FewShotSet, **slots: object) -> str:
    """Render any template by name; unknown names or missing slots raise."""
    try:
        if name == "summary":
            return render_summary(
                slots.pop("keyword"), slots.pop("constraint"),
                slots.pop("content"), few_shot,
            )
        if name == "self_reflect":
            return render_self_reflect(
                slots.pop("keyword"), slots.pop("event"),
                slots.pop("constraint"), few_shot,
            )
        if name == "similarity":
            return render_similarity(
                slots.pop("keyword"), slots.pop("event1"),
                slots.pop("event2"), few_shot,
            )
        if name == "baseline":
            return render_baseline(
                slots.pop("articles"), slots.pop("keyword"),
                slots.pop("constraint"), slots.pop("l"), slots.pop("k"),
            )
    except KeyError as exc:
        raise TemplateError(f"{name} prompt: slot {exc.args[0]!r} is unfilled") from exc
    raise TemplateError(f"unknown template {name!r}; expected one of {TEMPLATE_NAMES}")
