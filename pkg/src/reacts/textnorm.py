"""Shared text normalization for metrics and sentence ranking:
lowercase, split on non-alphanumerics, drop stopwords, Porter-stem."""

from __future__ import annotations

import re

from .porter import stem
from .stopwords import STOPWORDS

_TOKEN = re.compile(r"[0-9a-z]+")


def tokenize(text: str) -> list[str]:
    """Lowercased maximal runs of ASCII letters and digits."""
    return _TOKEN.findall(text.lower())


def normalize(text: str) -> list[str]:
    """Tokenize, remove stopwords, then stem what is left."""
    return [stem(t) for t in tokenize(text) if t not in STOPWORDS]
