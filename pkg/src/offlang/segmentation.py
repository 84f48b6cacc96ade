"""Unigram word segmentation for hashtag bodies.

A candidate split is scored as the product of unigram probabilities
(count / total). Chunks absent from the dictionary are penalised by length:
p = 1 / (total * 10**(len-1)), so a long unknown chunk still beats spelling
it out character by character. The best split is found by dynamic
programming over break points.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources as importlib_resources
from pathlib import Path
from typing import Iterable, Mapping

_LOG10 = math.log(10.0)


@dataclass(frozen=True)
class SegmentationDictionary:
    """Word frequency counts backing the unigram model."""

    counts: Mapping[str, int]
    total: int = 0

    def __post_init__(self):
        counts = dict(self.counts)
        for word, count in counts.items():
            if word != word.lower():
                raise ValueError(f"dictionary words must be lowercase: {word!r}")
            if count <= 0:
                raise ValueError(f"dictionary counts must be positive: {word!r} -> {count}")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "total", sum(counts.values()))

    @classmethod
    def from_file(cls, path: str | Path) -> "SegmentationDictionary":
        """Read ``word<TAB>count`` lines (UTF-8, blank lines skipped)."""
        counts: dict[str, int] = {}
        with Path(path).open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\r\n")
                if not line:
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise ValueError(f"{path}:{lineno}: expected 'word<TAB>count'")
                counts[parts[0]] = counts.get(parts[0], 0) + int(parts[1])
        return cls(counts)

    def merged_with(self, extra: Mapping[str, int]) -> "SegmentationDictionary":
        """Return a new dictionary with ``extra`` counts added in."""
        merged = dict(self.counts)
        for word, count in extra.items():
            merged[word.lower()] = merged.get(word.lower(), 0) + int(count)
        return SegmentationDictionary(merged)

    def log_prob(self, chunk: str) -> float:
        total = max(self.total, 1)
        count = self.counts.get(chunk)
        if count:
            return math.log(count) - math.log(total)
        # Unknown-chunk fallback: 1 / (total * 10**(len-1)).
        return -math.log(total) - (len(chunk) - 1) * _LOG10


def segment_hashtag(tag: str, dictionary: SegmentationDictionary | None = None) -> list[str]:
    """Best unigram split of a hashtag body (without the leading ``#``).

    The concatenation of the returned pieces always equals the lowercased
    input. An input the model cannot beat stays one piece.
    """
    if not tag:
        raise ValueError("cannot segment an empty hashtag body")
    if dictionary is None:
        dictionary = default_dictionary()
    tag = tag.lower()
    n = len(tag)
    best_score = [-math.inf] * (n + 1)
    best_score[0] = 0.0
    back = [0] * (n + 1)
    for end in range(1, n + 1):
        for start in range(end):
            if best_score[start] == -math.inf:
                continue
            score = best_score[start] + dictionary.log_prob(tag[start:end])
            if score > best_score[end]:
                best_score[end] = score
                back[end] = start
    pieces: list[str] = []
    end = n
    while end > 0:
        start = back[end]
        pieces.append(tag[start:end])
        end = start
    pieces.reverse()
    return pieces


def corpus_word_counts(token_lists: Iterable[Iterable[str]]) -> dict[str, int]:
    """Frequency of lowercase word tokens, for augmenting a dictionary."""
    counts: dict[str, int] = {}
    for tokens in token_lists:
        for token in tokens:
            low = token.lower()
            counts[low] = counts.get(low, 0) + 1
    return counts


@lru_cache(maxsize=1)
def default_dictionary() -> SegmentationDictionary:
    """The shipped English word-frequency list."""
    path = importlib_resources.files("offlang.resources") / "wordlist.tsv"
    return SegmentationDictionary.from_file(str(path))
