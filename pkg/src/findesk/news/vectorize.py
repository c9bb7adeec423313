"""tf-idf document vectors for same-date news clustering.

idf is smoothed: ln((1+N)/(1+df)) + 1. Vectors are L2-normalized (zero
vectors stay zero). Tokenization is Unicode word segmentation with Latin
lowercasing; runs of Han characters become overlapping character bigrams so
Chinese text clusters without an external segmenter.
"""
from __future__ import annotations

import math
import re
import unicodedata
from dataclasses import dataclass
from typing import Mapping, Sequence

_WORD = re.compile(r"[\w]+", re.UNICODE)
_HAN = re.compile(r"[一-鿿]+")


@dataclass(frozen=True)
class DocVector:
    article_id: int
    weights: Mapping[str, float]

    def norm(self) -> float:
        return math.sqrt(sum(w * w for w in self.weights.values()))


def tokenize(text: str) -> list[str]:
    tokens: list[str] = []
    for word in _WORD.findall(unicodedata.normalize("NFKC", text)):
        parts = _HAN.split(word)
        hans = _HAN.findall(word)
        for i, part in enumerate(parts):
            if part:
                tokens.append(part.lower())
            if i < len(hans):
                tokens.extend(_han_bigrams(hans[i]))
    return tokens


def _han_bigrams(run: str) -> list[str]:
    if len(run) == 1:
        return [run]
    return [run[i:i + 2] for i in range(len(run) - 1)]


def vectorize(texts: Sequence[str]) -> list[DocVector]:
    if not texts:
        raise ValueError("corpus must be non-empty")
    docs = [tokenize(t) for t in texts]
    n = len(docs)
    df: dict[str, int] = {}
    for toks in docs:
        for term in set(toks):
            df[term] = df.get(term, 0) + 1
    idf = {term: math.log((1 + n) / (1 + d)) + 1.0 for term, d in df.items()}
    vectors = []
    for i, toks in enumerate(docs):
        tf: dict[str, int] = {}
        for term in toks:
            tf[term] = tf.get(term, 0) + 1
        weights = {term: count * idf[term] for term, count in tf.items()}
        norm = math.sqrt(sum(w * w for w in weights.values()))
        if norm > 0:
            weights = {term: w / norm for term, w in weights.items()}
        vectors.append(DocVector(article_id=i, weights=weights))
    return vectors


def cosine(a: Mapping[str, float], b: Mapping[str, float]) -> float:
    if len(b) < len(a):
        a, b = b, a
    dot = sum(w * b.get(term, 0.0) for term, w in a.items())
    na = math.sqrt(sum(w * w for w in a.values()))
    nb = math.sqrt(sum(w * w for w in b.values()))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return dot / (na * nb)
