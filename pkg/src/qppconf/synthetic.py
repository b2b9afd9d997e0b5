"""Seeded synthetic benchmark with planted relevance.

Each query owns a set of topical terms.  Relevant documents mix those terms
into Zipfian background text at a per-topic rate and with varying length,
and every topic also has "distractor" documents: long texts that mention a
single query term often.  The mix makes length normalization, smoothing and
feedback matter, so similarity configurations genuinely differ in MAP.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .analysis import DEFAULT_STOPWORDS, analyze

_ONSETS = ("b", "d", "f", "g", "k", "m", "n", "p", "r", "t", "v", "z", "br", "dr", "gl", "kr", "pl", "tr")
_VOWELS = ("a", "o", "u", "e", "i")
_CODAS = ("k", "m", "p", "t", "x", "z", "rk", "mp")
_FILLERS = ("the", "of", "and", "to", "in", "is", "that", "with")


@dataclass
class SyntheticBenchmark:
    docs: list[tuple[str, str]]
    topics: list[tuple[str, str]]
    qrels: list[tuple[str, str, int]]


def make_vocabulary(rng: np.random.Generator, size: int) -> list[str]:
    """Distinct pseudo-words that the analyzer leaves unchanged."""
    words: list[str] = []
    seen: set[str] = set()
    while len(words) < size:
        n_syl = int(rng.integers(2, 4))
        w = "".join(_ONSETS[rng.integers(len(_ONSETS))] + _VOWELS[rng.integers(len(_VOWELS))]
                    for _ in range(n_syl)) + _CODAS[rng.integers(len(_CODAS))]
        if w in seen or w in DEFAULT_STOPWORDS:
            continue
        seen.add(w)
        if analyze(w) == [w]:
            words.append(w)
    return words


def generate(seed: int = 0, n_docs: int = 10_000, n_queries: int = 50, vocab_size: int = 8000,
             terms_per_topic: int = 8) -> SyntheticBenchmark:
    if n_docs < 1 or n_queries < 1:
        raise ValueError("sizes must be positive")
    if n_docs < n_queries:
        raise ValueError("need at least one document per query")
    rng = np.random.default_rng(seed)
    vocab = make_vocabulary(rng, max(vocab_size, 200 + n_queries * terms_per_topic))
    V = len(vocab)
    ranks = np.arange(1, V + 1, dtype=np.float64)
    background = 1.0 / (ranks + 2.7)
    background /= background.sum()

    # topical terms come from the mid/low-frequency band, disjoint across topics
    band = rng.permutation(np.arange(200, V))[: n_queries * terms_per_topic]
    topic_terms = band.reshape(n_queries, terms_per_topic)
    topic_weights = 1.0 / np.arange(1, terms_per_topic + 1) ** 0.8
    topic_weights /= topic_weights.sum()

    texts: list[np.ndarray | None] = [None] * n_docs
    slots = rng.permutation(n_docs)
    cursor = 0
    topics, qrels = [], []
    # per-topic document budget; only binds on small corpora
    budget = max(1, (n_docs * 4 // 5) // n_queries)

    def take(n: int) -> np.ndarray:
        nonlocal cursor
        n = min(n, n_docs - cursor)
        out = slots[cursor:cursor + n]
        cursor += n
        return out

    def background_tokens(length: int) -> np.ndarray:
        return rng.choice(V, size=length, p=background)

    for q in range(n_queries):
        terms = topic_terms[q]
        qlen = int(rng.integers(2, 5))
        query_terms = terms[:qlen]
        # topical density and coverage set how hard the topic is
        density = rng.uniform(0.02, 0.12)
        coverage = rng.uniform(0.4, 0.9)
        n_rel = min(int(rng.integers(5, 41)), max(1, budget // 2))
        n_distract = min(int(rng.integers(5, 61)), budget - n_rel)
        rel_docs = take(n_rel)
        for d in rel_docs:
            length = int(np.clip(rng.lognormal(np.log(150), 0.8), 15, 2500))
            kept = terms[rng.random(terms_per_topic) < coverage]
            if len(kept) == 0:
                kept = terms[[int(rng.integers(terms_per_topic))]]
            w = topic_weights[np.isin(terms, kept)]
            n_top = max(1, rng.binomial(length, density * rng.uniform(0.5, 1.5)))
            toks = np.concatenate([rng.choice(kept, size=n_top, p=w / w.sum()),
                                   background_tokens(length - min(n_top, length - 1))])
            texts[d] = toks
            qrels.append((q, d, 1))
        for d in take(n_distract):
            length = int(np.clip(rng.lognormal(np.log(600), 0.6), 50, 5000))
            term = query_terms[int(rng.integers(qlen))]
            n_top = max(1, rng.binomial(length, density * rng.uniform(0.2, 0.8)))
            toks = np.concatenate([np.full(n_top, term), background_tokens(length)])
            texts[d] = toks
            qrels.append((q, d, 0))
        topics.append(query_terms.tolist())

    for d in range(n_docs):
        if texts[d] is None:
            length = int(np.clip(rng.lognormal(np.log(150), 0.8), 5, 2500))
            texts[d] = background_tokens(length)

    width = len(str(n_docs))
    doc_ids = [f"D{d:0{width}d}" for d in range(n_docs)]
    qwidth = len(str(n_queries))
    query_ids = [f"Q{q:0{qwidth}d}" for q in range(n_queries)]
    filler_words = np.array(_FILLERS, dtype=object)
    vocab_arr = np.array(vocab, dtype=object)
    docs = []
    for d in range(n_docs):
        # stopwords are mixed in so analysis has something to remove
        words = np.concatenate([vocab_arr[np.asarray(texts[d])],
                                filler_words[rng.integers(0, len(_FILLERS), len(texts[d]) // 6)]])
        docs.append((doc_ids[d], " ".join(words[rng.permutation(len(words))])))
    topic_pairs = [(query_ids[q], " ".join(vocab[t] for t in terms)) for q, terms in enumerate(topics)]
    qrel_rows = sorted((query_ids[q], doc_ids[d], g) for q, d, g in qrels)
    return SyntheticBenchmark(docs, topic_pairs, qrel_rows)


def write_benchmark(bench: SyntheticBenchmark, out_dir: str | Path, fmt: str = "jsonl") -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"topics": out / "topics.tsv", "qrels": out / "qrels.txt"}
    if fmt == "jsonl":
        paths["corpus"] = out / "corpus.jsonl"
        with open(paths["corpus"], "w", encoding="utf-8") as fh:
            for doc_id, text in bench.docs:
                fh.write(json.dumps({"id": doc_id, "text": text}) + "\n")
    elif fmt == "trec":
        paths["corpus"] = out / "corpus.trec"
        with open(paths["corpus"], "w", encoding="utf-8") as fh:
            for doc_id, text in bench.docs:
                fh.write(f"<DOC>\n<DOCNO> {doc_id} </DOCNO>\n<TEXT>\n{text}\n</TEXT>\n</DOC>\n")
    else:
        raise ValueError(f"unknown corpus format {fmt!r}")
    with open(paths["topics"], "w", encoding="utf-8") as fh:
        for qid, text in bench.topics:
            fh.write(f"{qid}\t{text}\n")
    with open(paths["qrels"], "w", encoding="utf-8") as fh:
        for qid, doc_id, grade in bench.qrels:
            fh.write(f"{qid} 0 {doc_id} {grade}\n")
    return paths
