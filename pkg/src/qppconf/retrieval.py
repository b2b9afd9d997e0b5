"""Top-k retrieval, relevance-model reranking and TREC run files."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import kernels
from .index import CorpusIndex
from .similarity import LOG_FLOOR, Diagnostics, Rerank, SimilarityConfig, family_code


class EmptyQueryError(ValueError):
    pass


@dataclass(frozen=True)
class ScoredDoc:
    internal_id: int
    external_id: str
    score: float
    rank: int


class RankedList:
    """Top-k result list of one (query, config) pair, best first."""

    def __init__(self, query_id: str, config: str, k: int, doc_ids: np.ndarray, scores: np.ndarray,
                 external_ids: Sequence[str]):
        self.query_id = query_id
        self.config = config
        self.k_requested = k
        self.doc_ids = np.asarray(doc_ids, dtype=np.int32)
        self.scores = np.asarray(scores, dtype=np.float64)
        self.external_ids = tuple(external_ids)
        self.model: dict[str, float] | None = None  # relevance model, for reranked lists

    def __len__(self) -> int:
        return len(self.doc_ids)

    @property
    def items(self) -> list[ScoredDoc]:
        return [ScoredDoc(int(d), e, float(s), r)
                for r, (d, e, s) in enumerate(zip(self.doc_ids, self.external_ids, self.scores), 1)]

    def __eq__(self, other) -> bool:
        return (isinstance(other, RankedList) and self.query_id == other.query_id
                and self.config == other.config and self.k_requested == other.k_requested
                and np.array_equal(self.doc_ids, other.doc_ids)
                and np.array_equal(self.scores, other.scores))

    def __repr__(self) -> str:
        return f"RankedList({self.query_id!r}, {self.config!r}, n={len(self)})"


def query_term_weights(index: CorpusIndex, query: Sequence[str]) -> list[tuple[str, int]]:
    """Distinct query terms in first-appearance order with their query frequency."""
    counts: dict[str, int] = {}
    for t in query:
        counts[t] = counts.get(t, 0) + 1
    return list(counts.items())


def accumulate(index: CorpusIndex, config: SimilarityConfig, query: Sequence[str],
               diag: Diagnostics | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Document-at-a-time scores over the union of query-term postings.

    Returns the dense score accumulator and the sorted candidate ids.
    """
    family, params = family_code(config)
    acc = np.zeros(index.doc_count, dtype=np.float64)
    matched = []
    N, total, avgdl = float(index.doc_count), float(index.total_terms), index.avg_doc_length
    for term, qtf in query_term_weights(index, query):
        t = index.term_id(term)
        if t < 0:
            continue
        docs, tfs = index.posting_arrays(t)
        clamped, floored = kernels.score_postings(
            family, params[0], params[1], params[2], docs, tfs, index.doc_lengths,
            float(index.df_array[t]), float(index.ctf_array[t]), N, total, avgdl, float(qtf), acc)
        if diag is not None:
            diag.merge(clamped, floored)
        matched.append(docs)
    cands = np.unique(np.concatenate(matched)) if matched else np.zeros(0, dtype=np.int32)
    return acc, cands


def top_k(index: CorpusIndex, scores: np.ndarray, candidates: np.ndarray, k: int) -> np.ndarray:
    """Candidate ids ordered by score descending, ties by external id ascending."""
    s = scores[candidates]
    order = np.lexsort((index.ext_rank[candidates], -s))
    return candidates[order[:k]].astype(np.int32)


def _ranked(index: CorpusIndex, query_id: str, name: str, k: int, ids: np.ndarray,
            scores: np.ndarray) -> RankedList:
    return RankedList(query_id, name, k, ids, scores, [index.external_ids[i] for i in ids.tolist()])


def run_query(index: CorpusIndex, config: SimilarityConfig, query: Sequence[str], k: int = 100,
              query_id: str = "", diag: Diagnostics | None = None) -> RankedList:
    if k < 1:
        raise ValueError("k must be >= 1")
    if not query:
        raise EmptyQueryError(f"query {query_id!r} is empty after analysis")
    if isinstance(config, Rerank):
        base = run_query(index, config.base, query, k, query_id, diag)
        if len(base) == 0:
            return RankedList(query_id, config.name, k, base.doc_ids, base.scores, ())
        model = build_rm1(index, base, query, config.fb_docs, config.fb_terms, config.base.mu)
        if config.model == "RM3":
            model = build_rm3(model, query, config.interpolation, config.fb_terms)
        out = rerank(index, base, model, config.base.mu)
        out.config = config.name
        out.model = model
        return out
    acc, cands = accumulate(index, config, query, diag)
    ids = top_k(index, acc, cands, k)
    return _ranked(index, query_id, config.name, k, ids, acc[ids])


# --------------------------------------------------------------------------
# relevance models

def _term_tfs(index: CorpusIndex, term_id: int, docs: np.ndarray) -> np.ndarray:
    """tf of one term in each of ``docs`` (0 where absent)."""
    out = np.zeros(len(docs), dtype=np.float64)
    if term_id < 0:
        return out
    pdocs, ptfs = index.posting_arrays(term_id)
    pos = np.searchsorted(pdocs, docs)
    pos_c = np.minimum(pos, len(pdocs) - 1)
    hit = pdocs[pos_c] == docs
    out[hit] = ptfs[pos_c[hit]]
    return out


def smoothed_log_probs(index: CorpusIndex, term: str, docs: np.ndarray, mu: float) -> np.ndarray:
    """log of the Dirichlet-smoothed ``p(term|d)`` for each doc; non-positive arguments floored."""
    t = index.term_id(term)
    tf = _term_tfs(index, t, docs)
    pc = (0.0 if t < 0 else float(index.ctf_array[t])) / index.total_terms
    p = (tf + mu * pc) / (index.doc_lengths[docs] + mu)
    return np.log(np.where(p > 0.0, p, LOG_FLOOR))


def query_log_likelihood(index: CorpusIndex, query: Sequence[str], docs: np.ndarray, mu: float) -> np.ndarray:
    ll = np.zeros(len(docs), dtype=np.float64)
    for term, qtf in query_term_weights(index, query):
        ll += qtf * smoothed_log_probs(index, term, docs, mu)
    return ll


def _truncate(weights: Mapping[str, float], n_terms: int) -> dict[str, float]:
    items = sorted(((t, w) for t, w in weights.items() if w > 0.0), key=lambda tw: (-tw[1], tw[0]))[:n_terms]
    total = math.fsum(w for _, w in items)
    return {t: w / total for t, w in items}


def build_rm1(index: CorpusIndex, base_list: RankedList, query: Sequence[str], fb_docs: int = 10,
              fb_terms: int = 25, mu: float = 2000.0) -> dict[str, float]:
    """Relevance model from the top ``fb_docs`` of an LM-Dirichlet list.

    ``p(w|R)`` is the mixture of feedback-document MLE models weighted by each
    document's normalized query likelihood, truncated to ``fb_terms`` terms.
    Returned mapping is ordered by weight descending, ties by term.
    """
    if len(base_list) == 0:
        raise ValueError("cannot build a relevance model from an empty list")
    if fb_docs < 1:
        raise ValueError("fb_docs must be >= 1")
    docs = base_list.doc_ids[:fb_docs]
    ll = query_log_likelihood(index, query, docs, mu)
    w = np.exp(ll - ll.max())
    w /= w.sum()
    mix: dict[str, float] = defaultdict(float)
    for d, wd in zip(docs.tolist(), w.tolist()):
        terms, tfs = index.doc_term_arrays(d)
        length = float(index.doc_lengths[d])
        for t, f in zip(terms.tolist(), tfs.tolist()):
            mix[index.vocab[t]] += (f / length) * wd
    return _truncate(mix, fb_terms)


def build_rm3(rm1: Mapping[str, float], query: Sequence[str], interpolation: float = 0.5,
              fb_terms: int = 25) -> dict[str, float]:
    """Interpolate the query MLE model (weight ``interpolation``) with ``rm1``."""
    if not 0.0 <= interpolation <= 1.0:
        raise ValueError("interpolation must be in [0, 1]")
    qlen = len(query)
    mixed: dict[str, float] = defaultdict(float)
    for t, w in rm1.items():
        mixed[t] += (1.0 - interpolation) * w
    for t in query:
        mixed[t] += interpolation / qlen
    return _truncate(mixed, fb_terms)


def rerank(index: CorpusIndex, base_list: RankedList, model: Mapping[str, float], mu: float) -> RankedList:
    """Rescore every document of ``base_list`` by ``sum_w p(w|R) log p_mu(w|d)``."""
    if len(base_list) == 0:
        raise ValueError("cannot rerank an empty list")
    docs = base_list.doc_ids
    scores = np.zeros(len(docs), dtype=np.float64)
    for term, weight in model.items():
        scores += weight * smoothed_log_probs(index, term, docs, mu)
    order = np.lexsort((index.ext_rank[docs], -scores))
    ids = docs[order]
    return _ranked(index, base_list.query_id, base_list.config, base_list.k_requested, ids, scores[order])


# --------------------------------------------------------------------------
# run files

def format_run(lists: Iterable[RankedList]) -> str:
    lines = []
    for rl in lists:
        for r, (e, s) in enumerate(zip(rl.external_ids, rl.scores.tolist()), 1):
            lines.append(f"{rl.query_id} Q0 {e} {r} {s:.6f} {rl.config}\n")
    return "".join(lines)


def write_run(path: str | Path, lists: Iterable[RankedList]) -> None:
    Path(path).write_text(format_run(lists), encoding="utf-8")


def read_run(path: str | Path) -> dict[str, dict[str, list[tuple[int, str, float]]]]:
    """Parse a 6-column run file into ``{tag: {qid: [(rank, docid, score), ...]}}`` sorted by rank."""
    runs: dict[str, dict[str, list]] = defaultdict(lambda: defaultdict(list))
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 6:
                raise ValueError(f"{path}:{lineno}: expected 6 columns, got {len(parts)}")
            qid, _, docid, rank, score, tag = parts
            try:
                runs[tag][qid].append((int(rank), docid, float(score)))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: bad rank or score") from None
    return {tag: {q: sorted(v) for q, v in per_q.items()} for tag, per_q in runs.items()}
