"""Label-free relevance estimators: per-query likelihood, NQC, and query-difficulty weights."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .index import CorpusIndex, idf, idf_array
from .retrieval import RankedList, accumulate, query_term_weights
from .similarity import (
    BM25,
    LOG_FLOOR,
    LMDirichlet,
    Rerank,
    SimilarityConfig,
    TermQueryStats,
    score,
)

log = logging.getLogger(__name__)

NQC_FLOOR = 1e-9
POSTERIOR_EPS = 1e-6
WEIGHT_DELTA = 1e-6


@dataclass(frozen=True)
class QueryLikelihood:
    query_id: str
    config: str
    value: float
    degenerate: bool = False


@dataclass
class QueryWeights:
    """``weights`` maps query id to weight in (0, 1], hardest query first."""

    weights: dict[str, float]
    difficulty_rank: dict[str, int] = field(default_factory=dict)

    def __getitem__(self, query_id: str) -> float:
        return self.weights[query_id]

    def __len__(self) -> int:
        return len(self.weights)


# --------------------------------------------------------------------------
# document focus

def doc_focus(index: CorpusIndex, internal_id: int) -> float:
    """``exp(-KL(p(.|d) || nidf))`` over the distinct terms of ``d``; 0 for an empty document."""
    length = int(index.doc_lengths[internal_id])
    if length == 0:
        log.info("document %s is empty; focus set to 0", index.external_ids[internal_id])
        return 0.0
    terms, tfs = index.doc_term_arrays(internal_id)
    idfs = [idf(index, index.vocab[t]) for t in terms.tolist()]
    idf_sum = math.fsum(idfs)
    kl = 0.0
    for f, w_idf in zip(tfs.tolist(), idfs):
        p = f / length
        kl += p * math.log(p / (w_idf / idf_sum))
    return min(1.0, math.exp(-kl))


def focus_table(index: CorpusIndex) -> np.ndarray:
    """``doc_focus`` for every document, vectorized and cached on the index."""
    if index._focus is not None:
        return index._focus
    lengths = index.doc_lengths
    nonempty = np.diff(index.doc_offsets) > 0
    term_idf = idf_array(index)[index.doc_terms_flat]
    doc_of = np.repeat(np.arange(index.doc_count), np.diff(index.doc_offsets))
    p = index.doc_tfs_flat / lengths[doc_of]
    starts = index.doc_offsets[:-1][nonempty]
    idf_sum = np.zeros(index.doc_count)
    idf_sum[nonempty] = np.add.reduceat(term_idf, starts)
    nidf = term_idf / idf_sum[doc_of]
    kl = np.zeros(index.doc_count)
    kl[nonempty] = np.add.reduceat(p * np.log(p / nidf), starts)
    focus = np.where(nonempty, np.minimum(1.0, np.exp(-kl)), 0.0)
    focus.setflags(write=False)
    index._focus = focus
    return focus


# --------------------------------------------------------------------------
# query-dependent terms

def query_doc_relevance(index: CorpusIndex, query: Sequence[str], internal_id: int) -> float:
    """Raw default-BM25 score of one document for ``query``; 0 if no term matches."""
    stats = []
    dl = int(index.doc_lengths[internal_id])
    for term, qtf in query_term_weights(index, query):
        t = index.term_id(term)
        tf = 0
        if t >= 0:
            docs, tfs = index.posting_arrays(t)
            pos = int(np.searchsorted(docs, internal_id))
            if pos < len(docs) and docs[pos] == internal_id:
                tf = int(tfs[pos])
        stats.append(TermQueryStats(tf, index.df(term), index.ctf(term), dl, index.doc_count,
                                    index.total_terms, index.avg_doc_length, qtf))
    if not any(st.tf_in_doc for st in stats):
        return 0.0
    return score(BM25(), stats)


def relevance_table(index: CorpusIndex, query: Sequence[str]) -> np.ndarray:
    """``query_doc_relevance`` for every document at once."""
    acc, _ = accumulate(index, BM25(), query)
    return acc


def list_posterior(scores: Sequence[float] | np.ndarray) -> np.ndarray:
    """Score-proportional distribution over a result list.

    Scores are shifted so the minimum becomes a small positive epsilon
    (``1e-6`` of the score range) before normalizing; equal scores give
    the uniform distribution.
    """
    s = np.asarray(scores, dtype=np.float64)
    if len(s) == 0:
        raise ValueError("empty result list")
    lo, hi = s.min(), s.max()
    if hi == lo:
        return np.full(len(s), 1.0 / len(s))
    shifted = s - lo + POSTERIOR_EPS * (hi - lo)
    return shifted / shifted.sum()


def per_query_likelihood(index: CorpusIndex, query: Sequence[str], ranked: RankedList,
                         relevance: np.ndarray | None = None, focus: np.ndarray | None = None
                         ) -> QueryLikelihood:
    """Query-dependent quality times corpus-dependent quality of the result list.

    ``relevance`` and ``focus`` are optional precomputed per-document tables.
    """
    if len(ranked) == 0:
        return QueryLikelihood(ranked.query_id, ranked.config, 0.0, degenerate=True)
    docs = ranked.doc_ids
    if relevance is None:
        rel = np.array([query_doc_relevance(index, query, d) for d in docs.tolist()])
    else:
        rel = relevance[docs]
    if focus is None:
        foc = np.array([doc_focus(index, d) for d in docs.tolist()])
    else:
        foc = focus[docs]
    post = list_posterior(ranked.scores)
    query_part = math.fsum((rel * post).tolist())
    corpus_part = math.fsum(foc.tolist()) / len(docs)
    return QueryLikelihood(ranked.query_id, ranked.config, query_part * corpus_part)


# --------------------------------------------------------------------------
# NQC

def corpus_score(index: CorpusIndex, config: SimilarityConfig, query: Sequence[str],
                 model: Mapping[str, float] | None = None) -> float:
    """Score of the whole corpus treated as a single document.

    LM-Dirichlet uses the query log-likelihood of the collection model, since
    its shifted per-term form is identically zero on the corpus document.
    Reranked lists use the cross-entropy of their relevance ``model`` with
    the collection model.
    """
    T = index.total_terms
    if isinstance(config, Rerank):
        if model is None:
            raise ValueError("relevance model required for a rerank config")
        return math.fsum(w * math.log(max(index.ctf(t) / T, LOG_FLOOR)) for t, w in model.items())
    if isinstance(config, LMDirichlet):
        return math.fsum(qtf * math.log(max(index.ctf(t) / T, LOG_FLOOR))
                         for t, qtf in query_term_weights(index, query))
    stats = [TermQueryStats(index.ctf(t), index.df(t), index.ctf(t), T, index.doc_count, T,
                            index.avg_doc_length, qtf)
             for t, qtf in query_term_weights(index, query)]
    if not any(st.tf_in_doc for st in stats):
        return 0.0
    return score(config, stats)


def nqc(scores: Sequence[float] | np.ndarray, corpus: float) -> float:
    """Population standard deviation of ``scores`` over ``|corpus|``; 0 when ``corpus`` is 0."""
    s = np.asarray(scores, dtype=np.float64)
    if len(s) == 0:
        raise ValueError("empty result list")
    if corpus == 0.0:
        log.debug("zero corpus score; NQC set to 0")
        return 0.0
    return float(np.std(s)) / abs(corpus)


def difficulty_scores(table: Mapping[str, Mapping[str, float]]) -> dict[str, float]:
    """Per query, sum over configs of ``ln(max(NQC, 1e-9))``.

    ``table`` maps query id to ``{config name: NQC}``; configs are summed in
    name order.
    """
    return {q: math.fsum(math.log(max(per[c], NQC_FLOOR)) for c in sorted(per))
            for q, per in table.items()}


def cumulative_weights(u: Sequence[float]) -> list[float]:
    """``1 - sum_{j<i} u_j / sum u`` for positive ``u`` already in difficulty order."""
    total = math.fsum(u)
    out = []
    prefix = 0.0
    for uq in u:
        out.append(1.0 - prefix / total)
        prefix += uq
    return out


def query_weights(v: Mapping[str, float]) -> QueryWeights:
    """Cumulative difficulty weights.

    Queries are sorted by ``v`` ascending (hardest first, ties by id), shifted
    to positive values ``u``, and query ``i`` gets ``1 - sum_{j<i} u_j / sum u``.
    """
    if not v:
        raise ValueError("no queries to weight")
    order = sorted(v, key=lambda q: (v[q], q))
    lo, hi = v[order[0]], v[order[-1]]
    delta = WEIGHT_DELTA * (hi - lo) if hi > lo else 1.0
    u = [v[q] - lo + delta for q in order]
    weights = dict(zip(order, cumulative_weights(u)))
    return QueryWeights(weights, {q: i for i, q in enumerate(order, 1)})
