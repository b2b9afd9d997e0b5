"""Naive reference implementations used as test oracles.

These work from plain Python term lists and dicts, never from the index
arrays or the kernels they are checking.
"""

from __future__ import annotations

import math
from collections import Counter

from qppconf.similarity import Rerank, TermQueryStats, score


class NaiveCorpus:
    def __init__(self, ids, analyzed):
        self.ids = list(ids)
        self.tfs = [Counter(terms) for terms in analyzed]
        self.lengths = [len(terms) for terms in analyzed]
        self.N = len(self.ids)
        self.total = sum(self.lengths)
        self.avgdl = self.total / self.N
        self.df = Counter()
        self.ctf = Counter()
        for c in self.tfs:
            for t, f in c.items():
                self.df[t] += 1
                self.ctf[t] += f

    def stats(self, query_terms, d):
        qcount = Counter()
        order = []
        for t in query_terms:
            if t not in qcount:
                order.append(t)
            qcount[t] += 1
        return [TermQueryStats(self.tfs[d].get(t, 0), self.df[t], self.ctf[t], self.lengths[d],
                               self.N, self.total, self.avgdl, qcount[t]) for t in order]


def _sort(corpus, scored):
    return sorted(scored, key=lambda ds: (-ds[1], corpus.ids[ds[0]]))


def brute_force_first_stage(corpus: NaiveCorpus, config, query_terms, k):
    scored = []
    for d in range(corpus.N):
        stats = corpus.stats(query_terms, d)
        if any(st.tf_in_doc > 0 for st in stats):
            scored.append((d, score(config, stats)))
    return _sort(corpus, scored)[:k]


def smoothed(corpus, term, d, mu):
    p = (corpus.tfs[d].get(term, 0) + mu * corpus.ctf[term] / corpus.total) / (corpus.lengths[d] + mu)
    return math.log(p) if p > 0 else math.log(1e-10)


def naive_rm1(corpus, base, query_terms, fb_docs, fb_terms, mu):
    top = [d for d, _ in base[:fb_docs]]
    ll = {d: sum(smoothed(corpus, t, d, mu) for t in query_terms) for d in top}
    m = max(ll.values())
    z = sum(math.exp(v - m) for v in ll.values())
    pq = {d: math.exp(ll[d] - m) / z for d in top}
    mix = Counter()
    for d in top:
        for t, f in corpus.tfs[d].items():
            mix[t] += f / corpus.lengths[d] * pq[d]
    return _truncate(mix, fb_terms)


def _truncate(weights, n):
    items = sorted(((t, w) for t, w in weights.items() if w > 0), key=lambda x: (-x[1], x[0]))[:n]
    s = sum(w for _, w in items)
    return {t: w / s for t, w in items}


def naive_rm3(rm1, query_terms, lam, fb_terms):
    mixed = Counter()
    for t, w in rm1.items():
        mixed[t] += (1 - lam) * w
    for t in query_terms:
        mixed[t] += lam / len(query_terms)
    return _truncate(mixed, fb_terms)


def brute_force(corpus: NaiveCorpus, config, query_terms, k):
    """``[(doc, score)]`` best first, by scoring every document."""
    if not isinstance(config, Rerank):
        return brute_force_first_stage(corpus, config, query_terms, k)
    base = brute_force_first_stage(corpus, config.base, query_terms, k)
    if not base:
        return []
    model = naive_rm1(corpus, base, query_terms, config.fb_docs, config.fb_terms, config.base.mu)
    if config.model == "RM3":
        model = naive_rm3(model, query_terms, config.interpolation, config.fb_terms)
    rescored = [(d, sum(w * smoothed(corpus, t, d, config.base.mu) for t, w in model.items()))
                for d, _ in base]
    return _sort(corpus, rescored)


def naive_ap(ranked_ids, relevant):
    """AP straight from the definition: mean of precision@i at each relevant rank."""
    if not relevant:
        raise ValueError("no relevant docs")
    precisions = []
    for i in range(1, len(ranked_ids) + 1):
        if ranked_ids[i - 1] in relevant:
            precisions.append(sum(1 for d in ranked_ids[:i] if d in relevant) / i)
    return sum(precisions) / len(relevant)


def naive_kendall(a, b):
    """Tau-a by enumerating all pairs."""
    pa = {x: i for i, x in enumerate(a)}
    pb = {x: i for i, x in enumerate(b)}
    items = list(a)
    conc = disc = 0
    for i in range(len(items)):
        for j in range(i + 1, len(items)):
            x, y = items[i], items[j]
            s = (pa[x] - pa[y]) * (pb[x] - pb[y])
            if s > 0:
                conc += 1
            elif s < 0:
                disc += 1
    n = len(items)
    return (conc - disc) / (n * (n - 1) / 2)


def naive_focus(term_counts: Counter, idf_of) -> float:
    length = sum(term_counts.values())
    idfs = {t: idf_of(t) for t in term_counts}
    s = sum(idfs.values())
    kl = sum((f / length) * math.log((f / length) / (idfs[t] / s)) for t, f in term_counts.items())
    return math.exp(-kl)
