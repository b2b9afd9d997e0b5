"""Benchmark-level utility of each configuration and selection of the best one."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .index import CorpusIndex
from .qpp import (
    NQC_FLOOR,
    POSTERIOR_EPS,
    WEIGHT_DELTA,
    QueryLikelihood,
    QueryWeights,
    corpus_score,
    difficulty_scores,
    focus_table,
    nqc,
    per_query_likelihood,
    query_weights,
    relevance_table,
)
from .retrieval import RankedList, run_query
from .similarity import (
    BM25,
    DFR,
    H3_MU,
    IB,
    LOG_FLOOR,
    Z_EXPONENT,
    Diagnostics,
    SimilarityConfig,
)

log = logging.getLogger(__name__)


class BenchmarkError(RuntimeError):
    """The benchmark cannot be evaluated at all (e.g. every query is empty)."""


class QuerySetMismatch(ValueError):
    pass


@dataclass
class QueryBenchmark:
    """Query sample: ids, raw texts and analyzed terms, in input order."""

    name: str
    ids: list[str]
    texts: list[str]
    terms: list[list[str]]

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[str, str]], index: CorpusIndex, name: str = "benchmark"):
        ids, texts = [q for q, _ in pairs], [t for _, t in pairs]
        if len(set(ids)) != len(ids):
            dup = sorted({q for q in ids if ids.count(q) > 1})
            raise ValueError(f"duplicate query ids: {dup}")
        return cls(name, ids, texts, [index.analyze(t) for t in texts])


def read_topics(path: str | Path) -> list[tuple[str, str]]:
    """Topics as TSV lines ``qid<TAB>query text``."""
    pairs = []
    with open(path, encoding="utf-8", errors="replace") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            qid, sep, text = line.partition("\t")
            if not sep or not qid.strip():
                raise ValueError(f"{path}:{lineno}: expected 'qid<TAB>query text'")
            pairs.append((qid.strip(), text))
    return pairs


@dataclass(frozen=True)
class ConfigUtility:
    config: str
    utility: float
    per_query_contributions: dict[str, float]


def utility(weights: QueryWeights | Mapping[str, float],
            likelihoods: Mapping[str, QueryLikelihood | float], config: str = "") -> ConfigUtility:
    """Weighted sum of per-query likelihoods, accumulated in ascending query-id order."""
    w = weights.weights if isinstance(weights, QueryWeights) else weights
    if set(w) != set(likelihoods):
        diff = sorted(set(w) ^ set(likelihoods))
        raise QuerySetMismatch(f"weights and likelihoods cover different queries: {diff}")
    contrib = {}
    total = 0.0
    for q in sorted(w):
        lk = likelihoods[q]
        value = lk.value if isinstance(lk, QueryLikelihood) else float(lk)
        contrib[q] = value * w[q]
        total += contrib[q]
    return ConfigUtility(config, total, contrib)


@dataclass
class Sweep:
    """Everything computed for one (benchmark, config set): lists, NQC, likelihoods."""

    configs: dict[str, SimilarityConfig]
    query_ids: list[str]
    lists: dict[str, dict[str, RankedList]] = field(default_factory=dict)
    nqc: dict[str, dict[str, float]] = field(default_factory=dict)
    likelihoods: dict[str, dict[str, QueryLikelihood]] = field(default_factory=dict)
    diagnostics: dict[str, dict[str, int]] = field(default_factory=dict)


@dataclass
class SelectionReport:
    benchmark: str
    utilities: list[ConfigUtility]
    chosen: str
    skipped: list[str]
    weights: QueryWeights
    difficulty: dict[str, float]
    constants: dict
    diagnostics: dict[str, dict[str, int]]
    inputs: dict = field(default_factory=dict)
    sweep: Sweep | None = field(default=None, repr=False)

    @property
    def ranking(self) -> list[str]:
        return [u.config for u in self.utilities]

    def to_dict(self) -> dict:
        return {
            "benchmark": self.benchmark,
            "chosen": self.chosen,
            "ranking": [{"rank": i, "config": u.config, "utility": u.utility}
                        for i, u in enumerate(self.utilities, 1)],
            "queries": {
                "evaluated": sorted(self.weights.weights),
                "skipped": self.skipped,
            },
            "query_weights": [
                {"query_id": q, "difficulty_rank": self.weights.difficulty_rank[q],
                 "difficulty": self.difficulty[q], "weight": self.weights.weights[q]}
                for q in self.weights.weights
            ],
            "constants": self.constants,
            "diagnostics": self.diagnostics,
            "input": self.inputs,
        }

    def to_text(self) -> str:
        width = max(len(u.config) for u in self.utilities)
        lines = [f"benchmark: {self.benchmark}",
                 f"queries: {len(self.weights)} evaluated, {len(self.skipped)} skipped",
                 f"chosen: {self.chosen}", "",
                 f"{'rank':>4}  {'config':<{width}}  utility"]
        for i, u in enumerate(self.utilities, 1):
            lines.append(f"{i:>4}  {u.config:<{width}}  {u.utility:.6g}")
        return "\n".join(lines) + "\n"


def decision_constants(k: int) -> dict:
    return {
        "k": k,
        "rm_defaults": {"fbdocs": 10, "fbterms": 25, "lambda": 0.5},
        "default_dfr": DFR().name,
        "default_ib": IB().name,
        "relevance_estimator": BM25().name,
        "posterior_shift_eps": POSTERIOR_EPS,
        "weight_shift_delta": WEIGHT_DELTA,
        "nqc_floor": NQC_FLOOR,
        "nqc_std": "population",
        "log_floor": LOG_FLOOR,
        "h3_mu": H3_MU,
        "z_exponent": Z_EXPONENT,
        "difficulty_order": "ascending predicted performance (hardest first)",
        "tie_break": "external id ascending (documents), canonical name ascending (configs)",
    }


def _sweep_config(index: CorpusIndex, config: SimilarityConfig, bench: QueryBenchmark,
                  query_ids: list[str], k: int, relevance: dict[str, np.ndarray], focus: np.ndarray):
    diag = Diagnostics()
    lists, nqcs, lks = {}, {}, {}
    empty = zero_corpus = 0
    terms = dict(zip(bench.ids, bench.terms))
    for q in query_ids:
        rl = run_query(index, config, terms[q], k, q, diag)
        lists[q] = rl
        if len(rl) == 0:
            empty += 1
            nqcs[q] = 0.0
        else:
            cs = corpus_score(index, config, terms[q], rl.model)
            if cs == 0.0:
                zero_corpus += 1
            nqcs[q] = nqc(rl.scores, cs)
        lks[q] = per_query_likelihood(index, terms[q], rl, relevance[q], focus)
    stats = {"clamped": diag.clamped, "floored": diag.floored, "empty_lists": empty,
             "zero_corpus_score": zero_corpus}
    return lists, nqcs, lks, stats


def run_sweep(index: CorpusIndex, configs: Sequence[SimilarityConfig], bench: QueryBenchmark,
              k: int = 100, jobs: int = 1) -> tuple[Sweep, list[str]]:
    """Retrieve, predict and estimate every (query, config) pair.

    Returns the sweep and the ids of queries skipped for empty analysis.
    """
    by_name: dict[str, SimilarityConfig] = {}
    for c in configs:
        if c.name in by_name:
            raise ValueError(f"duplicate config {c.name!r}")
        by_name[c.name] = c
    skipped = [q for q, t in zip(bench.ids, bench.terms) if not t]
    for q in skipped:
        log.warning("query %s is empty after analysis; skipped", q)
    query_ids = sorted(q for q, t in zip(bench.ids, bench.terms) if t)
    if not query_ids:
        raise BenchmarkError("every query is empty after analysis")
    terms = dict(zip(bench.ids, bench.terms))
    focus = focus_table(index)
    names = sorted(by_name)
    sweep = Sweep({n: by_name[n] for n in names}, query_ids)
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        rel_tables = list(pool.map(lambda q: relevance_table(index, terms[q]), query_ids))
        relevance = dict(zip(query_ids, rel_tables))
        results = list(pool.map(
            lambda n: _sweep_config(index, by_name[n], bench, query_ids, k, relevance, focus), names))
    for n, (lists, nqcs, lks, stats) in zip(names, results):
        sweep.lists[n] = lists
        sweep.nqc[n] = nqcs
        sweep.likelihoods[n] = lks
        sweep.diagnostics[n] = stats
    return sweep, skipped


def select(configs: Sequence[SimilarityConfig], bench: QueryBenchmark, index: CorpusIndex,
           k: int = 100, jobs: int = 1) -> SelectionReport:
    """Pick the configuration with the highest weighted benchmark likelihood."""
    if len(configs) < 2:
        raise ValueError("need at least two configurations to select from")
    if not bench.ids:
        raise BenchmarkError("empty query benchmark")
    sweep, skipped = run_sweep(index, configs, bench, k, jobs)
    per_query = {q: {n: sweep.nqc[n][q] for n in sweep.configs} for q in sweep.query_ids}
    v = difficulty_scores(per_query)
    weights = query_weights(v)
    utils = [utility(weights, sweep.likelihoods[n], n) for n in sweep.configs]
    for u in utils:
        if not math.isfinite(u.utility):
            raise BenchmarkError(f"non-finite utility for {u.config}")
    utils.sort(key=lambda u: (-u.utility, u.config))
    constants = decision_constants(k)
    return SelectionReport(
        benchmark=bench.name, utilities=utils, chosen=utils[0].config, skipped=skipped,
        weights=weights, difficulty=v, constants=constants, diagnostics=sweep.diagnostics,
        sweep=sweep)
