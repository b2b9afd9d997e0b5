"""Labeled post-analysis: qrels, AP/MAP, MAP lifts and Kendall-tau.

Nothing here is consulted during selection.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

log = logging.getLogger(__name__)


class QrelsFormatError(ValueError):
    pass


class QrelSet:
    """Graded judgments; grades >= 1 count as relevant."""

    def __init__(self, judgments: Mapping[tuple[str, str], int]):
        self.judgments = dict(judgments)
        self.relevant_count: dict[str, int] = {}
        self._relevant: dict[str, set[str]] = {}
        for (q, d), g in self.judgments.items():
            if g < 0:
                raise ValueError(f"negative grade for ({q}, {d})")
            self.relevant_count.setdefault(q, 0)
            self._relevant.setdefault(q, set())
            if g >= 1:
                self.relevant_count[q] += 1
                self._relevant[q].add(d)

    @property
    def query_ids(self) -> set[str]:
        return set(self.relevant_count)

    def relevant(self, query_id: str) -> set[str]:
        return self._relevant.get(query_id, set())

    def grade(self, query_id: str, doc_id: str) -> int:
        return self.judgments.get((query_id, doc_id), 0)


def parse_qrels(path: str | Path) -> QrelSet:
    """Read ``qid iter docid grade`` lines; later duplicates override earlier ones."""
    judgments: dict[tuple[str, str], int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 4:
                raise QrelsFormatError(f"{path}:{lineno}: expected 4 columns, got {len(parts)}")
            qid, _, docid, grade = parts
            try:
                g = int(grade)
            except ValueError:
                raise QrelsFormatError(f"{path}:{lineno}: grade {grade!r} is not an integer") from None
            if g < 0:
                raise QrelsFormatError(f"{path}:{lineno}: negative grade")
            if (qid, docid) in judgments:
                log.warning("%s:%d: duplicate judgment for (%s, %s) overrides earlier line",
                            path, lineno, qid, docid)
            judgments[(qid, docid)] = g
    return QrelSet(judgments)


class NoRelevantError(ValueError):
    pass


def _doc_ids(ranked) -> Sequence[str]:
    if hasattr(ranked, "external_ids"):
        return ranked.external_ids
    return list(ranked)


def average_precision(ranked, qrels: QrelSet, query_id: str) -> float:
    """Non-interpolated AP over the list; the denominator is all relevant docs in qrels.

    ``ranked`` is a :class:`RankedList` or a sequence of external doc ids.
    """
    rel = qrels.relevant(query_id)
    if not rel:
        raise NoRelevantError(f"query {query_id!r} has no relevant documents")
    hits = 0
    total = 0.0
    for i, d in enumerate(_doc_ids(ranked), 1):
        if d in rel:
            hits += 1
            total += hits / i
    return total / len(rel)


def map_score(runs: Mapping[str, object], qrels: QrelSet) -> float:
    """Mean AP over queries of ``runs`` that have at least one relevant document."""
    aps = []
    excluded = []
    for q in sorted(runs):
        if not qrels.relevant(q):
            excluded.append(q)
            continue
        aps.append(average_precision(runs[q], qrels, q))
    if excluded:
        log.warning("%d queries without relevant documents excluded from MAP: %s", len(excluded), excluded)
    if not aps:
        raise NoRelevantError("no evaluable queries")
    return sum(aps) / len(aps)


def map_lift(map_i: float, map_j: float) -> float:
    if map_j <= 0.0:
        raise ZeroDivisionError("MAP lift undefined for a zero-MAP reference")
    return map_i / map_j


def random_baseline_map(per_config: Mapping[str, float] | Sequence[float]) -> float:
    values = list(per_config.values()) if isinstance(per_config, Mapping) else list(per_config)
    if not values:
        raise ValueError("no configurations")
    return sum(values) / len(values)


def kendall_tau(order_a: Sequence[str], order_b: Sequence[str]) -> float:
    """Tau-a between two strict rankings of the same items (best first)."""
    if len(order_a) != len(set(order_a)) or len(order_b) != len(set(order_b)):
        raise ValueError("rankings must not repeat items")
    if set(order_a) != set(order_b):
        raise ValueError(f"rankings differ in items: {sorted(set(order_a) ^ set(order_b))}")
    n = len(order_a)
    if n < 2:
        raise ValueError("need at least two items")
    pos_b = {item: i for i, item in enumerate(order_b)}
    seq = [pos_b[item] for item in order_a]
    # discordant pairs = inversions of seq, counted by merge sort
    discordant = _inversions(seq)
    pairs = n * (n - 1) // 2
    return (pairs - 2 * discordant) / pairs


def _inversions(seq: list[int]) -> int:
    if len(seq) < 2:
        return 0
    mid = len(seq) // 2
    left, right = seq[:mid], seq[mid:]
    count = _inversions(left) + _inversions(right)
    i = j = 0
    merged = []
    while i < len(left) and j < len(right):
        if left[i] <= right[j]:
            merged.append(left[i])
            i += 1
        else:
            merged.append(right[j])
            count += len(left) - i
            j += 1
    merged.extend(left[i:])
    merged.extend(right[j:])
    seq[:] = merged
    return count


@dataclass
class EvalReport:
    per_config_map: dict[str, float]
    chosen: str
    optimal: str
    lift_vs_optimal: float
    lift_vs_random: float
    random_map: float
    kendall_tau: float
    map_order: list[str]
    predicted_order: list[str]

    def to_dict(self) -> dict:
        return {
            "chosen": self.chosen,
            "optimal": self.optimal,
            "map": self.per_config_map,
            "map_random": self.random_map,
            "map_lift_vs_optimal": self.lift_vs_optimal,
            "map_lift_vs_random": self.lift_vs_random,
            "kendall_tau": self.kendall_tau,
            "map_order": self.map_order,
            "predicted_order": self.predicted_order,
        }

    def to_tsv(self) -> str:
        rows = [("MAP_lift(S*,S_opt)", self.lift_vs_optimal),
                ("MAP_lift(S*,random)", self.lift_vs_random),
                ("KT-correlation", self.kendall_tau)]
        return "metric\tvalue\n" + "".join(f"{m}\t{v:.6f}\n" for m, v in rows)

    def map_table(self) -> str:
        return "config\tMAP\n" + "".join(f"{c}\t{self.per_config_map[c]:.6f}\n" for c in self.map_order)


def evaluate_selection(predicted_order: Sequence[str], per_config_map: Mapping[str, float]) -> EvalReport:
    """Compare the predicted configuration order with true MAP (ties by name)."""
    if set(predicted_order) != set(per_config_map):
        raise ValueError("predicted order and MAP table cover different configs")
    map_order = sorted(per_config_map, key=lambda c: (-per_config_map[c], c))
    chosen, optimal = predicted_order[0], map_order[0]
    rnd = random_baseline_map(per_config_map)
    return EvalReport(
        per_config_map=dict(per_config_map), chosen=chosen, optimal=optimal,
        lift_vs_optimal=map_lift(per_config_map[chosen], per_config_map[optimal]),
        lift_vs_random=map_lift(per_config_map[chosen], rnd), random_map=rnd,
        kendall_tau=kendall_tau(list(predicted_order), map_order),
        map_order=map_order, predicted_order=list(predicted_order))
