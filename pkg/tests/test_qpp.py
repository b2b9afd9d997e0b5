import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qppconf.index import build_index, idf
from qppconf.qpp import (
    corpus_score,
    cumulative_weights,
    difficulty_scores,
    doc_focus,
    focus_table,
    list_posterior,
    nqc,
    per_query_likelihood,
    query_doc_relevance,
    query_weights,
    relevance_table,
)
from qppconf.retrieval import run_query
from qppconf.similarity import BM25, LMDirichlet, enumerate_dfr_grid, usecase1_set

from conftest import random_corpus
from oracles import naive_focus

finite = st.floats(-1e6, 1e6, allow_nan=False)


class TestFocus:
    def test_single_term_doc(self):
        idx = build_index([("d1", "x x x"), ("d2", "y z")], stopwords=())
        assert doc_focus(idx, 0) == 1.0

    def test_hand_case(self):
        idx = build_index([("d1", "a a b")], stopwords=())
        kl = 2 / 3 * math.log((2 / 3) / 0.5) + 1 / 3 * math.log((1 / 3) / 0.5)
        assert kl == pytest.approx(0.0566, abs=1e-4)
        assert doc_focus(idx, 0) == pytest.approx(math.exp(-kl), abs=1e-12)
        assert doc_focus(idx, 0) == pytest.approx(0.9450, abs=1e-4)

    def test_empty_doc_is_zero(self):
        idx = build_index([("d1", "a"), ("d2", "")], stopwords=())
        assert doc_focus(idx, 1) == 0.0
        assert focus_table(idx)[1] == 0.0

    def test_fuzz_against_naive(self):
        docs = random_corpus(np.random.default_rng(12), 1000, vocab=300)
        idx = build_index(docs)
        table = focus_table(idx)
        for d, (_, text) in enumerate(docs):
            counts = Counter(text.split())
            if not counts:
                continue
            f = doc_focus(idx, d)
            assert 0.0 < f <= 1.0
            assert f == pytest.approx(naive_focus(counts, lambda t: idf(idx, t)), abs=1e-12)
            assert table[d] == pytest.approx(f, abs=1e-12)


class TestRelevance:
    def test_examples(self):
        idx = build_index([("d1", "a a b")], stopwords=())
        assert query_doc_relevance(idx, ["zzz"], 0) == 0.0
        assert query_doc_relevance(idx, ["a"], 0) == pytest.approx(0.395563, abs=1e-6)

    def test_table_agrees_and_nonnegative(self):
        docs = random_corpus(np.random.default_rng(13), 200)
        idx = build_index(docs)
        q = ["t1", "t4", "t40"]
        table = relevance_table(idx, q)
        assert (table >= 0).all()
        for d in range(idx.N):
            assert table[d] == pytest.approx(query_doc_relevance(idx, q, d), rel=1e-12, abs=0)


class TestPosterior:
    def test_examples(self):
        # every list is shifted so its minimum sits at eps * range
        p = list_posterior([2, 1, 1])
        eps = 1e-6
        assert p == pytest.approx([(1 + eps) / (1 + 3 * eps), eps / (1 + 3 * eps), eps / (1 + 3 * eps)], abs=1e-15)
        assert list_posterior([-3, -5]) == pytest.approx([1.0, 0.0], abs=1e-5)
        assert list(list_posterior([4, 4, 4])) == [1 / 3] * 3

    def test_empty(self):
        with pytest.raises(ValueError):
            list_posterior([])

    @given(st.lists(finite, min_size=1, max_size=50), st.floats(-1e5, 1e5))
    def test_sums_to_one_and_shift_invariant(self, scores, c):
        p = list_posterior(scores)
        assert abs(p.sum() - 1.0) <= 1e-9
        assert (p >= 0).all()
        shifted = list_posterior([s + c for s in scores])
        assert np.allclose(p, shifted, rtol=0, atol=1e-6)


class TestLikelihood:
    def test_single_doc(self):
        idx = build_index([("d1", "x x"), ("d2", "y")], stopwords=())
        rl = run_query(idx, BM25(), ["x"], 10)
        lk = per_query_likelihood(idx, ["x"], rl)
        assert lk.value == pytest.approx(query_doc_relevance(idx, ["x"], 0), abs=1e-15)

    def test_zero_focus_gives_zero(self):
        idx = build_index([("d1", "x y"), ("d2", "x")], stopwords=())
        rl = run_query(idx, BM25(), ["x"], 10)
        assert per_query_likelihood(idx, ["x"], rl, focus=np.zeros(2)).value == 0.0

    def test_empty_list_flagged(self):
        idx = build_index([("d1", "x")], stopwords=())
        rl = run_query(idx, BM25(), ["q"], 10)
        lk = per_query_likelihood(idx, ["q"], rl)
        assert lk.value == 0.0 and lk.degenerate

    def test_three_doc_term_by_term(self):
        idx = build_index([("d1", "a a b c"), ("d2", "a d d"), ("d3", "a b e e e")], stopwords=())
        q = ["a", "b"]
        rl = run_query(idx, LMDirichlet(), q, 10)
        assert len(rl) == 3
        s = rl.scores.tolist()
        lo, hi = min(s), max(s)
        shifted = [x - lo + 1e-6 * (hi - lo) for x in s]
        post = [x / sum(shifted) for x in shifted]
        rel = [query_doc_relevance(idx, q, d) for d in rl.doc_ids.tolist()]
        foc = [doc_focus(idx, d) for d in rl.doc_ids.tolist()]
        want = sum(r * p for r, p in zip(rel, post)) * (sum(foc) / 3)
        assert per_query_likelihood(idx, q, rl).value == pytest.approx(want, rel=1e-12)

    def test_nonnegative(self):
        docs = random_corpus(np.random.default_rng(14), 300)
        idx = build_index(docs)
        for c in usecase1_set():
            rl = run_query(idx, c, ["t2", "t9", "t30"], 100)
            lk = per_query_likelihood(idx, ["t2", "t9", "t30"], rl)
            assert lk.value >= 0 and math.isfinite(lk.value)


class TestNQC:
    def test_examples(self):
        assert nqc([5, 5, 5], 2.0) == 0.0
        assert nqc([3, 1], 2.0) == 0.5
        assert nqc([3, 1], -2.0) == 0.5
        assert nqc([3, 1], 0.0) == 0.0

    @given(st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=1, max_size=30),
           st.floats(0.1, 100), st.sampled_from([0.5, 2.0, 4.0, 0.25, 8.0]))
    def test_scale_invariant(self, scores, corpus, c):
        # power-of-two factors scale exactly in binary floating point
        assert nqc([s * c for s in scores], corpus * c) == nqc(scores, corpus)

    def test_corpus_scores_finite(self):
        docs = random_corpus(np.random.default_rng(15), 300)
        idx = build_index(docs)
        q = ["t1", "t6"]
        for c in enumerate_dfr_grid() + usecase1_set():
            rl = run_query(idx, c, q, 100)
            cs = corpus_score(idx, c, q, rl.model)
            assert math.isfinite(cs)
        total = idx.total_terms
        assert corpus_score(idx, LMDirichlet(), q) == pytest.approx(
            math.log(idx.ctf("t1") / total) + math.log(idx.ctf("t6") / total))


class TestWeights:
    def test_difficulty_examples(self):
        assert difficulty_scores({"q": {"s": 1.0}}) == {"q": 0.0}
        assert difficulty_scores({"q": {"s1": math.e, "s2": math.e}})["q"] == pytest.approx(2.0)
        assert difficulty_scores({"q": {"s": 0.0}})["q"] == pytest.approx(math.log(1e-9))

    def test_difficulty_random_table(self):
        rng = np.random.default_rng(16)
        table = {f"q{i}": {f"s{j}": float(rng.uniform(0.01, 3)) for j in range(2)} for i in range(3)}
        v = difficulty_scores(table)
        for q, per in table.items():
            assert v[q] == pytest.approx(math.log(per["s0"] * per["s1"]), abs=1e-12)

    def test_examples(self):
        assert query_weights({"q": -4.2}).weights == {"q": 1.0}
        w = query_weights({"a": 3.0, "b": 3.0}).weights
        assert w == {"a": 1.0, "b": 0.5}
        w = query_weights({"z": 2.0, "x": 0.0, "y": 1.0})
        assert w.difficulty_rank == {"x": 1, "y": 2, "z": 3}
        d = 2e-6
        assert [w["x"], w["y"], w["z"]] == pytest.approx([1.0, 1 - d / (3 + 3 * d), 1 - (1 + 2 * d) / (3 + 3 * d)],
                                                         abs=1e-15)

    def test_u_123(self):
        # hand arithmetic: [1 - 0/6, 1 - 1/6, 1 - 3/6]
        assert cumulative_weights([1.0, 2.0, 3.0]) == pytest.approx([1.0, 0.833333, 0.5], abs=1e-6)

    # v and c on a 1/64 grid, so adding c is exact and the shifted input is truly a shift
    @settings(max_examples=200)
    @given(st.dictionaries(st.text("abcdef", min_size=1, max_size=3),
                           st.integers(-10**7, 10**7).map(lambda i: i / 64), min_size=1, max_size=25),
           st.integers(-10**6, 10**6).map(lambda i: i / 64))
    def test_properties(self, v, c):
        qw = query_weights(v)
        order = sorted(qw.difficulty_rank, key=qw.difficulty_rank.get)
        ws = [qw[q] for q in order]
        assert ws[0] == 1.0
        assert all(w > 0 for w in ws)
        assert all(a >= b for a, b in zip(ws, ws[1:]))
        assert [v[q] for q in order] == sorted(v.values())
        moved = query_weights({q: x + c for q, x in v.items()})
        for q in v:
            assert abs(moved[q] - qw[q]) <= 1e-9

    def test_shift_invariance_exact_example(self):
        a = query_weights({"q1": -2.0, "q2": -1.0, "q3": -0.5})
        b = query_weights({"q1": 8.0, "q2": 9.0, "q3": 9.5})
        for q in a.weights:
            assert a[q] == pytest.approx(b[q], abs=1e-9)
