import pytest
from hypothesis import given, strategies as st
from nltk.stem.porter import PorterStemmer

from qppconf.analysis import DEFAULT_STOPWORDS, analyze, load_stopwords
from qppconf.synthetic import make_vocabulary


def test_stopword_list_is_the_classic_33():
    assert len(DEFAULT_STOPWORDS) == 33
    assert {"the", "a", "with", "such"} <= DEFAULT_STOPWORDS


@pytest.mark.parametrize("text,expected", [
    ("The quick foxes jumped", ["quick", "fox", "jump"]),
    ("", []),
    ("IBM's 2021 report", ["ibm", "2021", "report"]),
    ("running,runs;RUN", ["run", "run", "run"]),
])
def test_analyze_examples(text, expected):
    assert analyze(text) == expected


def test_ibm_example_against_reference_pipeline():
    # reference: strip possessive, split on non-alphanumerics, stopwords, nltk Porter (original)
    ref = PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM)
    toks = [t for t in "ibm 2021 report".split() if t not in DEFAULT_STOPWORDS]
    assert analyze("IBM's 2021 report") == [ref.stem(t) for t in toks]


def test_invalid_utf8_is_replaced():
    assert analyze(b"caf\xff latte") == ["caf", "latt"]


def test_custom_stopwords(tmp_path):
    p = tmp_path / "stop.txt"
    p.write_text("quick\n\nFox\n")
    stop = load_stopwords(p)
    assert stop == {"quick", "fox"}
    assert analyze("The quick fox", stop) == ["the"]


@given(st.text(max_size=200))
def test_terms_are_clean(text):
    for term in analyze(text):
        assert term
        assert term == term.lower()
        assert not any(c.isspace() for c in term)
        assert term not in DEFAULT_STOPWORDS


def test_idempotent_on_synthetic_vocabulary():
    import numpy as np
    vocab = make_vocabulary(np.random.default_rng(0), 2000)
    text = " ".join(vocab)
    once = analyze(text)
    assert analyze(" ".join(once)) == once
