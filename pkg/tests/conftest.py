import numpy as np
import pytest

from qppconf import kernels
from qppconf.index import build_index


@pytest.fixture(params=kernels.available_backends())
def backend(request, monkeypatch):
    """Run a test once per importable scoring-kernel backend."""
    mod = kernels.load_backend(request.param)
    monkeypatch.setattr(kernels, "score_postings", mod.score_postings)
    return request.param


def random_corpus(rng: np.random.Generator, n_docs: int, vocab: int = 60, max_len: int = 80,
                  empty_frac: float = 0.02):
    """Docs over tokens ``t0..t{vocab-1}`` (analyzer-stable), Zipf-ish, a few empty."""
    weights = 1.0 / np.arange(1, vocab + 1)
    weights /= weights.sum()
    docs = []
    for i in range(n_docs):
        n = 0 if rng.random() < empty_frac else int(rng.integers(1, max_len + 1))
        toks = rng.choice(vocab, size=n, p=weights)
        docs.append((f"doc{i:05d}", " ".join(f"t{t}" for t in toks)))
    if all(not text for _, text in docs):
        docs[0] = (docs[0][0], "t0")
    return docs


def random_query(rng: np.random.Generator, vocab: int = 60, max_len: int = 4):
    n = int(rng.integers(1, max_len + 1))
    # include unseen and repeated terms now and then
    toks = [f"t{int(t)}" for t in rng.integers(0, vocab + 5, size=n)]
    if rng.random() < 0.2:
        toks.append(toks[0])
    return toks


@pytest.fixture
def tiny_index():
    return build_index([("d1", "a a b"), ("d2", "b")], stopwords=())


# one line per acceptance criterion, printed after the run
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
