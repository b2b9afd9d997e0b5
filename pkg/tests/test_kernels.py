import numpy as np

from qppconf import kernels
from qppconf.similarity import (
    BM25,
    IB,
    Diagnostics,
    LMDirichlet,
    TermQueryStats,
    enumerate_dfr_grid,
    family_code,
    term_score,
)

CONFIGS = [BM25(), BM25(2.0, 0.1), LMDirichlet(), LMDirichlet(10)] + enumerate_dfr_grid() + [
    IB(d, l, n) for d in ("LL", "SPL") for l in ("DF", "TTF") for n in ("H1", "H2", "H3", "Z", "none")]


def _postings(rng, N=400):
    n = int(rng.integers(1, 60))
    docs = np.sort(rng.choice(N, size=n, replace=False)).astype(np.int32)
    lengths = rng.integers(1, 3000, size=N).astype(np.int64)
    tfs = np.minimum(rng.integers(1, 50, size=n), lengths[docs]).astype(np.int32)
    ctf = int(tfs.sum()) + int(rng.integers(0, 100))
    return docs, tfs, lengths, n, ctf, int(lengths.sum()) + ctf


def test_backends_are_bit_identical_to_reference():
    rng = np.random.default_rng(5)
    backends = [kernels.load_backend(b) for b in kernels.available_backends()]
    for trial in range(40):
        docs, tfs, lengths, df, ctf, total = _postings(rng)
        N = len(lengths)
        avgdl = total / N
        for c in CONFIGS:
            fam, (p0, p1, p2) = family_code(c)
            ref = np.zeros(N)
            diag = Diagnostics()
            for d, tf in zip(docs.tolist(), tfs.tolist()):
                ref[d] += 2 * term_score(c, TermQueryStats(tf, df, ctf, int(lengths[d]), N, total, avgdl, 2), diag)
            for mod in backends:
                acc = np.zeros(N)
                clamped, floored = mod.score_postings(fam, p0, p1, p2, docs, tfs, lengths, df, ctf, N, total,
                                                      avgdl, 2, acc)
                assert np.array_equal(acc, ref), (mod.__name__, c.name)
                assert (clamped, floored) == (diag.clamped, diag.floored), (mod.__name__, c.name)


def test_backend_selection():
    assert kernels.BACKEND in kernels.available_backends()
    assert "python" in kernels.available_backends()
