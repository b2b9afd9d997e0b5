"""Pure-Python scoring kernel, used when the compiled extension is unavailable."""

from __future__ import annotations

import math

import numpy as np

from .similarity import (
    AFTER_EFFECTS,
    BASIC_MODELS,
    FAMILY_BM25,
    FAMILY_DFR,
    FAMILY_IB,
    FAMILY_LMD,
    IB_DISTRIBUTIONS,
    IB_LAMBDAS,
    NORMALIZATIONS,
    Diagnostics,
    _guard,
    _safe_log,
    after_effect,
    basic_model,
    ib_distribution,
    ib_lambda,
    normalized_tf,
)


def _term_fn(family, p0, p1, p2, df, ctf, N, total, avgdl, diag):
    if family == FAMILY_BM25:
        k1, b = p0, p1
        idf = math.log(1.0 + (N - df + 0.5) / (df + 0.5))

        def fn(tf, dl):
            return idf * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * dl / avgdl))
        return fn
    if family == FAMILY_LMD:
        mu = p0

        def fn(tf, dl):
            return _safe_log(1.0 + tf / (mu * (ctf / total)), diag) + _safe_log(mu / (dl + mu), diag)
        return fn
    if family == FAMILY_DFR:
        bm, ae, nm = BASIC_MODELS[int(p0)], AFTER_EFFECTS[int(p1)], NORMALIZATIONS[int(p2)]

        def fn(tf, dl):
            tfn = normalized_tf(nm, tf, dl, avgdl, ctf, total, diag)
            gain = after_effect(ae, tfn, df, ctf)
            return _guard(gain * basic_model(bm, tfn, N, df, ctf, diag), diag)
        return fn
    if family == FAMILY_IB:
        dist, nm = IB_DISTRIBUTIONS[int(p0)], NORMALIZATIONS[int(p2)]
        lam = ib_lambda(IB_LAMBDAS[int(p1)], N, df, ctf)

        def fn(tf, dl):
            tfn = normalized_tf(nm, tf, dl, avgdl, ctf, total, diag)
            return _guard(ib_distribution(dist, tfn, lam, diag), diag)
        return fn
    raise ValueError(f"unknown family code {family}")


def score_postings(family, p0, p1, p2, docs, tfs, doc_lengths, df, ctf, N, total, avgdl, qtf, acc):
    """Add ``qtf * term_score`` for every posting into ``acc[doc]``.

    Returns ``(clamped, floored)`` guard counts.
    """
    diag = Diagnostics()
    fn = _term_fn(family, p0, p1, p2, float(df), float(ctf), float(N), float(total), float(avgdl), diag)
    dls = doc_lengths[docs].tolist()
    scores = [fn(float(tf), float(dl)) for tf, dl in zip(tfs.tolist(), dls)]
    acc[docs] += float(qtf) * np.asarray(scores, dtype=np.float64)
    return diag.clamped, diag.floored
