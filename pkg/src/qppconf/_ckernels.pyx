# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled scoring kernel; same expressions as the pure-Python fallback."""

from libc.math cimport log, log2, pow, isfinite, M_E, M_PI
from libc.stdint cimport int32_t, int64_t

cdef double LOG_FLOOR = 1e-10
cdef double H2_C = 1.0
cdef double H3_MU = 800.0
cdef double Z_EXPONENT = 0.3

cdef struct Guard:
    long clamped
    long floored


cdef inline double safe_log(double x, Guard* g) noexcept nogil:
    if not x > 0.0:
        g.clamped += 1
        x = LOG_FLOOR
    return log(x)


cdef inline double safe_log2(double x, Guard* g) noexcept nogil:
    if not x > 0.0:
        g.clamped += 1
        x = LOG_FLOOR
    return log2(x)


cdef inline double guard(double v, Guard* g) noexcept nogil:
    if not isfinite(v):
        g.clamped += 1
        return 0.0
    if v < 0.0:
        g.floored += 1
        return 0.0
    return v


# normalization codes: H1 H2 H3 Z none
cdef inline double normalized_tf(int nm, double tf, double dl, double avgdl, double ctf,
                                 double total, Guard* g) noexcept nogil:
    if nm == 0:
        return tf * avgdl / dl
    if nm == 1:
        return tf * safe_log2(1.0 + H2_C * avgdl / dl, g)
    if nm == 2:
        return (tf + H3_MU * (ctf / total)) / (dl + H3_MU) * H3_MU
    if nm == 3:
        return tf * pow(avgdl / dl, Z_EXPONENT)
    return tf


cdef inline double be_f(double n, double m, Guard* g) noexcept nogil:
    return (m + 0.5) * safe_log2(n / m, g) + (n - m) * safe_log2(n, g)


# basic model codes: BE D G IF IN INE P
cdef inline double basic_model(int bm, double tfn, double N, double df, double ctf, Guard* g) noexcept nogil:
    cdef double F, NN, phi, nphi, p, D, lam, ne
    if bm == 0:
        F = ctf + 1.0 + tfn
        NN = F + N
        return -safe_log2((NN - 1.0) * M_E, g) + be_f(NN + F - 1.0, NN + F - tfn - 2.0, g) - be_f(F, F - tfn, g)
    if bm == 1:
        F = ctf + 1.0 + tfn
        phi = tfn / F
        nphi = 1.0 - phi
        p = 1.0 / (N + 1.0)
        D = phi * safe_log2(phi / p, g) + nphi * safe_log2(nphi / (1.0 - p), g)
        return D * F + 0.5 * safe_log2(1.0 + 2.0 * M_PI * tfn * nphi, g)
    if bm == 2:
        F = ctf + 1.0
        lam = F / (N + F)
        return safe_log2(lam + 1.0, g) + tfn * safe_log2((1.0 + lam) / lam, g)
    if bm == 3:
        F = ctf + 1.0
        return tfn * safe_log2(1.0 + (N + 1.0) / (F + 0.5), g)
    if bm == 4:
        return tfn * safe_log2((N + 1.0) / (df + 0.5), g)
    if bm == 5:
        F = ctf + 1.0
        ne = N * (1.0 - pow((N - 1.0) / N, F))
        return tfn * safe_log2((N + 1.0) / (ne + 0.5), g)
    F = ctf + 1.0
    lam = F / (N + 1.0)
    return (tfn * safe_log2(tfn / lam, g) + (lam + 1.0 / (12.0 * tfn) - tfn) * (1.0 / log(2.0))
            + 0.5 * safe_log2(2.0 * M_PI * tfn, g))


# after effect codes: B L none
cdef inline double after_effect(int ae, double tfn, double df, double ctf) noexcept nogil:
    if ae == 0:
        return (ctf + 2.0) / ((df + 1.0) * (tfn + 1.0))
    if ae == 1:
        return 1.0 / (tfn + 1.0)
    return 1.0


cdef inline double ib_distribution(int dist, double tfn, double lam, Guard* g) noexcept nogil:
    if dist == 0:
        return -safe_log(lam / (tfn + lam), g)
    if lam == 1.0:
        lam = 0.99
    return -safe_log((pow(lam, tfn / (tfn + 1.0)) - lam) / (1.0 - lam), g)


def score_postings(int family, double p0, double p1, double p2,
                   const int32_t[::1] docs, const int32_t[::1] tfs, const int64_t[::1] doc_lengths,
                   double df, double ctf, double N, double total, double avgdl, double qtf,
                   double[::1] acc):
    """Add ``qtf * term_score`` for every posting into ``acc[doc]``.

    Returns ``(clamped, floored)`` guard counts.
    """
    cdef Py_ssize_t i, n = docs.shape[0]
    cdef int32_t d
    cdef double tf, dl, s, tfn, gain, lam = 0.0, idf = 0.0
    cdef int a = <int>p0, b = <int>p1, c = <int>p2
    cdef Guard g
    g.clamped = 0
    g.floored = 0
    if family < 0 or family > 3:
        raise ValueError(f"unknown family code {family}")
    if family == 0:
        idf = log(1.0 + (N - df + 0.5) / (df + 0.5))
    elif family == 3:
        lam = (df + 1.0) / (N + 1.0) if b == 0 else (ctf + 1.0) / (N + 1.0)
    with nogil:
        for i in range(n):
            d = docs[i]
            tf = <double>tfs[i]
            dl = <double>doc_lengths[d]
            if family == 0:
                s = idf * (tf * (p0 + 1.0)) / (tf + p0 * (1.0 - p1 + p1 * dl / avgdl))
            elif family == 1:
                s = safe_log(1.0 + tf / (p0 * (ctf / total)), &g) + safe_log(p0 / (dl + p0), &g)
            elif family == 2:
                tfn = normalized_tf(c, tf, dl, avgdl, ctf, total, &g)
                gain = after_effect(b, tfn, df, ctf)
                s = guard(gain * basic_model(a, tfn, N, df, ctf, &g), &g)
            else:
                tfn = normalized_tf(c, tf, dl, avgdl, ctf, total, &g)
                s = guard(ib_distribution(a, tfn, lam, &g), &g)
            acc[d] = acc[d] + qtf * s
    return g.clamped, g.floored
