"""Similarity configurations, their string grammar, and reference scoring formulas.

The scalar formulas here are the readable reference.  The compiled and
fallback kernels in :mod:`qppconf.kernels` evaluate the same expressions
in the same order so that results agree bit for bit.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence, Union

BASIC_MODELS = ("BE", "D", "G", "IF", "IN", "INE", "P")
AFTER_EFFECTS = ("B", "L", "none")
NORMALIZATIONS = ("H1", "H2", "H3", "Z", "none")
IB_DISTRIBUTIONS = ("LL", "SPL")
IB_LAMBDAS = ("DF", "TTF")

H2_C = 1.0
H3_MU = 800.0
Z_EXPONENT = 0.3
LOG_FLOOR = 1e-10
LOG2_E = 1.0 / math.log(2.0)

FAMILY_BM25, FAMILY_LMD, FAMILY_DFR, FAMILY_IB = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


def _num(x: float) -> str:
    s = repr(float(x))
    return s[:-2] if s.endswith(".0") else s


@dataclass(frozen=True)
class BM25:
    k1: float = 1.2
    b: float = 0.75

    def __post_init__(self):
        if not self.k1 > 0:
            raise ConfigError(f"k1={self.k1} must be > 0")
        if not 0.0 <= self.b <= 1.0:
            raise ConfigError(f"b={self.b} must be in [0, 1]")

    @property
    def name(self) -> str:
        return f"bm25:k1={_num(self.k1)},b={_num(self.b)}"


@dataclass(frozen=True)
class LMDirichlet:
    mu: float = 2000.0

    def __post_init__(self):
        if not self.mu > 0:
            raise ConfigError(f"mu={self.mu} must be > 0")

    @property
    def name(self) -> str:
        return f"lmd:mu={_num(self.mu)}"


@dataclass(frozen=True)
class DFR:
    basic_model: str = "IF"
    after_effect: str = "B"
    normalization: str = "H2"

    def __post_init__(self):
        if self.basic_model not in BASIC_MODELS:
            raise ConfigError(f"unknown DFR basic model {self.basic_model!r}")
        if self.after_effect not in AFTER_EFFECTS:
            raise ConfigError(f"unknown DFR after effect {self.after_effect!r}")
        if self.normalization not in NORMALIZATIONS:
            raise ConfigError(f"unknown normalization {self.normalization!r}")

    @property
    def name(self) -> str:
        return f"dfr:{self.basic_model}:{self.after_effect}:{self.normalization}"


@dataclass(frozen=True)
class IB:
    distribution: str = "SPL"
    lam: str = "DF"
    normalization: str = "H2"

    def __post_init__(self):
        if self.distribution not in IB_DISTRIBUTIONS:
            raise ConfigError(f"unknown IB distribution {self.distribution!r}")
        if self.lam not in IB_LAMBDAS:
            raise ConfigError(f"unknown IB lambda {self.lam!r}")
        if self.normalization not in NORMALIZATIONS:
            raise ConfigError(f"unknown normalization {self.normalization!r}")

    @property
    def name(self) -> str:
        return f"ib:{self.distribution}:{self.lam}:{self.normalization}".lower()


@dataclass(frozen=True)
class Rerank:
    """Relevance-model reranking of an LM-Dirichlet first-stage list."""

    model: str = "RM3"
    base: LMDirichlet = field(default_factory=LMDirichlet)
    fb_docs: int = 10
    fb_terms: int = 25
    interpolation: float = 0.5

    def __post_init__(self):
        if self.model not in ("RM1", "RM3"):
            raise ConfigError(f"unknown relevance model {self.model!r}")
        if isinstance(self.base, Rerank):
            raise ConfigError("rerank base must not itself be a rerank config")
        if not isinstance(self.base, LMDirichlet):
            raise ConfigError("rerank base must be an lmd config")
        if self.fb_docs < 1 or self.fb_terms < 1:
            raise ConfigError("fbdocs and fbterms must be >= 1")
        if not 0.0 <= self.interpolation <= 1.0:
            raise ConfigError(f"lambda={self.interpolation} must be in [0, 1]")

    @property
    def name(self) -> str:
        s = f"{self.model.lower()}:base={self.base.name};fbdocs={self.fb_docs};fbterms={self.fb_terms}"
        if self.model == "RM3":
            s += f";lambda={_num(self.interpolation)}"
        return s


SimilarityConfig = Union[BM25, LMDirichlet, DFR, IB, Rerank]


# --------------------------------------------------------------------------
# grammar

def _params(parts: Sequence[str], allowed: dict[str, type], family: str) -> dict:
    out = {}
    for part in parts:
        for item in part.split(","):
            if not item:
                continue
            key, sep, value = item.partition("=")
            key = key.strip().lower()
            if not sep or key not in allowed:
                raise ConfigError(f"{family}: unknown parameter {item!r}")
            try:
                out[key] = allowed[key](value)
            except ValueError:
                raise ConfigError(f"{family}: bad value in {item!r}") from None
    return out


def _pick(token: str, options: Sequence[str], what: str) -> str:
    for opt in options:
        if token.lower() == opt.lower():
            return opt
    raise ConfigError(f"unknown {what} {token!r}")


def parse_config(spec: str) -> SimilarityConfig:
    """Parse a config string such as ``bm25:k1=1.2,b=0.75`` or ``dfr:G:B:H2``."""
    spec = spec.strip()
    family, _, rest = spec.partition(":")
    family = family.lower()
    try:
        if family == "bm25":
            p = _params(rest.split(":") if rest else [], {"k1": float, "b": float}, family)
            return BM25(**p)
        if family == "lmd":
            p = _params(rest.split(":") if rest else [], {"mu": float}, family)
            return LMDirichlet(**p)
        if family in ("dfr", "ib"):
            parts = rest.split(":") if rest else []
            if family == "dfr":
                if len(parts) not in (0, 3):
                    raise ConfigError(f"dfr expects basicmodel:aftereffect:normalization, got {rest!r}")
                if not parts:
                    return DFR()
                return DFR(_pick(parts[0], BASIC_MODELS, "DFR basic model"),
                           _pick(parts[1], AFTER_EFFECTS, "DFR after effect"),
                           _pick(parts[2], NORMALIZATIONS, "normalization"))
            if len(parts) not in (0, 3):
                raise ConfigError(f"ib expects distribution:lambda:normalization, got {rest!r}")
            if not parts:
                return IB()
            return IB(_pick(parts[0], IB_DISTRIBUTIONS, "IB distribution"),
                      _pick(parts[1], IB_LAMBDAS, "IB lambda"),
                      _pick(parts[2], NORMALIZATIONS, "normalization"))
        if family in ("rm1", "rm3"):
            kw: dict = {}
            for item in (rest.split(";") if rest else []):
                if not item:
                    continue
                key, sep, value = item.partition("=")
                key = key.strip().lower()
                if not sep:
                    raise ConfigError(f"{family}: bad parameter {item!r}")
                if key == "base":
                    base = parse_config(value)
                    if isinstance(base, Rerank):
                        raise ConfigError("rerank base must not itself be a rerank config")
                    kw["base"] = base
                elif key in ("fbdocs", "fbterms"):
                    try:
                        kw["fb_docs" if key == "fbdocs" else "fb_terms"] = int(value)
                    except ValueError:
                        raise ConfigError(f"{family}: bad value in {item!r}") from None
                elif key == "lambda" and family == "rm3":
                    try:
                        kw["interpolation"] = float(value)
                    except ValueError:
                        raise ConfigError(f"{family}: bad value in {item!r}") from None
                else:
                    raise ConfigError(f"{family}: unknown parameter {item!r}")
            return Rerank(model=family.upper(), **kw)
    except TypeError as e:
        raise ConfigError(f"{spec!r}: {e}") from None
    raise ConfigError(f"unknown similarity family {family!r}")


def enumerate_dfr_grid() -> list[DFR]:
    """All 7 x 3 x 5 DFR triples, basic model major."""
    return [DFR(bm, ae, nm) for bm, ae, nm in itertools.product(BASIC_MODELS, AFTER_EFFECTS, NORMALIZATIONS)]


def usecase1_set() -> list[SimilarityConfig]:
    """Default BM25, LM-Dirichlet, DFR and IB, plus RM1/RM3 reranking over LM-Dirichlet."""
    lmd = LMDirichlet()
    return [BM25(), lmd, DFR(), IB(), Rerank("RM1", lmd), Rerank("RM3", lmd)]


# --------------------------------------------------------------------------
# reference scoring

@dataclass(frozen=True)
class TermQueryStats:
    tf_in_doc: int
    df: int
    ctf: int
    doc_length: int
    doc_count: int
    total_terms: int
    avg_doc_length: float
    query_tf: int = 1

    def __post_init__(self):
        if min(self.tf_in_doc, self.df, self.ctf, self.doc_length, self.query_tf) < 0:
            raise ValueError("term statistics must be non-negative")
        if self.doc_length < self.tf_in_doc:
            raise ValueError("doc_length < tf_in_doc")


class Diagnostics:
    """Counts numerical guard activations."""

    def __init__(self):
        self.clamped = 0
        self.floored = 0

    def merge(self, clamped: int, floored: int) -> None:
        self.clamped += clamped
        self.floored += floored


def _safe_log(x: float, diag: Diagnostics | None) -> float:
    if not x > 0.0:
        if diag is not None:
            diag.clamped += 1
        x = LOG_FLOOR
    return math.log(x)


def _safe_log2(x: float, diag: Diagnostics | None) -> float:
    if not x > 0.0:
        if diag is not None:
            diag.clamped += 1
        x = LOG_FLOOR
    return math.log2(x)


def normalized_tf(normalization: str, tf: float, dl: float, avgdl: float, ctf: float, total: float,
                  diag: Diagnostics | None = None) -> float:
    if normalization == "H1":
        return tf * avgdl / dl
    if normalization == "H2":
        return tf * _safe_log2(1.0 + H2_C * avgdl / dl, diag)
    if normalization == "H3":
        return (tf + H3_MU * (ctf / total)) / (dl + H3_MU) * H3_MU
    if normalization == "Z":
        return tf * math.pow(avgdl / dl, Z_EXPONENT)
    return tf


def basic_model(model: str, tfn: float, N: float, df: float, ctf: float,
                diag: Diagnostics | None = None) -> float:
    if model == "BE":
        F = ctf + 1.0 + tfn
        NN = F + N

        def f(n, m):
            return (m + 0.5) * _safe_log2(n / m, diag) + (n - m) * _safe_log2(n, diag)

        return -_safe_log2((NN - 1.0) * math.e, diag) + f(NN + F - 1.0, NN + F - tfn - 2.0) - f(F, F - tfn)
    if model == "D":
        F = ctf + 1.0 + tfn
        phi = tfn / F
        nphi = 1.0 - phi
        p = 1.0 / (N + 1.0)
        D = phi * _safe_log2(phi / p, diag) + nphi * _safe_log2(nphi / (1.0 - p), diag)
        return D * F + 0.5 * _safe_log2(1.0 + 2.0 * math.pi * tfn * nphi, diag)
    if model == "G":
        F = ctf + 1.0
        lam = F / (N + F)
        return _safe_log2(lam + 1.0, diag) + tfn * _safe_log2((1.0 + lam) / lam, diag)
    if model == "IF":
        F = ctf + 1.0
        return tfn * _safe_log2(1.0 + (N + 1.0) / (F + 0.5), diag)
    if model == "IN":
        return tfn * _safe_log2((N + 1.0) / (df + 0.5), diag)
    if model == "INE":
        F = ctf + 1.0
        ne = N * (1.0 - math.pow((N - 1.0) / N, F))
        return tfn * _safe_log2((N + 1.0) / (ne + 0.5), diag)
    if model == "P":
        F = ctf + 1.0
        lam = F / (N + 1.0)
        return (tfn * _safe_log2(tfn / lam, diag) + (lam + 1.0 / (12.0 * tfn) - tfn) * LOG2_E
                + 0.5 * _safe_log2(2.0 * math.pi * tfn, diag))
    raise ConfigError(model)


def after_effect(effect: str, tfn: float, df: float, ctf: float) -> float:
    if effect == "L":
        return 1.0 / (tfn + 1.0)
    if effect == "B":
        return (ctf + 2.0) / ((df + 1.0) * (tfn + 1.0))
    return 1.0


def ib_lambda(kind: str, N: float, df: float, ctf: float) -> float:
    if kind == "DF":
        return (df + 1.0) / (N + 1.0)
    return (ctf + 1.0) / (N + 1.0)


def ib_distribution(dist: str, tfn: float, lam: float, diag: Diagnostics | None = None) -> float:
    if dist == "LL":
        return -_safe_log(lam / (tfn + lam), diag)
    if lam == 1.0:
        lam = 0.99
    return -_safe_log((math.pow(lam, tfn / (tfn + 1.0)) - lam) / (1.0 - lam), diag)


def _guard(value: float, diag: Diagnostics | None) -> float:
    if not math.isfinite(value):
        if diag is not None:
            diag.clamped += 1
        return 0.0
    if value < 0.0:
        if diag is not None:
            diag.floored += 1
        return 0.0
    return value


def term_score(config: SimilarityConfig, st: TermQueryStats, diag: Diagnostics | None = None) -> float:
    """Score contribution of one matching query term (before query-tf weighting)."""
    tf = float(st.tf_in_doc)
    dl = float(st.doc_length)
    N = float(st.doc_count)
    df = float(st.df)
    ctf = float(st.ctf)
    total = float(st.total_terms)
    avgdl = st.avg_doc_length
    if isinstance(config, BM25):
        idf = math.log(1.0 + (N - df + 0.5) / (df + 0.5))
        return idf * (tf * (config.k1 + 1.0)) / (tf + config.k1 * (1.0 - config.b + config.b * dl / avgdl))
    if isinstance(config, LMDirichlet):
        mu = config.mu
        return _safe_log(1.0 + tf / (mu * (ctf / total)), diag) + _safe_log(mu / (dl + mu), diag)
    if isinstance(config, DFR):
        tfn = normalized_tf(config.normalization, tf, dl, avgdl, ctf, total, diag)
        gain = after_effect(config.after_effect, tfn, df, ctf)
        return _guard(gain * basic_model(config.basic_model, tfn, N, df, ctf, diag), diag)
    if isinstance(config, IB):
        tfn = normalized_tf(config.normalization, tf, dl, avgdl, ctf, total, diag)
        lam = ib_lambda(config.lam, N, df, ctf)
        return _guard(ib_distribution(config.distribution, tfn, lam, diag), diag)
    raise ConfigError(f"{config!r} is not a first-stage similarity")


def score(config: SimilarityConfig, stats: Sequence[TermQueryStats], diag: Diagnostics | None = None) -> float:
    """Score of one document: sum over query terms in the given order of
    ``query_tf * term_score``; terms absent from the document are skipped."""
    if isinstance(config, Rerank):
        raise ConfigError("rerank configs are scored by the retrieval module")
    if not any(st.tf_in_doc > 0 for st in stats):
        raise ValueError("document matches no query term")
    total = 0.0
    for st in stats:
        if st.tf_in_doc > 0:
            total += st.query_tf * term_score(config, st, diag)
    return total


def family_code(config: SimilarityConfig) -> tuple[int, tuple[float, ...]]:
    """Numeric (family, params) encoding consumed by the scoring kernels."""
    if isinstance(config, BM25):
        return FAMILY_BM25, (config.k1, config.b, 0.0)
    if isinstance(config, LMDirichlet):
        return FAMILY_LMD, (config.mu, 0.0, 0.0)
    if isinstance(config, DFR):
        return FAMILY_DFR, (float(BASIC_MODELS.index(config.basic_model)),
                            float(AFTER_EFFECTS.index(config.after_effect)),
                            float(NORMALIZATIONS.index(config.normalization)))
    if isinstance(config, IB):
        return FAMILY_IB, (float(IB_DISTRIBUTIONS.index(config.distribution)),
                           float(IB_LAMBDAS.index(config.lam)),
                           float(NORMALIZATIONS.index(config.normalization)))
    raise ConfigError(f"{config!r} has no kernel encoding")
