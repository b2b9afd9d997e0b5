"""Inverted index over an analyzed corpus, plus its on-disk format and corpus readers."""

from __future__ import annotations

import io
import json
import logging
import math
import re
import struct
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Mapping

import numpy as np

from .analysis import DEFAULT_STOPWORDS, analyze

log = logging.getLogger(__name__)

MAGIC = b"QPPCIDX"
FORMAT_VERSION = 1


class IndexFormatError(ValueError):
    """Index file is truncated, corrupt, or written by another format version."""


class DuplicateDocumentError(ValueError):
    pass


class DegenerateDocumentError(ValueError):
    """Raised for operations that need a document with at least one term."""


@dataclass(frozen=True)
class DocumentRecord:
    external_id: str
    internal_id: int
    term_freqs: Mapping[str, int]
    length: int


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class CorpusIndex:
    """Immutable inverted index with the collection statistics scorers need.

    Postings are stored as one CSR block: the documents and term frequencies
    of term ``t`` are ``post_docs[post_offsets[t]:post_offsets[t+1]]`` (same
    slice of ``post_tfs``), sorted by internal id.  A doc-major copy of the
    same data backs per-document term vectors.
    """

    def __init__(
        self,
        external_ids: Iterable[str],
        doc_lengths: np.ndarray,
        vocab: Iterable[str],
        post_offsets: np.ndarray,
        post_docs: np.ndarray,
        post_tfs: np.ndarray,
        stopwords: Iterable[str] = DEFAULT_STOPWORDS,
    ):
        self.external_ids = tuple(external_ids)
        self.vocab = tuple(vocab)
        self.stopwords = frozenset(stopwords)
        self.doc_lengths = _frozen(np.ascontiguousarray(doc_lengths, dtype=np.int64))
        self.post_offsets = _frozen(np.ascontiguousarray(post_offsets, dtype=np.int64))
        self.post_docs = _frozen(np.ascontiguousarray(post_docs, dtype=np.int32))
        self.post_tfs = _frozen(np.ascontiguousarray(post_tfs, dtype=np.int32))

        self.doc_count = len(self.external_ids)
        if self.doc_count == 0:
            raise ValueError("index has no documents")
        self.total_terms = int(self.doc_lengths.sum())
        self.avg_doc_length = self.total_terms / self.doc_count
        self._term_ids = {t: i for i, t in enumerate(self.vocab)}
        self._internal_ids = {e: i for i, e in enumerate(self.external_ids)}

        self.df_array = _frozen(np.diff(self.post_offsets))
        self.ctf_array = _frozen(np.add.reduceat(self.post_tfs.astype(np.int64), self.post_offsets[:-1])
                                 if len(self.vocab) else np.zeros(0, np.int64))

        # doc-major view; stable sort keeps term ids ascending within a document
        term_of_posting = np.repeat(np.arange(len(self.vocab), dtype=np.int32), self.df_array)
        order = np.argsort(self.post_docs, kind="stable")
        self.doc_terms_flat = _frozen(term_of_posting[order])
        self.doc_tfs_flat = _frozen(self.post_tfs[order])
        counts = np.bincount(self.post_docs, minlength=self.doc_count)
        self.doc_offsets = _frozen(np.concatenate([[0], np.cumsum(counts)]).astype(np.int64))

        # position of each document when sorted by external id (tie-break key)
        ext_rank = np.empty(self.doc_count, dtype=np.int64)
        ext_rank[sorted(range(self.doc_count), key=self.external_ids.__getitem__)] = np.arange(self.doc_count)
        self.ext_rank = _frozen(ext_rank)
        self._focus = None

    @property
    def N(self) -> int:
        return self.doc_count

    def term_id(self, term: str) -> int:
        return self._term_ids.get(term, -1)

    def internal_id(self, external_id: str) -> int:
        return self._internal_ids[external_id]

    def df(self, term: str) -> int:
        t = self.term_id(term)
        return 0 if t < 0 else int(self.df_array[t])

    def ctf(self, term: str) -> int:
        t = self.term_id(term)
        return 0 if t < 0 else int(self.ctf_array[t])

    def posting_arrays(self, term_id: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.post_offsets[term_id], self.post_offsets[term_id + 1]
        return self.post_docs[lo:hi], self.post_tfs[lo:hi]

    def postings(self, term: str) -> list[tuple[int, int]]:
        t = self.term_id(term)
        if t < 0:
            return []
        docs, tfs = self.posting_arrays(t)
        return list(zip(docs.tolist(), tfs.tolist()))

    def doc_term_arrays(self, internal_id: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.doc_offsets[internal_id], self.doc_offsets[internal_id + 1]
        return self.doc_terms_flat[lo:hi], self.doc_tfs_flat[lo:hi]

    def document(self, internal_id: int) -> DocumentRecord:
        terms, tfs = self.doc_term_arrays(internal_id)
        freqs = {self.vocab[t]: int(f) for t, f in zip(terms.tolist(), tfs.tolist())}
        return DocumentRecord(self.external_ids[internal_id], internal_id, freqs,
                              int(self.doc_lengths[internal_id]))

    @property
    def docs(self) -> list[DocumentRecord]:
        return [self.document(i) for i in range(self.doc_count)]

    def analyze(self, text: str) -> list[str]:
        return analyze(text, self.stopwords)

    def __repr__(self) -> str:
        return (f"CorpusIndex(N={self.doc_count}, vocab={len(self.vocab)}, "
                f"avg_doc_length={self.avg_doc_length:.3f})")


def build_index(docs: Iterable[tuple[str, str]], stopwords: Iterable[str] | None = None) -> CorpusIndex:
    """Analyze and index ``(external_id, text)`` pairs.

    Documents whose analyzed text is empty keep their id and count toward N
    and the average length, but have no postings.
    """
    stop = DEFAULT_STOPWORDS if stopwords is None else frozenset(stopwords)
    seen: dict[str, int] = {}
    external_ids: list[str] = []
    lengths: list[int] = []
    distinct: list[int] = []
    all_terms: list[str] = []
    all_tfs: list[int] = []
    for external_id, text in docs:
        if external_id in seen:
            raise DuplicateDocumentError(f"duplicate document id {external_id!r} "
                                         f"(records {seen[external_id]} and {len(external_ids)})")
        seen[external_id] = len(external_ids)
        external_ids.append(external_id)
        terms = analyze(text, stop)
        counts = Counter(terms)
        lengths.append(len(terms))
        distinct.append(len(counts))
        all_terms.extend(counts.keys())
        all_tfs.extend(counts.values())
    if not all_terms:
        raise ValueError("no document produced any indexable term")

    vocab = sorted(set(all_terms))
    term_index = {t: i for i, t in enumerate(vocab)}
    tids = np.fromiter((term_index[t] for t in all_terms), dtype=np.int64, count=len(all_terms))
    doc_of = np.repeat(np.arange(len(external_ids), dtype=np.int32), distinct)
    # stable sort by term keeps postings in internal-id order
    order = np.argsort(tids, kind="stable")
    post_docs = doc_of[order]
    post_tfs = np.asarray(all_tfs, dtype=np.int32)[order]
    offsets = np.zeros(len(vocab) + 1, dtype=np.int64)
    np.cumsum(np.bincount(tids, minlength=len(vocab)), out=offsets[1:])
    return CorpusIndex(external_ids, np.asarray(lengths, dtype=np.int64), vocab,
                       offsets, post_docs, post_tfs, stop)


def idf(index: CorpusIndex, term: str) -> float:
    """BM25 idf, ``ln(1 + (N - df + 0.5) / (df + 0.5))``; unseen terms have df = 0."""
    df = index.df(term)
    return math.log(1.0 + (index.doc_count - df + 0.5) / (df + 0.5))


def idf_array(index: CorpusIndex) -> np.ndarray:
    df = index.df_array.astype(np.float64)
    return np.log(1.0 + (index.doc_count - df + 0.5) / (df + 0.5))


def doc_language_model(index: CorpusIndex, internal_id: int) -> dict[str, float]:
    """Maximum-likelihood term distribution of one document."""
    length = int(index.doc_lengths[internal_id])
    if length == 0:
        raise DegenerateDocumentError(f"document {index.external_ids[internal_id]!r} has no terms")
    terms, tfs = index.doc_term_arrays(internal_id)
    return {index.vocab[t]: f / length for t, f in zip(terms.tolist(), tfs.tolist())}


# --------------------------------------------------------------------------
# persistence

def _write_str(out: io.BufferedIOBase, s: str) -> None:
    b = s.encode("utf-8")
    out.write(struct.pack("<I", len(b)))
    out.write(b)


def _write_array(out: io.BufferedIOBase, a: np.ndarray, dtype: str) -> None:
    out.write(struct.pack("<Q", len(a)))
    out.write(np.ascontiguousarray(a, dtype=dtype).tobytes())


def save_index(index: CorpusIndex, path: str | Path) -> None:
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(bytes([FORMAT_VERSION]))
    stop = sorted(index.stopwords)
    buf.write(struct.pack("<I", len(stop)))
    for w in stop:
        _write_str(buf, w)
    buf.write(struct.pack("<Q", index.doc_count))
    for e in index.external_ids:
        _write_str(buf, e)
    _write_array(buf, index.doc_lengths, "<i8")
    buf.write(struct.pack("<Q", len(index.vocab)))
    for t in index.vocab:
        _write_str(buf, t)
    _write_array(buf, index.post_offsets, "<i8")
    _write_array(buf, index.post_docs, "<i4")
    _write_array(buf, index.post_tfs, "<i4")
    body = buf.getvalue()
    # trailing length lets truncation be told apart from a corrupt body
    Path(path).write_bytes(body + struct.pack("<Q", len(body)))


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise IndexFormatError("index file is truncated")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def string(self) -> str:
        (n,) = self.unpack("<I")
        try:
            return self.take(n).decode("utf-8")
        except UnicodeDecodeError as e:
            raise IndexFormatError(f"corrupt string at byte {self.pos}") from e

    def array(self, dtype: str) -> np.ndarray:
        (n,) = self.unpack("<Q")
        dt = np.dtype(dtype)
        return np.frombuffer(self.take(n * dt.itemsize), dtype=dt).astype(dt.newbyteorder("="))


def load_index(path: str | Path) -> CorpusIndex:
    data = Path(path).read_bytes()
    if not data.startswith(MAGIC):
        raise IndexFormatError(f"{path}: not an index file")
    if len(data) < len(MAGIC) + 1 + 8:
        raise IndexFormatError(f"{path}: index file is truncated")
    version = data[len(MAGIC)]
    if version != FORMAT_VERSION:
        raise IndexFormatError(f"{path}: format version {version}, expected {FORMAT_VERSION}")
    (body_len,) = struct.unpack("<Q", data[-8:])
    if body_len != len(data) - 8:
        raise IndexFormatError(f"{path}: index file is truncated")
    r = _Reader(data[:-8])
    r.pos = len(MAGIC) + 1
    try:
        (n_stop,) = r.unpack("<I")
        stop = [r.string() for _ in range(n_stop)]
        (n_docs,) = r.unpack("<Q")
        ids = [r.string() for _ in range(n_docs)]
        lengths = r.array("<i8")
        (n_vocab,) = r.unpack("<Q")
        vocab = [r.string() for _ in range(n_vocab)]
        offsets = r.array("<i8")
        post_docs = r.array("<i4")
        post_tfs = r.array("<i4")
    except struct.error as e:
        raise IndexFormatError(f"{path}: {e}") from e
    if r.pos != len(r.data) or len(lengths) != n_docs or len(offsets) != n_vocab + 1 \
            or len(post_docs) != len(post_tfs) or (len(offsets) and offsets[-1] != len(post_docs)):
        raise IndexFormatError(f"{path}: inconsistent section sizes")
    return CorpusIndex(ids, lengths, vocab, offsets, post_docs, post_tfs, stop)


# --------------------------------------------------------------------------
# corpus readers

def read_jsonl(path: str | Path) -> Iterator[tuple[str, str]]:
    with open(path, encoding="utf-8", errors="replace") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                yield str(obj["id"]), str(obj["text"])
            except (json.JSONDecodeError, KeyError, TypeError) as e:
                raise ValueError(f"{path}:{lineno}: bad JSONL record ({e})") from e


_DOC = re.compile(r"<DOC>(.*?)</DOC>", re.DOTALL | re.IGNORECASE)
_DOCNO = re.compile(r"<DOCNO>\s*(.*?)\s*</DOCNO>", re.DOTALL | re.IGNORECASE)
_TAG = re.compile(r"<[^>]+>")


def read_trec(path: str | Path) -> Iterator[tuple[str, str]]:
    """Yield documents from a TREC SGML file; all text outside DOCNO is body."""
    text = Path(path).read_text(encoding="utf-8", errors="replace")
    for n, m in enumerate(_DOC.finditer(text), 1):
        block = m.group(1)
        docno = _DOCNO.search(block)
        if docno is None:
            raise ValueError(f"{path}: DOC block {n} has no DOCNO")
        body = _TAG.sub(" ", block[:docno.start()] + block[docno.end():])
        yield docno.group(1), body


def read_corpus(path: str | Path, fmt: str = "jsonl") -> Iterator[tuple[str, str]]:
    if fmt == "jsonl":
        return read_jsonl(path)
    if fmt == "trec":
        return read_trec(path)
    raise ValueError(f"unknown corpus format {fmt!r}")
