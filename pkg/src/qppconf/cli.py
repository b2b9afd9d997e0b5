"""Command-line entry point: index, search, configs, select, eval, gen-synthetic, qpp dump."""

from __future__ import annotations

import argparse
import json
import logging
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import __version__, kernels
from .analysis import load_stopwords
from .evaluation import QrelsFormatError, evaluate_selection, map_score, parse_qrels
from .index import IndexFormatError, build_index, load_index, read_corpus, save_index
from .retrieval import EmptyQueryError, format_run, read_run, run_query, write_run
from .selector import BenchmarkError, QueryBenchmark, SelectionReport, read_topics, select
from .similarity import ConfigError, SimilarityConfig, enumerate_dfr_grid, parse_config, usecase1_set
from .synthetic import generate, write_benchmark

log = logging.getLogger("qppconf")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_BENCHMARK = 3
EXIT_MISMATCH = 4


@dataclass
class RunManifest:
    index: str
    topics: str
    configs: list[str] = field(default_factory=lambda: ["usecase1"])
    k: int = 100
    out: str = "selection"
    seed: int | None = None

    def validate(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")
        for p in (self.index, self.topics):
            if not Path(p).exists():
                raise FileNotFoundError(p)

    @classmethod
    def load(cls, path: str | Path) -> "RunManifest":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        known = {"index", "topics", "configs", "k", "out", "seed"}
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown manifest keys: {sorted(extra)}")
        if isinstance(data.get("configs"), str):
            data["configs"] = [data["configs"]]
        return cls(**data)


def expand_configs(tokens: Sequence[str]) -> list[SimilarityConfig]:
    """Resolve named sets (``usecase1``, ``dfr-grid``), ``@file`` lists and single specs."""
    out: list[SimilarityConfig] = []
    for tok in tokens:
        if tok == "usecase1":
            out.extend(usecase1_set())
        elif tok == "dfr-grid":
            out.extend(enumerate_dfr_grid())
        elif tok.startswith("@"):
            lines = Path(tok[1:]).read_text(encoding="utf-8").splitlines()
            out.extend(expand_configs([ln.strip() for ln in lines if ln.strip() and not ln.startswith("#")]))
        else:
            out.append(parse_config(tok))
    seen: set[str] = set()
    unique = []
    for c in out:
        if c.name not in seen:
            seen.add(c.name)
            unique.append(c)
    return unique


def run_file_name(i: int, config_name: str) -> str:
    return f"{i:03d}_{re.sub(r'[^A-Za-z0-9.=-]+', '_', config_name)}.run"


def _dump_tables(report: SelectionReport) -> tuple[str, str]:
    sweep = report.sweep
    lk = ["query_id\tconfig\tlikelihood\tdegenerate\tnqc\tcontribution\n"]
    contrib = {u.config: u.per_query_contributions for u in report.utilities}
    for n in sweep.configs:
        for q in sweep.query_ids:
            x = sweep.likelihoods[n][q]
            lk.append(f"{q}\t{n}\t{x.value!r}\t{int(x.degenerate)}\t{sweep.nqc[n][q]!r}\t{contrib[n][q]!r}\n")
    w = ["query_id\tdifficulty_rank\tdifficulty\tweight\n"]
    for q, weight in report.weights.weights.items():
        w.append(f"{q}\t{report.weights.difficulty_rank[q]}\t{report.difficulty[q]!r}\t{weight!r}\n")
    return "".join(lk), "".join(w)


def _run_selection(index_path: str, topics_path: str, config_tokens: Sequence[str], k: int, jobs: int):
    index = load_index(index_path)
    configs = expand_configs(config_tokens)
    bench = QueryBenchmark.from_pairs(read_topics(topics_path), index, name=Path(topics_path).name)
    report = select(configs, bench, index, k=k, jobs=jobs)
    return index, report


def cmd_index(args) -> int:
    stop = load_stopwords(args.stopwords) if args.stopwords else None
    index = build_index(read_corpus(args.corpus, args.format), stop)
    save_index(index, args.out)
    print(f"N={index.doc_count} vocab={len(index.vocab)} avg_doc_length={index.avg_doc_length:.4f}")
    return EXIT_OK


def cmd_search(args) -> int:
    index = load_index(args.index)
    config = parse_config(args.config)
    rl = run_query(index, config, index.analyze(args.query), args.k, args.qid)
    sys.stdout.write(format_run([rl]))
    return EXIT_OK


def cmd_configs_list(args) -> int:
    if args.grid == "dfr":
        configs = enumerate_dfr_grid()
    elif args.usecase1:
        configs = usecase1_set()
    else:
        configs = expand_configs(args.configs or ["usecase1"])
    for c in configs:
        print(c.name)
    return EXIT_OK


def cmd_select(args) -> int:
    if args.manifest:
        m = RunManifest.load(args.manifest)
    else:
        if not (args.index and args.topics):
            raise ValueError("select needs --index and --topics, or --manifest")
        m = RunManifest(args.index, args.topics, args.configs or ["usecase1"], args.k, args.out)
    m.validate()
    _, report = _run_selection(m.index, m.topics, m.configs, m.k, args.jobs)
    out = Path(m.out)
    (out / "runs").mkdir(parents=True, exist_ok=True)
    runs = {}
    for i, name in enumerate(report.sweep.configs):
        fname = run_file_name(i, name)
        lists = report.sweep.lists[name]
        write_run(out / "runs" / fname, [lists[q] for q in report.sweep.query_ids])
        runs[name] = f"runs/{fname}"
    report.inputs = {"index": m.index, "topics": m.topics, "configs": list(m.configs), "k": m.k,
                     "runs": runs}
    (out / "report.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
    (out / "report.txt").write_text(report.to_text(), encoding="utf-8")
    lk, w = _dump_tables(report)
    (out / "qpp").mkdir(exist_ok=True)
    (out / "qpp" / "likelihoods.tsv").write_text(lk, encoding="utf-8")
    (out / "qpp" / "weights.tsv").write_text(w, encoding="utf-8")
    print(f"chosen: {report.chosen}")
    return EXIT_OK


def cmd_qpp_dump(args) -> int:
    _, report = _run_selection(args.index, args.topics, args.configs or ["usecase1"], args.k, args.jobs)
    lk, w = _dump_tables(report)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "likelihoods.tsv").write_text(lk, encoding="utf-8")
        (out / "weights.tsv").write_text(w, encoding="utf-8")
    else:
        sys.stdout.write(lk + "\n" + w)
    return EXIT_OK


class QuerySetError(ValueError):
    pass


def cmd_eval(args) -> int:
    run_dir = Path(args.run_dir)
    report = json.loads((run_dir / "report.json").read_text(encoding="utf-8"))
    qrels = parse_qrels(args.qrels)
    predicted = [r["config"] for r in report["ranking"]]
    evaluated = set(report["queries"]["evaluated"])
    per_config: dict[str, dict] = {}
    for name in predicted:
        parsed = read_run(run_dir / report["input"]["runs"][name])
        per_config[name] = parsed.get(name, {})
    run_queries = set().union(*(set(v) for v in per_config.values())) | evaluated
    missing = sorted(run_queries - qrels.query_ids)
    if missing:
        raise QuerySetError(f"queries without qrels: {missing}")
    extra = sorted(qrels.query_ids - run_queries)
    if extra:
        log.warning("qrels queries not in the benchmark are ignored: %s", extra)
    maps = {}
    for name in predicted:
        runs = {q: [d for _, d, _ in per_config[name].get(q, [])] for q in evaluated}
        maps[name] = map_score(runs, qrels)
    ev = evaluate_selection(predicted, maps)
    out = Path(args.out) if args.out else run_dir
    out.mkdir(parents=True, exist_ok=True)
    (out / "eval.json").write_text(json.dumps(ev.to_dict(), indent=2) + "\n", encoding="utf-8")
    (out / "eval.tsv").write_text(ev.to_tsv(), encoding="utf-8")
    (out / "map.tsv").write_text(ev.map_table(), encoding="utf-8")
    sys.stdout.write(ev.to_tsv())
    return EXIT_OK


def cmd_gen_synthetic(args) -> int:
    if args.n_docs < 1 or args.n_queries < 1:
        raise ValueError("--n-docs and --n-queries must be positive")
    bench = generate(args.seed, args.n_docs, args.n_queries)
    paths = write_benchmark(bench, args.out, args.format)
    for kind, p in paths.items():
        print(f"{kind}: {p}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qppconf", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("index", help="build an index from a corpus")
    s.add_argument("corpus")
    s.add_argument("--format", choices=["jsonl", "trec"], default="jsonl")
    s.add_argument("--out", "-o", required=True)
    s.add_argument("--stopwords", help="stopword list, one word per line")
    s.set_defaults(func=cmd_index)

    s = sub.add_parser("search", help="run one query (debugging)")
    s.add_argument("--index", required=True)
    s.add_argument("--config", default="bm25")
    s.add_argument("--k", type=int, default=100)
    s.add_argument("--qid", default="q")
    s.add_argument("query")
    s.set_defaults(func=cmd_search)

    s = sub.add_parser("configs", help="configuration sets")
    csub = s.add_subparsers(dest="configs_command", required=True)
    c = csub.add_parser("list")
    c.add_argument("--grid", choices=["dfr"])
    c.add_argument("--usecase1", action="store_true")
    c.add_argument("--configs", action="append")
    c.set_defaults(func=cmd_configs_list)

    def selection_args(s, with_out_default):
        s.add_argument("--index")
        s.add_argument("--topics", help="TSV: qid<TAB>query text")
        s.add_argument("--configs", action="append",
                       help="usecase1 | dfr-grid | @file | config spec; repeatable")
        s.add_argument("--k", type=int, default=100)
        s.add_argument("--jobs", type=int, default=1)
        s.add_argument("--out", "-o", default=with_out_default)

    s = sub.add_parser("select", help="choose a configuration without relevance labels")
    selection_args(s, "selection")
    s.add_argument("--manifest", help="JSON manifest with index, topics, configs, k, out")
    s.set_defaults(func=cmd_select)

    s = sub.add_parser("eval", help="post-analysis of a selection against qrels")
    s.add_argument("run_dir")
    s.add_argument("--qrels", required=True)
    s.add_argument("--out", "-o")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("gen-synthetic", help="write a seeded planted-relevance benchmark")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--n-docs", type=int, default=10_000)
    s.add_argument("--n-queries", type=int, default=50)
    s.add_argument("--format", choices=["jsonl", "trec"], default="jsonl")
    s.add_argument("--out", "-o", required=True)
    s.set_defaults(func=cmd_gen_synthetic)

    s = sub.add_parser("qpp", help="query performance prediction tables")
    qsub = s.add_subparsers(dest="qpp_command", required=True)
    d = qsub.add_parser("dump", help="per-(query, config) likelihoods and query weights as TSV")
    selection_args(d, None)
    d.set_defaults(func=cmd_qpp_dump)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose, format="%(levelname)s %(name)s: %(message)s")
    if args.command == "qpp" and not (args.index and args.topics):
        parser.error("qpp dump needs --index and --topics")
    log.debug("scoring kernel backend: %s", kernels.BACKEND)
    try:
        return args.func(args)
    except BenchmarkError as e:
        print(f"qppconf: benchmark error: {e}", file=sys.stderr)
        return EXIT_BENCHMARK
    except QuerySetError as e:
        print(f"qppconf: {e}", file=sys.stderr)
        return EXIT_MISMATCH
    except FileNotFoundError as e:
        print(f"qppconf: file not found: {e.filename or e}", file=sys.stderr)
        return EXIT_ERROR
    except (ConfigError, IndexFormatError, QrelsFormatError, EmptyQueryError, ValueError, OSError) as e:
        print(f"qppconf: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
