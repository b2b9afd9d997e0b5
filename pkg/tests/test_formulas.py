"""Check scoring against the worked-example table in FORMULAS.md."""

import re
from pathlib import Path

import numpy as np
import pytest

from qppconf import kernels
from qppconf.similarity import TermQueryStats, family_code, parse_config, score

FORMULAS = Path(__file__).resolve().parents[1] / "FORMULAS.md"
ROW = re.compile(r"^\|\s*`([^`]+)`\s*\|\s*([-0-9.eE]+)\s*\|$")

TF, DF, CTF, DL, N, T = 3, 5, 12, 40, 100, 5000
AVGDL = T / N


def table():
    rows = [ROW.match(line.strip()) for line in FORMULAS.read_text().splitlines()]
    return [(m.group(1), float(m.group(2))) for m in rows if m]


def test_table_is_complete():
    names = [n for n, _ in table()]
    assert len(names) == 21
    assert {parse_config(n).__class__.__name__ for n in names} == {"BM25", "LMDirichlet", "DFR", "IB"}


@pytest.mark.parametrize("name,expected", table())
def test_reference_score(name, expected):
    got = score(parse_config(name), [TermQueryStats(TF, DF, CTF, DL, N, T, AVGDL)])
    assert got == pytest.approx(expected, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("name,expected", table())
def test_kernel_score(name, expected, backend):
    fam, (p0, p1, p2) = family_code(parse_config(name))
    acc = np.zeros(2)
    lengths = np.array([DL, 7], dtype=np.int64)
    kernels.score_postings(fam, p0, p1, p2, np.array([0], dtype=np.int32), np.array([TF], dtype=np.int32),
                           lengths, DF, CTF, N, T, AVGDL, 1, acc)
    assert acc[0] == pytest.approx(expected, rel=1e-12, abs=1e-12)
    assert acc[1] == 0.0


def test_table_matches_high_precision_oracle():
    pytest.importorskip("mpmath")
    import subprocess
    import sys
    script = FORMULAS.parent / "tools" / "formulas_oracle.py"
    out = subprocess.run([sys.executable, str(script)], capture_output=True, text=True, check=True).stdout
    rows = [ROW.match(line.strip()) for line in out.splitlines()]
    assert [(m.group(1), float(m.group(2))) for m in rows if m] == table()
