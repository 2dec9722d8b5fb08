"""Acceptance criteria 1-10, one test each, printing one PASS/FAIL line per criterion.

Run standalone with ``python tests/test_acceptance.py`` for just the summary lines.
"""

import pytest

from blowup_spectra import gates as G


@pytest.fixture(scope="module")
def results():
    return {r.number: r for r in G.run_all()}


@pytest.mark.parametrize("gate", G.GATES, ids=lambda g: f"criterion_{g.number:02d}")
def test_criterion(gate, results, capsys):
    res = results[gate.number]
    with capsys.disabled():
        print(f"\n{res.line()}  {res.detail}")
    assert res.passed, res.detail


if __name__ == "__main__":
    import sys

    rs = G.run_all()
    for r in rs:
        print(r.line())
    sys.exit(0 if all(r.passed for r in rs) else 1)
