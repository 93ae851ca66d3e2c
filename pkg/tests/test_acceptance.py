"""Acceptance suite: one PASS/FAIL line per criterion at the default tolerances."""

import pytest

from udw.validate import CRITERIA, DEFAULT_TOLERANCES, run_criterion

_cache = {}


def _result(cid):
    if cid not in _cache:
        _cache[cid] = run_criterion(cid)
    return _cache[cid]


@pytest.mark.parametrize("cid", sorted(CRITERIA), ids=[f"criterion_{i:02d}" for i in sorted(CRITERIA)])
def test_criterion(cid, capsys):
    res = _result(cid)
    with capsys.disabled():
        print("\n" + res.line())
    assert res.tolerance == DEFAULT_TOLERANCES[cid]
    assert res.passed, res.line()
