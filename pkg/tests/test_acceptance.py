"""Acceptance criteria A1-A12 at reference scale.

Set ``COMPETITION_LAB_ACCEPTANCE_SCALE`` below 1 for a quick smoke run; the
tolerances stay the same, so small scales may fail statistically.
"""

import os

import pytest

from competition_lab.acceptance import CRITERIA, Suite

import conftest

SCALE = float(os.environ.get("COMPETITION_LAB_ACCEPTANCE_SCALE", "1.0"))


@pytest.fixture(scope="session")
def suite():
    return Suite(scale=SCALE)


@pytest.mark.acceptance
@pytest.mark.parametrize("cid", list(CRITERIA))
def test_criterion(suite, cid):
    res = suite.run(cid)
    line = res.line()
    print(line)
    conftest.ACCEPTANCE_LINES.append(line)
    assert res.passed, line
