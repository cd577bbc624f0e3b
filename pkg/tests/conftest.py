from fractions import Fraction

import pytest

from e2gaps.cli import TABLE_ROWS, bundled_fixture
from e2gaps.forms import build_forms

PAPER_CONFIGS = [(k, th, nu) for k, th, nu in TABLE_ROWS]


@pytest.fixture(scope="session")
def paper_forms():
    """Forms and fixture record for each of the eight table rows, built once."""
    cache = {}

    def get(k):
        if k not in cache:
            fx = bundled_fixture(k)
            cache[k] = (fx, build_forms(k, fx["theta"], fx["terms"]))
        return cache[k]

    return get


def frac_list(*xs):
    return [Fraction(x) for x in xs]
