from fractions import Fraction as F
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures():
    return FIXTURES


@pytest.fixture
def private_not_derivable():
    from dpcount.acceptance import PRIVATE_NOT_DERIVABLE

    return PRIVATE_NOT_DERIVABLE


def frac_rows(rows):
    return [[F(v) for v in row] for row in rows]
