import os
import sys
from fractions import Fraction

import pytest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, ROOT)

from lcseries.sequences import GrowthCertificate, SeriesSpec, generate  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: acceptance-scale checks that take minutes')


@pytest.fixture(scope='session')
def repo_root():
    return ROOT


@pytest.fixture(scope='session')
def geometric_one():
    return generate(SeriesSpec.geometric(1), 200)


@pytest.fixture(scope='session')
def constant_two():
    return generate(SeriesSpec.constant(2), 120)


@pytest.fixture(scope='session')
def sigma_shifted():
    return generate(SeriesSpec.sigma_shifted(), 400)


@pytest.fixture(scope='session')
def geometric_certificate():
    '''a_n = 1 <= 2 + D for every n; the partial-sum deviation is n+1'''
    return GrowthCertificate(C=Fraction(2), D=Fraction(4001), alpha=Fraction(0), verified_up_to=4000,
                             series_id='geometric:1')
