"""
Shared fixtures for the analyzer tests
"""

import os
import sys

import numpy as np
import pytest

# Add the project root to the path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from utils.config import AnalysisConfig


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: traces separatrices of catalog systems")


@pytest.fixture
def rng():
    """Seeded generator so sampled inputs repeat between runs"""
    return np.random.default_rng(20240611)


@pytest.fixture
def config():
    return AnalysisConfig()
