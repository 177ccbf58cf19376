# -*- coding: utf-8 -*-
"""Shared fixtures"""

from pathlib import Path

import pytest

from simulator.machine import SimConfig
from utils.geometry import CacheGeometry

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURES = REPO_ROOT / "fixtures"


@pytest.fixture
def geom():
    return CacheGeometry()


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def prefetch_config():
    return SimConfig(enable_previction=False)


@pytest.fixture
def quiet_config():
    """Cache only: no prefetcher, no previction"""
    return SimConfig(enable_prefetcher=False, enable_previction=False)
