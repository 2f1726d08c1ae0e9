import os

# keep test runs from writing joinconv.log
os.environ['JOINCONV_LOG_FILE'] = ''

import numpy as np
import pytest

from bench import generate_clique
from models import MISSING, QueryInstance, SetFunction


def build_instance(n, cardinalities, edges=None, cross_products=True, names=None):
    """Instance from {mask: value}; absent masks stay MISSING"""
    values = np.full(1 << n, MISSING, dtype=np.int64)
    values[0] = 0
    for s, value in cardinalities.items():
        values[s] = value
    if edges is None:
        edges = [(a, b) for a in range(n) for b in range(a + 1, n)]
    names = names or [f"R{i + 1}" for i in range(n)]
    return QueryInstance(n, names, edges, SetFunction(n, values), cross_products=cross_products)


@pytest.fixture
def make_instance():
    return build_instance


@pytest.fixture
def three_relations():
    """c(12)=10, c(13)=20, c(23)=5, c(123)=8 over bases 100, 200, 300"""
    return build_instance(3, {
        0b001: 100, 0b010: 200, 0b100: 300,
        0b011: 10, 0b101: 20, 0b110: 5,
        0b111: 8,
    })


@pytest.fixture
def chain_four():
    """Chain R1-R2-R3-R4 with cross products disabled; only connected sets carry a cardinality"""
    return build_instance(4, {
        0b0001: 10, 0b0010: 20, 0b0100: 30, 0b1000: 40,
        0b0011: 50, 0b0110: 60, 0b1100: 70,
        0b0111: 80, 0b1110: 90,
        0b1111: 100,
    }, edges=[(0, 1), (1, 2), (2, 3)], cross_products=False)


@pytest.fixture
def clique():
    def factory(n, seed=0, max_card=100_000_000):
        return generate_clique(n, seed, max_card)
    return factory


@pytest.fixture
def disconnected():
    """R3 shares no predicate with R1-R2 and cross products are disabled"""
    return build_instance(3, {
        0b001: 5, 0b010: 6, 0b100: 7,
        0b011: 10,
    }, edges=[(0, 1)], cross_products=False)
