import os
import sys

import numpy as np
import pytest

HERE = os.path.dirname(os.path.abspath(__file__))
PKG = os.path.dirname(HERE)
sys.path.insert(0, PKG)

FIXTURES = os.path.join(PKG, "fixtures")

from corpus import load_corpus  # noqa: E402
from prob_table import build_table  # noqa: E402

WALKTHROUGH_VOCAB = ["B-total", "I-total", "B-cash", "I-cash"]


def random_logp(rng: np.random.Generator, n: int, l: int) -> np.ndarray:
    """Normalised log-probabilities; continuous draws, so ties do not occur in practice."""
    probs = rng.dirichlet(np.ones(l), size=n)
    return np.log(probs)


def random_table(rng: np.random.Generator, n: int, l: int):
    return build_table(random_logp(rng, n, l))


@pytest.fixture
def walkthrough_path() -> str:
    return os.path.join(FIXTURES, "walkthrough.jsonl")


@pytest.fixture
def walkthrough_rules_path() -> str:
    return os.path.join(FIXTURES, "walkthrough_rules.json")


@pytest.fixture
def walkthrough_doc(walkthrough_path):
    return load_corpus(walkthrough_path)[0]


@pytest.fixture
def walkthrough_table(walkthrough_doc):
    return walkthrough_doc.table()
