import numpy as np
import pytest

from baselines import (
    Beam,
    argmax_decode,
    beam_filter_decode,
    beam_topk,
    best_first_decode,
    brute_force_topk,
    viterbi_bio,
)
from bio import bio_valid
from constraints import ALWAYS_FALSE, BIO_VALID
from errors import DecodeError
from lazy_k import lazy_k_decode, topk_lazy
from params import DecodeStatus
from prob_table import build_table, labels_of
from rule_config import load_rule_file

from conftest import WALKTHROUGH_VOCAB, random_table

BIO_VOCAB = ["O", "B-a", "I-a", "B-b", "I-b"]


def _shape(rng):
    l = int(rng.integers(2, 6))
    n = int(rng.integers(1, 9))
    while l ** n > 4096:
        n -= 1
    return n, l


def test_argmax(walkthrough_table):
    assert argmax_decode(walkthrough_table, WALKTHROUGH_VOCAB) == ["B-cash", "I-total", "I-total"]


def test_beam_width_one_is_argmax(walkthrough_table):
    assert [s.ranks for s in beam_topk(walkthrough_table, 1)] == [(0, 0, 0)]


def test_beam_rejects_zero_width(walkthrough_table):
    with pytest.raises(DecodeError):
        Beam(walkthrough_table, 0)


def test_beam_advance_keeps_k_prefixes(walkthrough_table):
    beam = Beam(walkthrough_table, 3)
    beam.advance(0)
    assert [prefix for prefix, _ in beam.entries] == [(0,), (1,), (2,)]
    beam.advance(1)
    assert [prefix for prefix, _ in beam.entries] == [(0, 0), (0, 1), (1, 0)]


def test_brute_force_guard():
    table = build_table(np.zeros((24, 2)))
    with pytest.raises(DecodeError):
        brute_force_topk(table, 1)


def test_triple_agreement_on_random_tables():
    rng = np.random.default_rng(77)
    mismatches = 0
    for _ in range(200):
        n, l = _shape(rng)
        table = random_table(rng, n, l)
        for k in sorted({1, 2, 5, l ** n}):
            oracle = [(s.ranks, s.cost) for s in brute_force_topk(table, k)]
            beams = [(s.ranks, s.cost) for s in beam_topk(table, k)]
            lazy = [(s.ranks, s.cost) for s in topk_lazy(table, k)]
            mismatches += not (oracle == beams == lazy)
    assert mismatches == 0


def test_viterbi_matches_first_bio_valid_lazy_sequence():
    rng = np.random.default_rng(78)
    checked = 0
    for _ in range(200):
        n = int(rng.integers(1, 6))
        logp = np.log(rng.dirichlet(np.ones(len(BIO_VOCAB)), size=n))
        # Knock out some labels so a few tables have no valid sequence at all
        logp[rng.random(logp.shape) < 0.15] = -np.inf
        dead = np.isneginf(logp).all(axis=1)
        logp[dead, 0] = np.log(0.5)
        table = build_table(logp)
        outcome = lazy_k_decode(table, BIO_VOCAB, [str(i) for i in range(n)], BIO_VALID, max_k=5 ** n)
        valid = outcome.satisfied and np.isfinite(outcome.sequence.cost)
        if not valid:
            with pytest.raises(DecodeError):
                viterbi_bio(table, BIO_VOCAB)
            continue
        labels = viterbi_bio(table, BIO_VOCAB)
        assert bio_valid(labels)
        assert labels == labels_of(table, outcome.sequence, BIO_VOCAB)
        checked += 1
    assert checked > 150


def test_viterbi_when_argmax_is_invalid():
    table = build_table(np.log([
        [0.5, 0.4, 0.1],
        [0.1, 0.1, 0.8],
    ]))
    # argmax O I-a is invalid; B-a I-a has 0.4 * 0.8, every other valid pair at most 0.05
    assert viterbi_bio(table, ["O", "B-a", "I-a"]) == ["B-a", "I-a"]


def test_viterbi_breaks_ties_by_rank_like_lazy_k():
    vocab = ["B-a", "I-b", "B-b", "I-a"]
    with np.errstate(divide="ignore"):
        table = build_table(np.log([[0.3, 0.0, 0.3, 0.4], [0.2, 0.3, 0.2, 0.3]]))
    # B-a I-a and B-b I-b both have 0.09; ranks (1, 1) come before (2, 0)
    outcome = lazy_k_decode(table, vocab, ["x", "y"], BIO_VALID, max_k=16)
    assert labels_of(table, outcome.sequence, vocab) == ["B-a", "I-a"]
    assert viterbi_bio(table, vocab) == ["B-a", "I-a"]


def test_viterbi_without_valid_sequence():
    table = build_table(np.log([[0.0, 1.0]]))
    with pytest.raises(DecodeError):
        viterbi_bio(table, ["B-a", "I-a"])


def test_best_first_agrees_with_lazy_k(walkthrough_doc, walkthrough_rules_path):
    constraint = load_rule_file(walkthrough_rules_path).for_document(walkthrough_doc)
    args = (walkthrough_doc.table(), walkthrough_doc.label_vocab, walkthrough_doc.tokens, constraint)
    lazy = lazy_k_decode(*args, max_k=64)
    best_first = best_first_decode(*args, max_k=64)
    beam = beam_filter_decode(*args, max_k=64)
    for other in (best_first, beam):
        assert other.status is lazy.status
        assert other.sequence == lazy.sequence
        assert other.sequences_examined == lazy.sequences_examined == 5


def test_best_first_and_beam_exhaust_like_lazy_k():
    rng = np.random.default_rng(79)
    for _ in range(50):
        n, l = _shape(rng)
        table = random_table(rng, n, l)
        vocab = [f"L{j}" for j in range(l)]
        tokens = [str(i) for i in range(n)]
        k = int(rng.integers(1, 20))
        results = [
            decode(table, vocab, tokens, ALWAYS_FALSE, k)
            for decode in (lazy_k_decode, best_first_decode, beam_filter_decode)
        ]
        statuses = {r.status for r in results}
        assert len(statuses) == 1
        assert {r.sequences_examined for r in results} == {min(k, l ** n)}
        expected = DecodeStatus.SEARCH_EXHAUSTED if k >= l ** n else DecodeStatus.EXHAUSTED_BUDGET
        assert statuses == {expected}
