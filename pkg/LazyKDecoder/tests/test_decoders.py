import numpy as np
import pytest

from constraints import ALWAYS_TRUE, BIO_VALID, dataset_constraints
from decoders import DECODERS, decode_corpus, decode_doc, decode_viterbi, get_decoder
from errors import DecodeError
from params import DecodeStatus, DecoderName
from prob_table import build_table
from rule_config import load_rule_file
from synth import SynthSpec, gen_synthetic


@pytest.fixture
def walkthrough_rules(walkthrough_rules_path):
    return load_rule_file(walkthrough_rules_path)


def test_registry_covers_every_name():
    assert set(DECODERS) == set(DecoderName)
    assert get_decoder("viterbi-bio") is DECODERS[DecoderName.VITERBI_BIO]
    with pytest.raises(DecodeError):
        get_decoder("greedy")


@pytest.mark.parametrize("decoder", ["lazyk", "bestfirst", "beam"])
def test_searching_decoders_on_walkthrough(walkthrough_doc, walkthrough_rules, decoder):
    result = decode_doc(walkthrough_doc, decoder, walkthrough_rules, max_k=64)
    assert result.labels == ["B-cash", "I-cash", "I-cash"]
    record = result.as_record(decoder)
    assert record == {
        "doc_id": "walkthrough",
        "decoder": decoder,
        "status": "satisfied",
        "sequences_examined": 5,
        "probability": pytest.approx(0.045),
        "labels": ["B-cash", "I-cash", "I-cash"],
    }


def test_budget_exhausted_falls_back_to_argmax(walkthrough_doc, walkthrough_rules):
    result = decode_doc(walkthrough_doc, "lazyk", walkthrough_rules, max_k=3)
    assert result.outcome.status is DecodeStatus.EXHAUSTED_BUDGET
    assert result.labels == ["B-cash", "I-total", "I-total"]
    assert result.as_record("lazyk")["probability"] == pytest.approx(0.08)


def test_argmax_examines_one_sequence(walkthrough_doc, walkthrough_rules):
    result = decode_doc(walkthrough_doc, "argmax", walkthrough_rules, max_k=1)
    assert result.outcome.status is DecodeStatus.EXHAUSTED_BUDGET
    assert result.outcome.sequences_examined == 1
    assert result.labels == ["B-cash", "I-total", "I-total"]
    assert decode_doc(walkthrough_doc, "argmax", ALWAYS_TRUE, max_k=1).outcome.satisfied


def test_viterbi_returns_best_bio_valid(walkthrough_doc, walkthrough_rules):
    result = decode_doc(walkthrough_doc, "viterbi-bio", BIO_VALID, max_k=1)
    assert result.outcome.satisfied
    assert result.labels == ["B-total", "I-total", "I-total"]
    # BIO-valid but no cash field
    result = decode_doc(walkthrough_doc, "viterbi-bio", walkthrough_rules, max_k=1)
    assert result.outcome.status is DecodeStatus.EXHAUSTED_BUDGET
    assert result.labels == ["B-total", "I-total", "I-total"]


def test_viterbi_without_valid_sequence_keeps_argmax():
    with np.errstate(divide="ignore"):
        table = build_table(np.log([[0.0, 1.0]]))
    outcome = decode_viterbi(table, ["B-a", "I-a"], ["x"], BIO_VALID, max_k=1)
    assert outcome.status is DecodeStatus.SEARCH_EXHAUSTED
    assert outcome.sequences_examined == 0
    assert outcome.prediction.ranks == (0,)


def test_one_shot_decoders_check_arguments(walkthrough_table):
    with pytest.raises(DecodeError):
        get_decoder("argmax")(walkthrough_table, ["a", "b"], ["x", "y", "z"], ALWAYS_TRUE, 1)


def test_corpus_order_does_not_depend_on_jobs():
    docs = gen_synthetic(SynthSpec(docs=12, tokens_per_doc=20, noise=0.1, seed=2))
    constraint = dataset_constraints("cord")
    serial = decode_corpus(docs, "lazyk", constraint, max_k=64)
    threaded = decode_corpus(docs, "lazyk", constraint, max_k=64, jobs=4)
    assert [r.as_record("lazyk") for r in serial] == [r.as_record("lazyk") for r in threaded]
    assert [r.doc.doc_id for r in threaded] == [d.doc_id for d in docs]


def test_corpus_rejects_bad_jobs_and_names(walkthrough_doc):
    with pytest.raises(DecodeError):
        decode_corpus([walkthrough_doc], "lazyk", ALWAYS_TRUE, 8, jobs=0)
    with pytest.raises(DecodeError):
        decode_corpus([], "nope", ALWAYS_TRUE, 8)
    assert decode_corpus([], "lazyk", ALWAYS_TRUE, 8) == []
