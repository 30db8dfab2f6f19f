import numpy as np
import pytest

from constraints import dataset_constraints
from corpus import save_corpus
from errors import SynthError
from metrics import evaluate, satisfaction_ratio
from params import ConstraintSetName
from synth import SynthSpec, amount_tokens, gen_synthetic, label_vocab

DATASETS = [ConstraintSetName.CORD, ConstraintSetName.WILDRECEIPT, ConstraintSetName.DOCILE]


def _argmax_labels(doc):
    return [doc.label_vocab[j] for j in np.argmax(doc.probs, axis=1)]


def test_amount_tokens():
    assert [(t.text, t.joins_previous) for t in amount_tokens(56000)] == [
        ("56", False), (".", True), ("000", True),
    ]
    assert [t.text for t in amount_tokens(1234000)] == ["1", ".", "234", ".", "000"]
    assert [t.text for t in amount_tokens(500)] == ["500"]


def test_label_vocab():
    vocab = label_vocab(ConstraintSetName.CORD)
    assert vocab[0] == "O"
    assert len(vocab) == 17
    assert "I-total.changeprice" in vocab


@pytest.mark.parametrize("name", DATASETS)
def test_gold_labels_satisfy_their_constraints(name):
    docs = gen_synthetic(SynthSpec(docs=30, constraints=name, seed=3))
    assert satisfaction_ratio(docs, [d.gold_labels for d in docs], dataset_constraints(name)) == 1.0


@pytest.mark.parametrize("name", DATASETS)
def test_without_noise_argmax_is_gold(name):
    docs = gen_synthetic(SynthSpec(docs=20, noise=0.0, constraints=name, seed=4))
    for doc in docs:
        assert _argmax_labels(doc) == doc.gold_labels
        assert np.allclose(doc.probs.sum(axis=1), 1.0)
    report, _ = evaluate(docs, "argmax", dataset_constraints(name), max_k=1)
    assert report.micro_f1 == 1.0
    assert report.csr == 1.0


def test_full_noise_flips_every_entity_token():
    doc = gen_synthetic(SynthSpec(docs=1, noise=1.0, seed=5))[0]
    for predicted, gold in zip(_argmax_labels(doc), doc.gold_labels):
        assert (predicted == gold) == (gold == "O")
        if gold != "O":
            assert predicted[0] == gold[0]


def test_same_seed_same_bytes(tmp_path):
    spec = SynthSpec(docs=15, seed=7)
    a, b, c = tmp_path / "a.jsonl", tmp_path / "b.jsonl", tmp_path / "c.jsonl"
    save_corpus(str(a), gen_synthetic(spec))
    save_corpus(str(b), gen_synthetic(spec))
    save_corpus(str(c), gen_synthetic(SynthSpec(docs=15, seed=8)))
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes() != c.read_bytes()


def test_document_shape():
    docs = gen_synthetic(SynthSpec(docs=5, tokens_per_doc=60, constraints="wildreceipt"))
    assert [d.doc_id for d in docs] == [f"synth-wildreceipt-{d:05d}" for d in range(5)]
    for doc in docs:
        assert doc.n >= 60
        assert doc.probs.shape == (doc.n, len(doc.label_vocab))
        doc.check()


def test_no_documents():
    assert gen_synthetic(SynthSpec(docs=0)) == []


def test_lazy_k_recovers_what_argmax_breaks():
    docs = gen_synthetic(SynthSpec(docs=40, tokens_per_doc=30, noise=0.05, seed=11))
    constraint = dataset_constraints("cord")
    argmax, _ = evaluate(docs, "argmax", constraint, max_k=1)
    lazy, _ = evaluate(docs, "lazyk", constraint, max_k=1024)
    assert argmax.csr < 1.0
    assert lazy.csr > argmax.csr
    assert lazy.f1s > argmax.f1s


@pytest.mark.parametrize("spec", [
    SynthSpec(docs=-1),
    SynthSpec(tokens_per_doc=0),
    SynthSpec(noise=1.5),
    SynthSpec(noise=-0.1),
    SynthSpec(constraints="none"),
    SynthSpec(constraints="sroie"),
])
def test_bad_parameters(spec):
    with pytest.raises(SynthError):
        gen_synthetic(spec)
