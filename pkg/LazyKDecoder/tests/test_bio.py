import itertools

import pytest

from bio import Span, Token, bio_valid, extract_spans, parse_label, transition_mask
from errors import ConstraintError

SPLIT_56 = [Token("56"), Token(".", joins_previous=True), Token("000", joins_previous=True)]


@pytest.mark.parametrize("label, expected", [
    ("O", ("O", None)),
    ("B-total", ("B", "total")),
    ("I_cash", ("I", "cash")),
    ("B-total.total_price", ("B", "total.total_price")),
])
def test_parse_label(label, expected):
    assert parse_label(label) == expected


@pytest.mark.parametrize("label", ["X-total", "B", "B-", "total", ""])
def test_parse_label_rejects(label):
    with pytest.raises(ConstraintError):
        parse_label(label)


@pytest.mark.parametrize("labels, expected", [
    (["B_cash", "I_total", "I_total"], False),
    (["B_total", "I_total", "I_total"], True),
    (["O", "O", "O"], True),
    (["I-total"], False),
    (["O", "I-total"], False),
    (["B-total", "B-total", "I-total"], True),
    ([], True),
])
def test_bio_valid(labels, expected):
    assert bio_valid(labels) is expected


def test_extract_joins_sub_tokens():
    spans = extract_spans(SPLIT_56, ["B_cash", "I_cash", "I_cash"])
    assert spans == {"cash": [Span("56.000", 0, 3)]}


def test_extract_spaces_between_words():
    spans = extract_spans(["Rp", "56.000", "CASH"], ["B-cash", "I-cash", "O"])
    assert spans == {"cash": [Span("Rp 56.000", 0, 2)]}


def test_extract_all_o():
    assert extract_spans(["a", "b"], ["O", "O"]) == {}


def test_extract_two_runs_of_one_class():
    tokens = ["10", "x", "20", "000"]
    spans = extract_spans(tokens, ["B-total", "O", "B-total", "I-total"])
    assert spans == {"total": [Span("10", 0, 1), Span("20 000", 2, 4)]}


def test_extract_adjacent_b_starts_new_span():
    spans = extract_spans(["1", "2"], ["B-total", "B-total"])
    assert [s.text for s in spans["total"]] == ["1", "2"]


def test_extract_rejects_invalid_labels():
    with pytest.raises(ConstraintError):
        extract_spans(SPLIT_56, ["B_cash", "I_total", "I_total"])
    with pytest.raises(ConstraintError):
        extract_spans(SPLIT_56, ["O", "O"])


def test_lenient_extract_opens_spans_at_stray_inside_labels():
    spans = extract_spans(SPLIT_56, ["B_cash", "I_total", "I_total"], strict=False)
    assert spans == {"cash": [Span("56", 0, 1)], "total": [Span(".000", 1, 3)]}
    spans = extract_spans(["1", "2"], ["I-total", "I-total"], strict=False)
    assert spans == {"total": [Span("1 2", 0, 2)]}


def test_transition_mask():
    allowed, start = transition_mask(["O", "B-a", "I-a", "B-b", "I-b"])
    assert start.tolist() == [True, True, False, True, False]
    # into I-a only from B-a or I-a
    assert allowed[:, 2].tolist() == [False, True, True, False, False]
    assert allowed[:, 0].all() and allowed[:, 1].all()


def test_transition_mask_agrees_with_bio_valid():
    vocab = ["O", "B-a", "I-a", "B-b", "I-b"]
    allowed, start = transition_mask(vocab)
    for seq in itertools.product(range(len(vocab)), repeat=3):
        reachable = start[seq[0]] and all(allowed[a, b] for a, b in zip(seq, seq[1:]))
        assert bool(reachable) == bio_valid([vocab[j] for j in seq])
