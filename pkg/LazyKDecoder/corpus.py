"""
Corpus files: one JSON document per line (UTF-8).

    {"doc_id": "receipt-1",
     "tokens": [{"text": "56"}, {"text": ".", "joins_previous": true}, ...],
     "label_vocab": ["B-total", "I-total", ...],
     "probs": [[0.5, 0.1, ...], ...],
     "probs_are_log": false,
     "gold_labels": ["B-total", ...],
     "locale": "ambiguous-thousands",
     "context": {"total": "56.000"}}

Only doc_id, tokens and label_vocab are required. Tokens may also be plain
strings. null in probs is an impossible label (0 raw, -inf log); -Infinity
is accepted as well. probs may be left out when a side-car .npz archive
keyed by doc_id is given.
"""

import json
import logging
import math
from typing import Iterable, Mapping

import numpy as np
from jsonschema import validate
from jsonschema.exceptions import ValidationError

from bio import Token
from document import DocRecord
from errors import CorpusError
from params import SeparatorLocale

log = logging.getLogger(__name__)

record_schema = {
    "type": "object",
    "properties": {
        "doc_id": {"type": "string"},
        "tokens": {
            "type": "array",
            "items": {
                "anyOf": [
                    {"type": "string"},
                    {
                        "type": "object",
                        "properties": {
                            "text": {"type": "string"},
                            "joins_previous": {"type": "boolean"},
                        },
                        "required": ["text"],
                        "additionalProperties": False,
                    },
                ]
            },
        },
        "label_vocab": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "probs": {
            "type": "array",
            "items": {"type": "array", "items": {"type": ["number", "null"]}},
        },
        "probs_are_log": {"type": "boolean"},
        "gold_labels": {"type": ["array", "null"], "items": {"type": "string"}},
        "locale": {"enum": [loc.value for loc in SeparatorLocale] + [None]},
        "context": {"type": ["object", "null"], "additionalProperties": {"type": "string"}},
    },
    "required": ["doc_id", "tokens", "label_vocab"],
    "additionalProperties": False,
}


def _matrix(rows: list, width: int, are_log: bool) -> np.ndarray:
    impossible = -math.inf if are_log else 0.0
    for i, row in enumerate(rows):
        if len(row) != width:
            raise CorpusError(f"probs row {i} has {len(row)} entries, vocabulary has {width}")
    matrix = np.array(
        [[impossible if v is None else v for v in row] for row in rows],
        dtype=np.float64,
    ).reshape(len(rows), width)
    return matrix


def _check_values(matrix: np.ndarray, are_log: bool):
    if np.isnan(matrix).any():
        raise CorpusError("probs contains NaN")
    if are_log:
        if np.isposinf(matrix).any():
            raise CorpusError("Log-probabilities contain +inf")
        possible = ~np.isneginf(matrix)
    else:
        bad = (matrix < 0) | (matrix > 1)
        if bad.any():
            i, j = np.argwhere(bad)[0]
            raise CorpusError(f"Probability {matrix[i, j]} at row {i} column {j} is outside [0, 1]")
        possible = matrix > 0
    dead = np.flatnonzero(~possible.any(axis=1))
    if dead.size:
        raise CorpusError(f"Position {int(dead[0])} has no possible label")


def doc_from_json(data: Mapping, side_probs: Mapping[str, np.ndarray] | None = None) -> DocRecord:
    """
    Build a validated DocRecord from one decoded JSON object
    :param side_probs: doc_id -> matrix, used when the record has no probs
    :raises CorpusError: schema or dimension problems
    """
    try:
        validate(data, schema=record_schema)
    except ValidationError as e:
        raise CorpusError(f"Invalid record: {e.message}") from e

    are_log = data.get("probs_are_log", False)
    vocab = list(data["label_vocab"])
    if "probs" in data:
        matrix = _matrix(data["probs"], len(vocab), are_log)
    elif side_probs is not None and data["doc_id"] in side_probs:
        matrix = np.asarray(side_probs[data["doc_id"]], dtype=np.float64)
    else:
        raise CorpusError(f"Document {data['doc_id']} has no probabilities")

    tokens = [
        Token(t) if isinstance(t, str) else Token(t["text"], t.get("joins_previous", False))
        for t in data["tokens"]
    ]
    locale = data.get("locale")
    doc = DocRecord(
        doc_id=data["doc_id"],
        tokens=tokens,
        label_vocab=vocab,
        probs=matrix,
        probs_are_log=are_log,
        gold_labels=data.get("gold_labels"),
        locale=SeparatorLocale(locale) if locale is not None else None,
        context=data.get("context"),
    )
    doc.check()
    _check_values(matrix, are_log)
    return doc


def doc_to_json(doc: DocRecord) -> dict:
    impossible = np.isneginf(doc.probs) if doc.probs_are_log else np.zeros(doc.probs.shape, dtype=bool)
    rows = [
        [None if dead else float(v) for v, dead in zip(row, dead_row)]
        for row, dead_row in zip(np.asarray(doc.probs).tolist(), impossible.tolist())
    ]
    data = {
        "doc_id": doc.doc_id,
        "tokens": [
            {"text": t.text, "joins_previous": True} if t.joins_previous else {"text": t.text}
            for t in doc.tokens
        ],
        "label_vocab": list(doc.label_vocab),
        "probs": rows,
        "probs_are_log": doc.probs_are_log,
    }
    if doc.gold_labels is not None:
        data["gold_labels"] = list(doc.gold_labels)
    if doc.locale is not None:
        data["locale"] = doc.locale.value
    if doc.context is not None:
        data["context"] = dict(doc.context)
    return data


def load_corpus(path: str, probs_bin: str | None = None) -> list[DocRecord]:
    """
    Read a JSON-lines corpus; blank lines are skipped
    :param probs_bin: optional .npz archive of matrices keyed by doc_id
    :raises CorpusError: naming the file and line of the first bad record
    """
    side_probs = None
    if probs_bin is not None:
        try:
            side_probs = dict(np.load(probs_bin))
        except (OSError, ValueError) as e:
            raise CorpusError(f"Cannot read probability archive: {e}", path=probs_bin) from e

    docs: list[DocRecord] = []
    seen: set[str] = set()
    try:
        f = open(path, "rb")
    except OSError as e:
        raise CorpusError(f"Cannot open corpus: {e.strerror}", path=path) from e
    with f:
        for line_no, raw in enumerate(f, start=1):
            if not raw.strip():
                continue
            try:
                data = json.loads(raw.decode("utf-8"))
                doc = doc_from_json(data, side_probs)
            except UnicodeDecodeError as e:
                raise CorpusError(f"Not valid UTF-8: {e.reason} at byte {e.start}", path=path, line=line_no) from e
            except json.JSONDecodeError as e:
                raise CorpusError(f"Not valid JSON: {e.msg}", path=path, line=line_no) from e
            except CorpusError as e:
                raise CorpusError(str(e), path=path, line=line_no) from e
            if doc.doc_id in seen:
                raise CorpusError(f"Duplicate doc_id {doc.doc_id}", path=path, line=line_no)
            seen.add(doc.doc_id)
            docs.append(doc)
    log.info("Loaded %d documents from %s", len(docs), path)
    return docs


def save_corpus(path: str, docs: Iterable[DocRecord]):
    """Write documents as JSON lines, in order."""
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for doc in docs:
            f.write(json.dumps(doc_to_json(doc), ensure_ascii=False, allow_nan=False))
            f.write("\n")
            count += 1
    log.info("Wrote %d documents to %s", count, path)
