"""
HTTP API for the decoder.

- GET  /             health check.
- GET  /constraints  decoder and constraint set names.
- POST /decode       one corpus record as JSON body; query params decoder,
                     constraints, max_k and mass_threshold. Answers the same
                     record the CLI decode command writes.

Invalid bodies or parameters answer 400 with {"message": ...}.
"""

import logging

from flask import Flask, jsonify, request

from constraints import RuleSet, bind, resolve_constraint
from corpus import doc_from_json
from decoders import decode_doc
from errors import LazyKError
from params import DEFAULT_MAX_K, MASS_DECODERS, ConstraintSetName, DecoderName

log = logging.getLogger(__name__)

app = Flask(__name__)


def _bad_request(message: str):
    log.info("Rejected decode request: %s", message)
    return jsonify({"message": message}), 400


@app.route("/")
def serve_root():
    """Health check endpoint."""
    return "Lazy-k decoder is alive!\n"


@app.route("/constraints")
def serve_constraints():
    return jsonify({
        "decoders": [d.value for d in DecoderName],
        "constraints": [c.value for c in ConstraintSetName],
    })


@app.route("/decode", methods=["POST"])
def serve_decode():
    """
    Decode one document.
    Query params:
      - decoder: decoder name, default lazyk
      - constraints: dataset constraint set or none, default none
      - max_k: budget, default 1024
      - mass_threshold: optional probability mass stop (lazyk, bestfirst)
    """
    payload = request.get_json(silent=True)
    if payload is None:
        return _bad_request("Expected a JSON document body")
    decoder = request.args.get("decoder", default=DecoderName.LAZYK.value)
    constraints = request.args.get("constraints", default=ConstraintSetName.NONE.value)
    max_k = request.args.get("max_k", default=DEFAULT_MAX_K, type=int)
    mass_threshold = request.args.get("mass_threshold", default=None, type=float)
    # Rule files stay on the command line
    if constraints.startswith("custom:"):
        return _bad_request("Custom rule files are not available over HTTP")
    if mass_threshold is not None and decoder not in MASS_DECODERS:
        return _bad_request(f"mass_threshold cannot be used with decoder {decoder}")

    try:
        doc = doc_from_json(payload)
        constraint = resolve_constraint(constraints)
        result = decode_doc(doc, decoder, constraint, max_k, mass_threshold)
        record = result.as_record(decoder)
        if isinstance(constraint, RuleSet):
            record.update(bind(constraint, doc).describe(doc.tokens, result.labels))
    except LazyKError as e:
        return _bad_request(str(e))

    log.info("Decoded %s with %s: %s", doc.doc_id, decoder, record["status"])
    return jsonify(record)


if __name__ == "__main__":
    app.run(host="0.0.0.0")
