"""
Command line interface.

    python cli.py decode --input corpus.jsonl --decoder lazyk --constraints cord --max-k 1024
    python cli.py topk --input walkthrough.jsonl --k 6 --constraints custom:walkthrough_rules.json
    python cli.py eval --input corpus.jsonl --decoder argmax --decoder lazyk --max-k 16 --max-k 1024
    python cli.py bench --input corpus.jsonl --decoder lazyk --repeats 10
    python cli.py gen --output corpus.jsonl --docs 200 --noise 0.05 --seed 7
    python cli.py serve --port 5000

Exit codes: 0 ok, 1 usage error, 2 bad data, 3 a document was left
unsatisfied under --strict.
"""

import json
import logging
from typing import Iterable

import click

from bio import bio_valid
from constraints import RuleSet, bind, resolve_constraint
from corpus import load_corpus, save_corpus
from decoders import decode_corpus
from errors import LazyKError
from lazy_k import topk_lazy
from metrics import bench, evaluate
from params import (
    DEFAULT_JOBS,
    DEFAULT_MAX_K,
    DEFAULT_REPEATS,
    EXIT_DATA,
    EXIT_UNSATISFIED,
    EXIT_USAGE,
    MASS_DECODERS,
    ConstraintSetName,
    DecoderName,
)
from prob_table import labels_of
from synth import SynthSpec, gen_synthetic

log = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class DataError(click.ClickException):
    exit_code = EXIT_DATA


class LazyKGroup(click.Group):
    """Maps usage errors to exit 1 and LazyKError to exit 2."""

    def make_context(self, *args, **kwargs):
        try:
            return super().make_context(*args, **kwargs)
        except click.UsageError as e:
            e.exit_code = EXIT_USAGE
            raise

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except click.UsageError as e:
            e.exit_code = EXIT_USAGE
            raise
        except LazyKError as e:
            raise DataError(str(e)) from e


_decoder_choice = click.Choice([d.value for d in DecoderName])


_CUSTOM_PREFIX = "custom:"


def _check_constraints_name(ctx, param, value: str) -> str:
    """Unknown set names are usage errors; rule file problems surface later as data errors."""
    if value.startswith(_CUSTOM_PREFIX) or value in {c.value for c in ConstraintSetName}:
        return value
    raise click.BadParameter(f"{value!r} is not cord, wildreceipt, docile, none or custom:PATH")


def _constraints_option(default: str):
    return click.option(
        "--constraints", "constraints", default=default, show_default=True, callback=_check_constraints_name,
        help="cord, wildreceipt, docile, none or custom:PATH to a JSON rule file.",
    )


def _input_options(f):
    f = click.option("--probs-bin", type=click.Path(exists=True, dir_okay=False),
                     help="NumPy .npz archive of probability matrices keyed by doc_id.")(f)
    f = click.option("--input", "input_path", required=True, type=click.Path(exists=True, dir_okay=False),
                     help="Corpus in JSON lines.")(f)
    return f


def _write_lines(output: str, lines: Iterable[str]):
    with click.open_file(output, "w", encoding="utf-8") as f:
        for line in lines:
            f.write(line)
            f.write("\n")


def _json_line(record: dict) -> str:
    return json.dumps(record, ensure_ascii=False)


def _check_mass(decoders: Iterable[str], mass_threshold: float | None):
    if mass_threshold is None:
        return
    for name in decoders:
        if DecoderName(name).value not in MASS_DECODERS:
            raise click.UsageError(f"--mass-threshold cannot be used with --decoder {name}")


@click.group(cls=LazyKGroup)
@click.option("-v", "--verbose", is_flag=True, help="Log at DEBUG level.")
def cli(verbose: bool):
    """Constrained decoding of token label probabilities."""
    logging.basicConfig(format=LOG_FORMAT)
    logging.getLogger().setLevel(logging.DEBUG if verbose else logging.WARNING)


@cli.command()
@_input_options
@click.option("--decoder", type=_decoder_choice, default=DecoderName.LAZYK.value, show_default=True)
@_constraints_option(ConstraintSetName.NONE.value)
@click.option("--max-k", type=click.IntRange(min=1), default=DEFAULT_MAX_K, show_default=True)
@click.option("--mass-threshold", type=click.FloatRange(min=0.0), default=None,
              help="Also stop once the examined probability mass exceeds this.")
@click.option("--output", default="-", show_default=True, help="Output file, - for stdout.")
@click.option("--jobs", type=click.IntRange(min=1), default=DEFAULT_JOBS, show_default=True)
@click.option("--show-fields", is_flag=True, help="Add parsed field values and rule verdicts.")
@click.option("--strict", is_flag=True, help="Exit with 3 if any document is left unsatisfied.")
@click.pass_context
def decode(ctx, input_path, probs_bin, decoder, constraints, max_k, mass_threshold, output, jobs,
           show_fields, strict):
    """Decode every document, one JSON record per document."""
    _check_mass([decoder], mass_threshold)
    constraint = resolve_constraint(constraints)
    docs = load_corpus(input_path, probs_bin)
    results = decode_corpus(docs, decoder, constraint, max_k, mass_threshold, jobs)

    def records():
        for result in results:
            record = result.as_record(decoder)
            if show_fields and isinstance(constraint, RuleSet):
                record.update(bind(constraint, result.doc).describe(result.doc.tokens, result.labels))
            yield _json_line(record)

    _write_lines(output, records())
    unsatisfied = [r.doc.doc_id for r in results if not r.outcome.satisfied]
    if strict and unsatisfied:
        click.echo(f"{len(unsatisfied)} of {len(results)} documents not satisfied", err=True)
        ctx.exit(EXIT_UNSATISFIED)


def _yes_no(flag: bool) -> str:
    return "Yes" if flag else "No"


@cli.command()
@_input_options
@click.option("--k", "k", type=click.IntRange(min=1), required=True, help="Number of sequences per document.")
@_constraints_option(ConstraintSetName.NONE.value)
@click.option("--output", default="-", show_default=True)
def topk(input_path, probs_bin, k, constraints, output):
    """
    The k most probable sequences per document, tab separated:
    doc_id, rank, probability %, labels, BIO valid, constraint satisfied
    ("-" without constraints and for BIO-invalid rows).
    """
    constraint = None if constraints == ConstraintSetName.NONE.value else resolve_constraint(constraints)
    docs = load_corpus(input_path, probs_bin)

    def lines():
        for doc in docs:
            table = doc.table()
            bound = bind(constraint, doc) if constraint is not None else None
            for rank, seq in enumerate(topk_lazy(table, k), start=1):
                labels = labels_of(table, seq, doc.label_vocab)
                bio = bio_valid(labels)
                sem = "-" if bound is None or not bio else _yes_no(bound(doc.tokens, labels))
                yield "\t".join([
                    doc.doc_id,
                    str(rank),
                    f"{100 * seq.probability:.1f}",
                    " ".join(labels),
                    _yes_no(bio),
                    sem,
                ])

    _write_lines(output, lines())


@cli.command("eval")
@_input_options
@click.option("--decoder", "decoder_names", type=_decoder_choice, multiple=True,
              default=[DecoderName.ARGMAX.value, DecoderName.LAZYK.value], show_default=True)
@_constraints_option(ConstraintSetName.CORD.value)
@click.option("--max-k", "budgets", type=click.IntRange(min=1), multiple=True, default=[DEFAULT_MAX_K],
              show_default=True)
@click.option("--mass-threshold", type=click.FloatRange(min=0.0), default=None)
@click.option("--output", default="-", show_default=True)
@click.option("--jobs", type=click.IntRange(min=1), default=DEFAULT_JOBS, show_default=True)
def eval_cmd(input_path, probs_bin, decoder_names, constraints, budgets, mass_threshold, output, jobs):
    """Score decoders against gold labels, one JSON record per decoder x budget."""
    _check_mass(decoder_names, mass_threshold)
    constraint = resolve_constraint(constraints)
    docs = load_corpus(input_path, probs_bin)
    reports = [
        evaluate(docs, name, constraint, max_k, mass_threshold, jobs)[0]
        for name in decoder_names
        for max_k in budgets
    ]
    _write_lines(output, (_json_line(r.as_record()) for r in reports))


@cli.command("bench")
@_input_options
@click.option("--decoder", "decoder_names", type=_decoder_choice, multiple=True,
              default=[DecoderName.LAZYK.value], show_default=True)
@_constraints_option(ConstraintSetName.CORD.value)
@click.option("--max-k", "budgets", type=click.IntRange(min=1), multiple=True, default=[DEFAULT_MAX_K],
              show_default=True)
@click.option("--repeats", type=click.IntRange(min=1), default=DEFAULT_REPEATS, show_default=True)
@click.option("--mass-threshold", type=click.FloatRange(min=0.0), default=None)
@click.option("--output", default="-", show_default=True)
@click.option("--jobs", type=click.IntRange(min=1), default=DEFAULT_JOBS, show_default=True,
              help="Threads per pass; per-page times then include contention between threads.")
def bench_cmd(input_path, probs_bin, decoder_names, constraints, budgets, repeats, mass_threshold, output, jobs):
    """Per-page decode time, one JSON record per decoder x budget."""
    _check_mass(decoder_names, mass_threshold)
    constraint = resolve_constraint(constraints)
    docs = load_corpus(input_path, probs_bin)
    records = []
    for name in decoder_names:
        cells = [bench(docs, name, constraint, max_k, repeats, mass_threshold, jobs) for max_k in sorted(budgets)]
        records += [c.as_record() for c in cells]
        if len(cells) > 1 and cells[0].mean > 0:
            log.info(
                "%s: time grows x%.1f from k=%d to k=%d",
                name, cells[-1].mean / cells[0].mean, cells[0].max_k, cells[-1].max_k,
            )
    _write_lines(output, (_json_line(r) for r in records))


@cli.command()
@click.option("--output", required=True, help="Corpus file to write.")
@click.option("--docs", type=click.IntRange(min=0), default=100, show_default=True)
@click.option("--tokens-per-doc", type=click.IntRange(min=1), default=40, show_default=True)
@click.option("--noise", type=click.FloatRange(0.0, 1.0), default=0.05, show_default=True)
@click.option("--constraints", type=click.Choice([ConstraintSetName.CORD.value,
                                                  ConstraintSetName.WILDRECEIPT.value,
                                                  ConstraintSetName.DOCILE.value]),
              default=ConstraintSetName.CORD.value, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def gen(output, docs, tokens_per_doc, noise, constraints, seed):
    """Write a synthetic receipt corpus."""
    spec = SynthSpec(docs=docs, tokens_per_doc=tokens_per_doc, noise=noise,
                     constraints=ConstraintSetName(constraints), seed=seed)
    save_corpus(output, gen_synthetic(spec))


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=5000, show_default=True)
def serve(host, port):
    """HTTP decode endpoint."""
    from router import app
    app.run(host=host, port=port)


if __name__ == "__main__":
    cli(prog_name="lazyk")
