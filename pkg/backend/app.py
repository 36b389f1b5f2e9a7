import functools
import json
import logging
import re
from pathlib import Path

import click
import pandas as pd
from flask import Flask, current_app
from flask.cli import FlaskGroup

import config
from models.coders import ENCODINGS, encode, unpack, write_container
from models.debruijn import GdBParams, generalized_word, lower_bound_check, verify_gdb
from models.errors import LabError
from models.fixtures import is_selector, load_input
from models.grammar import FullGrammar
from models.greedy import GreedyPolicy, greedy_frequency_report, greedy_run, greedy_stop_report
from models.harness import ALGORITHMS, DEFAULT_SETTINGS, RunSpec, emit, run
from models.parsing import Parsing, best_offset_parsing, lz77_parse_nonself, lz78_parse, verify_parsing_bounds
from models.repair import StopPolicy, frequency_report, repair_run, stop_point_report, structure_report
from models.report import Report
from models.textcore import empirical_entropy

logging.basicConfig(level=config.LOG_LEVEL, format=config.LOG_FORMAT)
logger = logging.getLogger(__name__)


def create_app(overrides=None):
    """Application factory; the app only carries configuration for the CLI."""
    app = Flask(__name__)
    app.config.from_object(config)
    if overrides:
        app.config.update(overrides)
    return app


cli = FlaskGroup(create_app=create_app, add_default_commands=False,
                 help='Grammar-compression lab: entropy, parsers, compressors, encoders and reports.')


def lab_command(func):
    """Turn lab errors into a clean CLI failure (exit status 1)."""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except LabError as e:
            raise click.ClickException(str(e)) from e
    return wrapper


def _resolve(selector):
    """Fall back to CORPUS_DIR for bare names that are neither fixtures nor local files."""
    if is_selector(selector) or Path(selector).exists():
        return selector
    candidate = Path(current_app.config['CORPUS_DIR']) / selector
    return str(candidate) if candidate.exists() else selector


def _load(selector):
    return load_input(_resolve(selector), current_app.config['DEBRUIJN_MAX_LENGTH'])


def _ks(ks):
    return tuple(ks) if ks else tuple(current_app.config['DEFAULT_K'])


def _echo_rows(report: Report):
    for row in report.rows:
        mark = '✅' if row.passed else '❌'
        click.echo(f'{mark} {row.name}: {row.lhs_bits:.6f} <= {row.rhs_bits:.6f}'
                   + (f' + {row.slack:g}' if row.slack else ''))


def _finish(report: Report):
    _echo_rows(report)
    if not report.passed:
        click.echo(f'❌ {len(report.failures())} bound row(s) failed', err=True)
        click.get_current_context().exit(1)


@cli.command('entropy')
@click.argument('input_', metavar='INPUT')
@click.option('--k', 'ks', type=int, multiple=True, help='Context order (repeatable).')
@click.option('--cyclic', is_flag=True, help='Read the text cyclically.')
@click.option('--format', 'fmt', type=click.Choice(['text', 'json', 'csv']), default='text')
@lab_command
def entropy_command(input_, ks, cyclic, fmt):
    """Empirical entropy H_k of INPUT."""
    text, _ = _load(input_)
    rows = []
    for k in _ks(ks):
        value = empirical_entropy(text, k, cyclic)
        rows.append({'k': k, 'total_bits': value.total_bits, 'bits_per_symbol': value.bits_per_symbol})
    if fmt == 'json':
        click.echo(json.dumps({'input': input_, 'n': len(text), 'sigma': text.sigma,
                               'cyclic': cyclic, 'orders': rows}, indent=2))
    elif fmt == 'csv':
        click.echo(pd.DataFrame(rows, columns=['k', 'total_bits', 'bits_per_symbol']).to_csv(index=False), nl=False)
    else:
        for row in rows:
            click.echo(f"H_{row['k']} = {row['bits_per_symbol']:.6f} bits/symbol "
                       f"({row['total_bits']:.3f} bits total)")


@cli.command('parse')
@click.argument('input_', metavar='INPUT')
@click.option('--method', type=click.Choice(['lz78', 'lz77ns', 'offset']), default='lz78')
@click.option('--l', 'length', type=int, default=None, help='Phrase length for offset parsings.')
@click.option('--k', 'ks', type=int, multiple=True)
@click.option('--out', type=click.Path(dir_okay=False, path_type=Path), help='Write phrase lengths here.')
@lab_command
def parse_command(input_, method, length, ks, out):
    """Parse INPUT and check the parsing bounds."""
    text, _ = _load(input_)
    if method == 'lz78':
        parsing = lz78_parse(text)
    elif method == 'lz77ns':
        parsing = lz77_parse_nonself(text)
    else:
        if length is None:
            raise click.UsageError('--l is required for offset parsings')
        parsing = best_offset_parsing(text, length)
    if out:
        out.write_text(parsing.to_lengths_text())
    click.echo(f'📍 {len(parsing)} phrases, longest {parsing.max_phrase_length}')
    report = Report('parse')
    for k in _ks(ks):
        report.extend(verify_parsing_bounds(parsing, k, length if method == 'offset' else None,
                                            current_app.config['ABS_TOL']))
    _finish(report)


def _write_run(grammar: FullGrammar, trace, out, trace_out, dump):
    if out:
        out.write_bytes(grammar.to_bytes())
    if dump:
        dump.write_text(grammar.dump_text())
    if trace_out:
        trace_out.write_text(trace.to_jsonl())
    metrics = grammar.metrics()
    click.echo(f'📍 {metrics.n_nonterminals} rules, |S\'|={len(grammar.start)}, '
               f'||S\',G||={metrics.rhs_size_full}, stopped by {trace.stopped_by}')


@cli.command('repair')
@click.argument('input_', metavar='INPUT')
@click.option('--policy', default='run-to-end', help="run-to-end | threshold | max:<m> | custom:<t>")
@click.option('--trace', 'trace_out', type=click.Path(dir_okay=False, path_type=Path))
@click.option('--out', type=click.Path(dir_okay=False, path_type=Path), help='Write the GCL1 grammar here.')
@click.option('--dump', type=click.Path(dir_okay=False, path_type=Path), help='Write the rules as readable text here.')
@lab_command
def repair_command(input_, policy, trace_out, out, dump):
    """Compress INPUT with Re-Pair."""
    text, _ = _load(input_)
    policy = StopPolicy.parse(policy)
    grammar, trace = repair_run(text, policy,
                                threshold_constant=current_app.config['REPAIR_THRESHOLD_CONSTANT'],
                                max_length=current_app.config['REPAIR_MAX_LENGTH'])
    _write_run(grammar, trace, out, trace_out, dump)
    report = frequency_report(trace, len(text)).extend(structure_report(grammar))
    if policy.uses_threshold:
        report.extend(stop_point_report(trace, text))
    _finish(report)


@cli.command('greedy')
@click.argument('input_', metavar='INPUT')
@click.option('--policy', default='run-to-end', help='run-to-end | threshold | max-iterations[:<m>]')
@click.option('--trace', 'trace_out', type=click.Path(dir_okay=False, path_type=Path))
@click.option('--out', type=click.Path(dir_okay=False, path_type=Path), help='Write the GCL1 grammar here.')
@click.option('--dump', type=click.Path(dir_okay=False, path_type=Path), help='Write the rules as readable text here.')
@lab_command
def greedy_command(input_, policy, trace_out, out, dump):
    """Compress INPUT with Greedy."""
    text, _ = _load(input_)
    policy = GreedyPolicy.parse(policy, current_app.config['GREEDY_ITERATION_EXPONENT'])
    grammar, trace = greedy_run(text, policy,
                                threshold_constant=current_app.config['GREEDY_THRESHOLD_CONSTANT'],
                                max_length=current_app.config['GREEDY_MAX_LENGTH'])
    _write_run(grammar, trace, out, trace_out, dump)
    report = greedy_frequency_report(trace, len(text))
    if trace.threshold is not None:
        report.extend(greedy_stop_report(trace, text))
    _finish(report)


@cli.command('encode')
@click.argument('grammar_file', type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option('--encoding', type=click.Choice(ENCODINGS), default='entropy')
@click.option('--out', type=click.Path(dir_okay=False, path_type=Path), help='Write the GCB1 container here.')
@lab_command
def encode_command(grammar_file, encoding, out):
    """Encode a GCL1 grammar file."""
    grammar = FullGrammar.from_bytes(grammar_file.read_bytes())
    stream, breakdown = encode(grammar, encoding, current_app.config['ENCODING_SLACK'][encoding])
    if out:
        out.write_bytes(write_container(encoding, grammar, stream))
    click.echo(json.dumps(breakdown.to_dict(), indent=2))


@cli.command('decode')
@click.argument('container', type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option('--out', type=click.Path(dir_okay=False, path_type=Path), help='Write the text (token format) here.')
@click.option('--grammar-out', type=click.Path(dir_okay=False, path_type=Path), help='Write the GCL1 grammar here.')
@lab_command
def decode_command(container, out, grammar_out):
    """Decode a GCB1 container."""
    grammar = unpack(container.read_bytes())
    if grammar_out:
        grammar_out.write_bytes(grammar.to_bytes())
    text = grammar.text()
    if out:
        out.write_text(text.to_tokens())
    click.echo(f'✅ decoded {grammar.n_nonterminals} rules, text of {len(text)} symbols')


@cli.command('debruijn')
@click.option('--k', type=int, required=True)
@click.option('--l', 'level', type=int, default=0)
@click.option('--p', type=int, default=1)
@click.option('--out', type=click.Path(dir_okay=False, path_type=Path), help='Write the word (token format) here.')
@click.option('--certificate', type=click.Path(dir_okay=False, path_type=Path), help='Write the JSON certificate here.')
@lab_command
def debruijn_command(k, level, p, out, certificate):
    """Build a generalized de Bruijn word and certify it."""
    params = GdBParams(k, level, p)
    text = generalized_word(params, current_app.config['DEBRUIJN_MAX_LENGTH'])
    result = verify_gdb(text, params, current_app.config['DEBRUIJN_SLACK_CAP'])
    if out:
        out.write_text(text.to_tokens())
    else:
        click.echo(text.to_tokens(), nl=False)
    if certificate:
        certificate.write_text(json.dumps(result.to_dict(), indent=2))
    if result.passed:
        click.echo(f'✅ gdb {params}: n={len(text)}, certificate passed')
    else:
        click.echo(f'❌ gdb {params}: certificate failed', err=True)
        click.get_current_context().exit(1)


@cli.command('verify')
@click.argument('input_', metavar='INPUT')
@click.option('--parsing', 'parsing_file', type=click.Path(exists=True, dir_okay=False, path_type=Path),
              required=True, help="Phrase lengths, 'n=<int>' header first.")
@click.option('--k', 'ks', type=int, multiple=True)
@lab_command
def verify_command(input_, parsing_file, ks):
    """Check the bound rows of a stored parsing of INPUT."""
    text, meta = _load(input_)
    parsing = Parsing.from_lengths_text(text, parsing_file.read_text())
    report = Report('verify')
    for k in _ks(ks):
        report.extend(verify_parsing_bounds(parsing, k, tolerance=current_app.config['ABS_TOL']))
    if meta.params is not None:
        report.extend(lower_bound_check(text, parsing, meta.params, tolerance=current_app.config['ABS_TOL']))
    _finish(report)


def _with_seed(selectors, seed):
    """random:<n>,<sigma> gets the --seed value as its third field."""
    if seed is None:
        return tuple(selectors)
    return tuple(f'{s},{seed}' if re.fullmatch(r'random:\d+,\d+', s) else s for s in selectors)


@cli.command('report')
@click.argument('inputs', nargs=-1)
@click.option('--algorithm', 'algorithms', type=click.Choice(ALGORITHMS), multiple=True)
@click.option('--policy', default=None)
@click.option('--encoding', 'encodings', type=click.Choice(ENCODINGS), multiple=True)
@click.option('--k', 'ks', type=int, multiple=True)
@click.option('--format', 'fmt', type=click.Choice(['json', 'csv']), default='json')
@click.option('--out', type=click.Path(dir_okay=False, path_type=Path))
@click.option('--workers', type=int, default=None)
@click.option('--seed', type=int, default=None, help='Seed for random:<n>,<sigma> inputs.')
@lab_command
def report_command(inputs, algorithms, policy, encodings, ks, fmt, out, workers, seed):
    """Run the experiment matrix over INPUTS and emit the bound report."""
    settings = current_app.config
    spec = RunSpec(
        inputs=_with_seed(tuple(_resolve(i) for i in inputs), seed),
        algorithms=tuple(algorithms) or ('repair',),
        policy=policy,
        encodings=tuple(encodings) or tuple(settings['DEFAULT_ENCODINGS']),
        ks=_ks(ks),
        offset_lengths=tuple(settings['DEFAULT_OFFSET_LENGTHS']),
        workers=workers or settings['WORKERS'],
        tolerance=settings['ABS_TOL'],
        settings={key: settings[key] for key in DEFAULT_SETTINGS},
    )
    report = run(spec)
    payload = emit(report, fmt)
    if out:
        out.write_text(payload)
        click.echo(f'✅ wrote {len(report.entries)} entries to {out}')
    else:
        click.echo(payload)
    if not report.passed:
        errored = sum(1 for entry in report.entries if not entry['success'])
        click.echo(f'❌ {len(report.failed_rows)} failed row(s), {errored} failed entr(ies)', err=True)
        click.get_current_context().exit(1)


if __name__ == '__main__':
    cli()
