"""
Experiment harness: run every (input, algorithm) pair of a RunSpec, collect
entropy profiles, compressor statistics, encoding sizes and bound rows, and
emit the result as JSON or CSV.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import pandas as pd
from joblib import Parallel, delayed

import config

try:
    from .coders import ENCODINGS, INCREMENTAL, concatenation_report, encoding_report
    from .debruijn import lower_bound_check, verify_gdb
    from .errors import InvalidTextError, ParameterError
    from .fixtures import expand_inputs, is_selector, load_input
    from .grammar import FullGrammar, grammar_report, induced_parsing
    from .greedy import GreedyPolicy, greedy_frequency_report, greedy_run, greedy_stop_report
    from .parsing import Parsing, best_offset_parsing, lz77_parse_nonself, lz78_parse, verify_parsing_bounds
    from .repair import StopPolicy, frequency_report, repair_run, stop_point_report, structure_report
    from .report import Report
    from .textcore import Text, cyclic_sandwich, empirical_entropy
except ImportError:
    from coders import ENCODINGS, INCREMENTAL, concatenation_report, encoding_report
    from debruijn import lower_bound_check, verify_gdb
    from errors import InvalidTextError, ParameterError
    from fixtures import expand_inputs, is_selector, load_input
    from grammar import FullGrammar, grammar_report, induced_parsing
    from greedy import GreedyPolicy, greedy_frequency_report, greedy_run, greedy_stop_report
    from parsing import Parsing, best_offset_parsing, lz77_parse_nonself, lz78_parse, verify_parsing_bounds
    from repair import StopPolicy, frequency_report, repair_run, stop_point_report, structure_report
    from report import Report
    from textcore import Text, cyclic_sandwich, empirical_entropy

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
ALGORITHMS = ('repair', 'greedy', 'lz78', 'lz77ns', 'offset-parse')
COMPRESSORS = ('repair', 'greedy')
NATURAL_PARSERS = ('repair', 'greedy', 'lz78', 'lz77ns')

SETTING_NAMES = (
    'REPAIR_THRESHOLD_CONSTANT', 'REPAIR_MAX_LENGTH',
    'GREEDY_THRESHOLD_CONSTANT', 'GREEDY_ITERATION_EXPONENT', 'GREEDY_MAX_LENGTH',
    'CYCLIC_ENTROPY_CONSTANT', 'DEBRUIJN_SLACK_CAP', 'DEBRUIJN_MAX_LENGTH',
    'WORST_CASE_LINEAR_SLACK', 'ENCODING_SLACK',
)
DEFAULT_SETTINGS = {name: getattr(config, name) for name in SETTING_NAMES}

CSV_BASE_COLUMNS = ['input', 'config', 'success', 'n', 'sigma']
CSV_TAIL_COLUMNS = ['nonterminals', 'rhs_size_full', 'iterations', 'phrases']


@dataclass
class RunSpec:
    """
    Args:
        inputs: file paths, directories or fixture selectors
        algorithms: subset of ALGORITHMS
        policy: stop policy string for the compressors (None runs to the end)
        encodings: grammar encodings applied to compressor output
        ks: context orders for entropies and bound rows
        offset_lengths: l values for offset-parse
        workers: joblib worker count
        tolerance: absolute tolerance on exact bound rows
        settings: constants, keyed like DEFAULT_SETTINGS
    """
    inputs: Tuple[str, ...] = ()
    algorithms: Tuple[str, ...] = ('repair',)
    policy: Optional[str] = None
    encodings: Tuple[str, ...] = ENCODINGS
    ks: Tuple[int, ...] = config.DEFAULT_K
    offset_lengths: Tuple[int, ...] = config.DEFAULT_OFFSET_LENGTHS
    workers: int = config.WORKERS
    tolerance: float = config.ABS_TOL
    settings: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        self.settings = {**DEFAULT_SETTINGS, **self.settings}

    def validate(self) -> 'RunSpec':
        if any(k < 0 for k in self.ks):
            raise ParameterError(f'orders k must be non-negative, got {list(self.ks)}')
        if any(l < 1 for l in self.offset_lengths):
            raise ParameterError(f'offset lengths must be positive, got {list(self.offset_lengths)}')
        unknown = [a for a in self.algorithms if a not in ALGORITHMS]
        if unknown:
            raise ParameterError(f'unknown algorithms {unknown}; choose from {", ".join(ALGORITHMS)}')
        unknown = [e for e in self.encodings if e not in ENCODINGS]
        if unknown:
            raise ParameterError(f'unknown encodings {unknown}; choose from {", ".join(ENCODINGS)}')
        missing = [i for i in self.inputs if not is_selector(i) and not Path(i).exists()]
        if missing:
            raise InvalidTextError(f'inputs not found: {missing}')
        if self.policy is not None:
            for algorithm in self.algorithms:
                self.parse_policy(algorithm)
        return self

    def parse_policy(self, algorithm: str):
        if algorithm == 'repair':
            return StopPolicy.parse(self.policy) if self.policy else StopPolicy.run_to_end()
        if algorithm == 'greedy':
            exponent = self.settings['GREEDY_ITERATION_EXPONENT']
            return GreedyPolicy.parse(self.policy, exponent) if self.policy else GreedyPolicy.run_to_end()
        return None

    def config_name(self, algorithm: str) -> str:
        if algorithm in COMPRESSORS and self.policy:
            return f'{algorithm}/{self.policy}'
        return algorithm


@dataclass
class LabReport:
    schema_version: int
    generated_at: str
    entries: List[dict]
    ks: Tuple[int, ...] = (0, 1, 2)

    @property
    def passed(self) -> bool:
        return all(entry['success'] and all(row['pass'] for row in entry['rows'])
                   for entry in self.entries)

    @property
    def failed_rows(self) -> List[Tuple[str, str, str]]:
        return [(entry['input'], entry['config'], row['name'])
                for entry in self.entries if entry['success']
                for row in entry['rows'] if not row['pass']]

    def to_dict(self) -> dict:
        return {
            'schema_version': self.schema_version,
            'generated_at': self.generated_at,
            'entries': self.entries,
        }


def _merge(rows: Dict[str, dict], report: Report, suffix: str = '') -> None:
    """Add report rows by name; a row name seen before is skipped."""
    for row in report.rows:
        name = row.name if not suffix or suffix in row.name else row.name + suffix
        if name not in rows:
            entry = row.to_dict()
            entry['name'] = name
            rows[name] = entry


def _parsing_rows(rows: Dict[str, dict], parsing: Parsing, spec: RunSpec,
                  offset_length: int = None) -> None:
    suffix = f'[l={offset_length}]' if offset_length else ''
    for k in spec.ks:
        _merge(rows, verify_parsing_bounds(parsing, k, offset_length, spec.tolerance), suffix)


def _compress(text: Text, algorithm: str, spec: RunSpec, rows: Dict[str, dict], stats: dict) -> FullGrammar:
    settings = spec.settings
    policy = spec.parse_policy(algorithm)
    n = len(text)
    if algorithm == 'repair':
        grammar, trace = repair_run(text, policy,
                                    threshold_constant=settings['REPAIR_THRESHOLD_CONSTANT'],
                                    max_length=settings['REPAIR_MAX_LENGTH'])
        _merge(rows, frequency_report(trace, n))
        _merge(rows, structure_report(grammar))
        if policy.uses_threshold:
            _merge(rows, stop_point_report(trace, text))
        stats['threshold'] = trace.threshold
        stats['final_length'] = trace.final_length
    else:
        grammar, trace = greedy_run(text, policy,
                                    threshold_constant=settings['GREEDY_THRESHOLD_CONSTANT'],
                                    max_length=settings['GREEDY_MAX_LENGTH'])
        _merge(rows, greedy_frequency_report(trace, n))
        if trace.threshold is not None:
            _merge(rows, greedy_stop_report(trace, text))
        stats['threshold'] = trace.threshold
        stats['final_size'] = trace.final_size
    stats['iterations'] = len(trace.records)
    stats['stopped_by'] = trace.stopped_by
    structure = grammar_report(grammar, n)
    stats.update(structure.stats)
    _merge(rows, structure)
    return grammar


def run_entry(selector: str, algorithm: str, spec: RunSpec) -> dict:
    """One input under one algorithm; failures become {'success': False, 'error': ...}."""
    config = spec.config_name(algorithm)
    try:
        settings = spec.settings
        text, meta = load_input(selector, settings['DEBRUIJN_MAX_LENGTH'])
        n, sigma = len(text), text.sigma
        rows: Dict[str, dict] = {}
        stats: dict = meta.to_dict()
        entropy = {f'h_{k}': empirical_entropy(text, k).bits_per_symbol for k in spec.ks}

        for k in spec.ks:
            if 0 < n and k < n:
                lower, cyclic, upper = cyclic_sandwich(text, k, settings['CYCLIC_ENTROPY_CONSTANT'])
                sandwich = Report('cyclic sandwich')
                sandwich.add(f'textcore.cyclic_sandwich_lower[k={k}]', lower, cyclic, spec.tolerance)
                sandwich.add(f'textcore.cyclic_sandwich_upper[k={k}]', cyclic, upper, spec.tolerance)
                _merge(rows, sandwich)

        grammar = None
        parsing = None
        encodings = {}
        if algorithm in COMPRESSORS:
            grammar = _compress(text, algorithm, spec, rows, stats)
            parsing = induced_parsing(grammar, text).parsing
            _parsing_rows(rows, parsing, spec)
            for encoding in spec.encodings:
                if encoding == INCREMENTAL and not grammar.metrics().is_cnf:
                    logger.info('%s: skipping incremental encoding of a non-binary grammar', selector)
                    continue
                report, breakdown = encoding_report(grammar, encoding,
                                                    settings['ENCODING_SLACK'][encoding], text)
                _merge(rows, report)
                encodings[encoding] = breakdown.to_dict()
            for k in spec.ks:
                _merge(rows, concatenation_report(grammar, k, text, spec.tolerance))
            if meta.kind == 'worst_case' and algorithm == 'repair' and INCREMENTAL in encodings:
                worst = Report('worst case')
                worst.add('repair.worst_case_incremental',
                          0.75 * n * math.log2(n) - settings['WORST_CASE_LINEAR_SLACK'] * n,
                          encodings[INCREMENTAL]['total_bits'])
                _merge(rows, worst)
        elif algorithm == 'offset-parse':
            for l in spec.offset_lengths:
                if l <= n:
                    parsing = best_offset_parsing(text, l)
                    _parsing_rows(rows, parsing, spec, l)
        else:
            parsing = lz78_parse(text) if algorithm == 'lz78' else lz77_parse_nonself(text)
            _parsing_rows(rows, parsing, spec)
        if parsing is not None:
            stats['phrases'] = len(parsing)
            stats['max_phrase_length'] = parsing.max_phrase_length

        if meta.params is not None:
            certificate = verify_gdb(text, meta.params, settings['DEBRUIJN_SLACK_CAP'])
            checks = Report('gdb certificate')
            for flag in ('db1', 'db2', 'db3', 'entropy_ok'):
                checks.add(f'debruijn.{flag}', 0 if getattr(certificate, flag) else 1, 0)
            checks.add('debruijn.linear_slack', certificate.max_linear_slack, certificate.slack_cap)
            _merge(rows, checks)
            stats['certificate'] = certificate.to_dict()
            if algorithm in NATURAL_PARSERS:
                bound = lower_bound_check(text, parsing, meta.params, tolerance=spec.tolerance)
                _merge(rows, bound)
                stats['lower_bound'] = bound.stats

        ratios = {}
        for encoding, breakdown in encodings.items():
            ratios[encoding] = {}
            for k in spec.ks:
                h = entropy[f'h_{k}'] * n
                ratios[encoding][str(k)] = breakdown['total_bits'] / h if h > 0 else None
        if ratios:
            stats['ratio'] = ratios

        failed = sum(1 for row in rows.values() if not row['pass'])
        logger.info('%s [%s]: %d rows, %d failed', selector, config, len(rows), failed)
        return {
            'input': selector,
            'config': config,
            'success': True,
            'n': n,
            'sigma': sigma,
            'entropy': entropy,
            'stats': stats,
            'encodings': encodings,
            'rows': list(rows.values()),
        }
    except Exception as e:
        logger.warning('%s [%s] failed: %s', selector, config, e)
        return {'input': selector, 'config': config, 'success': False, 'error': str(e)}


def run(spec: RunSpec) -> LabReport:
    """
    Run the experiment matrix.

    Returns:
        LabReport with entries sorted by (input, config)
    """
    spec.validate()
    tasks = [(selector, algorithm) for selector in expand_inputs(spec.inputs)
             for algorithm in spec.algorithms]
    logger.info('running %d entries with %d worker(s)', len(tasks), spec.workers)
    if spec.workers > 1 and len(tasks) > 1:
        entries = Parallel(n_jobs=spec.workers)(delayed(run_entry)(s, a, spec) for s, a in tasks)
    else:
        entries = [run_entry(s, a, spec) for s, a in tasks]
    entries.sort(key=lambda entry: (entry['input'], entry['config']))
    return LabReport(SCHEMA_VERSION, datetime.now(timezone.utc).isoformat(), entries, tuple(spec.ks))


def csv_columns(ks) -> List[str]:
    return (CSV_BASE_COLUMNS + [f'h_{k}' for k in ks] + CSV_TAIL_COLUMNS
            + [f'bits_{encoding}' for encoding in ENCODINGS] + ['rows_total', 'rows_failed', 'error'])


def _csv_record(entry: dict) -> dict:
    record = {'input': entry['input'], 'config': entry['config'], 'success': entry['success']}
    if not entry['success']:
        record['error'] = entry['error'].replace('\n', ' ')
        return record
    stats = entry['stats']
    record.update({
        'n': entry['n'],
        'sigma': entry['sigma'],
        **entry['entropy'],
        'nonterminals': stats.get('n_nonterminals'),
        'rhs_size_full': stats.get('rhs_size_full'),
        'iterations': stats.get('iterations'),
        'phrases': stats.get('phrases'),
        'rows_total': len(entry['rows']),
        'rows_failed': sum(1 for row in entry['rows'] if not row['pass']),
        'error': '',
    })
    for encoding, breakdown in entry['encodings'].items():
        record[f'bits_{encoding}'] = breakdown['total_bits']
    return record


def emit(report: LabReport, fmt: str = 'json') -> str:
    """Serialize a report; json keeps the entry dicts, csv has one row per entry."""
    if fmt == 'json':
        return json.dumps(report.to_dict(), indent=2)
    if fmt == 'csv':
        frame = pd.DataFrame([_csv_record(entry) for entry in report.entries],
                             columns=csv_columns(report.ks))
        return frame.to_csv(index=False)
    raise ParameterError(f'unknown report format {fmt!r}; choose json or csv')
