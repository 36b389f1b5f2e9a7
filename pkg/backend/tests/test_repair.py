import json

import pytest

from models.errors import PolicyError, SizeLimitError
from models.grammar import check_irreducible, check_weakly_nonredundant
from models.repair import (
    StopPolicy,
    frequency_report,
    repair_run,
    stop_point_report,
    structure_report,
    worst_case_family,
    working_string_threshold,
)
from models.textcore import Text


@pytest.mark.parametrize('value, kind, number', [
    ('run-to-end', 'run-to-end', None),
    ('threshold', 'working-string-threshold', None),
    ('max:3', 'max-nonterminals', 3),
    ('custom:100', 'custom-threshold', 100),
])
def test_policy_parse(value, kind, number):
    policy = StopPolicy.parse(value)
    assert policy.kind == kind
    assert policy.value == number


@pytest.mark.parametrize('value', ['max', 'max:0', 'custom:x', 'forever'])
def test_policy_parse_rejects(value):
    with pytest.raises(PolicyError):
        StopPolicy.parse(value)


def test_single_pair():
    grammar, trace = repair_run(Text.from_string('abab'))
    assert grammar.start == (2, 2)
    assert grammar.rules == ((0, 1),)
    assert trace.stopped_by == 'exhausted'
    assert [r.frequency for r in trace.records] == [2]


def test_run_of_equal_letters():
    grammar, _ = repair_run(Text.from_string('aaaa'))
    assert grammar.rules == ((0, 0),)
    assert grammar.start == (1, 1)


@pytest.mark.parametrize('n', [4, 64, 256, 1024])
def test_worst_case_family(n):
    text = worst_case_family(n)
    assert len(text) == 4 * n
    assert text.sigma == n + 1
    grammar, trace = repair_run(text)
    assert grammar.rules == tuple((i, n) for i in range(n))
    firsts = [n + 1 + i for i in range(n)]
    assert grammar.start == tuple(firsts + firsts[::-1])
    assert grammar.n_nonterminals == len(text) // 4
    assert frequency_report(trace, len(text)).passed


def test_expansion_preserved_every_iteration(rng):
    text = Text(tuple(rng.integers(0, 3, 400).tolist()), 3)
    seen = []

    def observer(grammar, record):
        assert grammar.expand_start() == text.symbols
        assert len(grammar.start) == record.working_length
        seen.append(record.iteration)

    grammar, trace = repair_run(text, observer=observer)
    assert seen == list(range(1, len(trace.records) + 1))
    assert grammar.metrics().is_cnf
    assert frequency_report(trace, len(text)).passed


def test_max_nonterminals_policy():
    grammar, trace = repair_run(worst_case_family(4), StopPolicy.parse('max:1'))
    assert grammar.n_nonterminals == 1
    assert trace.stopped_by == 'max-nonterminals'
    assert grammar.expand_start() == worst_case_family(4).symbols


def test_threshold_stop_point():
    text = Text((0, 1) * 2 ** 16, 2)
    assert working_string_threshold(len(text), 2) == 123362
    grammar, trace = repair_run(text, StopPolicy.working_string_threshold())
    assert trace.threshold == 123362
    assert trace.stopped_by == 'threshold'
    assert trace.final_length == 65536
    assert len(trace.records) == 1
    report = stop_point_report(trace, text)
    assert report.passed


def test_stop_point_needs_threshold_policy():
    _, trace = repair_run(Text.from_string('abab'))
    with pytest.raises(PolicyError):
        stop_point_report(trace, Text.from_string('abab'))


def test_limits():
    with pytest.raises(PolicyError):
        repair_run(Text.from_string('a'))
    with pytest.raises(SizeLimitError):
        repair_run(Text.from_string('abab'), max_length=3)


def test_trace_jsonl():
    _, trace = repair_run(worst_case_family(4))
    lines = trace.to_jsonl().splitlines()
    assert len(lines) == 4
    assert json.loads(lines[0]) == {
        'iteration': 1, 'pair': [0, 4], 'frequency': 2, 'working_length': 14, 'nonterminals': 1,
    }


@pytest.mark.parametrize('sigma', [2, 3])
def test_weakly_nonredundant_every_iteration(rng, sigma):
    text = Text(tuple(rng.integers(0, sigma, 500).tolist()), sigma)
    failures = []

    def observer(grammar, record):
        check = check_weakly_nonredundant(grammar)
        if not check.flag:
            failures.append((record.iteration, check.witnesses))

    grammar, trace = repair_run(text, observer=observer)
    assert trace.records
    assert failures == []
    assert check_irreducible(grammar).ig1
    report = structure_report(grammar)
    assert report.passed, report.failures()


def test_structure_rows_after_early_stop():
    grammar, _ = repair_run(worst_case_family(8), StopPolicy.parse('max:3'))
    report = structure_report(grammar)
    assert [row.name for row in report.rows] == ['repair.distinct_expansions', 'repair.weakly_nonredundant']
    assert report.passed
