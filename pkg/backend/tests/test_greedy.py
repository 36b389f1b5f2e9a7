import math

import pytest

from models.errors import PolicyError, SizeLimitError
from models.grammar import check_irreducible
from models.greedy import (
    GreedyPolicy,
    best_candidate,
    full_size_threshold,
    gain,
    greedy_frequency_report,
    greedy_run,
    greedy_stop_report,
)
from models.textcore import Text


def test_gain():
    assert gain(2, 2) == 0
    assert gain(3, 2) == 1
    assert gain(3, 3) == 3


def test_policy_parse():
    assert GreedyPolicy.parse('run-to-end').kind == 'run-to-end'
    assert GreedyPolicy.parse('threshold').kind == 'full-size-threshold'
    capped = GreedyPolicy.parse('max-iterations')
    assert capped.iteration_cap(100) == 10
    assert capped.iteration_cap(101) == 11
    assert GreedyPolicy.parse('max:3').iteration_cap(100) == 3
    with pytest.raises(PolicyError):
        GreedyPolicy.parse('max:x')
    with pytest.raises(PolicyError):
        GreedyPolicy.parse('sometimes')


def test_best_candidate_prefers_gain():
    candidate, max_pair, offsets = best_candidate([[0, 1, 2, 0, 1, 2, 0, 1, 2]])
    assert candidate.length == 3
    assert candidate.frequency == 3
    assert candidate.positions == [0, 3, 6]
    assert max_pair == 3
    assert offsets == [0]


def test_no_profitable_substring():
    grammar, trace = greedy_run(Text.from_string('abab'))
    assert trace.records == []
    assert trace.stopped_by == 'exhausted'
    assert grammar.start == (0, 1, 0, 1)
    assert grammar.rules == ()
    assert trace.final_max_pair_frequency == 2


@pytest.mark.parametrize('value, rule', [
    ('ababab', (0, 1)),
    ('abcabcabc', (0, 1, 2)),
])
def test_single_round(value, rule):
    text = Text.from_string(value)
    grammar, trace = greedy_run(text)
    assert grammar.rules == (rule,)
    assert grammar.start == (text.sigma,) * 3
    assert len(trace.records) == 1
    record = trace.records[0]
    assert record.size_before - record.size_after == record.gain
    assert check_irreducible(grammar).irreducible
    assert greedy_frequency_report(trace, len(text)).passed
    assert trace.final_max_pair_frequency == 0


def test_rounds_preserve_expansion(rng):
    text = Text(tuple(rng.integers(0, 4, 300).tolist()), 4)
    sizes = []

    def observer(grammar, record):
        assert grammar.expand_start() == text.symbols
        assert grammar.metrics().rhs_size_full == record.size_after
        sizes.append(record.size_after)

    grammar, trace = greedy_run(text, observer=observer)
    assert sizes == sorted(sizes, reverse=True)
    assert all(r.gain > 0 for r in trace.records)
    assert grammar.expand_start() == text.symbols
    report = greedy_frequency_report(trace, len(text))
    assert report.row('greedy.size_decrease').passed


def test_max_iterations_policy():
    text = Text.from_string('abcabcabcxyxyxy')
    grammar, trace = greedy_run(text, GreedyPolicy.max_iterations(1))
    assert len(trace.records) == 1
    assert trace.stopped_by == 'max-iterations'
    assert grammar.expand_start() == text.symbols


def test_threshold_above_length_stops_at_once(rng):
    text = Text(tuple(rng.integers(0, 2, 50).tolist()), 2)
    threshold = full_size_threshold(50, 2)
    assert threshold == math.ceil(64 * 50 * math.log(2) / math.log(50))
    grammar, trace = greedy_run(text, GreedyPolicy.full_size_threshold())
    assert trace.stopped_by == 'threshold'
    assert trace.records == []
    assert greedy_stop_report(trace, text).passed


def test_stop_report_needs_threshold_policy():
    text = Text.from_string('ababab')
    _, trace = greedy_run(text)
    with pytest.raises(PolicyError):
        greedy_stop_report(trace, text)


def test_limits():
    with pytest.raises(PolicyError):
        greedy_run(Text.from_string('a'))
    with pytest.raises(SizeLimitError):
        greedy_run(Text.from_string('abab'), max_length=3)
