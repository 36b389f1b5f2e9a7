"""
Greedy: every round replaces the repeated substring whose replacement shrinks
||S',G|| the most.

Replacing the f non-overlapping occurrences of w (|w| >= 2) by a new
nonterminal X and adding the rule X -> w saves (f - 1)(|w| - 1) - 1 symbols.
Candidates are substrings of S' and of every rule; a match never crosses the
border between two right-hand sides. Ties go to the longer word, then to the
leftmost first occurrence in the order S', rule 0, rule 1, ...
"""

import bisect
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import config

try:
    from .errors import PolicyError, SizeLimitError
    from .grammar import FullGrammar
    from .report import Report
    from .textcore import Text
except ImportError:
    from errors import PolicyError, SizeLimitError
    from grammar import FullGrammar
    from report import Report
    from textcore import Text

logger = logging.getLogger(__name__)

RUN_TO_END = 'run-to-end'
FULL_SIZE_THRESHOLD = 'full-size-threshold'
MAX_ITERATIONS = 'max-iterations'


@dataclass(frozen=True)
class GreedyPolicy:
    """
    Args:
        kind: run-to-end, full-size-threshold or max-iterations
        value: iteration cap; None means ceil(n ** exponent)
        exponent: c in the default cap n^c
    """
    kind: str = RUN_TO_END
    value: Optional[int] = None
    exponent: float = config.GREEDY_ITERATION_EXPONENT

    def __post_init__(self):
        if self.kind not in (RUN_TO_END, FULL_SIZE_THRESHOLD, MAX_ITERATIONS):
            raise PolicyError(f'unknown greedy policy {self.kind!r}')
        if self.value is not None and self.value <= 0:
            raise PolicyError(f'iteration cap must be positive, got {self.value}')

    @classmethod
    def run_to_end(cls):
        return cls(RUN_TO_END)

    @classmethod
    def full_size_threshold(cls):
        return cls(FULL_SIZE_THRESHOLD)

    @classmethod
    def max_iterations(cls, m: int = None, exponent: float = config.GREEDY_ITERATION_EXPONENT):
        return cls(MAX_ITERATIONS, m, exponent)

    @classmethod
    def parse(cls, value: str, exponent: float = config.GREEDY_ITERATION_EXPONENT) -> 'GreedyPolicy':
        """'run-to-end', 'threshold', 'max-iterations' or 'max-iterations:<m>'."""
        name, _, argument = value.partition(':')
        if name == RUN_TO_END:
            return cls.run_to_end()
        if name in ('threshold', FULL_SIZE_THRESHOLD):
            return cls.full_size_threshold()
        if name in ('max', MAX_ITERATIONS):
            try:
                return cls.max_iterations(int(argument) if argument else None, exponent)
            except ValueError:
                raise PolicyError(f'policy {value!r} needs an integer argument') from None
        raise PolicyError(f'unknown greedy policy {value!r}')

    def iteration_cap(self, n: int) -> Optional[int]:
        if self.kind != MAX_ITERATIONS:
            return None
        return self.value if self.value is not None else math.ceil(n ** self.exponent)

    def __str__(self):
        return self.kind if self.value is None else f'{self.kind}:{self.value}'


def full_size_threshold(n: int, sigma: int, constant: float = config.GREEDY_THRESHOLD_CONSTANT) -> int:
    if sigma < 2 or n < 2:
        raise PolicyError(f'threshold needs sigma >= 2 and n >= 2 (sigma={sigma}, n={n})')
    return math.ceil(constant * n * math.log(sigma) / math.log(n))


def gain(frequency: int, length: int) -> int:
    return (frequency - 1) * (length - 1) - 1


@dataclass(frozen=True)
class GreedyIteration:
    iteration: int
    substring: Tuple[int, ...]
    frequency: int
    gain: int
    size_before: int
    size_after: int
    nonterminals: int
    max_pair_frequency: int

    def to_dict(self) -> dict:
        return {
            'iteration': self.iteration,
            'substring': list(self.substring),
            'frequency': self.frequency,
            'gain': self.gain,
            'size_after': self.size_after,
            'nonterminals': self.nonterminals,
            'max_pair_frequency': self.max_pair_frequency,
        }


@dataclass
class GreedyTrace:
    policy: GreedyPolicy
    initial_size: int
    threshold: Optional[int] = None
    records: List[GreedyIteration] = field(default_factory=list)
    grammar: Optional[FullGrammar] = None
    stopped_by: str = ''
    final_max_pair_frequency: int = 0

    @property
    def final_size(self) -> int:
        return self.records[-1].size_after if self.records else self.initial_size

    def to_jsonl(self) -> str:
        return ''.join(json.dumps(record.to_dict()) + '\n' for record in self.records)


def _non_overlapping(positions: Sequence[int], length: int) -> List[int]:
    chosen = []
    end = -1
    for p in positions:
        if p >= end:
            chosen.append(p)
            end = p + length
    return chosen


class _Candidate:
    __slots__ = ('positions', 'length', 'frequency')

    def __init__(self, positions, length, frequency):
        self.positions = positions
        self.length = length
        self.frequency = frequency

    @property
    def key(self):
        return gain(self.frequency, self.length), self.length, -self.positions[0]


def best_candidate(strings: Sequence[Sequence[int]]) -> Tuple[Optional[_Candidate], int, List[int]]:
    """
    Search all repeated substrings of the right-hand sides.

    Returns:
        (best candidate or None, most frequent pair frequency, string offsets
        in the separated concatenation)
    """
    concat: List[int] = []
    offsets = []
    for index, string in enumerate(strings):
        offsets.append(len(concat))
        concat.extend(string)
        concat.append(-1 - index)
    size = len(concat)

    groups: Dict[int, List[int]] = {}
    for p, symbol in enumerate(concat):
        if symbol >= 0:
            groups.setdefault(symbol, []).append(p)
    level = [positions for positions in groups.values() if len(positions) >= 2]
    length = 1
    best = None
    max_pair = 0
    while level:
        following = []
        for positions in level:
            split: Dict[int, List[int]] = {}
            for p in positions:
                q = p + length
                if q < size and concat[q] >= 0:
                    split.setdefault(concat[q], []).append(p)
            for subgroup in split.values():
                if len(subgroup) < 2:
                    continue
                frequency = len(_non_overlapping(subgroup, length + 1))
                if frequency < 2:
                    continue
                if length == 1:
                    max_pair = max(max_pair, frequency)
                candidate = _Candidate(subgroup, length + 1, frequency)
                if best is None or candidate.key > best.key:
                    best = candidate
                following.append(subgroup)
        level = following
        length += 1
    return best, max_pair, offsets


def greedy_run(text: Text, policy: GreedyPolicy = None,
               observer: Callable[[FullGrammar, GreedyIteration], None] = None,
               threshold_constant: float = config.GREEDY_THRESHOLD_CONSTANT,
               max_length: int = config.GREEDY_MAX_LENGTH) -> Tuple[FullGrammar, GreedyTrace]:
    """
    Compress text with Greedy.

    Args:
        text: input, |text| >= 2
        policy: stop policy (run to end by default)
        observer: called with the grammar and record after every round
        threshold_constant: c in ceil(c n / log_sigma n)
        max_length: reject longer inputs (candidate search is quadratic)

    Returns:
        (FullGrammar, GreedyTrace)
    """
    policy = policy or GreedyPolicy.run_to_end()
    n = len(text)
    if n < 2:
        raise PolicyError(f'Greedy needs at least 2 symbols, got {n}')
    if n > max_length:
        raise SizeLimitError(f'text of {n} symbols exceeds the Greedy cap of {max_length}')
    threshold = None
    if policy.kind == FULL_SIZE_THRESHOLD:
        threshold = full_size_threshold(n, text.sigma, threshold_constant)
    cap = policy.iteration_cap(n)

    sigma = text.sigma
    strings: List[List[int]] = [list(text.symbols)]
    trace = GreedyTrace(policy, n, threshold)
    size = n
    while True:
        if threshold is not None and size < threshold:
            trace.stopped_by = 'threshold'
            break
        if cap is not None and len(trace.records) >= cap:
            trace.stopped_by = 'max-iterations'
            break
        candidate, max_pair, offsets = best_candidate(strings)
        trace.final_max_pair_frequency = max_pair
        if candidate is None or gain(candidate.frequency, candidate.length) <= 0:
            trace.stopped_by = 'exhausted'
            break

        symbol = sigma + len(strings) - 1
        chosen = _non_overlapping(candidate.positions, candidate.length)
        first = chosen[0]
        owner = bisect.bisect_right(offsets, first) - 1
        word = tuple(strings[owner][first - offsets[owner]:first - offsets[owner] + candidate.length])

        by_string: Dict[int, List[int]] = {}
        for p in chosen:
            index = bisect.bisect_right(offsets, p) - 1
            by_string.setdefault(index, []).append(p - offsets[index])
        for index, starts in by_string.items():
            old = strings[index]
            new = []
            cursor = 0
            for start in starts:
                new.extend(old[cursor:start])
                new.append(symbol)
                cursor = start + candidate.length
            new.extend(old[cursor:])
            strings[index] = new
        strings.append(list(word))

        before = size
        size = sum(len(s) for s in strings)
        record = GreedyIteration(
            iteration=len(trace.records) + 1,
            substring=word,
            frequency=len(chosen),
            gain=gain(len(chosen), candidate.length),
            size_before=before,
            size_after=size,
            nonterminals=len(strings) - 1,
            max_pair_frequency=max_pair,
        )
        trace.records.append(record)
        logger.debug('round %d: |w|=%d f=%d gain=%d size=%d', record.iteration, len(word),
                     record.frequency, record.gain, size)
        if observer is not None:
            observer(FullGrammar(sigma, tuple(strings[0]), tuple(map(tuple, strings[1:]))), record)

    trace.grammar = FullGrammar(sigma, tuple(strings[0]), tuple(map(tuple, strings[1:])))
    logger.info('Greedy on %s: %d rules, size %d -> %d (%s)', text.name or 'text',
                len(strings) - 1, n, size, trace.stopped_by)
    return trace.grammar, trace


def greedy_frequency_report(trace: GreedyTrace, n: int) -> Report:
    report = Report('greedy rounds')
    frequencies = [r.max_pair_frequency for r in trace.records] + [trace.final_max_pair_frequency]
    increases = sum(1 for a, b in zip(frequencies, frequencies[1:]) if b > a)
    report.add('greedy.frequency_monotone', increases, 0)
    # |G| <= n / (z - 2) whenever the most frequent pair occurs z >= 3 times
    products = [(r.nonterminals - 1) * (r.max_pair_frequency - 2)
                for r in trace.records if r.max_pair_frequency >= 3]
    if products:
        report.add('greedy.nonterminals_vs_frequency', max(products), n)
    mismatches = sum(1 for r in trace.records if r.size_before - r.size_after != r.gain)
    report.add('greedy.size_decrease', mismatches, 0)
    return report


def greedy_stop_report(trace: GreedyTrace, text: Text) -> Report:
    """Rows: ||S',G|| got below 64n/log_sigma n, and |G| <= sqrt(n) log_sigma n + 3 there."""
    if trace.policy.kind != FULL_SIZE_THRESHOLD:
        raise PolicyError(f'stop report needs the full-size-threshold policy, trace used {trace.policy}')
    n = len(text)
    nonterminals = len(trace.records)
    report = Report('greedy stop point', stats={
        'threshold': trace.threshold,
        'size': trace.final_size,
        'nonterminals': nonterminals,
        'stopped_by': trace.stopped_by,
    })
    report.add('greedy.stop_exists', trace.final_size, trace.threshold - 1)
    report.add('greedy.stop_nonterminals', nonterminals,
               math.sqrt(n) * math.log(n) / math.log(text.sigma) + 3)
    return report
