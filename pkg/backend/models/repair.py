"""
Re-Pair: repeatedly replace a most frequent pair of the working string with a
fresh nonterminal.

Frequencies are maximal non-overlapping occurrence counts (a run aaa counts
once for the pair aa). Ties go to the pair whose first occurrence is leftmost,
and each replacement pass scans left to right.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Set, Tuple

import config

try:
    from .errors import PolicyError, SizeLimitError
    from .grammar import FullGrammar, check_irreducible, check_weakly_nonredundant
    from .report import Report
    from .textcore import Text
except ImportError:
    from errors import PolicyError, SizeLimitError
    from grammar import FullGrammar, check_irreducible, check_weakly_nonredundant
    from report import Report
    from textcore import Text

logger = logging.getLogger(__name__)

RUN_TO_END = 'run-to-end'
WORKING_STRING_THRESHOLD = 'working-string-threshold'
MAX_NONTERMINALS = 'max-nonterminals'
CUSTOM_THRESHOLD = 'custom-threshold'


@dataclass(frozen=True)
class StopPolicy:
    """
    When Re-Pair stops, besides running out of repeated pairs.

    Args:
        kind: one of run-to-end, working-string-threshold, max-nonterminals,
            custom-threshold
        value: m for max-nonterminals, t for custom-threshold
    """
    kind: str = RUN_TO_END
    value: Optional[int] = None

    def __post_init__(self):
        if self.kind not in (RUN_TO_END, WORKING_STRING_THRESHOLD, MAX_NONTERMINALS, CUSTOM_THRESHOLD):
            raise PolicyError(f'unknown stop policy {self.kind!r}')
        if self.kind in (MAX_NONTERMINALS, CUSTOM_THRESHOLD):
            if self.value is None or self.value <= 0:
                raise PolicyError(f'{self.kind} needs a positive value, got {self.value}')

    @classmethod
    def run_to_end(cls):
        return cls(RUN_TO_END)

    @classmethod
    def working_string_threshold(cls):
        return cls(WORKING_STRING_THRESHOLD)

    @classmethod
    def max_nonterminals(cls, m: int):
        return cls(MAX_NONTERMINALS, m)

    @classmethod
    def custom_threshold(cls, t: int):
        return cls(CUSTOM_THRESHOLD, t)

    @classmethod
    def parse(cls, value: str) -> 'StopPolicy':
        """'run-to-end', 'threshold', 'max-nonterminals:<m>' or 'custom:<t>'."""
        name, _, argument = value.partition(':')
        if name in ('threshold', WORKING_STRING_THRESHOLD):
            return cls.working_string_threshold()
        if name == RUN_TO_END:
            return cls.run_to_end()
        try:
            number = int(argument)
        except ValueError:
            raise PolicyError(f'policy {value!r} needs an integer argument') from None
        if name in ('max', MAX_NONTERMINALS):
            return cls.max_nonterminals(number)
        if name in ('custom', CUSTOM_THRESHOLD):
            return cls.custom_threshold(number)
        raise PolicyError(f'unknown stop policy {value!r}')

    @property
    def uses_threshold(self) -> bool:
        return self.kind in (WORKING_STRING_THRESHOLD, CUSTOM_THRESHOLD)

    def __str__(self):
        return self.kind if self.value is None else f'{self.kind}:{self.value}'


def working_string_threshold(n: int, sigma: int,
                             constant: float = config.REPAIR_THRESHOLD_CONSTANT) -> int:
    """ceil(constant * n / log_sigma n) with the declared alphabet size."""
    if sigma < 2 or n < 2:
        raise PolicyError(f'threshold needs sigma >= 2 and n >= 2 (sigma={sigma}, n={n})')
    return math.ceil(constant * n * math.log(sigma) / math.log(n))


@dataclass(frozen=True)
class RepairIteration:
    iteration: int
    pair: Tuple[int, int]
    frequency: int
    working_length: int
    nonterminals: int

    def to_dict(self) -> dict:
        return {
            'iteration': self.iteration,
            'pair': list(self.pair),
            'frequency': self.frequency,
            'working_length': self.working_length,
            'nonterminals': self.nonterminals,
        }


@dataclass
class RepairTrace:
    policy: StopPolicy
    initial_length: int
    threshold: Optional[int] = None
    records: List[RepairIteration] = field(default_factory=list)
    grammar: Optional[FullGrammar] = None
    stopped_by: str = ''

    @property
    def final_length(self) -> int:
        return self.records[-1].working_length if self.records else self.initial_length

    def to_jsonl(self) -> str:
        return ''.join(json.dumps(record.to_dict()) + '\n' for record in self.records)


class _WorkingString:
    """Doubly linked working string with a pair -> positions index."""

    def __init__(self, symbols):
        n = len(symbols)
        self.symbols = list(symbols)
        self.prev = list(range(-1, n - 1))
        self.next = list(range(1, n + 1))
        if n:
            self.next[-1] = -1
        self.head = 0 if n else -1
        self.length = n
        self.positions: Dict[Tuple[int, int], Set[int]] = {}
        self.buckets: Dict[int, Set[Tuple[int, int]]] = {}
        for i in range(n - 1):
            self._add(i)

    def _pair_at(self, i):
        return self.symbols[i], self.symbols[self.next[i]]

    def _move(self, pair, old, new):
        if old:
            bucket = self.buckets[old]
            bucket.discard(pair)
            if not bucket:
                del self.buckets[old]
        if new:
            self.buckets.setdefault(new, set()).add(pair)

    def _add(self, i):
        pair = self._pair_at(i)
        occurrences = self.positions.setdefault(pair, set())
        occurrences.add(i)
        self._move(pair, len(occurrences) - 1, len(occurrences))

    def _remove(self, i):
        pair = self._pair_at(i)
        occurrences = self.positions.get(pair)
        if occurrences is None or i not in occurrences:
            return
        occurrences.remove(i)
        self._move(pair, len(occurrences) + 1, len(occurrences))
        if not occurrences:
            del self.positions[pair]

    def frequency(self, pair) -> int:
        """Non-overlapping count; only pairs aa can overlap themselves."""
        occurrences = self.positions.get(pair, ())
        if pair[0] != pair[1]:
            return len(occurrences)
        count = 0
        last = -1
        for i in sorted(occurrences):
            if i != last:
                count += 1
                last = self.next[i]
        return count

    def most_frequent(self) -> Tuple[Optional[Tuple[int, int]], int]:
        """Pair with the largest frequency, leftmost first occurrence on ties."""
        best_pair, best_key = None, (0, 0)
        for raw in sorted(self.buckets, reverse=True):
            if raw < best_key[0]:
                break
            for pair in self.buckets[raw]:
                key = (self.frequency(pair), -min(self.positions[pair]))
                if key > best_key:
                    best_pair, best_key = pair, key
        return best_pair, best_key[0]

    def replace(self, pair, symbol) -> int:
        replaced = 0
        for i in sorted(self.positions.get(pair, ())):
            j = self.next[i]
            if j == -1 or self.symbols[i] != pair[0] or self.symbols[j] != pair[1]:
                continue
            if i not in self.positions.get(pair, ()):
                continue
            p, q = self.prev[i], self.next[j]
            if p != -1:
                self._remove(p)
            self._remove(i)
            if q != -1:
                self._remove(j)
            self.symbols[i] = symbol
            self.next[i] = q
            if q != -1:
                self.prev[q] = i
            self.length -= 1
            replaced += 1
            if p != -1:
                self._add(p)
            if q != -1:
                self._add(i)
        return replaced

    def snapshot(self) -> Tuple[int, ...]:
        out = []
        i = self.head
        while i != -1:
            out.append(self.symbols[i])
            i = self.next[i]
        return tuple(out)


def repair_run(text: Text, policy: StopPolicy = None,
               observer: Callable[[FullGrammar, RepairIteration], None] = None,
               threshold_constant: float = config.REPAIR_THRESHOLD_CONSTANT,
               max_length: int = config.REPAIR_MAX_LENGTH) -> Tuple[FullGrammar, RepairTrace]:
    """
    Compress text with Re-Pair.

    Args:
        text: input, |text| >= 2
        policy: stop policy (run to end by default)
        observer: called with the grammar and record after every iteration
        threshold_constant: c in ceil(c n / log_sigma n)
        max_length: reject longer inputs

    Returns:
        (FullGrammar, RepairTrace); every rule is binary
    """
    policy = policy or StopPolicy.run_to_end()
    n = len(text)
    if n < 2:
        raise PolicyError(f'Re-Pair needs at least 2 symbols, got {n}')
    if n > max_length:
        raise SizeLimitError(f'text of {n} symbols exceeds the Re-Pair cap of {max_length}')
    threshold = None
    if policy.kind == WORKING_STRING_THRESHOLD:
        threshold = working_string_threshold(n, text.sigma, threshold_constant)
    elif policy.kind == CUSTOM_THRESHOLD:
        threshold = policy.value

    working = _WorkingString(text.symbols)
    rules: List[Tuple[int, int]] = []
    trace = RepairTrace(policy, n, threshold)
    while True:
        if threshold is not None and working.length < threshold:
            trace.stopped_by = 'threshold'
            break
        if policy.kind == MAX_NONTERMINALS and len(rules) >= policy.value:
            trace.stopped_by = 'max-nonterminals'
            break
        pair, frequency = working.most_frequent()
        if pair is None or frequency < 2:
            trace.stopped_by = 'exhausted'
            break
        symbol = text.sigma + len(rules)
        rules.append(pair)
        replaced = working.replace(pair, symbol)
        record = RepairIteration(len(rules), pair, replaced, working.length, len(rules))
        trace.records.append(record)
        logger.debug('iteration %d: %s x%d -> length %d', record.iteration, pair, replaced,
                     working.length)
        if observer is not None:
            observer(FullGrammar(text.sigma, working.snapshot(), tuple(rules)), record)

    trace.grammar = FullGrammar(text.sigma, working.snapshot(), tuple(rules))
    logger.info('Re-Pair on %s: %d rules, working string %d -> %d (%s)', text.name or 'text',
                len(rules), n, working.length, trace.stopped_by)
    return trace.grammar, trace


def frequency_report(trace: RepairTrace, n: int) -> Report:
    """Monotone pair frequencies and |G| < n/z after every replacement of a z-frequent pair."""
    report = Report('re-pair frequencies')
    frequencies = [r.frequency for r in trace.records]
    increases = sum(1 for a, b in zip(frequencies, frequencies[1:]) if b > a)
    report.add('repair.frequency_monotone', increases, 0)
    worst = max((r.nonterminals * r.frequency for r in trace.records), default=0)
    report.add('repair.nonterminals_vs_frequency', worst, n - 1)
    return report


def structure_report(grammar: FullGrammar) -> Report:
    """Distinct expansions and weak non-redundancy, both of which every Re-Pair grammar has."""
    irreducible = check_irreducible(grammar)
    weak = check_weakly_nonredundant(grammar)
    report = Report('re-pair structure', stats={
        'same_expansion': irreducible.witnesses['ig1'],
        **weak.witnesses,
    })
    report.add('repair.distinct_expansions', len(irreducible.witnesses['ig1']), 0)
    report.add('repair.weakly_nonredundant',
               len(weak.witnesses['rare']) + len(weak.witnesses['short_rules']), 0)
    return report


def stop_point_report(trace: RepairTrace, text: Text) -> Report:
    """
    Working string at the threshold stop and the nonterminal bound there.

    Rows: the stop happened below the threshold, and |G| <= sqrt(n) log_sigma n.
    """
    if not trace.policy.uses_threshold:
        raise PolicyError(f'stop-point report needs a threshold policy, trace used {trace.policy}')
    n = len(text)
    if text.sigma < 2 or n < 2:
        raise PolicyError('stop-point report needs sigma >= 2 and n >= 2')
    nonterminals = len(trace.records)
    report = Report('re-pair stop point', stats={
        'threshold': trace.threshold,
        'working_length': trace.final_length,
        'nonterminals': nonterminals,
        'stopped_by': trace.stopped_by,
    })
    report.add('repair.stop_exists', trace.final_length, trace.threshold - 1)
    report.add('repair.stop_nonterminals', nonterminals,
               math.sqrt(n) * math.log(n) / math.log(text.sigma))
    return report


def worst_case_family(n: int) -> Text:
    """a_1 # a_2 # ... a_n # a_n # ... a_1 # over n + 1 letters (# = n)."""
    if n < 1:
        raise PolicyError(f'worst-case family needs n >= 1, got {n}')
    hash_symbol = n
    symbols = []
    for letter in list(range(n)) + list(reversed(range(n))):
        symbols.extend((letter, hash_symbol))
    return Text(tuple(symbols), n + 1, f'worst_case_{n}')
