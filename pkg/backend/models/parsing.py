"""
Parsings of a text and the phrase-cost calculus.

Covers phrase probabilities (plain and k-bounded), parsing costs, the
fixed-length offset parsings, the LZ78 and non-self-referencing LZ77 parsers,
the natural-parser predicate and the bound rows that compare all of these with
the empirical entropy of the text.
"""

import itertools
import logging
import math
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import config

try:
    from .errors import InvalidParsingError, InvalidTextError, ZeroProbabilityError
    from .report import Report
    from .textcore import SuffixAutomaton, Text, empirical_entropy, entropy_bits, entropy_profile
except ImportError:
    from errors import InvalidParsingError, InvalidTextError, ZeroProbabilityError
    from report import Report
    from textcore import SuffixAutomaton, Text, empirical_entropy, entropy_bits, entropy_profile

logger = logging.getLogger(__name__)
LOG2_E = math.log2(math.e)
LENGTHS_HEADER = 'n='


@dataclass(frozen=True)
class Parsing:
    """
    Partition of a text into nonempty phrases.

    Args:
        source: the parsed text
        boundaries: strictly increasing cut positions, first 0 and last |source|
    """
    source: Text
    boundaries: Tuple[int, ...]

    def __post_init__(self):
        cuts = tuple(int(b) for b in self.boundaries)
        object.__setattr__(self, 'boundaries', cuts)
        n = len(self.source)
        if not cuts or cuts[0] != 0 or cuts[-1] != n:
            raise InvalidParsingError(f'boundaries must start at 0 and end at {n}')
        for left, right in zip(cuts, cuts[1:]):
            if right <= left:
                raise InvalidParsingError(f'boundaries not strictly increasing at {left}, {right}')

    @classmethod
    def from_lengths(cls, source: Text, lengths: Iterable[int]) -> 'Parsing':
        cuts = [0]
        for length in lengths:
            cuts.append(cuts[-1] + int(length))
        return cls(source, tuple(cuts))

    @classmethod
    def from_lengths_text(cls, source: Text, content: str) -> 'Parsing':
        """Read the 'n=<int>' header followed by one phrase length per line."""
        lines = [line.strip() for line in content.strip().splitlines() if line.strip()]
        if not lines or not lines[0].startswith(LENGTHS_HEADER):
            raise InvalidParsingError("parsing file must start with 'n=<int>'")
        n = int(lines[0][len(LENGTHS_HEADER):])
        if n != len(source):
            raise InvalidParsingError(f'parsing is for n={n}, text has {len(source)} symbols')
        return cls.from_lengths(source, (int(line) for line in lines[1:]))

    def to_lengths_text(self) -> str:
        return '\n'.join([f'{LENGTHS_HEADER}{len(self.source)}'] + [str(x) for x in self.lengths]) + '\n'

    def __len__(self):
        return len(self.boundaries) - 1

    @cached_property
    def phrases(self) -> Tuple[Tuple[int, ...], ...]:
        symbols = self.source.symbols
        return tuple(symbols[a:b] for a, b in zip(self.boundaries, self.boundaries[1:]))

    @cached_property
    def lengths(self) -> Tuple[int, ...]:
        return tuple(b - a for a, b in zip(self.boundaries, self.boundaries[1:]))

    @property
    def max_phrase_length(self) -> int:
        return max(self.lengths, default=0)


@dataclass(frozen=True)
class CostReport:
    parsing_entropy_bits: float
    cost_bits: float
    k_cost_bits: Optional[float]
    lengths_entropy_bits: float
    k: Optional[int]

    def to_dict(self) -> dict:
        return {
            'parsing_entropy_bits': self.parsing_entropy_bits,
            'cost_bits': self.cost_bits,
            'k_cost_bits': self.k_cost_bits,
            'lengths_entropy_bits': self.lengths_entropy_bits,
            'k': self.k,
        }


def _phrase_cost_bits(text: Text, phrase: Sequence[int], k: Optional[int]) -> Optional[float]:
    """-log2 of the phrase probability, or None when the probability is 0."""
    index = text.index
    n = len(text)
    if k is None:
        count = index.count(phrase)
        if count == 0:
            return None
        return math.log2(n) - math.log2(count)
    bits = min(len(phrase), k) * math.log2(text.sigma)
    for j in range(k, len(phrase)):
        numerator = index.count(phrase[j - k:j + 1])
        if numerator == 0:
            return None
        bits += math.log2(index.count(phrase[j - k:j])) - math.log2(numerator)
    return bits


def phrase_probability(text: Text, phrase: Sequence[int], k: Optional[int] = None) -> float:
    """
    Probability of a phrase under the counts of text.

    Without k this is |S|_y / |S|; with k the first min(|y|, k) letters cost
    1/sigma each and every later letter is predicted from its k predecessors.
    """
    phrase = tuple(phrase)
    if not phrase:
        raise InvalidParsingError('phrase must be nonempty')
    if k is not None and k < 0:
        raise InvalidTextError(f'order k must be non-negative, got {k}')
    if len(text) == 0:
        return 0.0
    bits = _phrase_cost_bits(text, phrase, k)
    return 0.0 if bits is None else 2.0 ** (-bits)


def phrase_cost(text: Text, phrase: Sequence[int], k: Optional[int] = None, index: int = 0) -> float:
    """Phrase cost in bits; raises ZeroProbabilityError instead of returning infinity."""
    bits = _phrase_cost_bits(text, tuple(phrase), k)
    if bits is None:
        raise ZeroProbabilityError(index, phrase)
    return bits


def parsing_cost(parsing: Parsing, k: Optional[int] = None) -> CostReport:
    """
    Price every phrase of a parsing.

    Args:
        parsing: the parsing; each phrase must occur in its text
        k: also compute C_k(Y) when given

    Returns:
        CostReport with |Y|H_0(Y), C(Y), C_k(Y) and |L|H_0(L)

    Raises:
        ZeroProbabilityError: a phrase has probability 0
    """
    text = parsing.source
    if k is not None and k < 0:
        raise InvalidTextError(f'order k must be non-negative, got {k}')
    cost = 0.0
    k_cost = 0.0 if k is not None else None
    for position, phrase in enumerate(parsing.phrases):
        cost += phrase_cost(text, phrase, None, position)
        if k is not None:
            k_cost += phrase_cost(text, phrase, k, position)
    return CostReport(
        parsing_entropy_bits=entropy_bits(parsing.phrases),
        cost_bits=max(0.0, cost),
        k_cost_bits=None if k_cost is None else max(0.0, k_cost),
        lengths_entropy_bits=entropy_bits(parsing.lengths),
        k=k,
    )


def offset_parsing(text: Text, l: int, offset: int) -> Parsing:
    """First phrase has length offset (dropped when 0), then phrases of length l."""
    n = len(text)
    if not 1 <= l <= max(n, 1):
        raise InvalidParsingError(f'phrase length l must be in [1, {n}], got {l}')
    if not 0 <= offset < l:
        raise InvalidParsingError(f'offset must be in [0, {l}), got {offset}')
    cuts = [0]
    if 0 < offset < n:
        cuts.append(offset)
    cuts.extend(range(cuts[-1] + l, n, l))
    if cuts[-1] != n:
        cuts.append(n)
    return Parsing(text, tuple(cuts))


def offset_costs(text: Text, l: int) -> List[Tuple[int, float, Parsing]]:
    rows = []
    for offset in range(l):
        parsing = offset_parsing(text, l, offset)
        rows.append((offset, parsing_cost(parsing).cost_bits, parsing))
    return rows


def best_offset_parsing(text: Text, l: int) -> Parsing:
    """
    Offset parsing of minimum cost C(Y); ties go to the smallest offset.

    Args:
        text: input text
        l: phrase length, 1 <= l <= |text|

    Returns:
        Parsing with C(Y) <= |S| * mean_{i<l} H_i(S) + log|S|
    """
    n = len(text)
    if not 1 <= l <= n:
        raise InvalidParsingError(f'phrase length l must be in [1, {n}], got {l}')
    best_offset, best_cost, best = min(offset_costs(text, l), key=lambda row: (row[1], row[0]))
    logger.debug('best offset for l=%d is %d (C=%.4f)', l, best_offset, best_cost)
    return best


def lz78_parse(text: Text) -> Parsing:
    """LZ78: each phrase is the longest known phrase extended by one letter."""
    symbols = text.symbols
    n = len(symbols)
    trie = {}
    cuts = [0]
    i = 0
    while i < n:
        node = 0
        j = i
        while j < n and (node, symbols[j]) in trie:
            node = trie[(node, symbols[j])]
            j += 1
        if j < n:
            trie[(node, symbols[j])] = len(trie) + 1
            j += 1
        cuts.append(j)
        i = j
    return Parsing(text, tuple(cuts))


def lz77_parse_nonself(text: Text) -> Parsing:
    """
    Greedy LZ77 without self-reference.

    The copied part of each phrase must occur inside the already parsed prefix,
    so the phrase and its source never overlap. The copied part is extended by
    one fresh letter unless the text ends.
    """
    symbols = text.symbols
    n = len(symbols)
    automaton = SuffixAutomaton()
    cuts = [0]
    i = 0
    while i < n:
        state = 0
        length = 0
        while i + length < n:
            state = automaton.transitions[state].get(symbols[i + length], -1)
            if state == -1:
                break
            length += 1
        end = min(n, i + length + 1)
        for symbol in symbols[i:end]:
            automaton.extend(symbol)
        cuts.append(end)
        i = end
    return Parsing(text, tuple(cuts))


def is_natural_parsing(parsing: Parsing) -> Tuple[bool, List[int]]:
    """
    Every phrase y = wa must have |S|_w > 1 or |y| <= log_sigma |S|.

    Returns:
        (flag, indices of offending phrases)
    """
    text = parsing.source
    if text.sigma < 2:
        raise InvalidTextError('natural-parser predicate needs sigma >= 2')
    n = len(text)
    short = math.log(n) / math.log(text.sigma) if n > 0 else 0.0
    violations = []
    for position, phrase in enumerate(parsing.phrases):
        if len(phrase) == 1 or len(phrase) <= short + 1e-12:
            continue
        if text.index.count(phrase[:-1]) <= 1:
            violations.append(position)
    return not violations, violations


def lengths_entropy_bound(parsing: Parsing) -> float:
    """|L| log(|S|/|L|) + |L|(1 + log e), an upper bound on |L|H_0(L)."""
    m = len(parsing)
    if m == 0:
        return 0.0
    return m * math.log2(len(parsing.source) / m) + m * (1 + LOG2_E)


def valuation_bits(word: Sequence, valuation: Mapping) -> float:
    """
    Cost of word under a valuation given as bit costs -log p(s).

    Upper-bounds |w|H_0(w) whenever sum 2^-cost <= 1; a letter without a cost
    makes the result infinite.
    """
    return sum(valuation.get(item, math.inf) for item in word)


def kraft_sum(valuation: Mapping) -> float:
    return sum(2.0 ** -bits for bits in valuation.values())


def length_valuation(parsing: Parsing) -> Dict[Tuple[int, ...], float]:
    """
    -log p(y) for p(y) = (|L|_{|y|} / |L|) * sigma^-|y| over the distinct phrases.

    At most sigma^l distinct phrases share a length l, so the Kraft sum is at
    most 1.
    """
    m = len(parsing)
    length_counts = Counter(parsing.lengths)
    letter_bits = math.log2(parsing.source.sigma) if parsing.source.sigma > 1 else 0.0
    return {phrase: math.log2(m / length_counts[len(phrase)]) + len(phrase) * letter_bits
            for phrase in set(parsing.phrases)}


def phrase_probability_sum(text: Text, l: int, k: Optional[int] = None) -> float:
    """Sum of phrase probabilities over every word of length l (exhaustive)."""
    return sum(phrase_probability(text, word, k)
               for word in itertools.product(range(text.sigma), repeat=l))


def verify_parsing_bounds(parsing: Parsing, k: int, offset_length: Optional[int] = None,
                          tolerance: float = config.ABS_TOL,
                          valuation: Optional[Mapping] = None) -> Report:
    """
    Bound rows relating phrase entropy, parsing costs and H_k(S).

    Rows whose value depends on k carry a '[k=..]' suffix so several orders can
    share one report.

    Args:
        parsing: the parsing to check
        k: context order for the k-bounded rows
        offset_length: adds the mean-entropy row for an offset parsing of this length
        tolerance: absolute slack on every row
        valuation: phrase -> bit cost, Kraft sum at most 1; length_valuation() by default

    Returns:
        Report with one row per inequality
    """
    if valuation is None:
        valuation = length_valuation(parsing)
    elif kraft_sum(valuation) > 1 + 1e-9:
        raise InvalidParsingError(f'valuation has Kraft sum {kraft_sum(valuation):.6f} > 1')
    text = parsing.source
    n = len(text)
    costs = parsing_cost(parsing, k)
    h_k = empirical_entropy(text, k).total_bits
    per_phrase_k = len(parsing) * k * math.log2(text.sigma) if text.sigma > 1 else 0.0
    y_h0 = costs.parsing_entropy_bits
    l_h0 = costs.lengths_entropy_bits

    report = Report(f'parsing bounds (k={k})', stats={
        'phrases': len(parsing),
        'max_phrase_length': parsing.max_phrase_length,
        **costs.to_dict(),
        'entropy_k_bits': h_k,
    })
    report.add('parsing.phrase_entropy_le_cost', y_h0, costs.cost_bits + l_h0, tolerance)
    report.add(f'parsing.phrase_entropy_le_k_cost[k={k}]', y_h0, costs.k_cost_bits + l_h0, tolerance)
    report.add(f'parsing.k_cost_le_k_entropy[k={k}]', costs.k_cost_bits, h_k + per_phrase_k, tolerance)
    report.add(f'parsing.phrase_entropy_le_k_entropy[k={k}]', y_h0, h_k + per_phrase_k + l_h0, tolerance)
    report.add('parsing.phrase_entropy_le_valuation', y_h0,
               valuation_bits(parsing.phrases, valuation), tolerance)
    report.add('parsing.lengths_entropy', l_h0, lengths_entropy_bound(parsing), tolerance)
    if offset_length is not None and n > 0:
        profile = entropy_profile(text, offset_length - 1)
        report.add(f'parsing.mean_entropy[l={offset_length}]', costs.cost_bits,
                   n * profile.mean_up_to[offset_length] + math.log2(n), tolerance)
    return report
