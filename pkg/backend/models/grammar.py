"""
Full grammars (S', G): starting string plus rules, with expansion, size
metrics, the irreducibility predicates and the induced parsings.

Nonterminal ids are sigma-offset: rule i defines id sigma + i. Rules may
reference any other rule as long as the reference graph is acyclic.
"""

import heapq
import itertools
import logging
import math
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import config

try:
    from .bitio import decode_varint, encode_varint
    from .errors import InvalidGrammarError, MalformedStreamError
    from .parsing import Parsing
    from .report import Report
    from .textcore import Text
except ImportError:
    from bitio import decode_varint, encode_varint
    from errors import InvalidGrammarError, MalformedStreamError
    from parsing import Parsing
    from report import Report
    from textcore import Text

logger = logging.getLogger(__name__)

GRAMMAR_MAGIC = b'GCL1'


@dataclass(frozen=True)
class GrammarMetrics:
    n_nonterminals: int
    rhs_size_grammar: int
    rhs_size_full: int
    expansion_sum: int
    is_cnf: bool

    def to_dict(self) -> dict:
        return {
            'n_nonterminals': self.n_nonterminals,
            'rhs_size_grammar': self.rhs_size_grammar,
            'rhs_size_full': self.rhs_size_full,
            'expansion_sum': self.expansion_sum,
            'is_cnf': self.is_cnf,
        }


@dataclass(frozen=True)
class FullGrammar:
    """
    Starting string S' and rules G over terminals 0..sigma-1.

    Args:
        sigma: input alphabet size
        start: the starting string S'
        rules: rules[i] is the right-hand side of nonterminal sigma + i
    """
    sigma: int
    start: Tuple[int, ...]
    rules: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, 'start', tuple(int(s) for s in self.start))
        object.__setattr__(self, 'rules', tuple(tuple(int(s) for s in rhs) for rhs in self.rules))
        if self.sigma < 1:
            raise InvalidGrammarError(f'sigma must be positive, got {self.sigma}')
        limit = self.sigma + len(self.rules)
        for owner, rhs in enumerate(self.rhs_strings()):
            if owner > 0 and not rhs:
                raise InvalidGrammarError(f'rule {self.sigma + owner - 1} has an empty right-hand side')
            for symbol in rhs:
                if not 0 <= symbol < limit:
                    raise InvalidGrammarError(f'undefined symbol id {symbol}')
        # raises on cycles
        self.topological_order()

    @property
    def n_nonterminals(self) -> int:
        return len(self.rules)

    @property
    def alphabet_size(self) -> int:
        """Terminals plus nonterminals, the symbol range of encoded streams."""
        return self.sigma + len(self.rules)

    def is_terminal(self, symbol: int) -> bool:
        return symbol < self.sigma

    def rhs(self, symbol: int) -> Tuple[int, ...]:
        if not self.sigma <= symbol < self.alphabet_size:
            raise InvalidGrammarError(f'{symbol} is not a nonterminal')
        return self.rules[symbol - self.sigma]

    def rhs_strings(self) -> Tuple[Tuple[int, ...], ...]:
        """S' first, then every rule in id order."""
        return (self.start,) + self.rules

    def topological_order(self) -> List[int]:
        """Nonterminals ordered so that every rule follows the rules it references."""
        sigma = self.sigma
        pending = [0] * len(self.rules)
        users: Dict[int, List[int]] = {}
        for index, rhs in enumerate(self.rules):
            children = {s for s in rhs if s >= sigma}
            pending[index] = len(children)
            for child in children:
                users.setdefault(child, []).append(sigma + index)
        ready = [sigma + i for i, count in enumerate(pending) if count == 0]
        heapq.heapify(ready)
        order = []
        while ready:
            symbol = heapq.heappop(ready)
            order.append(symbol)
            for user in users.get(symbol, ()):
                pending[user - sigma] -= 1
                if pending[user - sigma] == 0:
                    heapq.heappush(ready, user)
        if len(order) != len(self.rules):
            raise InvalidGrammarError('rules reference each other cyclically')
        return order

    @property
    def is_ordered(self) -> bool:
        """True when every rule references only smaller ids."""
        return all(s < self.sigma + i for i, rhs in enumerate(self.rules) for s in rhs)

    def renumbered(self, order: Sequence[int]) -> 'FullGrammar':
        """Give order[i] the id sigma + i."""
        mapping = {old: self.sigma + new for new, old in enumerate(order)}

        def rename(rhs):
            return tuple(mapping.get(s, s) for s in rhs)

        rules = [None] * len(self.rules)
        for old, new in mapping.items():
            rules[new - self.sigma] = rename(self.rhs(old))
        return FullGrammar(self.sigma, rename(self.start), tuple(rules))

    def in_definition_order(self) -> 'FullGrammar':
        return self if self.is_ordered else self.renumbered(self.topological_order())

    @cached_property
    def expansion_lengths(self) -> Tuple[int, ...]:
        lengths = [0] * len(self.rules)
        for symbol in self.topological_order():
            lengths[symbol - self.sigma] = sum(
                1 if s < self.sigma else lengths[s - self.sigma] for s in self.rhs(symbol)
            )
        return tuple(lengths)

    def expansion_length(self, symbol: int) -> int:
        if symbol < self.sigma:
            return 1
        return self.expansion_lengths[symbol - self.sigma]

    @cached_property
    def _expansions(self) -> Dict[int, Tuple[int, ...]]:
        return {}

    def expand(self, symbol: int) -> Tuple[int, ...]:
        if symbol < 0 or symbol >= self.alphabet_size:
            raise InvalidGrammarError(f'undefined symbol id {symbol}')
        if symbol < self.sigma:
            return (symbol,)
        cache = self._expansions
        stack = [symbol]
        while stack:
            top = stack[-1]
            if top in cache:
                stack.pop()
                continue
            missing = [s for s in self.rhs(top) if s >= self.sigma and s not in cache]
            if missing:
                stack.extend(missing)
                continue
            stack.pop()
            cache[top] = tuple(itertools.chain.from_iterable(
                (s,) if s < self.sigma else cache[s] for s in self.rhs(top)
            ))
        return cache[symbol]

    def expand_start(self) -> Tuple[int, ...]:
        return tuple(itertools.chain.from_iterable(self.expand(s) for s in self.start))

    def text(self, name: str = '') -> Text:
        return Text(self.expand_start(), self.sigma, name)

    def text_length(self) -> int:
        return sum(self.expansion_length(s) for s in self.start)

    def metrics(self) -> GrammarMetrics:
        rhs_size = sum(len(rhs) for rhs in self.rules)
        return GrammarMetrics(
            n_nonterminals=len(self.rules),
            rhs_size_grammar=rhs_size,
            rhs_size_full=len(self.start) + rhs_size,
            expansion_sum=sum(self.expansion_lengths),
            is_cnf=all(len(rhs) == 2 for rhs in self.rules),
        )

    # Serialization

    def to_bytes(self) -> bytes:
        out = bytearray(GRAMMAR_MAGIC)
        out += encode_varint(self.sigma)
        out += encode_varint(len(self.rules))
        for rhs in self.rules:
            out += encode_varint(len(rhs))
            for symbol in rhs:
                out += encode_varint(symbol)
        out += encode_varint(len(self.start))
        for symbol in self.start:
            out += encode_varint(symbol)
        return bytes(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> 'FullGrammar':
        if not data.startswith(GRAMMAR_MAGIC):
            raise MalformedStreamError('missing GCL1 magic')
        position = len(GRAMMAR_MAGIC)

        def read_sequence():
            nonlocal position
            length, position = decode_varint(data, position)
            values = []
            for _ in range(length):
                value, position = decode_varint(data, position)
                values.append(value)
            return tuple(values)

        sigma, position = decode_varint(data, position)
        count, position = decode_varint(data, position)
        rules = tuple(read_sequence() for _ in range(count))
        start = read_sequence()
        if position != len(data):
            raise MalformedStreamError(f'{len(data) - position} trailing bytes after grammar')
        try:
            return cls(sigma, start, rules)
        except InvalidGrammarError as e:
            raise MalformedStreamError(f'decoded grammar is invalid: {e}') from e

    def symbol_name(self, symbol: int) -> str:
        return str(symbol) if symbol < self.sigma else f'X{symbol - self.sigma}'

    def dump_text(self) -> str:
        lines = [f'# sigma={self.sigma} rules={len(self.rules)}',
                 "S' -> " + ' '.join(map(self.symbol_name, self.start))]
        for index, rhs in enumerate(self.rules):
            lines.append(f'X{index} -> ' + ' '.join(map(self.symbol_name, rhs)))
        return '\n'.join(lines) + '\n'


def expand(grammar: FullGrammar, symbol: int) -> Tuple[int, ...]:
    return grammar.expand(symbol)


def nonoverlapping_pair_counts(strings: Iterable[Sequence[int]]) -> Counter:
    """
    Pair counts summed over strings; within a string occurrences are taken
    greedily left to right without overlap, and no pair spans two strings.
    """
    counts = Counter()
    for string in strings:
        last_start = {}
        for i in range(len(string) - 1):
            pair = (string[i], string[i + 1])
            if last_start.get(pair, -2) == i - 1:
                continue
            last_start[pair] = i
            counts[pair] += 1
    return counts


def rhs_occurrences(grammar: FullGrammar) -> Counter:
    """Occurrences of each nonterminal in S' and all right-hand sides."""
    counts = Counter()
    for rhs in grammar.rhs_strings():
        counts.update(s for s in rhs if s >= grammar.sigma)
    return counts


def derivation_occurrences(grammar: FullGrammar) -> Dict[int, int]:
    """Occurrences of each nonterminal in the derivation tree of S'."""
    sigma = grammar.sigma
    occurrences = {sigma + i: 0 for i in range(grammar.n_nonterminals)}
    for symbol in grammar.start:
        if symbol >= sigma:
            occurrences[symbol] += 1
    for symbol in reversed(grammar.topological_order()):
        weight = occurrences[symbol]
        if weight:
            for child in grammar.rhs(symbol):
                if child >= sigma:
                    occurrences[child] += weight
    return occurrences


class IrreducibilityResult(NamedTuple):
    ig1: bool
    ig2: bool
    ig3: bool
    witnesses: Dict[str, list]

    @property
    def irreducible(self) -> bool:
        return self.ig1 and self.ig2 and self.ig3


def check_irreducible(grammar: FullGrammar) -> IrreducibilityResult:
    """
    IG1: distinct expansions. IG2: every nonterminal occurs twice in the
    right-hand sides (S' included). IG3: no pair occurs twice without overlap.
    """
    seen: Dict[Tuple[int, ...], int] = {}
    same_expansion = []
    for symbol in range(grammar.sigma, grammar.alphabet_size):
        expansion = grammar.expand(symbol)
        if expansion in seen:
            same_expansion.append((seen[expansion], symbol))
        else:
            seen[expansion] = symbol

    occurrences = rhs_occurrences(grammar)
    rare = [s for s in range(grammar.sigma, grammar.alphabet_size) if occurrences[s] < 2]

    pairs = nonoverlapping_pair_counts(grammar.rhs_strings())
    repeated = sorted(pair for pair, count in pairs.items() if count >= 2)

    return IrreducibilityResult(
        ig1=not same_expansion,
        ig2=not rare,
        ig3=not repeated,
        witnesses={'ig1': same_expansion, 'ig2': rare, 'ig3': repeated},
    )


class WeakNonRedundancy(NamedTuple):
    flag: bool
    witnesses: Dict[str, list]


def check_weakly_nonredundant(grammar: FullGrammar) -> WeakNonRedundancy:
    occurrences = derivation_occurrences(grammar)
    rare = sorted(s for s, count in occurrences.items() if count < 2)
    short = [grammar.sigma + i for i, rhs in enumerate(grammar.rules) if len(rhs) < 2]
    return WeakNonRedundancy(not rare and not short, {'rare': rare, 'short_rules': short})


class ExpansionSum(NamedTuple):
    total: int
    holds: Optional[bool]
    applicable: bool


def expansion_sum_check(grammar: FullGrammar) -> ExpansionSum:
    """Sum of |exp(X)| over the rules, checked against 2|S| when IG2 holds."""
    total = sum(grammar.expansion_lengths)
    occurrences = rhs_occurrences(grammar)
    if any(occurrences[s] < 2 for s in range(grammar.sigma, grammar.alphabet_size)):
        return ExpansionSum(total, None, False)
    return ExpansionSum(total, total <= 2 * grammar.text_length(), True)


class InducedParsing(NamedTuple):
    s_double_prime: Tuple[int, ...]
    parsing: Parsing
    unreached: Tuple[int, ...]


def induced_parsing(grammar: FullGrammar, text: Text = None) -> InducedParsing:
    """
    Expand each nonterminal exactly once, at its first occurrence in a
    left-to-right traversal of S'; the resulting S'' parses the text into the
    expansions of its symbols. |S''| = |S'| + ||G|| - |G| when every
    nonterminal is reachable.
    """
    sigma = grammar.sigma
    expanded = set()
    out = []
    stack = list(reversed(grammar.start))
    while stack:
        symbol = stack.pop()
        if symbol < sigma or symbol in expanded:
            out.append(symbol)
            continue
        expanded.add(symbol)
        stack.extend(reversed(grammar.rhs(symbol)))
    unreached = tuple(s for s in range(sigma, grammar.alphabet_size) if s not in expanded)
    if unreached:
        logger.debug('%d nonterminals unreachable from the start string', len(unreached))
    text = grammar.text() if text is None else text
    parsing = Parsing.from_lengths(text, (grammar.expansion_length(s) for s in out))
    return InducedParsing(tuple(out), parsing, unreached)


def start_parsing(grammar: FullGrammar, text: Text = None) -> Parsing:
    """The parsing of the text into expansions of the symbols of S'."""
    text = grammar.text() if text is None else text
    return Parsing.from_lengths(text, (grammar.expansion_length(s) for s in grammar.start))


def bad_grammar_fixture(bits: int) -> FullGrammar:
    """
    Irreducible binary-prefix grammar: X_w for every binary word w with
    2 <= |w| <= bits, X_w -> X_{w[:-1]} w[-1] (X_w -> w for |w| = 2), and S'
    lists X_w X_w for every w of length bits in lexicographic order.
    """
    if bits < 3:
        raise InvalidGrammarError(f'bits must be at least 3, got {bits}')
    sigma = 2
    ids: Dict[Tuple[int, ...], int] = {}
    rules = []
    for length in range(2, bits + 1):
        for word in itertools.product((0, 1), repeat=length):
            ids[word] = sigma + len(rules)
            rules.append(word if length == 2 else (ids[word[:-1]], word[-1]))
    start = []
    for word in itertools.product((0, 1), repeat=bits):
        start.extend((ids[word], ids[word]))
    return FullGrammar(sigma, tuple(start), tuple(rules))


def irreducible_size_bound(n: int, sigma: int,
                           constant: float = config.IRREDUCIBLE_SIZE_CONSTANT) -> float:
    """constant * n / log_sigma n."""
    return constant * n * math.log(sigma) / math.log(n)


def grammar_report(grammar: FullGrammar, n: int,
                   size_constant: float = config.IRREDUCIBLE_SIZE_CONSTANT) -> Report:
    """Structural checks as bound rows: expansion sum and, for irreducible grammars, size."""
    report = Report('grammar structure', stats=grammar.metrics().to_dict())
    check = check_irreducible(grammar)
    report.stats.update({'ig1': check.ig1, 'ig2': check.ig2, 'ig3': check.ig3})
    summed = expansion_sum_check(grammar)
    if summed.applicable:
        report.add('grammar.expansion_sum', summed.total, 2 * n)
    if check.irreducible and grammar.sigma >= 2 and n >= 2:
        report.add('grammar.irreducible_size', grammar.metrics().rhs_size_full,
                   irreducible_size_bound(n, grammar.sigma, size_constant))
    return report
