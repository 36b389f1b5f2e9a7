"""
Texts over integer alphabets, substring counting and empirical entropy.

A Text is an immutable sequence of symbol ids below a declared alphabet size.
Counting queries go through a suffix automaton built once per text; cyclic
counts use a second automaton over the doubled text.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Dict, Iterable, NamedTuple, Sequence, Tuple

import numpy as np

import config

try:
    from .errors import InvalidTextError
except ImportError:
    from errors import InvalidTextError

logger = logging.getLogger(__name__)

MAX_SIGMA = 2 ** 32
TOKEN_HEADER = 'sigma='


class SuffixAutomaton:
    """
    Online suffix automaton with end-position counts.

    Symbols are appended one at a time with extend(); count() returns the
    number of (possibly overlapping) occurrences of a pattern in everything
    appended so far.
    """

    def __init__(self, symbols: Iterable[int] = ()):
        self.transitions = [{}]
        self.link = [-1]
        self.length = [0]
        self._occ = [0]
        self._counts = None
        self.last = 0
        self.size = 0
        for symbol in symbols:
            self.extend(symbol)

    def _new_state(self, length, occ):
        self.transitions.append({})
        self.link.append(-1)
        self.length.append(length)
        self._occ.append(occ)
        return len(self.length) - 1

    def extend(self, symbol: int) -> None:
        self._counts = None
        self.size += 1
        cur = self._new_state(self.length[self.last] + 1, 1)
        state = self.last
        while state != -1 and symbol not in self.transitions[state]:
            self.transitions[state][symbol] = cur
            state = self.link[state]
        if state == -1:
            self.link[cur] = 0
        else:
            target = self.transitions[state][symbol]
            if self.length[state] + 1 == self.length[target]:
                self.link[cur] = target
            else:
                clone = self._new_state(self.length[state] + 1, 0)
                self.transitions[clone] = dict(self.transitions[target])
                self.link[clone] = self.link[target]
                while state != -1 and self.transitions[state].get(symbol) == target:
                    self.transitions[state][symbol] = clone
                    state = self.link[state]
                self.link[target] = clone
                self.link[cur] = clone
        self.last = cur

    def _propagate(self):
        counts = np.array(self._occ, dtype=np.int64)
        order = np.argsort(np.array(self.length), kind='stable')[::-1]
        for state in order:
            parent = self.link[state]
            if parent >= 0:
                counts[parent] += counts[state]
        self._counts = counts

    def walk(self, pattern: Sequence[int]) -> int:
        """State reached by reading pattern from the root, or -1."""
        state = 0
        for symbol in pattern:
            state = self.transitions[state].get(symbol, -1)
            if state == -1:
                return -1
        return state

    def contains(self, pattern: Sequence[int]) -> bool:
        return self.walk(pattern) != -1

    def count(self, pattern: Sequence[int]) -> int:
        if len(pattern) == 0:
            return self.size
        state = self.walk(pattern)
        if state == -1:
            return 0
        if self._counts is None:
            self._propagate()
        return int(self._counts[state])


class SubstringIndex:
    """Linear and cyclic occurrence counts for one text."""

    def __init__(self, symbols: Sequence[int]):
        self.symbols = symbols
        self.linear = SuffixAutomaton(symbols)

    @cached_property
    def doubled(self) -> SuffixAutomaton:
        return SuffixAutomaton(tuple(self.symbols) * 2)

    def count(self, pattern: Sequence[int], cyclic: bool = False) -> int:
        n = len(self.symbols)
        if not cyclic:
            if len(pattern) > n:
                return 0
            return self.linear.count(pattern)
        if len(pattern) == 0:
            return n
        if len(pattern) > n:
            return 0
        # starts >= n in S.S are exactly the occurrences inside the second copy
        return self.doubled.count(pattern) - self.linear.count(pattern)


@dataclass(frozen=True)
class Text:
    """
    Immutable symbol sequence over the alphabet {0, ..., sigma-1}.

    Args:
        symbols: symbol ids
        sigma: declared alphabet size (not the number of observed symbols)
        name: label used in reports
    """
    symbols: Tuple[int, ...]
    sigma: int
    name: str = field(default='', compare=False)

    def __post_init__(self):
        object.__setattr__(self, 'symbols', tuple(int(s) for s in self.symbols))
        if not 1 <= self.sigma <= MAX_SIGMA:
            raise InvalidTextError(f'sigma must be in [1, 2^32], got {self.sigma}')
        for position, symbol in enumerate(self.symbols):
            if not 0 <= symbol < self.sigma:
                raise InvalidTextError(
                    f'symbol {symbol} at position {position} is outside alphabet of size {self.sigma}'
                )

    def __len__(self):
        return len(self.symbols)

    def __getitem__(self, item):
        return self.symbols[item]

    def __iter__(self):
        return iter(self.symbols)

    @cached_property
    def index(self) -> SubstringIndex:
        return SubstringIndex(self.symbols)

    @cached_property
    def array(self) -> np.ndarray:
        return np.array(self.symbols, dtype=np.int64)

    # Constructors

    @classmethod
    def from_string(cls, value: str, alphabet: str = None, name: str = '') -> 'Text':
        """Map characters to ids by their rank in the (sorted) alphabet."""
        letters = sorted(set(value)) if alphabet is None else list(alphabet)
        if not letters:
            letters = ['a']
        ranks = {letter: rank for rank, letter in enumerate(letters)}
        try:
            symbols = tuple(ranks[ch] for ch in value)
        except KeyError as e:
            raise InvalidTextError(f'character {e.args[0]!r} not in alphabet') from e
        return cls(symbols, len(letters), name)

    @classmethod
    def from_bytes(cls, data: bytes, name: str = '') -> 'Text':
        return cls(tuple(data), 256, name)

    @classmethod
    def from_tokens(cls, content: str, name: str = '') -> 'Text':
        """Parse the token format: a 'sigma=<int>' header, then decimal ids."""
        lines = content.strip().splitlines()
        if not lines or not lines[0].strip().startswith(TOKEN_HEADER):
            raise InvalidTextError("token file must start with 'sigma=<int>'")
        try:
            sigma = int(lines[0].strip()[len(TOKEN_HEADER):])
            symbols = tuple(int(tok) for line in lines[1:] for tok in line.split())
        except ValueError as e:
            raise InvalidTextError(f'bad token file: {e}') from e
        return cls(symbols, sigma, name)

    @classmethod
    def load(cls, path) -> 'Text':
        path = Path(path)
        data = path.read_bytes()
        if data.startswith(TOKEN_HEADER.encode()):
            return cls.from_tokens(data.decode('ascii'), name=path.name)
        return cls.from_bytes(data, name=path.name)

    def to_tokens(self) -> str:
        return f'{TOKEN_HEADER}{self.sigma}\n' + ' '.join(map(str, self.symbols)) + '\n'

    def to_string(self, alphabet: str) -> str:
        return ''.join(alphabet[s] for s in self.symbols)


class EntropyValue(NamedTuple):
    total_bits: float
    bits_per_symbol: float


@dataclass(frozen=True)
class EntropyProfile:
    per_order: Tuple[Tuple[int, float, float], ...]
    cyclic: bool
    mean_up_to: Dict[int, float]

    def bits_per_symbol(self, k: int) -> float:
        return self.per_order[k][2]

    def total_bits(self, k: int) -> float:
        return self.per_order[k][1]


def entropy_bits(sequence: Iterable) -> float:
    """|w|H_0(w) in bits for any sequence of hashable items."""
    counts = np.fromiter(Counter(sequence).values(), dtype=np.float64)
    if counts.size == 0:
        return 0.0
    total = counts.sum()
    value = float(total * np.log2(total) - np.sum(counts * np.log2(counts)))
    return max(0.0, value)


def count_occurrences(text: Text, pattern: Sequence[int], cyclic: bool = False) -> int:
    """Occurrences of pattern in text (overlapping; with wraparound if cyclic)."""
    return text.index.count(tuple(pattern), cyclic)


def _windows(symbols: Sequence[int], width: int) -> Iterable[Tuple[int, ...]]:
    return zip(*(symbols[offset:] for offset in range(width)))


def context_counts(text: Text, k: int, cyclic: bool = False):
    """
    Counts of length-k contexts and of (context, letter) windows.

    Linear context counts include the occurrence ending the text, which is
    followed by no letter (|S|_v counts every occurrence of v).
    """
    symbols = text.symbols
    if cyclic:
        extended = symbols + symbols[:k]
        pairs = Counter(_windows(extended, k + 1))
        contexts = Counter()
        for window, count in pairs.items():
            contexts[window[:k]] += count
        return contexts, pairs
    if len(symbols) < k:
        return Counter(), Counter()
    contexts = Counter(_windows(symbols, k)) if k > 0 else Counter({(): len(symbols)})
    pairs = Counter(_windows(symbols, k + 1))
    return contexts, pairs


def empirical_entropy(text: Text, k: int, cyclic: bool = False) -> EntropyValue:
    """
    Compute |S|H_k(S) (or the cyclic variant) with base-2 logarithms.

    Args:
        text: input text
        k: context order, k >= 0
        cyclic: read the text cyclically (requires k < |text|)

    Returns:
        EntropyValue(total_bits, bits_per_symbol)
    """
    if k < 0:
        raise InvalidTextError(f'order k must be non-negative, got {k}')
    n = len(text)
    if cyclic and k >= n:
        raise InvalidTextError(f'cyclic entropy needs k < |text| ({k} >= {n})')
    if n == 0:
        return EntropyValue(0.0, 0.0)
    contexts, pairs = context_counts(text, k, cyclic)
    if not pairs:
        return EntropyValue(0.0, 0.0)
    pair_counts = np.fromiter(pairs.values(), dtype=np.float64, count=len(pairs))
    context_of_pair = np.fromiter((contexts[w[:k]] for w in pairs), dtype=np.float64,
                                  count=len(pairs))
    total = float(np.sum(pair_counts * (np.log2(context_of_pair) - np.log2(pair_counts))))
    total = max(0.0, total)
    return EntropyValue(total, total / n)


def entropy_profile(text: Text, k_max: int, cyclic: bool = False) -> EntropyProfile:
    if k_max < 0:
        raise InvalidTextError(f'k_max must be non-negative, got {k_max}')
    per_order = []
    for k in range(k_max + 1):
        value = empirical_entropy(text, k, cyclic)
        per_order.append((k, value.total_bits, value.bits_per_symbol))
    running = np.cumsum([row[2] for row in per_order])
    mean_up_to = {l: float(running[l - 1] / l) for l in range(1, k_max + 2)}
    return EntropyProfile(tuple(per_order), cyclic, mean_up_to)


def cyclic_sandwich(text: Text, k: int,
                    constant: float = config.CYCLIC_ENTROPY_CONSTANT) -> Tuple[float, float, float]:
    """
    Return (lower, cyclic, upper) totals for |S|H_k <= |S|H_k^cyc <= |S|H_k + k log|S| + c k.

    The lower value is |S|H_k - log e for k >= 1: the linear count of the final
    context occurrence (followed by nothing) can raise |S|H_k by up to log e.
    """
    n = len(text)
    linear = empirical_entropy(text, k).total_bits
    cyclic = empirical_entropy(text, k, cyclic=True).total_bits
    lower = linear - (np.log2(np.e) if k > 0 else 0.0)
    upper = linear + (k * np.log2(n) + constant * k if n > 0 else 0.0)
    return float(lower), cyclic, float(upper)
