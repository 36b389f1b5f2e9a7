"""
Generalized de Bruijn words and their certificates.

Over sigma = 4^p letters (q = 2^p, sigma = q^2) and for order k >= 1, level
l >= 0, the word has length q^(2k+l+1) and its cyclic substring counts depend
only on the substring length:

  every word of length i < k occurs q^(2k-2i+l+1) times,
  words of length k <= i <= k+l+1 occur q^(k+l+1-i) times or not at all.

Level 0 pairs up the letters of an ordinary de Bruijn sequence of order 2k+1
over q letters in two phases; each further level walks an Eulerian circuit of
the window graph of the previous level.
"""

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

import config

try:
    from .errors import ParameterError, SizeLimitError
    from .parsing import Parsing, is_natural_parsing
    from .report import Report
    from .textcore import Text, empirical_entropy, entropy_bits
except ImportError:
    from errors import ParameterError, SizeLimitError
    from parsing import Parsing, is_natural_parsing
    from report import Report
    from textcore import Text, empirical_entropy, entropy_bits

logger = logging.getLogger(__name__)

ENTROPY_TOLERANCE = 1e-9
LOG2_E = math.log2(math.e)


@dataclass(frozen=True)
class GdBParams:
    """
    Args:
        k: order, k >= 1
        l: level, l >= 0
        p: alphabet exponent, sigma = 4^p
    """
    k: int
    l: int
    p: int

    def __post_init__(self):
        if self.k < 1 or self.l < 0 or self.p < 1:
            raise ParameterError(f'need k >= 1, l >= 0, p >= 1 (got k={self.k}, l={self.l}, p={self.p})')

    @classmethod
    def parse(cls, value: str) -> 'GdBParams':
        """'k,l,p'"""
        try:
            k, l, p = (int(part) for part in value.split(','))
        except ValueError:
            raise ParameterError(f'expected k,l,p, got {value!r}') from None
        return cls(k, l, p)

    @property
    def q(self) -> int:
        return 2 ** self.p

    @property
    def sigma(self) -> int:
        return 4 ** self.p

    @property
    def z(self) -> int:
        return self.k + self.l + 1

    @property
    def length(self) -> int:
        return self.q ** (2 * self.k + self.l + 1)

    def __str__(self):
        return f'{self.k},{self.l},{self.p}'


def parameter_grid(max_length: int = config.DEBRUIJN_MAX_LENGTH) -> Iterator[GdBParams]:
    """Every (k, l, p) whose word has at most max_length letters."""
    p = 1
    while GdBParams(1, 0, p).length <= max_length:
        k = 1
        while GdBParams(k, 0, p).length <= max_length:
            l = 0
            while GdBParams(k, l, p).length <= max_length:
                yield GdBParams(k, l, p)
                l += 1
            k += 1
        p += 1


def base_debruijn(q: int, m: int, max_length: int = config.DEBRUIJN_MAX_LENGTH) -> Tuple[int, ...]:
    """
    Cyclic de Bruijn sequence of order m over q letters, prefer-high method.

    Starts with m zeros; every length-m word occurs exactly once cyclically.
    """
    if q < 2 or m < 1:
        raise ParameterError(f'need q >= 2 and m >= 1, got q={q}, m={m}')
    size = q ** m
    if size > max_length:
        raise SizeLimitError(f'de Bruijn sequence of length {size} exceeds {max_length}')
    sequence = [0] * m
    used = {tuple(sequence)}
    for _ in range(m, size):
        suffix = tuple(sequence[len(sequence) - m + 1:])
        for letter in range(q - 1, -1, -1):
            window = suffix + (letter,)
            if window not in used:
                used.add(window)
                sequence.append(letter)
                break
        else:
            raise RuntimeError(f'prefer-high construction got stuck at length {len(sequence)}')
    return tuple(sequence)


def build_s0(k: int, p: int, max_length: int = config.DEBRUIJN_MAX_LENGTH) -> Text:
    """
    Level-0 word: with B = a1 a2 ... an of order 2k+1 over q letters,
    B1 = (a1a2)(a3a4)...(a(n-1)an), B2 = (a2a3)...(a(n-2)a(n-1))(an a1)
    and the pair (x, y) read as the letter x*q + y, return B1 B2.
    """
    params = GdBParams(k, 0, p)
    q = params.q
    base = base_debruijn(q, 2 * k + 1, max_length)
    n = len(base)
    first = [base[i] * q + base[i + 1] for i in range(0, n, 2)]
    second = [base[i] * q + base[(i + 1) % n] for i in range(1, n, 2)]
    return Text(tuple(first + second), params.sigma, f'gdb_{k}_0_{p}')


def cyclic_window_codes(symbols: np.ndarray, width: int, sigma: int) -> Optional[np.ndarray]:
    """Base-sigma codes of all cyclic windows, or None if they overflow int64."""
    if sigma ** width >= 2 ** 62:
        return None
    extended = np.concatenate([symbols, symbols[:width]]) if width else symbols
    n = len(symbols)
    codes = np.zeros(n, dtype=np.int64)
    for offset in range(width):
        codes = codes * sigma + extended[offset:offset + n]
    return codes


def cyclic_counts(text: Text, width: int) -> np.ndarray:
    """Occurrence counts (cyclic) of every distinct word of the given length."""
    codes = cyclic_window_codes(text.array, width, text.sigma)
    if codes is None:
        symbols = text.symbols + text.symbols[:width]
        windows = Counter(symbols[i:i + width] for i in range(len(text)))
        return np.array(sorted(windows.values()), dtype=np.int64)
    _, counts = np.unique(codes, return_counts=True)
    return counts


def _line_graph(vertices: List[int], width: int, sigma: int) -> Dict[int, List[int]]:
    """u -> v whenever the last width-1 letters of u are the first width-1 of v."""
    shift = sigma ** (width - 1)
    by_prefix: Dict[int, List[int]] = {}
    for v in vertices:
        by_prefix.setdefault(v // sigma, []).append(v)
    return {u: sorted(by_prefix.get(u % shift, ())) for u in vertices}


def _check_regular(adjacency: Dict[int, List[int]], degree: int) -> None:
    indegree = Counter(v for targets in adjacency.values() for v in targets)
    for u, targets in adjacency.items():
        if len(targets) != degree or indegree[u] != degree:
            raise RuntimeError(
                f'vertex {u} has out-degree {len(targets)} and in-degree {indegree[u]}, expected {degree}'
            )


def eulerian_circuit(adjacency: Dict[int, List[int]]) -> List[int]:
    """
    Iterative Hierholzer, smallest unused edge first, from the smallest vertex.

    Returns the circuit as a vertex list without repeating the start at the end.
    """
    if not adjacency:
        return []
    pointer = {u: 0 for u in adjacency}
    start = min(adjacency)
    stack = [start]
    circuit = []
    while stack:
        u = stack[-1]
        targets = adjacency[u]
        if pointer[u] < len(targets):
            stack.append(targets[pointer[u]])
            pointer[u] += 1
        else:
            circuit.append(stack.pop())
    circuit.reverse()
    return circuit[:-1]


def generalized_word(params: GdBParams, max_length: int = config.DEBRUIJN_MAX_LENGTH) -> Text:
    """
    Build the generalized de Bruijn word for (k, l, p).

    Args:
        params: word parameters
        max_length: refuse words longer than this

    Returns:
        cyclic Text of length params.length over 4^p letters
    """
    if params.length > max_length:
        raise SizeLimitError(f'word of length {params.length} exceeds {max_length}')
    s0 = build_s0(params.k, params.p, max_length)
    if params.l == 0:
        return s0
    sigma, q = params.sigma, params.q
    width = params.k + 1
    vertices = sorted(int(c) for c in cyclic_window_codes(s0.array, width, sigma))
    for level in range(params.l):
        adjacency = _line_graph(vertices, width, sigma)
        _check_regular(adjacency, q)
        if level == params.l - 1:
            edges = sum(len(targets) for targets in adjacency.values())
            circuit = eulerian_circuit(adjacency)
            if len(circuit) != edges:
                raise RuntimeError(f'window graph at level {level} is not Eulerian '
                                   f'({len(circuit)} of {edges} edges walked)')
            head = sigma ** (width - 1)
            symbols = tuple(v // head for v in circuit)
            logger.debug('gdb %s: %d letters from a circuit over %d windows', params, len(symbols),
                         len(vertices))
            return Text(symbols, sigma, f'gdb_{params.k}_{params.l}_{params.p}')
        vertices = sorted(u * sigma + v % sigma for u, targets in adjacency.items() for v in targets)
        width += 1
    raise AssertionError('unreachable')


@dataclass
class GdBCertificate:
    params: GdBParams
    db1: bool
    db2: bool
    db3: bool
    count_tables: Dict[int, dict] = field(default_factory=dict)
    cyclic_entropy: Dict[int, float] = field(default_factory=dict)
    entropy_ok: bool = True
    linear_slack: Dict[int, float] = field(default_factory=dict)
    slack_cap: float = config.DEBRUIJN_SLACK_CAP

    @property
    def max_linear_slack(self) -> float:
        return max(self.linear_slack.values(), default=0.0)

    @property
    def passed(self) -> bool:
        return (self.db1 and self.db2 and self.db3 and self.entropy_ok
                and self.max_linear_slack <= self.slack_cap)

    def to_dict(self) -> dict:
        return {
            'params': {'k': self.params.k, 'l': self.params.l, 'p': self.params.p},
            'db1': self.db1,
            'db2': self.db2,
            'db3': self.db3,
            'count_tables': {str(i): table for i, table in self.count_tables.items()},
            'cyclic_entropy': {str(i): value for i, value in self.cyclic_entropy.items()},
            'entropy_ok': self.entropy_ok,
            'linear_slack': {str(i): value for i, value in self.linear_slack.items()},
            'max_linear_slack': self.max_linear_slack,
            'passed': self.passed,
        }


def verify_gdb(text: Text, params: GdBParams,
               slack_cap: float = config.DEBRUIJN_SLACK_CAP) -> GdBCertificate:
    """
    Exhaustive cyclic count check plus the entropy window.

    Linear entropies get the measured constant c_i = |target - H_i| |S| / (i log|S|).

    Args:
        text: candidate word of length params.length
        params: the parameters it should satisfy
        slack_cap: largest accepted c_i

    Returns:
        GdBCertificate; passed is the conjunction of every check
    """
    n = len(text)
    if n != params.length or text.sigma != params.sigma:
        raise ParameterError(f'text of length {n} over {text.sigma} letters does not match '
                             f'parameters {params} (length {params.length}, sigma {params.sigma})')
    k, l, q, sigma = params.k, params.l, params.q, params.sigma
    tables = {}
    db1 = db2 = db3 = True
    for i in range(1, k + l + 2):
        counts = cyclic_counts(text, i)
        table = {
            'distinct': int(len(counts)),
            'min': int(counts.min()),
            'max': int(counts.max()),
            'sum_ok': int(counts.sum()) == n,
        }
        if i < k:
            table['expected'] = q ** (2 * k - 2 * i + l + 1)
            db1 &= len(counts) == sigma ** i and bool(np.all(counts == table['expected']))
        else:
            table['expected'] = q ** (k + l + 1 - i)
            db2 &= bool(np.all(counts == table['expected']))
        if i == k + l + 1:
            db3 = int(counts.max()) <= 1
        db1 &= table['sum_ok']
        tables[i] = table

    full = math.log2(sigma)
    cyclic, slack = {}, {}
    entropy_ok = True
    log_n = math.log2(n)
    for i in range(k + l + 1):
        target = full if i < k else full / 2
        value = empirical_entropy(text, i, cyclic=True).bits_per_symbol
        cyclic[i] = value
        entropy_ok &= abs(value - target) <= ENTROPY_TOLERANCE
        if i > 0:
            linear = empirical_entropy(text, i).bits_per_symbol
            slack[i] = abs(target - linear) * n / (i * log_n)
    certificate = GdBCertificate(params, db1, db2, db3, tables, cyclic, entropy_ok, slack, slack_cap)
    logger.info('certificate for gdb %s: %s', params, 'pass' if certificate.passed else 'FAIL')
    return certificate


def lower_bound_check(text: Text, parsing: Parsing, params: GdBParams,
                      output_bits: float = None, tolerance: float = config.ABS_TOL) -> Report:
    """
    Phrase-length precondition, then
    |Y|H_0(Y) >= |S|(z+k)/(2z) log sigma - |Y| log(|S|/|Y|) with z = k+l+1,
    and (1+rho)|S|H_k - lambda|S| <= output bits with rho = k/z.

    Args:
        output_bits: compressed size to compare with (default |Y|H_0(Y))
    """
    n = len(text)
    m = len(parsing)
    z, k = params.z, params.k
    phrase_entropy = entropy_bits(parsing.phrases)
    output_bits = phrase_entropy if output_bits is None else output_bits
    h_k = empirical_entropy(text, k).total_bits
    rho = k / z
    lam = (m / n) * math.log2(n / m) if m else 0.0
    natural, _ = is_natural_parsing(parsing)
    report = Report(f'gdb {params} lower bound', stats={
        'z': z,
        'phrases': m,
        'max_phrase_length': parsing.max_phrase_length,
        'natural': natural,
        'rho': rho,
        'lambda': lam,
        'ratio': output_bits / h_k if h_k > 0 else None,
    })
    report.add('debruijn.phrase_length', parsing.max_phrase_length, z)
    if parsing.max_phrase_length > z:
        logger.warning('gdb %s: phrase of length %d > z=%d, bound not applied', params,
                       parsing.max_phrase_length, z)
        return report
    bound = n * (z + k) / (2 * z) * math.log2(params.sigma) - m * math.log2(n / m)
    report.add('debruijn.lower_bound', bound, phrase_entropy, tolerance)
    report.add('debruijn.lambda', lam, LOG2_E / math.e)
    # the linear H_k exceeds the cyclic one by at most log e
    report.add('debruijn.ratio', (1 + rho) * h_k - lam * n, output_bits, (1 + rho) * LOG2_E + tolerance)
    return report
