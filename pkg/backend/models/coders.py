"""
Bit-exact grammar encoders.

Four layouts are supported, all decoded by decode():

fully_naive   unary rule lengths, every rule symbol in w bits, S' in w bits
naive         unary rule lengths, rule symbols in w bits, S' Huffman coded
entropy       unary rule lengths, S' followed by all rules Huffman coded
incremental   CNF only; rules permuted so first components are non-decreasing,
              first components as Elias delta of (difference + 1), second
              components in w bits, S' Huffman coded

w = ceil(log2(sigma + |G|)). A Huffman block is the codebook (a bitmap over
the sigma + |G| symbols, then each present symbol's code length as a varint)
followed by the canonical codes. The container frames a stream with the
GCB1 magic, an encoding tag and the counts a decoder needs.
"""

import heapq
import logging
import math
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import config

try:
    from .bitio import BitReader, BitStream, BitWriter, decode_varint, encode_varint
    from .errors import EncodingError, MalformedStreamError
    from .grammar import FullGrammar, check_irreducible, induced_parsing
    from .report import Report
    from .textcore import Text, empirical_entropy, entropy_bits
except ImportError:
    from bitio import BitReader, BitStream, BitWriter, decode_varint, encode_varint
    from errors import EncodingError, MalformedStreamError
    from grammar import FullGrammar, check_irreducible, induced_parsing
    from report import Report
    from textcore import Text, empirical_entropy, entropy_bits

logger = logging.getLogger(__name__)

FULLY_NAIVE = 'fully_naive'
NAIVE = 'naive'
ENTROPY = 'entropy'
INCREMENTAL = 'incremental'
ENCODINGS = (FULLY_NAIVE, NAIVE, ENTROPY, INCREMENTAL)
UNARY_LENGTH_CAP = 2 ** 20

CONTAINER_MAGIC = b'GCB1'
ENCODING_TAGS = {FULLY_NAIVE: 1, NAIVE: 2, ENTROPY: 3, INCREMENTAL: 4}
LOG2_E = math.log2(math.e)


# Huffman

def huffman_code_lengths(counts: Mapping[int, int]) -> Dict[int, int]:
    """
    Optimal prefix code lengths for the given symbol counts.

    Ties are broken by the rank of the leaf in sorted symbol order, then by
    creation order of internal nodes, so the result is deterministic. A lone
    symbol gets a 1-bit code.
    """
    symbols = sorted(s for s, c in counts.items() if c > 0)
    if not symbols:
        return {}
    if len(symbols) == 1:
        return {symbols[0]: 1}
    heap = [(counts[s], rank, s) for rank, s in enumerate(symbols)]
    heapq.heapify(heap)
    order = len(symbols)
    while len(heap) > 1:
        c1, _, left = heapq.heappop(heap)
        c2, _, right = heapq.heappop(heap)
        heapq.heappush(heap, (c1 + c2, order, (left, right)))
        order += 1

    lengths = {}
    stack = [(heap[0][2], 0)]
    while stack:
        node, depth = stack.pop()
        if isinstance(node, tuple):
            stack.append((node[0], depth + 1))
            stack.append((node[1], depth + 1))
        else:
            lengths[node] = depth
    return lengths


@dataclass(frozen=True)
class Codebook:
    """
    Canonical prefix code given by its code lengths.

    Args:
        lengths: (symbol, code length) pairs
    """
    lengths: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, 'lengths', tuple(sorted((int(s), int(l)) for s, l in self.lengths)))
        for symbol, length in self.lengths:
            if length < 1:
                raise EncodingError(f'code length of symbol {symbol} must be positive, got {length}')

    @classmethod
    def from_counts(cls, counts: Mapping[int, int]) -> 'Codebook':
        return cls(tuple(huffman_code_lengths(counts).items()))

    @cached_property
    def codes(self) -> Dict[int, Tuple[int, int]]:
        """symbol -> (code, length), canonical order by (length, symbol)."""
        codes = {}
        code = 0
        previous = 0
        for symbol, length in sorted(self.lengths, key=lambda item: (item[1], item[0])):
            code <<= length - previous
            codes[symbol] = (code, length)
            code += 1
            previous = length
        return codes

    @cached_property
    def _decode_table(self) -> Dict[Tuple[int, int], int]:
        return {(length, code): symbol for symbol, (code, length) in self.codes.items()}

    @property
    def max_length(self) -> int:
        return max((length for _, length in self.lengths), default=0)

    @property
    def kraft_sum(self) -> float:
        return sum(2.0 ** -length for _, length in self.lengths)

    def dictionary_bits(self, alphabet_size: int) -> int:
        return alphabet_size + 8 * sum(len(encode_varint(length)) for _, length in self.lengths)

    def serialize(self, writer: BitWriter, alphabet_size: int) -> None:
        present = dict(self.lengths)
        if present and max(present) >= alphabet_size:
            raise EncodingError(f'symbol {max(present)} outside alphabet of size {alphabet_size}')
        for symbol in range(alphabet_size):
            writer.write(1 if symbol in present else 0, 1)
        for symbol, length in self.lengths:
            writer.write_varint(length)

    @classmethod
    def deserialize(cls, reader: BitReader, alphabet_size: int) -> 'Codebook':
        present = [symbol for symbol in range(alphabet_size) if reader.read_bit()]
        lengths = []
        for symbol in present:
            length = reader.read_varint()
            if length < 1:
                raise MalformedStreamError(f'code length 0 for symbol {symbol}')
            lengths.append((symbol, length))
        codebook = cls(tuple(lengths))
        if codebook.kraft_sum > 1.0:
            raise MalformedStreamError('code lengths violate the Kraft inequality')
        return codebook


@dataclass(frozen=True)
class SizeBreakdown:
    """
    Bit accounting of one encoding run.

    formula_main_bits holds the leading terms of the size bound (including the
    sigma + |G| bitmap of the dictionary); the bound itself adds
    slack_constant bits per symbol of S' and the rules.
    """
    encoding: str
    payload_bits: int
    dictionary_bits: int
    lengths_side_bits: int
    entropy_bits: float
    formula_main_bits: float
    slack_constant: float
    symbol_count: int
    bound_applies: bool = True
    huffman_payload_bits: int = 0
    huffman_symbols: int = 0

    @property
    def total_bits(self) -> int:
        return self.payload_bits + self.dictionary_bits + self.lengths_side_bits

    @property
    def formula_bound_bits(self) -> float:
        return self.formula_main_bits + self.slack_constant * self.symbol_count

    @property
    def measured_constant(self) -> float:
        if self.symbol_count == 0:
            return 0.0
        return (self.total_bits - self.formula_main_bits) / self.symbol_count

    @property
    def within_bound(self) -> bool:
        return self.total_bits <= self.formula_bound_bits + 1e-6

    def to_dict(self) -> dict:
        return {
            'encoding': self.encoding,
            'payload_bits': self.payload_bits,
            'dictionary_bits': self.dictionary_bits,
            'lengths_side_bits': self.lengths_side_bits,
            'total_bits': self.total_bits,
            'entropy_bits': self.entropy_bits,
            'formula_main_bits': self.formula_main_bits,
            'formula_bound_bits': self.formula_bound_bits,
            'slack_constant': self.slack_constant,
            'measured_constant': self.measured_constant,
            'bound_applies': self.bound_applies,
        }


def _write_huffman_payload(writer: BitWriter, symbols: Sequence[int], codebook: Codebook) -> int:
    codes = codebook.codes
    before = len(writer)
    for symbol in symbols:
        code, length = codes[symbol]
        writer.write(code, length)
    return len(writer) - before


def huffman_encode(symbols: Sequence[int], alphabet_size: int = None) -> Tuple[BitStream, Codebook, SizeBreakdown]:
    """
    Huffman-code a symbol sequence.

    Args:
        symbols: non-empty sequence of ids
        alphabet_size: size of the codebook bitmap (default max id + 1)

    Returns:
        (payload stream, codebook, breakdown); the codebook is costed in
        dictionary_bits but not written to the payload
    """
    if len(symbols) == 0:
        raise EncodingError('cannot Huffman-code an empty sequence')
    alphabet_size = max(symbols) + 1 if alphabet_size is None else alphabet_size
    codebook = Codebook.from_counts(Counter(symbols))
    writer = BitWriter()
    payload = _write_huffman_payload(writer, symbols, codebook)
    entropy = entropy_bits(symbols)
    dictionary = codebook.dictionary_bits(alphabet_size)
    breakdown = SizeBreakdown(
        encoding='huffman',
        payload_bits=payload,
        dictionary_bits=dictionary,
        lengths_side_bits=0,
        entropy_bits=entropy,
        formula_main_bits=entropy + len(symbols) + dictionary,
        slack_constant=0,
        symbol_count=len(symbols),
        huffman_payload_bits=payload,
        huffman_symbols=len(symbols),
    )
    return writer.to_stream(), codebook, breakdown


def huffman_decode(reader: BitReader, codebook: Codebook, count: int) -> List[int]:
    table = codebook._decode_table
    limit = codebook.max_length
    out = []
    while len(out) < count:
        code = 0
        length = 0
        while True:
            code = (code << 1) | reader.read_bit()
            length += 1
            symbol = table.get((length, code))
            if symbol is not None:
                out.append(symbol)
                break
            if length >= limit:
                raise MalformedStreamError(f'no code matches at bit {reader.position}')
    return out


# Elias delta

def write_elias_delta(writer: BitWriter, value: int) -> None:
    if value < 1:
        raise EncodingError(f'Elias delta needs a positive integer, got {value}')
    length = value.bit_length()
    length_of_length = length.bit_length()
    writer.write(0, length_of_length - 1)
    writer.write(length, length_of_length)
    writer.write(value - (1 << (length - 1)), length - 1)


def read_elias_delta(reader: BitReader) -> int:
    zeros = 0
    while reader.read_bit() == 0:
        zeros += 1
        if zeros > 64:
            raise MalformedStreamError('Elias delta prefix too long')
    length = (1 << zeros) | reader.read(zeros)
    return (1 << (length - 1)) | reader.read(length - 1)


def elias_delta_encode(value: int) -> BitStream:
    writer = BitWriter()
    write_elias_delta(writer, value)
    return writer.to_stream()


def elias_delta_decode(stream: BitStream) -> int:
    reader = BitReader(stream)
    value = read_elias_delta(reader)
    if reader.remaining:
        raise MalformedStreamError(f'{reader.remaining} bits left after the Elias delta code')
    return value


def elias_delta_length(value: int) -> int:
    """floor(log n) + 2 floor(log(floor(log n) + 1)) + 1."""
    if value < 1:
        raise EncodingError(f'Elias delta needs a positive integer, got {value}')
    length = value.bit_length()
    return (length - 1) + 2 * (length.bit_length() - 1) + 1


def elias_delta_bound(value: int, literal: bool = False) -> float:
    """
    log n + 2 log(1 + log n) + 1, or with literal=True log n + 2 log log(1 + n) + 1.

    The literal form fails when the bit length of n is a power of two >= 2.
    """
    log_n = math.log2(value)
    if literal:
        return log_n + 2 * math.log2(math.log2(1 + value)) + 1
    return log_n + 2 * math.log2(1 + log_n) + 1


# Grammar encodings

def symbol_width(alphabet_size: int) -> int:
    return (alphabet_size - 1).bit_length() if alphabet_size > 1 else 0


def _write_rule_lengths(writer: BitWriter, grammar: FullGrammar) -> int:
    before = len(writer)
    for rhs in grammar.rules:
        if len(rhs) > UNARY_LENGTH_CAP:
            raise EncodingError(f'rule of length {len(rhs)} exceeds the unary cap {UNARY_LENGTH_CAP}')
        writer.write_unary(len(rhs))
    return len(writer) - before


def _write_fixed(writer: BitWriter, symbols: Sequence[int], width: int) -> int:
    before = len(writer)
    for symbol in symbols:
        writer.write(symbol, width)
    return len(writer) - before


def _write_huffman_block(writer: BitWriter, symbols: Sequence[int], alphabet_size: int):
    """Codebook then payload; returns (dictionary bits, payload bits, entropy bits)."""
    if not symbols:
        return 0, 0, 0.0
    codebook = Codebook.from_counts(Counter(symbols))
    before = len(writer)
    codebook.serialize(writer, alphabet_size)
    dictionary = len(writer) - before
    payload = _write_huffman_payload(writer, symbols, codebook)
    return dictionary, payload, entropy_bits(symbols)


def _log2(value: float) -> float:
    return math.log2(value) if value > 1 else 0.0


def encode_fully_naive(grammar: FullGrammar, slack: float = None) -> Tuple[BitStream, SizeBreakdown]:
    """
    Write rule lengths in unary, then every symbol of the rules and S' in
    ceil(log(sigma + |G|)) bits.

    Args:
        grammar: any full grammar
        slack: per-symbol slack of the size bound (config.ENCODING_SLACK by default)

    Returns:
        (stream, breakdown); the bound is ||S',G|| log(sigma + |G|) plus slack
    """
    x = grammar.alphabet_size
    width = symbol_width(x)
    writer = BitWriter()
    side = _write_rule_lengths(writer, grammar)
    payload = sum(_write_fixed(writer, rhs, width) for rhs in grammar.rules)
    payload += _write_fixed(writer, grammar.start, width)
    size = grammar.metrics().rhs_size_full
    breakdown = SizeBreakdown(
        encoding=FULLY_NAIVE,
        payload_bits=payload,
        dictionary_bits=0,
        lengths_side_bits=side,
        entropy_bits=0.0,
        formula_main_bits=size * _log2(x),
        slack_constant=config.ENCODING_SLACK[FULLY_NAIVE] if slack is None else slack,
        symbol_count=size,
    )
    return writer.to_stream(), breakdown


def encode_naive(grammar: FullGrammar, slack: float = None) -> Tuple[BitStream, SizeBreakdown]:
    """
    Rules written as in the fully naive encoding, S' Huffman-coded.

    Args:
        grammar: any full grammar
        slack: per-symbol slack of the size bound

    Returns:
        (stream, breakdown)
    """
    x = grammar.alphabet_size
    width = symbol_width(x)
    writer = BitWriter()
    side = _write_rule_lengths(writer, grammar)
    rule_bits = sum(_write_fixed(writer, rhs, width) for rhs in grammar.rules)
    dictionary, huffman, entropy = _write_huffman_block(writer, grammar.start, x)
    metrics = grammar.metrics()
    breakdown = SizeBreakdown(
        encoding=NAIVE,
        payload_bits=rule_bits + huffman,
        dictionary_bits=dictionary,
        lengths_side_bits=side,
        entropy_bits=entropy,
        formula_main_bits=entropy + metrics.rhs_size_grammar * _log2(x) + x,
        slack_constant=config.ENCODING_SLACK[NAIVE] if slack is None else slack,
        symbol_count=metrics.rhs_size_full,
        huffman_payload_bits=huffman,
        huffman_symbols=len(grammar.start),
    )
    return writer.to_stream(), breakdown


def concatenated_rhs(grammar: FullGrammar) -> Tuple[int, ...]:
    """S_G: the starting string followed by every right-hand side in id order."""
    return tuple(s for rhs in grammar.rhs_strings() for s in rhs)


def encode_entropy(grammar: FullGrammar, slack: float = None) -> Tuple[BitStream, SizeBreakdown]:
    """
    Huffman-code S_G (S' followed by all right-hand sides) with one codebook.

    Args:
        grammar: any full grammar
        slack: per-symbol slack of the size bound

    Returns:
        (stream, breakdown); the bound is |S_G|H_0(S_G) + sigma + |G| plus slack
    """
    x = grammar.alphabet_size
    writer = BitWriter()
    side = _write_rule_lengths(writer, grammar)
    s_g = concatenated_rhs(grammar)
    dictionary, huffman, entropy = _write_huffman_block(writer, s_g, x)
    breakdown = SizeBreakdown(
        encoding=ENTROPY,
        payload_bits=huffman,
        dictionary_bits=dictionary,
        lengths_side_bits=side,
        entropy_bits=entropy,
        formula_main_bits=entropy + x,
        slack_constant=config.ENCODING_SLACK[ENTROPY] if slack is None else slack,
        symbol_count=len(s_g),
        huffman_payload_bits=huffman,
        huffman_symbols=len(s_g),
    )
    return writer.to_stream(), breakdown


def incremental_order(grammar: FullGrammar) -> List[int]:
    """
    Nonterminals in the order that makes renamed first components non-decreasing.

    A rule becomes available once its first component has its final id; among
    available rules the smallest renamed first component goes next, ties by
    old id. Every id handed out is larger than all keys seen so far, so the
    keys come out sorted.
    """
    sigma = grammar.sigma
    waiting: Dict[int, List[int]] = {}
    heap = []
    for index, rhs in enumerate(grammar.rules):
        first = rhs[0]
        if first < sigma:
            heap.append((first, sigma + index))
        else:
            waiting.setdefault(first, []).append(sigma + index)
    heapq.heapify(heap)
    order = []
    while heap:
        _, symbol = heapq.heappop(heap)
        new_id = sigma + len(order)
        order.append(symbol)
        for user in waiting.pop(symbol, ()):
            heapq.heappush(heap, (new_id, user))
    if len(order) != grammar.n_nonterminals:
        raise EncodingError('first components reference each other cyclically')
    return order


def encode_incremental(grammar: FullGrammar, slack: float = None) -> Tuple[BitStream, SizeBreakdown]:
    """
    Encode a CNF grammar incrementally.

    First components are renamed so they never decrease and are written as
    Elias delta gaps; second components use fixed width and S' is
    Huffman-coded.

    Args:
        grammar: grammar whose rules are all binary
        slack: per-symbol slack of the size bound

    Returns:
        (stream, breakdown); decoding yields the grammar renamed by
        incremental_order()
    """
    if not grammar.metrics().is_cnf:
        raise EncodingError('incremental encoding needs every rule to be binary')
    renamed = grammar.renumbered(incremental_order(grammar))
    x = renamed.alphabet_size
    width = symbol_width(x)
    writer = BitWriter()
    previous = 0
    for first, _ in renamed.rules:
        write_elias_delta(writer, first - previous + 1)
        previous = first
    payload = len(writer)
    payload += _write_fixed(writer, [second for _, second in renamed.rules], width)
    dictionary, huffman, entropy = _write_huffman_block(writer, renamed.start, x)
    n_rules = renamed.n_nonterminals
    breakdown = SizeBreakdown(
        encoding=INCREMENTAL,
        payload_bits=payload + huffman,
        dictionary_bits=dictionary,
        lengths_side_bits=0,
        entropy_bits=entropy,
        formula_main_bits=entropy + n_rules * _log2(x) + x,
        slack_constant=config.ENCODING_SLACK[INCREMENTAL] if slack is None else slack,
        symbol_count=renamed.metrics().rhs_size_full,
        # the |G| log(sigma + |G|) form needs sigma <= |G|
        bound_applies=grammar.sigma <= n_rules,
        huffman_payload_bits=huffman,
        huffman_symbols=len(renamed.start),
    )
    return writer.to_stream(), breakdown


ENCODERS = {
    FULLY_NAIVE: encode_fully_naive,
    NAIVE: encode_naive,
    ENTROPY: encode_entropy,
    INCREMENTAL: encode_incremental,
}


def encode(grammar: FullGrammar, encoding: str, slack: float = None) -> Tuple[BitStream, SizeBreakdown]:
    try:
        encoder = ENCODERS[encoding]
    except KeyError:
        raise EncodingError(f'unknown encoding {encoding!r}; choose from {", ".join(ENCODINGS)}') from None
    stream, breakdown = encoder(grammar, slack)
    logger.debug('%s: %d bits (%d payload, %d dictionary, %d lengths)', encoding,
                 breakdown.total_bits, breakdown.payload_bits, breakdown.dictionary_bits,
                 breakdown.lengths_side_bits)
    return stream, breakdown


def _read_huffman_block(reader: BitReader, count: int, alphabet_size: int) -> List[int]:
    if count == 0:
        return []
    codebook = Codebook.deserialize(reader, alphabet_size)
    if not codebook.lengths:
        raise MalformedStreamError('empty codebook for a non-empty block')
    return huffman_decode(reader, codebook, count)


def decode(encoding: str, stream: BitStream, sigma: int, n_rules: int, start_length: int) -> FullGrammar:
    """
    Rebuild a grammar from a stream produced by encode().

    Args:
        encoding: one of ENCODINGS
        stream: the encoded bits
        sigma, n_rules, start_length: the container header fields

    Raises:
        MalformedStreamError: truncated stream, leftover bits or an invalid
            decoded grammar
    """
    if encoding not in ENCODERS:
        raise EncodingError(f'unknown encoding {encoding!r}')
    x = sigma + n_rules
    width = symbol_width(x)
    reader = BitReader(stream)

    if encoding == INCREMENTAL:
        firsts = []
        previous = 0
        for _ in range(n_rules):
            previous += read_elias_delta(reader) - 1
            firsts.append(previous)
        seconds = [reader.read(width) for _ in range(n_rules)]
        rules = tuple(zip(firsts, seconds))
        start = _read_huffman_block(reader, start_length, x)
    else:
        lengths = [reader.read_unary(UNARY_LENGTH_CAP) for _ in range(n_rules)]
        if encoding == ENTROPY:
            s_g = _read_huffman_block(reader, start_length + sum(lengths), x)
            start, cursor = s_g[:start_length], start_length
            rules = []
            for length in lengths:
                rules.append(tuple(s_g[cursor:cursor + length]))
                cursor += length
        else:
            rules = [tuple(reader.read(width) for _ in range(length)) for length in lengths]
            if encoding == FULLY_NAIVE:
                start = [reader.read(width) for _ in range(start_length)]
            else:
                start = _read_huffman_block(reader, start_length, x)
    if reader.remaining:
        raise MalformedStreamError(f'{reader.remaining} bits left after decoding')
    try:
        return FullGrammar(sigma, tuple(start), tuple(rules))
    except ValueError as e:
        raise MalformedStreamError(f'decoded grammar is invalid: {e}') from e


# Container

def write_container(encoding: str, grammar: FullGrammar, stream: BitStream) -> bytes:
    out = bytearray(CONTAINER_MAGIC)
    out.append(ENCODING_TAGS[encoding])
    for value in (grammar.sigma, grammar.n_nonterminals, len(grammar.start), stream.length_bits):
        out += encode_varint(value)
    out += stream.data
    return bytes(out)


def read_container(data: bytes) -> Tuple[str, int, int, int, BitStream]:
    """Returns (encoding, sigma, |G|, |S'|, stream)."""
    if not data.startswith(CONTAINER_MAGIC) or len(data) <= len(CONTAINER_MAGIC):
        raise MalformedStreamError('missing GCB1 magic')
    tags = {tag: name for name, tag in ENCODING_TAGS.items()}
    tag = data[len(CONTAINER_MAGIC)]
    if tag not in tags:
        raise MalformedStreamError(f'unknown encoding tag {tag}')
    position = len(CONTAINER_MAGIC) + 1
    values = []
    for _ in range(4):
        value, position = decode_varint(data, position)
        values.append(value)
    sigma, n_rules, start_length, length_bits = values
    payload = data[position:]
    if len(payload) != (length_bits + 7) // 8:
        raise MalformedStreamError(f'payload of {len(payload)} bytes does not hold {length_bits} bits')
    return tags[tag], sigma, n_rules, start_length, BitStream(payload, length_bits)


def pack(grammar: FullGrammar, encoding: str) -> bytes:
    stream, _ = encode(grammar, encoding)
    return write_container(encoding, grammar, stream)


def unpack(data: bytes) -> FullGrammar:
    encoding, sigma, n_rules, start_length, stream = read_container(data)
    return decode(encoding, stream, sigma, n_rules, start_length)


# Bound rows

def encoding_report(grammar: FullGrammar, encoding: str, slack: float = None,
                    text: Optional[Text] = None) -> Tuple[Report, SizeBreakdown]:
    """Encode, then check the Huffman sandwich, the size bound and the round trip."""
    stream, breakdown = encode(grammar, encoding, slack)
    report = Report(f'{encoding} encoding', stats=breakdown.to_dict())
    if breakdown.huffman_symbols:
        report.add(f'coders.huffman_lower[{encoding}]', breakdown.entropy_bits,
                   breakdown.huffman_payload_bits)
        report.add(f'coders.huffman_upper[{encoding}]', breakdown.huffman_payload_bits,
                   breakdown.entropy_bits + breakdown.huffman_symbols)
    if breakdown.bound_applies:
        report.add(f'coders.formula_bound[{encoding}]', breakdown.total_bits,
                   breakdown.formula_main_bits, slack=breakdown.slack_constant * breakdown.symbol_count,
                   note=f'measured constant {breakdown.measured_constant:.3f}')
    decoded = decode(encoding, stream, grammar.sigma, grammar.n_nonterminals, len(grammar.start))
    expected = text.symbols if text is not None else grammar.expand_start()
    report.add(f'coders.round_trip[{encoding}]', 0 if decoded.expand_start() == expected else 1, 0)
    return report, breakdown


def concatenation_report(grammar: FullGrammar, k: int, text: Text = None,
                         tolerance: float = config.ABS_TOL) -> Report:
    """
    |S_G|H_0(S_G) <= |S|H_k + |Y''|k log sigma + |L''|H_0(L'') + |G|(log|S_G| + log e)

    Y'' is the parsing induced by expanding each nonterminal once; the row is
    only added for grammars with distinct expansions and no unreachable rule.
    """
    text = grammar.text() if text is None else text
    report = Report(f'entropy concatenation k={k}')
    if not check_irreducible(grammar).ig1:
        return report
    induced = induced_parsing(grammar, text)
    if induced.unreached:
        return report
    s_g = concatenated_rhs(grammar)
    parsing = induced.parsing
    rhs = (empirical_entropy(text, k).total_bits
           + len(parsing) * k * _log2(grammar.sigma)
           + entropy_bits(parsing.lengths)
           + grammar.n_nonterminals * (_log2(len(s_g)) + LOG2_E))
    report.add(f'coders.entropy_concatenation[k={k}]', entropy_bits(s_g), rhs, tolerance)
    return report
