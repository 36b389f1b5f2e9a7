import math

import pytest

from models.bitio import BitReader, BitStream, BitWriter
from models.coders import (
    ENCODINGS,
    Codebook,
    concatenation_report,
    decode,
    elias_delta_bound,
    elias_delta_decode,
    elias_delta_encode,
    elias_delta_length,
    encode,
    encode_fully_naive,
    encode_entropy,
    encode_incremental,
    encode_naive,
    encoding_report,
    huffman_code_lengths,
    huffman_decode,
    huffman_encode,
    incremental_order,
    pack,
    read_container,
    unpack,
)
from models.errors import EncodingError, MalformedStreamError
from models.grammar import FullGrammar
from models.greedy import greedy_run
from models.repair import repair_run, worst_case_family
from models.textcore import Text


@pytest.fixture
def square():
    return FullGrammar(2, (2, 2), ((0, 1),))


@pytest.fixture
def repair_grammar(rng):
    text = Text(tuple(rng.integers(0, 4, 1500).tolist()), 4)
    grammar, _ = repair_run(text)
    return grammar, text


def test_huffman_code_lengths():
    assert huffman_code_lengths({0: 2, 1: 1, 2: 1}) == {0: 1, 1: 2, 2: 2}
    assert huffman_code_lengths({5: 9}) == {5: 1}
    assert huffman_code_lengths({}) == {}


def test_huffman_payloads():
    stream, codebook, breakdown = huffman_encode([0, 0, 1, 2])
    assert stream.bits == '001011'
    assert breakdown.payload_bits == 6
    assert breakdown.entropy_bits == pytest.approx(6.0)
    assert huffman_decode(BitReader(stream), codebook, 4) == [0, 0, 1, 2]

    stream, _, _ = huffman_encode([0, 0, 0, 0])
    assert stream.bits == '0000'
    with pytest.raises(EncodingError):
        huffman_encode([])


def test_huffman_within_one_bit_per_symbol(rng):
    symbols = rng.integers(0, 20, 2000).tolist()
    _, codebook, breakdown = huffman_encode(symbols)
    assert codebook.kraft_sum <= 1.0
    assert breakdown.entropy_bits <= breakdown.payload_bits
    assert breakdown.payload_bits <= breakdown.entropy_bits + len(symbols)


def test_codebook_serialization_cost():
    codebook = Codebook.from_counts({0: 2, 1: 1, 2: 1})
    writer = BitWriter()
    codebook.serialize(writer, 3)
    assert len(writer) == codebook.dictionary_bits(3) == 27
    restored = Codebook.deserialize(BitReader(writer.to_stream()), 3)
    assert restored == codebook


def test_codebook_rejects_kraft_violation():
    writer = BitWriter()
    writer.write_bits('111')
    for _ in range(3):
        writer.write_varint(1)
    with pytest.raises(MalformedStreamError):
        Codebook.deserialize(BitReader(writer.to_stream()), 3)


@pytest.mark.parametrize('value, bits', [
    (1, '1'),
    (2, '0100'),
    (3, '0101'),
    (4, '01100'),
    (17, '001010001'),
])
def test_elias_delta_codes(value, bits):
    stream = elias_delta_encode(value)
    assert stream.bits == bits
    assert elias_delta_length(value) == len(bits)
    assert elias_delta_decode(stream) == value


def test_elias_delta_rejects():
    with pytest.raises(EncodingError):
        elias_delta_encode(0)
    with pytest.raises(MalformedStreamError):
        elias_delta_decode(BitStream.from_bits('10'))


def test_elias_delta_length_bound():
    for value in range(1, 2 ** 20 + 1):
        assert elias_delta_length(value) <= elias_delta_bound(value) + 1e-9


def test_literal_bound_fails_on_power_of_two_bit_lengths():
    assert elias_delta_length(2) > elias_delta_bound(2, literal=True)
    assert elias_delta_length(8) > elias_delta_bound(8, literal=True)
    for value in (1, 5, 100, 1000, 2 ** 19 + 7):
        assert elias_delta_length(value) <= elias_delta_bound(value, literal=True) + 1e-9


def test_fully_naive_layout(square):
    stream, breakdown = encode_fully_naive(square)
    assert stream.bits == '01' + '0001' + '1010'
    assert breakdown.lengths_side_bits == 2
    assert breakdown.payload_bits == 8
    assert breakdown.total_bits == 10
    assert decode('fully_naive', stream, 2, 1, 2) == square


def test_incremental_layout(square):
    stream, breakdown = encode_incremental(square)
    assert stream.bits == '1' + '01' + '001' + '00000001' + '00'
    assert breakdown.payload_bits == 5
    assert breakdown.dictionary_bits == 11
    assert not breakdown.bound_applies


def test_incremental_order():
    grammar = FullGrammar(2, (2, 3), ((1, 0), (0, 0)))
    assert incremental_order(grammar) == [3, 2]
    stream, _ = encode_incremental(grammar)
    decoded = decode('incremental', stream, 2, 2, 2)
    assert decoded.rules == ((0, 0), (1, 0))
    assert decoded.start == (3, 2)
    assert decoded.expand_start() == grammar.expand_start()

    sorted_firsts = FullGrammar(2, (3, 3), ((0, 1), (2, 0)))
    assert incremental_order(sorted_firsts) == [2, 3]


def test_incremental_needs_binary_rules():
    with pytest.raises(EncodingError):
        encode_incremental(FullGrammar(3, (3, 3), ((0, 1, 2),)))


@pytest.mark.parametrize('encoding', ENCODINGS)
def test_decode_restores_repair_grammar(repair_grammar, encoding):
    grammar, text = repair_grammar
    stream, _ = encode(grammar, encoding)
    decoded = decode(encoding, stream, grammar.sigma, grammar.n_nonterminals, len(grammar.start))
    assert decoded.expand_start() == text.symbols
    if encoding != 'incremental':
        assert decoded == grammar


@pytest.mark.parametrize('encoding', ['fully_naive', 'naive', 'entropy'])
def test_size_bounds_hold(repair_grammar, encoding):
    grammar, text = repair_grammar
    report, breakdown = encoding_report(grammar, encoding, text=text)
    assert report.passed, report.failures()
    assert breakdown.within_bound


def test_incremental_report_round_trip(repair_grammar):
    grammar, text = repair_grammar
    report, _ = encoding_report(grammar, 'incremental', text=text)
    assert report.row('coders.round_trip[incremental]').passed
    assert report.row('coders.huffman_upper[incremental]').passed


def test_malformed_streams(square):
    stream, _ = encode_fully_naive(square)
    with pytest.raises(MalformedStreamError):
        decode('fully_naive', BitStream.from_bits(stream.bits[:-3]), 2, 1, 2)
    with pytest.raises(MalformedStreamError):
        decode('fully_naive', BitStream.from_bits(stream.bits + '0'), 2, 1, 2)
    with pytest.raises(EncodingError):
        encode(square, 'zip')


def test_container(square):
    data = pack(square, 'entropy')
    encoding, sigma, n_rules, start_length, _ = read_container(data)
    assert (encoding, sigma, n_rules, start_length) == ('entropy', 2, 1, 2)
    assert unpack(data) == square
    with pytest.raises(MalformedStreamError):
        unpack(b'GCB0' + data[4:])
    with pytest.raises(MalformedStreamError):
        unpack(data[:-1])


@pytest.mark.parametrize('k', [0, 1, 2])
def test_concatenation_bound(repair_grammar, k):
    grammar, text = repair_grammar
    report = concatenation_report(grammar, k, text)
    assert report.passed
    assert not math.isnan(sum(row.lhs_bits for row in report.rows))


@pytest.mark.parametrize('n', [64, 256, 1024])
def test_incremental_size_on_worst_case_family(n):
    text = worst_case_family(n)
    grammar, _ = repair_run(text)
    stream, breakdown = encode_incremental(grammar)
    size = len(text)
    assert breakdown.total_bits >= 0.75 * size * math.log2(size) - 6 * size
    assert breakdown.payload_bits >= 2 * n * math.log2(n)
    decoded = decode('incremental', stream, grammar.sigma, grammar.n_nonterminals, len(grammar.start))
    assert decoded.expand_start() == text.symbols


@pytest.mark.parametrize('function', [encode_fully_naive, encode_naive, encode_entropy,
                                      encode_incremental, decode, repair_run, greedy_run])
def test_entry_points_document_arguments(function):
    assert 'Args:' in function.__doc__
