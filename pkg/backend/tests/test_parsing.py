import math

import numpy as np
import pytest

from models.errors import InvalidParsingError, ZeroProbabilityError
from models.grammar import induced_parsing
from models.greedy import greedy_run
from models.parsing import (
    Parsing,
    best_offset_parsing,
    is_natural_parsing,
    kraft_sum,
    length_valuation,
    lz77_parse_nonself,
    lz78_parse,
    offset_costs,
    offset_parsing,
    parsing_cost,
    phrase_cost,
    phrase_probability,
    phrase_probability_sum,
    valuation_bits,
    verify_parsing_bounds,
)
from models.repair import repair_run
from models.textcore import Text


def random_text(rng, n, sigma):
    return Text(tuple(rng.integers(0, sigma, n).tolist()), sigma)


def test_boundaries_validated():
    text = Text.from_string('abab')
    with pytest.raises(InvalidParsingError):
        Parsing(text, (0, 2))
    with pytest.raises(InvalidParsingError):
        Parsing(text, (0, 2, 2, 4))
    assert Parsing.from_lengths(text, [1, 3]).phrases == ((0,), (1, 0, 1))


def test_lengths_file_format():
    text = Text.from_string('abcab')
    parsing = Parsing.from_lengths(text, [2, 3])
    assert parsing.to_lengths_text() == 'n=5\n2\n3\n'
    assert Parsing.from_lengths_text(text, 'n=5\n2\n3\n').lengths == (2, 3)
    with pytest.raises(InvalidParsingError):
        Parsing.from_lengths_text(text, 'n=6\n3\n3\n')


def test_lz78_phrases():
    assert lz78_parse(Text.from_string('aaaa')).lengths == (1, 2, 1)
    parsing = lz78_parse(Text.from_string('abababab'))
    assert sum(parsing.lengths) == 8
    assert parsing.phrases[:2] == ((0,), (1,))


def test_lz77_nonself_phrases():
    assert lz77_parse_nonself(Text.from_string('aaaa')).lengths == (1, 2, 1)
    assert lz77_parse_nonself(Text.from_string('abab')).lengths == (1, 1, 2)


def test_offset_parsing():
    text = Text.from_string('abcdefg')
    assert offset_parsing(text, 3, 1).lengths == (1, 3, 3)
    assert offset_parsing(text, 3, 0).lengths == (3, 3, 1)


def test_phrase_probabilities():
    text = Text.from_string('abab')
    assert phrase_probability(text, (0, 1)) == pytest.approx(0.5)
    assert phrase_probability(text, (0, 1), 1) == pytest.approx(0.5)
    with pytest.raises(ZeroProbabilityError):
        phrase_cost(text, (1, 1))


def test_k_cost_of_repeated_phrase():
    parsing = Parsing.from_lengths(Text.from_string('abab'), [2, 2])
    costs = parsing_cost(parsing, 1)
    assert costs.k_cost_bits == pytest.approx(2.0)
    assert costs.cost_bits == pytest.approx(2.0)
    assert costs.parsing_entropy_bits == pytest.approx(0.0)


@pytest.mark.parametrize('k', [None, 0, 1, 2])
def test_phrase_probabilities_sum_to_at_most_one(rng, k):
    text = random_text(rng, 60, 3)
    assert phrase_probability_sum(text, 2, k) <= 1 + 1e-9


def test_lz78_is_natural(rng):
    for sigma in (2, 4):
        text = random_text(rng, 300, sigma)
        natural, violations = is_natural_parsing(lz78_parse(text))
        assert natural
        assert violations == []


def test_unnatural_parsing_detected():
    text = Text.from_string('abcdabcd' + 'a' * 8)
    parsing = Parsing.from_lengths(text, [len(text)])
    natural, violations = is_natural_parsing(parsing)
    assert not natural
    assert violations == [0]


@pytest.mark.parametrize('k', [0, 1, 2, 3])
def test_parsing_bounds_hold(rng, k):
    text = random_text(rng, 500, 4)
    for parsing in (lz78_parse(text), lz77_parse_nonself(text)):
        report = verify_parsing_bounds(parsing, k)
        assert report.passed, report.failures()


@pytest.mark.parametrize('l', [2, 4])
def test_best_offset_parsing_mean_entropy(rng, l):
    text = random_text(rng, 400, 2)
    parsing = best_offset_parsing(text, l)
    assert parsing.max_phrase_length <= l
    report = verify_parsing_bounds(parsing, 1, offset_length=l)
    assert report.row(f'parsing.mean_entropy[l={l}]').passed


@pytest.mark.parametrize('l', [1, 2, 3, 4])
def test_best_offset_is_cheapest(rng, l):
    text = random_text(rng, 250, 3)
    best = best_offset_parsing(text, l)
    best_cost = parsing_cost(best).cost_bits
    rows = offset_costs(text, l)
    assert [offset for offset, _, _ in rows] == list(range(l))
    for _, cost, _ in rows:
        assert best_cost <= cost + 1e-9
    for k in range(5):
        report = verify_parsing_bounds(best, k, offset_length=l)
        assert report.passed, report.failures()


@pytest.mark.parametrize('compress', [repair_run, greedy_run])
def test_bounds_on_induced_parsings(rng, compress):
    text = random_text(rng, 300, 4)
    grammar, _ = compress(text)
    parsing = induced_parsing(grammar, text).parsing
    assert sum(parsing.lengths) == len(text)
    for k in range(5):
        report = verify_parsing_bounds(parsing, k)
        assert report.passed, report.failures()


def test_length_valuation():
    parsing = Parsing.from_lengths(Text.from_string('abab'), [1, 1, 2])
    valuation = length_valuation(parsing)
    assert valuation == pytest.approx({
        (0,): 1 + math.log2(1.5),
        (1,): 1 + math.log2(1.5),
        (0, 1): 2 + math.log2(3),
    })
    assert kraft_sum(valuation) <= 1
    assert valuation_bits(parsing.phrases, valuation) == pytest.approx(4 + 2 * math.log2(1.5) + math.log2(3))
    assert valuation_bits(((1, 1),), valuation) == math.inf


def test_random_valuations_bound_phrase_entropy(rng):
    text = random_text(rng, 400, 3)
    parsing = lz78_parse(text)
    distinct = sorted(set(parsing.phrases))
    for _ in range(10):
        weights = rng.dirichlet(np.ones(len(distinct))) * 0.999
        valuation = {phrase: -math.log2(w) for phrase, w in zip(distinct, weights)}
        report = verify_parsing_bounds(parsing, 1, valuation=valuation)
        assert report.row('parsing.phrase_entropy_le_valuation').passed


def test_valuation_over_one_is_rejected():
    parsing = Parsing.from_lengths(Text.from_string('abab'), [2, 2])
    with pytest.raises(InvalidParsingError):
        verify_parsing_bounds(parsing, 0, valuation={(0, 1): 0.5, (1, 0): 0.5})
