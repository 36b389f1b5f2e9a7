import pytest

from models.errors import InvalidGrammarError, MalformedStreamError
from models.grammar import (
    FullGrammar,
    bad_grammar_fixture,
    check_irreducible,
    check_weakly_nonredundant,
    derivation_occurrences,
    expansion_sum_check,
    grammar_report,
    induced_parsing,
    nonoverlapping_pair_counts,
    start_parsing,
)


@pytest.fixture
def square():
    # S' = XX, X -> ab
    return FullGrammar(2, (2, 2), ((0, 1),))


def test_expansion_and_metrics(square):
    assert square.expand_start() == (0, 1, 0, 1)
    assert square.text().to_string('ab') == 'abab'
    metrics = square.metrics()
    assert metrics.n_nonterminals == 1
    assert metrics.rhs_size_grammar == 2
    assert metrics.rhs_size_full == 4
    assert metrics.expansion_sum == 2
    assert metrics.is_cnf


def test_invalid_grammars_rejected():
    with pytest.raises(InvalidGrammarError):
        FullGrammar(2, (2,), ((3,), (2,)))
    with pytest.raises(InvalidGrammarError):
        FullGrammar(2, (5,), ((0, 1),))
    with pytest.raises(InvalidGrammarError):
        FullGrammar(2, (2,), ((),))


def test_forward_references_are_reordered():
    grammar = FullGrammar(2, (2, 2), ((3, 3), (0, 1)))
    assert not grammar.is_ordered
    ordered = grammar.in_definition_order()
    assert ordered.is_ordered
    assert ordered.rules == ((0, 1), (2, 2))
    assert ordered.start == (3, 3)
    assert ordered.expand_start() == grammar.expand_start() == (0, 1) * 4


@pytest.mark.parametrize('strings, pair, count', [
    ([(0, 0, 0)], (0, 0), 1),
    ([(0, 0, 0, 0)], (0, 0), 2),
    ([(0, 1), (0, 1)], (0, 1), 2),
    ([(0,), (1,)], (0, 1), 0),
])
def test_nonoverlapping_pair_counts(strings, pair, count):
    assert nonoverlapping_pair_counts(strings)[pair] == count


def test_irreducibility(square):
    assert check_irreducible(square).irreducible
    flat = check_irreducible(FullGrammar(2, (0, 1, 0, 1), ()))
    assert not flat.ig3
    assert flat.witnesses['ig3'] == [(0, 1)]
    unused = check_irreducible(FullGrammar(2, (2, 0), ((0, 1),)))
    assert not unused.ig2
    assert unused.witnesses['ig2'] == [2]


def test_duplicate_expansions_break_ig1():
    grammar = FullGrammar(2, (2, 3, 2, 3), ((0, 1), (0, 1)))
    result = check_irreducible(grammar)
    assert not result.ig1
    assert result.witnesses['ig1'] == [(2, 3)]


def test_derivation_occurrences():
    grammar = FullGrammar(2, (3, 3), ((0, 1), (2, 2)))
    assert derivation_occurrences(grammar) == {2: 4, 3: 2}
    assert check_weakly_nonredundant(grammar).flag
    assert not check_weakly_nonredundant(FullGrammar(2, (2,), ((0, 1),))).flag


def test_induced_parsing(square):
    induced = induced_parsing(square)
    assert induced.s_double_prime == (0, 1, 2)
    assert induced.parsing.lengths == (1, 1, 2)
    assert induced.unreached == ()
    assert start_parsing(square).lengths == (2, 2)


def test_bad_grammar_fixture():
    grammar = bad_grammar_fixture(3)
    assert grammar.n_nonterminals == 12
    assert len(grammar.start) == 16
    assert grammar.text_length() == 48
    assert check_irreducible(grammar).irreducible
    summed = expansion_sum_check(grammar)
    assert summed.applicable and summed.holds
    assert summed.total == 32
    report = grammar_report(grammar, grammar.text_length())
    assert report.row('grammar.expansion_sum').passed
    assert report.row('grammar.irreducible_size').passed
    with pytest.raises(InvalidGrammarError):
        bad_grammar_fixture(2)


def test_binary_grammar_file(square, tmp_path):
    path = tmp_path / 'square.gcl'
    path.write_bytes(square.to_bytes())
    assert FullGrammar.from_bytes(path.read_bytes()) == square
    with pytest.raises(MalformedStreamError):
        FullGrammar.from_bytes(b'NOPE' + square.to_bytes()[4:])


def test_dump_text(square):
    assert square.dump_text() == "# sigma=2 rules=1\nS' -> X0 X0\nX0 -> 0 1\n"
    nested = FullGrammar(2, (3, 0), ((0, 1), (2, 2)))
    assert nested.dump_text().splitlines()[1:] == ["S' -> X1 0", 'X0 -> 0 1', 'X1 -> X0 X0']
