import pytest

from models.errors import InvalidTextError, ParameterError
from models.fixtures import expand_inputs, is_selector, load_input, random_text


def test_selectors():
    text, meta = load_input('sample16')
    assert len(text) == 16 and text.sigma == 4
    assert str(meta.params) == '1,1,1'

    text, meta = load_input('worst_case:5')
    assert (len(text), text.sigma, meta.kind) == (20, 6, 'worst_case')

    text, meta = load_input('bad_grammar:3')
    assert len(text) == 48
    assert meta.grammar.expand_start() == text.symbols

    text, meta = load_input('gdb:1,0,2')
    assert (len(text), text.sigma) == (64, 16)


def test_random_text_is_seeded():
    assert random_text(100, 5, 3) == random_text(100, 5, 3)
    assert random_text(100, 5, 3).name == 'random_100_5_3'
    with pytest.raises(ParameterError):
        random_text(10, 0)


def test_bad_selectors():
    with pytest.raises(ParameterError):
        load_input('gdb:1,1')
    with pytest.raises(ParameterError):
        load_input('random:10,x,1')
    with pytest.raises(InvalidTextError):
        load_input('missing.txt')


def test_directories_expand(tmp_path):
    (tmp_path / 'b.txt').write_bytes(b'bb')
    (tmp_path / 'a.txt').write_bytes(b'aa')
    (tmp_path / 'nested').mkdir()
    expanded = expand_inputs([str(tmp_path), 'sample32'])
    assert expanded == [str(tmp_path / 'a.txt'), str(tmp_path / 'b.txt'), 'sample32']
    assert is_selector('random:1,2,3')
    assert not is_selector(str(tmp_path))
