"""
Named inputs for the lab: the two published generalized de Bruijn example
words, the Re-Pair worst-case family, generated words, seeded random texts
and the binary-prefix grammar. Anything else is read from disk.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional

import numpy as np

try:
    from .debruijn import GdBParams, generalized_word
    from .errors import InvalidTextError, ParameterError
    from .grammar import FullGrammar, bad_grammar_fixture
    from .repair import worst_case_family
    from .textcore import Text
except ImportError:
    from debruijn import GdBParams, generalized_word
    from errors import InvalidTextError, ParameterError
    from grammar import FullGrammar, bad_grammar_fixture
    from repair import worst_case_family
    from textcore import Text

SAMPLE_ALPHABET = 'abcd'
SAMPLE_WORDS = {
    'sample32': ('aababcbbadccdbddaacadaccbdbbcddc', GdBParams(2, 0, 1)),
    'sample16': ('abbbdacdcacabdcd', GdBParams(1, 1, 1)),
}
SELECTOR_KINDS = ('worst_case', 'gdb', 'random', 'bad_grammar')


@dataclass(frozen=True)
class InputMeta:
    """Where a text came from; gdb params and grammar are set when known."""
    kind: str
    selector: str
    params: Optional[GdBParams] = None
    grammar: Optional[FullGrammar] = None

    def to_dict(self) -> dict:
        return {
            'kind': self.kind,
            'selector': self.selector,
            'params': str(self.params) if self.params else None,
        }


def sample_word(name: str) -> Text:
    word, _ = SAMPLE_WORDS[name]
    return Text.from_string(word, SAMPLE_ALPHABET, name)


def random_text(n: int, sigma: int, seed: int = 0) -> Text:
    if n < 0 or sigma < 1:
        raise ParameterError(f'need n >= 0 and sigma >= 1, got n={n}, sigma={sigma}')
    rng = np.random.default_rng(seed)
    symbols = rng.integers(0, sigma, size=n)
    return Text(tuple(symbols.tolist()), sigma, f'random_{n}_{sigma}_{seed}')


def _ints(argument: str, count: int, selector: str) -> List[int]:
    try:
        values = [int(part) for part in argument.split(',')]
    except ValueError:
        raise ParameterError(f'bad fixture selector {selector!r}') from None
    if len(values) != count:
        raise ParameterError(f'{selector!r} needs {count} comma-separated integers')
    return values


def is_selector(value: str) -> bool:
    return value in SAMPLE_WORDS or value.partition(':')[0] in SELECTOR_KINDS


def load_input(selector: str, max_length: int = None):
    """
    Resolve a fixture selector or a file path.

    Returns:
        (Text, InputMeta)
    """
    if selector in SAMPLE_WORDS:
        return sample_word(selector), InputMeta('sample', selector, SAMPLE_WORDS[selector][1])
    kind, _, argument = selector.partition(':')
    if kind == 'worst_case':
        (n,) = _ints(argument, 1, selector)
        return worst_case_family(n), InputMeta(kind, selector)
    if kind == 'gdb':
        params = GdBParams(*_ints(argument, 3, selector))
        text = generalized_word(params) if max_length is None else generalized_word(params, max_length)
        return text, InputMeta(kind, selector, params)
    if kind == 'random':
        n, sigma, seed = _ints(argument, 3, selector)
        return random_text(n, sigma, seed), InputMeta(kind, selector)
    if kind == 'bad_grammar':
        (bits,) = _ints(argument, 1, selector)
        grammar = bad_grammar_fixture(bits)
        return grammar.text(f'bad_grammar_{bits}'), InputMeta(kind, selector, grammar=grammar)
    path = Path(selector)
    if not path.is_file():
        raise InvalidTextError(f'input {selector!r} is neither a fixture nor a readable file')
    return Text.load(path), InputMeta('file', selector)


def expand_inputs(selectors: Iterable[str]) -> List[str]:
    """Replace directories by the files they contain (sorted, non-recursive)."""
    out = []
    for selector in selectors:
        path = Path(selector)
        if not is_selector(selector) and path.is_dir():
            out.extend(str(p) for p in sorted(path.iterdir()) if p.is_file())
        else:
            out.append(selector)
    return out


if __name__ == '__main__':
    for name in SAMPLE_WORDS:
        text, meta = load_input(name)
        print(f"{name}: {text.to_string(SAMPLE_ALPHABET)} (n={len(text)}, sigma={text.sigma})")
    text, _ = load_input('worst_case:4')
    print(f"worst_case:4 -> {text.symbols}")
