"""Grammar-compression lab models"""

from .grammar import FullGrammar
from .textcore import Text

__all__ = ['FullGrammar', 'Text']
