"""Exception hierarchy. Rejections are reported as Verdict/BoundReport values, not raised."""

from typing import Optional


class RefleqtError(Exception):
    """Base class for every error raised by the workbench."""


class ParseError(RefleqtError):
    def __init__(self, message: str, position: Optional[int] = None, line: Optional[int] = None,
                 column: Optional[int] = None):
        self.position = position
        self.line = line
        self.column = column
        where = ""
        if line is not None and column is not None:
            where = f" at line {line}, column {column}"
        elif position is not None:
            where = f" at offset {position}"
        super().__init__(f"{message}{where}")
        self.message = message


class LexicalError(ParseError):
    pass


class ArityError(ParseError):
    pass


class UnknownSymbolError(ParseError):
    pass


class SignatureError(RefleqtError):
    pass


class CodecError(RefleqtError):
    pass


class EmptyPatternError(CodecError):
    pass


class NumeralError(RefleqtError):
    pass


class OutOfFragmentError(RefleqtError):
    """Raised when a sentence leaves the closed decidable fragment."""


class ArithmetizationError(RefleqtError):
    """The presentation has neither a coding profile nor a base interpretation."""


class TranslationError(RefleqtError):
    pass


class BundleError(RefleqtError):
    pass


class MalformedProofError(RefleqtError):
    pass


class TruthEliminationError(RefleqtError):
    pass


class ICRuleError(RefleqtError):
    pass


class ScriptError(RefleqtError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"{message} (script line {line})" if line is not None else message)


class TheoryFileError(RefleqtError):
    pass
