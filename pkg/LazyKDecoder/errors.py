"""Exception hierarchy for the decoder.

Every error raised on purpose by this package derives from LazyKError, which
is itself a ValueError so callers that only know about bad values still catch
it. The CLI maps all of them to the data-error exit code.
"""


class LazyKError(ValueError):
    pass


class TableError(LazyKError):
    """Bad probability matrix or rank vector."""


class DecodeError(LazyKError):
    """Bad decoder arguments (budget, dimensions)."""


class ConstraintError(LazyKError):
    """Bad labels for span extraction, unknown constraint sets or rule files."""


class SynthError(LazyKError):
    """Invalid synthetic corpus parameters."""


class CorpusError(LazyKError):
    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        """
        :param message: What is wrong with the record
        :param path: Corpus file, if known
        :param line: 1-based line number of the offending record, if known
        """
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(f"{where}{message}")
