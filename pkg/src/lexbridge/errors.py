"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class LexbridgeError(Exception):
    exit_code = 1
    code = "error"


class FormatError(LexbridgeError):
    """A file does not match its declared format."""

    exit_code = 4
    code = "format"

    def __init__(self, message, record=None):
        super().__init__(message)
        self.record = record


class CorpusDecodeError(FormatError):
    def __init__(self, message, offset):
        super().__init__(message)
        self.offset = offset


class ConfigError(LexbridgeError):
    exit_code = 5
    code = "config"


class VocabularyError(LexbridgeError):
    """A word required by an operation is missing from a vocabulary."""

    exit_code = 6
    code = "vocabulary"

    def __init__(self, message, word=None):
        super().__init__(message)
        self.word = word


class SingularSystemError(LexbridgeError):
    exit_code = 7
    code = "singular"
