"""Exception hierarchy shared by every module of the package."""


class KeywordDTWError(Exception):
    """Base class for all errors raised by keyword_dtw."""


class UsageError(KeywordDTWError, ValueError):
    """Bad argument value or combination."""


class FormatError(KeywordDTWError, ValueError):
    """Malformed input file."""


class UnsupportedError(KeywordDTWError, ValueError):
    """Valid input that this package does not handle."""


class CorpusError(KeywordDTWError):
    """Corpus directory does not follow the ``<root>/<class>/*.wav`` layout."""


class AliasingError(UsageError):
    pass


class NoRealRootError(UsageError):
    """Pre-emphasis cutoff too high for the sample rate (needs f_e > 4 f_c)."""


class TooShortError(UsageError):
    pass


class NotApplicableError(UsageError):
    pass


class SilentSignalError(KeywordDTWError):
    """Signal carries no power, so it cannot be trimmed or normalized."""


class ZeroPowerError(KeywordDTWError):
    pass


class DegenerateBankError(UsageError):
    def __init__(self, message, filter_index=None):
        super().__init__(message)
        self.filter_index = filter_index


class ContractViolation(KeywordDTWError, ValueError):
    pass


class BandError(UsageError):
    def __init__(self, message, min_delta):
        super().__init__(message)
        self.min_delta = min_delta


class OracleScaleError(UsageError):
    pass


class PartitionError(UsageError):
    pass
