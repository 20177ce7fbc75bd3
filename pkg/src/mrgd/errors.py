"""Error hierarchy shared across the engine.

Every error carries a stable machine-readable ``code``. Configuration and
input-file problems derive from ``ConfigError`` (CLI exit 1); anything that
happens while talking to or simulating a backend derives from
``BackendError`` (CLI exit 2).
"""


class MrgdError(Exception):
    code = "ERROR"


class ConfigError(MrgdError):
    code = "CONFIG"


class OutOfRangeError(ConfigError):
    code = "OUT_OF_RANGE"

    def __init__(self, field: str, detail: str = ""):
        self.field = field
        msg = f"OUT_OF_RANGE({field})"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class ParseError(ConfigError):
    code = "PARSE"

    def __init__(self, path, line_no: int, detail: str):
        self.path = str(path)
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {detail}")


class BackendError(MrgdError):
    code = "BACKEND_FAILURE"


class TransportError(BackendError):
    code = "TRANSPORT"


class SchemaError(BackendError):
    code = "SCHEMA"


class ServiceReportedError(BackendError):
    code = "SERVICE_REPORTED"


class UnknownPrefixError(BackendError):
    code = "UNKNOWN_PREFIX"


class UnknownImageError(BackendError):
    code = "UNKNOWN_IMAGE"


class EmbeddingUnavailableError(BackendError):
    code = "EMBEDDING_UNAVAILABLE"

    def __init__(self, label: str):
        self.label = label
        super().__init__(f"EMBEDDING_UNAVAILABLE({label})")


class EmptyCandidatesError(BackendError):
    code = "EMPTY_CANDIDATES"


class EmptyReferencesError(MrgdError):
    code = "EMPTY_REFERENCES"


class DimensionMismatchError(MrgdError):
    code = "DIMENSION_MISMATCH"
