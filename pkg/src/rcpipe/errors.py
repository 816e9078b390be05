"""Shared exception types."""


class RcpipeError(Exception):
    """Base class for all pipeline errors."""


class DataError(RcpipeError):
    """A data file is missing, malformed, or inconsistent."""

    def __init__(self, message: str, *, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        parts = [message]
        if line is not None:
            parts.append(f"(line {line})")
        if field is not None:
            parts.append(f"(field {field!r})")
        super().__init__(" ".join(parts))


class BackendError(RcpipeError):
    """A remote backend (generation or NLI) failed after retries."""

    def __init__(self, message: str, *, query_ids: list[str] | None = None):
        self.query_ids = list(query_ids or [])
        if self.query_ids:
            message = f"{message}: {', '.join(self.query_ids)}"
        super().__init__(message)
