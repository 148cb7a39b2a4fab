class GlueforgeError(Exception):
    """Base class for library errors."""


class ValidationError(GlueforgeError):
    """Input is well formed but violates a mathematical precondition."""


class MalformedInput(GlueforgeError):
    """Input could not be parsed.  ``path`` is a JSON-path style location."""

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.reason = message
