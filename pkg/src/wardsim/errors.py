"""Shared exception types."""


class ConfigError(ValueError):
    """Invalid experiment configuration.

    ``path`` is a dotted field path into the configuration document
    (e.g. ``"los.AandE"``) so callers can point users at the exact field.
    """

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)

    @property
    def message(self) -> str:
        return self.args[0]
