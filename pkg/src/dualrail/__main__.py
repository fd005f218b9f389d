"""Allow ``python -m dualrail``."""

from .cli import entrypoint

entrypoint()
