"""Exceptions shared across the pipeline.

``ValueError`` is used for caller mistakes (bad arguments, violated
preconditions); ``DataError`` marks problems with data on disk (parse
failures, corrupt payloads, integrity findings).  The CLI maps the former
to exit code 1 and the latter to exit code 2.
"""


class DataError(Exception):
    """A file or dataset failed validation."""
