"""Exception hierarchy shared across the package.

ValidationError covers anything wrong with the *content* of inputs
(malformed files, inconsistent shapes, bad option values) and maps to
CLI exit code 1.  StorageError covers filesystem-level failures
(missing, unreadable, unwritable paths) and maps to exit code 2.
"""


class VeilkitError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(VeilkitError):
    """Input content or configuration is invalid."""


class TensorFormatError(ValidationError):
    """A tensor container could not be parsed; message names the byte offset."""


class StorageError(VeilkitError):
    """A path could not be read or written."""


class VeilkitWarning(UserWarning):
    """Non-fatal advisory emitted via the warnings module."""
