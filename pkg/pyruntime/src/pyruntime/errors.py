"""Handler-level exceptions.

The host reports any handler exception on the wire as
``<TypeName>: <message>``, so these names are part of the observable
error vocabulary.
"""

from __future__ import annotations


class MissingParameter(Exception):
    """A required request parameter is absent."""


class ExecutableNotFound(Exception):
    """The external binary a wrapper handler needs cannot be located."""


class NonZeroExit(Exception):
    """The external binary ran but exited with a non-zero status."""
