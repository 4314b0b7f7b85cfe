"""Exception types shared across the package.

Exceptions signal malformed input or contract misuse.  Policy violations are
never exceptions: they are Finding / Violation values carried in reports and
traces.
"""

from __future__ import annotations


class Sl5Error(Exception):
    """Base class for all package errors."""


class ParseError(Sl5Error):
    """An input document failed strict-schema validation."""

    def __init__(self, message: str, *, source: str | None = None):
        self.source = source
        super().__init__(f"{source}: {message}" if source else message)


class UnresolvedReference(Sl5Error):
    """An id in the input does not resolve to a declared entity."""


class InvalidBand(Sl5Error):
    """A frequency band was given with low >= high."""


class WrongState(Sl5Error):
    """A pipeline transition was attempted from a state that forbids it."""


class UnresolvedReviewer(Sl5Error):
    """A review decision names a reviewer absent from the personnel directory."""


class UntrustedSigner(Sl5Error):
    """A firmware image is not signed by a trusted signer."""


class NoFirmware(Sl5Error):
    """Boot was requested on a device with no installed firmware."""


class NotBooted(Sl5Error):
    """An operation requiring a booted device was called before boot."""


class MutualAuthFailed(Sl5Error):
    """Peer handshake failed; carries the device(s) that failed verification."""

    def __init__(self, failed_devices: tuple[str, ...], detail: str):
        self.failed_devices = failed_devices
        super().__init__(detail)


class ZeroCap(Sl5Error):
    """Exfiltration time was requested against a non-positive bandwidth cap."""


class MalformedScenario(Sl5Error):
    """A scenario file or event payload violates the scenario contract."""


class UnknownControl(Sl5Error):
    """A control id does not resolve in the catalog."""
