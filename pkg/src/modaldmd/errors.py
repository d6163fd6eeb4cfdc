"""Exception hierarchy shared by all modaldmd modules."""


class ModalDmdError(Exception):
    """Base class for every error raised by modaldmd."""


# snapshot file format --------------------------------------------------------
class SnapshotFormatError(ModalDmdError):
    """A snapshot file does not conform to the DMDS1 layout."""


class BadMagicError(SnapshotFormatError):
    pass


class TruncatedPayloadError(SnapshotFormatError):
    pass


class NonFiniteError(SnapshotFormatError):
    pass


class SizeOverflowError(SnapshotFormatError):
    pass


class InvalidSnapshotError(ModalDmdError, ValueError):
    """Snapshot data violates shape, finiteness or sampling constraints."""


class InsufficientSnapshotsError(ModalDmdError, ValueError):
    pass


class LengthMismatchError(ModalDmdError, ValueError):
    pass


# linear algebra --------------------------------------------------------------
class ZeroMatrixError(ModalDmdError, ValueError):
    pass


class EigenSolverError(ModalDmdError):
    pass


class SingularSystemError(ModalDmdError):
    pass


# dmd -------------------------------------------------------------------------
class ZeroEigenvalueError(ModalDmdError, ValueError):
    pass


# simulation ------------------------------------------------------------------
class ConfigError(ModalDmdError, ValueError):
    """Invalid simulation, grid or command-line configuration."""


class BlowUpError(ModalDmdError):
    """The explicit time integration diverged."""
