class BootMSTError(Exception):
    """Base class for errors raised by bootmst."""


class PanelError(BootMSTError, ValueError):
    """Invalid returns panel, price file or sector map."""


class ReplicaError(BootMSTError, RuntimeError):
    """A bootstrap replica could not be drawn."""

    def __init__(self, message, replica=None):
        super().__init__(message)
        self.replica = replica
