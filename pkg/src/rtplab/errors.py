class RtplabError(Exception):
    """Base class for rtplab errors."""


class ConfigurationError(RtplabError):
    """Invalid configuration (bad profile, port, matrix, stage list...)."""


class ProtocolError(RtplabError):
    """Malformed or unsupported wire data."""


class SimulationDeadlock(RtplabError):
    """Event queue exhausted while an actor had not completed."""
