"""
Error hierarchy for the Plumber workbench
Each package raises subclasses of its own base so the CLI can map them to exit codes
"""


class PlumberError(Exception):
    """Base class of every error raised by the workbench."""
    pass


class ConfigError(PlumberError):
    """Invalid or unreadable experiment configuration."""
    pass
