"""fluxqit - cavity-QED quantum information transfer simulator."""

from fluxqit.version import __version__

__all__ = ["__version__"]
