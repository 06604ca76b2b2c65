"""Squeeze-driven Kerr oscillator: spectra, phase-space diagnostics and dynamics."""

from ._kerr_esqpt import *  # noqa: F401,F403
from ._kerr_esqpt import KerrError, ModelParams, diagonalize

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "1.0.0"
