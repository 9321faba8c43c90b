"""Calibration metrics, Platt rescaling and confidence measures for generated code."""

from ._codecal import *  # noqa: F401,F403
from ._codecal import __doc__  # noqa: F401
