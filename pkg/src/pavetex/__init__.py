"""Paving-texture recognition: descriptors, material classification and
sidewalk-to-street transition detection.
"""

from .backend import backend_name

__all__ = ["backend_name"]
__version__ = "0.1.0"
