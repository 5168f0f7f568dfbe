"""Integer-forcing receivers for linear space-time block codes."""

from .stbc import Constellation, LinearDesign, make_alamouti, make_vblast

__all__ = ["Constellation", "LinearDesign", "make_alamouti", "make_vblast"]
__version__ = "0.1.0"
