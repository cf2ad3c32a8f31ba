"""Online graph coloring algorithms and their exact analyses."""

__version__ = "0.1.0"
