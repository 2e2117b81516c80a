"""Certified bounds for the simplicial volume of one-relator groups."""

from .cancellation import bound_report, max_piece_length, satisfies_c_prime
from .core import build_program, lallop
from .diagram import metrics, validate_diagram, volume_upper_bound
from .words import Word, evaluate, parse_word, primitive_root, render

__version__ = "0.1.0"
SCHEMA_VERSION = "1.0"

__all__ = [
    "Word", "parse_word", "render", "evaluate", "primitive_root",
    "max_piece_length", "satisfies_c_prime", "bound_report",
    "validate_diagram", "metrics", "volume_upper_bound",
    "build_program", "lallop",
]
