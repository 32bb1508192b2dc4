"""Triangle partition maps: exact matrix algebra, digit expansions, transfer
operators, integral representations, and digit statistics for the 216-map
family indexed by S3 permutation triples."""

__version__ = "0.1.0"

from .core import TRIPLES, parse_triple, format_triple  # noqa: F401
