"""Alphabet orderings and BWT run minimisation."""

__version__ = "0.1.0"
