"""Label-free selection of search similarity configurations."""

__version__ = "0.1.0"
