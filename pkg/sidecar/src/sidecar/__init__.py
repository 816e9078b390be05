"""Reference generation and NLI services for the rcpipe wire protocols."""

__version__ = "0.1.0"
