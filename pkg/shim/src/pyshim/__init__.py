"""JSON-lines execution shim for candidate programs."""

__version__ = "0.1.0"

from .worker import CandidateRunner, main, resolve_entry, serve
