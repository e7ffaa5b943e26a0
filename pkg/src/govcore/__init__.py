"""Governed decision-execution substrate.

Decisions run as sequences of typed cognitive steps under four-tier
governance, producing a hash-chained audit ledger, with human-in-the-loop
suspension and resume.
"""

__version__ = "0.1.0"
