"""Numerical toolkit for dilute Bose gases in the Gross-Pitaevskii regime."""

__version__ = "0.1.0"
