"""QEI lab - one-particle quantum energy inequalities in 1+1-d integrable models."""

__version__ = "0.1.0"
