"""Command-line tools for the QEI laboratory."""
