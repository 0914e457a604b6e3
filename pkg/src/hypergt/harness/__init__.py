"""Command-line harness: instance generation, sweeps, and the ``hypergt`` CLI."""
