"""Experiment harness: reproducible runs, statistical verdicts, CLI."""
