"""Artin-Schreier-Witt degeneration engine."""
