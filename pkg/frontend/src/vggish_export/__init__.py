"""Batch VGGish-style embedding exporter emitting ALDE interchange files."""

__version__ = "0.1.0"
