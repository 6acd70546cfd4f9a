"""ALDAS: linguistic-feature auto-labeling for spoofed-audio detection."""

__version__ = "0.1.0"
