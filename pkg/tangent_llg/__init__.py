"""tangent-llg - tangent plane finite elements for LLG with Dzyaloshinskii-Moriya interaction."""

__version__ = "0.1.0"
