"""Deformed enveloping algebras, deformed Koszul resolutions and the quantized modular character."""

__version__ = "0.1.0"
