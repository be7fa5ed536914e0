"""HTTP bridge exposing fill-mask and token classification over a masked LM."""

__version__ = "0.1.0"
