"""displacement_gp: interpretable GP regression for climate-induced displacement."""

__all__ = []
