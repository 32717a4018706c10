"""Exact computations with discriminant forms, incoherent Eisenstein coefficients and CM intersections."""

__version__ = "0.1.0"
