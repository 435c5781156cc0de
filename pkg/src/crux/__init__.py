"""Route-setting engine: beta planning, grading, style reward, route generation."""

__version__ = "0.1.0"
