"""Energy estimates for training on learning-in-memory hardware."""

__version__ = "0.1.0"
