"""sparselink - equalization and link-level evaluation over sparse wideband channels."""

__version__ = "0.1.0"
