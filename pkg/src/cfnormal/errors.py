class ResourceLimitError(RuntimeError):
    """Raised when a requested computation exceeds a configured resource bound."""
