"""Exception types for the extractor."""


class ExtractorError(Exception):
    """Bad inputs, unavailable models, or broken preconditions."""
