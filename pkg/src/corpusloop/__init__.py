"""Interactive corpus search with relevance feedback for small, unannotated corpora."""

__version__ = "0.1.0"
