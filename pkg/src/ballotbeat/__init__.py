"""Election-tweet detection and categorization pipeline.

Three stages: seed-term capture with embedding-based query expansion, a
character-level convolutional election filter, and a word-level
convolutional topic/sentiment classifier, all trained by distant
supervision. The ``ballotbeat`` CLI orchestrates the full flow.
"""

from ballotbeat.backend import COMPILED, backend_name

__version__ = "0.1.0"

__all__ = ["COMPILED", "backend_name", "__version__"]
