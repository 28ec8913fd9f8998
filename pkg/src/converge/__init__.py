"""Convergence analytics for interdisciplinary team presentations.

Pipeline stages: transcript ingestion, NABC viewpoint extraction through a
pluggable language-model provider, semantic similarity graphs with a 3D
force layout, cross-domain eigenvector-centrality influence, temporal
opinion-flow metrics, and human-in-the-loop flow review.
"""

__version__ = "0.1.0"

from converge.corpus import Corpus, Domain, Presentation, load_corpus, save_corpus

__all__ = [
    "Corpus",
    "Domain",
    "Presentation",
    "load_corpus",
    "save_corpus",
    "__version__",
]
