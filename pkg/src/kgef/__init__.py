"""Writers-and-works knowledge graph toolkit.

Builds a typed, provenance-tagged graph of authors, works, and editions
from per-source record exports, classifies authors as Western or
Transnational, trains knowledge-graph embeddings, and measures how
similarity-based discovery exposes users to Transnational authors.
"""

__version__ = "0.1.0"
