"""German named-entity recognition toolkit: dataset harmonization, embedding
corpus normalization, skip-gram embeddings, a biLSTM-CRF tagger and
conlleval-compatible scoring."""

__version__ = "0.1.0"
