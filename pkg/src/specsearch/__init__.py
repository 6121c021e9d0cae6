"""Specificity-aware text-based image retrieval.

Measures how consistently people describe each image (its specificity),
calibrates a per-image logistic relevance model from that consistency, and
uses it to rank an image database against free-text queries.  Includes the
evaluation and correlation analyses that motivated the approach, a kernel
regressor that predicts the relevance parameters from image features alone,
and a CLI plus read-only HTTP API.
"""

from . import analysis, corpus, lexsim, predict, retrieval, specificity

__all__ = ["analysis", "corpus", "lexsim", "predict", "retrieval", "specificity"]

__version__ = "0.1.0"
