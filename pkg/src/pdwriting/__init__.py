"""Handwriting-based Parkinson's disease screening: features, classifiers, evaluation."""

__version__ = "0.1.0"
