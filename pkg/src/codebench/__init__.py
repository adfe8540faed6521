"""Corpus tooling for Python source: tokenization, subword vocabularies,
near-duplicate removal, synthetic bug benchmarks and pre-training data."""

__version__ = "0.1.0"
