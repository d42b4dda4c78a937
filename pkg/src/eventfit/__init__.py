"""Distributional event graphs and dynamic thematic fit scoring.

Subpackages cover the pipeline end to end: dataset loading and derivation
(`datasets`), corpus graph construction and queries (`graph`), word vectors
(`embeddings`), filler scoring (`scorer`), evaluation statistics (`stats`),
stimulus realization and diagnostics (`stimuli`), and the CLI (`cli`).
"""

__version__ = "0.1.0"
