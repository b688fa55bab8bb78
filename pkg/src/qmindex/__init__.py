"""Similarity search under quasi-metrics.

Certified tree indexing schemes, a partition-coded peptide fragment index
over BLOSUM-derived quasi-metrics, workload reductions, and concentration
diagnostics.
"""

__version__ = "0.1.0"
