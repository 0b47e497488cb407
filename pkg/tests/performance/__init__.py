"""Performance tests for matscale.

This package contains throughput checks for synthetic generation, dataset
caching and data-parallel training epochs.
"""
