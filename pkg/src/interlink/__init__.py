"""Directed interlinkage networks from indicator time series.

Pipeline: panel ingest -> lagged-correlation network -> synergy/trade-off
classification -> Opsahl out-centrality -> map-equation clustering of the
strong-synergy subnetwork -> cluster-diversified prioritisation.
"""

__version__ = "0.1.0"
