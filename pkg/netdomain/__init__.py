"""
netdomain - structural fingerprints of complex network domains.
Budgeted topological measures, per-domain filtering and One-vs-Rest
feature selection over labeled graph corpora.
"""

__version__ = "1.0.0"
