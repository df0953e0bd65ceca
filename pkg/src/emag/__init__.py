"""emag: a self-hosted personalized e-magazine engine.

Aggregates RSS sources by screen-scraping item descriptions, maintains a
weighted three-tier interest model per user fed by explicit settings and
behavior events, and recommends keywords via a truncated-SVD user
similarity model. The HTTP API in :mod:`emag.api` and the CLI in
:mod:`emag.cli` are the two entry points; both drive :class:`emag.engine.Engine`.
"""

__version__ = "0.1.0"
