"""Secure data-mining gateway.

A versioned record store is synchronized through an idempotent
change-capture pipeline into a CSV/JSON dataset sink, exposed only through
an authenticated REST gateway, and continuously mined by an embedded
CART / random-forest engine that retrains as the data changes.
"""

__version__ = "0.1.0"
