"""Multi-party data pricing: Shapley utility, quality scoring, AHP weights,
buyer satisfaction and incomplete-information alternating-offers bargaining."""

__version__ = "0.1.0"
