"""Welfare-maximizing priority matchings from threshold queries."""
from .model import (Instance, Matching, PriorityKind, ValuationKind, ValuationProfile, WeakOrder,
                    rank_counts, signature, validate, welfare)

__all__ = ["Instance", "Matching", "PriorityKind", "ValuationKind", "ValuationProfile", "WeakOrder",
           "rank_counts", "signature", "validate", "welfare"]
__version__ = "0.1.0"
