"""Adaptive-windowing change detector for streams of values in [0, 1].

The detector keeps a variable-length window of recent values inside an
exponential histogram (rows of buckets holding 2^row elements each, at most
``max_buckets`` per row), so memory stays logarithmic in the window length.
On every insertion it examines all head/tail cuts the histogram exposes and
drops the older part whenever two halves' means differ significantly:

    |mean0 - mean1| >= sqrt((2/m) sigma2 ln(2/delta')) + (2/(3m)) ln(2/delta')

with 1/m = 1/n0 + 1/n1, delta' = delta/n and sigma2 the window variance.
All in-package uses feed 0/1 correctness indicators.
"""

from __future__ import annotations

from ._backend import core
from .errors import ConfigurationError

__all__ = ["AdwinDetector"]


class AdwinDetector:
    """One change detector; single-writer, O(log n) memory."""

    def __init__(self, delta: float = 0.002, max_buckets: int = 5):
        if not 0.0 < delta < 1.0:
            raise ConfigurationError("delta must be in (0, 1), got %r" % (delta,))
        if max_buckets < 1:
            raise ConfigurationError(
                "max_buckets must be >= 1, got %r" % (max_buckets,)
            )
        self.delta = delta
        self.max_buckets = max_buckets
        self._win = core.Adwin(delta, max_buckets)

    def add(self, value: float) -> bool:
        """Insert one value; True when the window just shrank on a change."""
        return bool(self._win.add(value))

    @property
    def width(self) -> int:
        return int(self._win.width())

    @property
    def estimate(self) -> float:
        """Mean of the kept window; 0 when empty."""
        return float(self._win.estimate())

    @property
    def total(self) -> float:
        return float(self._win.total())

    @property
    def variance_sum(self) -> float:
        return float(self._win.variance_sum())

    @property
    def n_detections(self) -> int:
        return int(self._win.n_detections)

    def buckets(self):
        """(size, sum, variance) triples, oldest first; for inspection."""
        return self._win.buckets()
