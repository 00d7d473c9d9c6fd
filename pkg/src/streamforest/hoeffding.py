"""Incremental Hoeffding decision tree with Naive Bayes leaves.

A single-pass decision tree: every leaf accumulates per-class sufficient
statistics (value counts for nominal features, Gaussian mean/variance for
numeric ones) over a random subset of ``m`` features drawn when the leaf is
created.  Once enough weight has arrived since the last attempt, the leaf
compares the two best information gains against the Hoeffding bound

    eps = sqrt(R^2 ln(1/delta) / (2 n)),   R = log2(n_classes)

and splits when the best feature is either clearly ahead (``G1 - G2 > eps``)
or the bound has shrunk below the tie threshold.  Leaves predict with a
Naive Bayes model over their statistics, a plain majority count, or an
adaptive rule that tracks which of the two has been right more often.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._backend import core
from .errors import ConfigurationError
from .streams import StreamSchema

__all__ = ["HNBTConfig", "HoeffdingTree", "hoeffding_bound", "LEAF_MODES"]

LEAF_MODES = {"adaptive": 0, "nb": 1, "majority": 2}


def hoeffding_bound(value_range: float, confidence: float, n: float) -> float:
    """One-sided deviation bound for a mean of ``n`` observations.

    ``value_range`` is the spread of the underlying metric and
    ``confidence`` the allowed failure probability.  Strictly decreasing
    in ``n`` and linear in ``value_range``.
    """
    if n <= 0:
        raise ValueError("n must be positive, got %r" % (n,))
    if value_range <= 0:
        raise ValueError("value_range must be positive, got %r" % (value_range,))
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must be in (0, 1), got %r" % (confidence,))
    return math.sqrt(
        value_range * value_range * math.log(1.0 / confidence) / (2.0 * n)
    )


@dataclass(frozen=True)
class HNBTConfig:
    """Tree hyper-parameters.

    ``subspace_size`` of ``None`` means all features are active at every
    leaf.  ``leaf_classifier`` is one of ``adaptive`` (track Naive Bayes
    vs majority-count correctness and use the current winner), ``nb``,
    or ``majority``.
    """

    grace_period: int = 50
    split_confidence: float = 0.01
    tie_threshold: float = 0.05
    subspace_size: int | None = None
    leaf_classifier: str = "adaptive"
    seed: int = 0

    def __post_init__(self):
        if self.grace_period < 1:
            raise ConfigurationError(
                "grace_period must be >= 1, got %r" % (self.grace_period,)
            )
        if not 0.0 < self.split_confidence < 1.0:
            raise ConfigurationError(
                "split_confidence must be in (0, 1), got %r"
                % (self.split_confidence,)
            )
        if self.tie_threshold < 0.0:
            raise ConfigurationError(
                "tie_threshold must be >= 0, got %r" % (self.tie_threshold,)
            )
        if self.subspace_size is not None and self.subspace_size < 1:
            raise ConfigurationError(
                "subspace_size must be >= 1, got %r" % (self.subspace_size,)
            )
        if self.leaf_classifier not in LEAF_MODES:
            raise ConfigurationError(
                "leaf_classifier must be one of %s, got %r"
                % (sorted(LEAF_MODES), self.leaf_classifier)
            )


class HoeffdingTree:
    """Single tree bound to a stream schema.

    With ``audit=True`` every applied split is logged together with the
    frozen statistics that justified it, so the decision can be replayed
    offline.
    """

    def __init__(self, schema: StreamSchema, config: HNBTConfig | None = None,
                 audit: bool = False):
        config = config or HNBTConfig()
        d = schema.n_features
        m = config.subspace_size if config.subspace_size is not None else d
        if m > d:
            raise ConfigurationError(
                "subspace_size %d exceeds the %d features" % (m, d)
            )
        self.schema = schema
        self.config = config
        self._tree = core.Tree(
            schema.n_classes,
            schema.nominal_value_counts(),
            m,
            float(config.grace_period),
            config.split_confidence,
            config.tie_threshold,
            LEAF_MODES[config.leaf_classifier],
            config.seed,
            audit,
        )

    @property
    def n_classes(self) -> int:
        return self.schema.n_classes

    def train(self, x, y: int, weight: float = 1.0) -> None:
        if y is None:
            raise ValueError("training requires a labeled instance")
        if weight < 0:
            raise ValueError("weight must be >= 0, got %r" % (weight,))
        self._tree.train(np.ascontiguousarray(x, dtype=np.float64), y, weight)

    def predict_proba(self, x) -> np.ndarray:
        out = np.empty(self.n_classes)
        self._tree.predict_proba(np.ascontiguousarray(x, dtype=np.float64), out)
        return out

    def predict(self, x) -> int:
        return int(np.argmax(self.predict_proba(x)))

    def step(self, x, y: int) -> np.ndarray:
        """Predict, then train on the same instance; returns the prediction."""
        proba = self.predict_proba(x)
        self.train(x, y)
        return proba

    # ---- introspection ----

    @property
    def n_splits(self) -> int:
        return int(self._tree.n_splits)

    @property
    def trained_weight(self) -> float:
        return float(self._tree.trained_weight)

    @property
    def split_log(self):
        """List of applied-split records when built with ``audit=True``."""
        return self._tree.split_log

    @property
    def root(self):
        return self._tree.root

    def root_split(self):
        """(feature, threshold-or-None) of the root, or None while a leaf."""
        return self._tree.root_split()

    def n_nodes(self) -> tuple[int, int]:
        """(internal node count, leaf count)."""
        internal, leaves = self._tree.n_nodes()
        return int(internal), int(leaves)

    def depth(self) -> int:
        return int(self._tree.depth())

    def dump(self) -> str:
        """Indented text rendering of the tree structure."""
        return self._tree.dump()
