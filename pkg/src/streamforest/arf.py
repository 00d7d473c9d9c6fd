"""Adaptive random forest: online-bagged Hoeffding trees with drift recovery.

Every member tree sees each instance with an independent Poisson(lam)
weight and watches its own pre-update 0/1 error through two detectors, a
sensitive one (warnings) and a conservative one (drifts).  A warning starts
a background tree that trains alongside the member but never votes; a drift
promotes the background tree (or a fresh one) and resets both detectors.
Votes are weighted by each member's windowed accuracy, which is one minus
the warning detector's error estimate.

The vote-weight definition is a documented convention: ensemble weighting
is stated as "weighted average" in the descriptions this follows, without a
formula, so other implementations may differ here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._backend import core
from .errors import ConfigurationError
from .hoeffding import LEAF_MODES, HNBTConfig
from .streams import StreamSchema

__all__ = [
    "ArfConfig",
    "DriftReport",
    "AdaptiveRandomForest",
    "default_subspace",
    "weighted_average_votes",
]


def default_subspace(n_features: int) -> int:
    """Default per-tree feature-subset size, floor(sqrt(d)) + 1 capped at d."""
    return min(int(math.isqrt(n_features)) + 1, n_features)


@dataclass(frozen=True)
class ArfConfig:
    """Forest hyper-parameters.

    The nested tree config's ``subspace_size`` of ``None`` resolves to
    ``default_subspace(d)`` at build time; its ``seed`` is ignored because
    member seeds derive from the forest seed.  ``disable_background``
    suppresses background trees (drifts then always install a fresh tree),
    which exists to make the no-background counterfactual testable.
    """

    n_trees: int = 50
    lam: float = 6.0
    delta_warning: float = 1e-4
    delta_drift: float = 1e-5
    tree: HNBTConfig = field(default_factory=HNBTConfig)
    seed: int = 0
    disable_background: bool = False

    def __post_init__(self):
        if self.n_trees < 1:
            raise ConfigurationError("n_trees must be >= 1, got %r" % (self.n_trees,))
        if self.lam <= 0:
            raise ConfigurationError("lam must be > 0, got %r" % (self.lam,))
        for name in ("delta_warning", "delta_drift"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ConfigurationError("%s must be in (0, 1), got %r" % (name, v))
        if self.delta_drift >= self.delta_warning:
            raise ConfigurationError(
                "delta_drift must be below delta_warning (drift is the stricter "
                "test), got %r >= %r" % (self.delta_drift, self.delta_warning)
            )


@dataclass(frozen=True)
class DriftReport:
    """Warnings and drifts triggered, either per call or cumulatively."""

    warnings: int = 0
    drifts: int = 0

    def __add__(self, other: "DriftReport") -> "DriftReport":
        return DriftReport(
            self.warnings + other.warnings, self.drifts + other.drifts
        )


def weighted_average_votes(vectors, weights) -> np.ndarray:
    """Combine posteriors as sum(w_i v_i) / sum(w_i).

    Non-positive weights are excluded; if none is positive the plain mean
    is returned, so unanimous votes always pass through unchanged.
    """
    v = np.asarray(vectors, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    if v.ndim != 2 or w.shape != (v.shape[0],):
        raise ValueError(
            "need (k, M) vectors and k weights, got %r and %r"
            % (v.shape, w.shape)
        )
    w = np.where(w > 0.0, w, 0.0)
    total = w.sum()
    if total <= 0.0:
        return v.mean(axis=0)
    return w @ v / total


class AdaptiveRandomForest:
    """Ensemble bound to a stream schema."""

    def __init__(self, schema: StreamSchema, config: ArfConfig | None = None):
        config = config or ArfConfig()
        d = schema.n_features
        tree = config.tree
        m = tree.subspace_size
        if m is None:
            m = default_subspace(d)
        elif m > d:
            raise ConfigurationError(
                "subspace_size %d exceeds the %d features" % (m, d)
            )
        self.schema = schema
        self.config = config
        self.subspace_size = m
        self._forest = core.Forest(
            schema.n_classes,
            schema.nominal_value_counts(),
            config.n_trees,
            m,
            float(tree.grace_period),
            tree.split_confidence,
            tree.tie_threshold,
            LEAF_MODES[tree.leaf_classifier],
            config.lam,
            config.delta_warning,
            config.delta_drift,
            config.seed,
            config.disable_background,
        )
        self._out = np.empty(schema.n_classes)

    @property
    def n_classes(self) -> int:
        return self.schema.n_classes

    @property
    def n_trees(self) -> int:
        return self.config.n_trees

    def train(self, x, y: int) -> DriftReport:
        """Update every member; returns the warnings/drifts this instance caused."""
        if y is None:
            raise ValueError("training requires a labeled instance")
        f = self._forest
        w0, d0 = f.warn_count, f.drift_count
        f.train(np.ascontiguousarray(x, dtype=np.float64), y)
        return DriftReport(int(f.warn_count - w0), int(f.drift_count - d0))

    def predict_proba(self, x) -> np.ndarray:
        out = np.empty(self.n_classes)
        self._forest.predict_proba(np.ascontiguousarray(x, dtype=np.float64), out)
        return out

    def predict(self, x) -> int:
        return int(np.argmax(self.predict_proba(x)))

    def predict_then_train(self, x, y: int | None = None) -> np.ndarray:
        """Vote and (when ``y`` is given) train in one pass over the members.

        Equivalent to ``predict_proba`` followed by ``train`` because
        members are independent; the fused sweep just avoids routing every
        instance through the trees twice.
        """
        x = np.ascontiguousarray(x, dtype=np.float64)
        out = np.empty(self.n_classes)
        self._forest.predict_then_train(x, -1 if y is None else y, y is not None, out)
        return out

    def step(self, x, y: int) -> np.ndarray:
        """Predict and train in one sweep; returns the pre-update posterior."""
        if y is None:
            raise ValueError("step requires a labeled instance")
        return self.predict_then_train(x, y)

    # ---- introspection ----

    @property
    def drift_report(self) -> DriftReport:
        """Cumulative counts since construction."""
        return DriftReport(
            int(self._forest.warn_count), int(self._forest.drift_count)
        )

    def member_weight(self, i: int) -> float:
        return float(self._forest.member_weight(i))

    def member_predict_proba(self, i: int, x) -> np.ndarray:
        return self._forest.member_predict_proba(
            i, np.ascontiguousarray(x, dtype=np.float64)
        )

    def member_state(self, i: int) -> dict:
        return self._forest.member_state(i)

    def total_nodes(self) -> int:
        return int(self._forest.total_nodes())
