"""Prequential evaluation, rank statistics, and experiment drivers.

Evaluation is test-then-train: every instance is predicted first, the
prediction recorded, and only then (budget permitting) is its label used
for training.  Accuracy therefore counts every instance, labeled or not.

Method comparison follows the usual two-step protocol: per-dataset ranks
(1 = best accuracy, ties averaged) are averaged per method, the Friedman
statistic decides whether the methods differ at all, and the Nemenyi
critical distance says how far apart two mean ranks must be to call the
difference significant.
"""

from __future__ import annotations

import hashlib
import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from ._backend import core
from .active import make_strategy
from .cascade import CascadeConfig, CascadeForest
from .errors import ConfigurationError, DataError
from .hoeffding import HNBTConfig
from .streams import Stream, make_stream

__all__ = [
    "PrequentialResult",
    "run_prequential",
    "average_ranks",
    "FriedmanResult",
    "friedman_nemenyi",
    "NEMENYI_Q_05",
    "read_accuracy_csv",
    "depth_experiment",
    "budget_sweep",
    "config_hash",
]


# Studentized-range-based q values at alpha = 0.05 for 2..20 methods,
# divided by sqrt(2) as used in the Nemenyi critical distance.
NEMENYI_Q_05 = {
    2: 1.960, 3: 2.343, 4: 2.569, 5: 2.728, 6: 2.850, 7: 2.949,
    8: 3.031, 9: 3.102, 10: 3.164, 11: 3.219, 12: 3.268, 13: 3.313,
    14: 3.354, 15: 3.391, 16: 3.426, 17: 3.458, 18: 3.489, 19: 3.517,
    20: 3.544,
}


def config_hash(mapping: dict) -> str:
    """Short stable digest of a flat config mapping, for output headers."""
    text = ";".join("%s=%r" % (k, mapping[k]) for k in sorted(mapping))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]


# ---------------------------------------------------------------------------
# Prequential engine


@dataclass
class PrequentialResult:
    """Columnar per-instance records plus run summary."""

    predicted: np.ndarray
    actual: np.ndarray
    queried: np.ndarray
    accuracy: float
    label_fraction: float
    warnings: int
    drifts: int
    wall_time: float
    window: int

    @property
    def n(self) -> int:
        return len(self.predicted)

    def correct(self) -> np.ndarray:
        return self.predicted == self.actual

    def cumulative_accuracy(self) -> np.ndarray:
        return np.cumsum(self.correct()) / np.arange(1, self.n + 1)

    def cumulative_label_fraction(self) -> np.ndarray:
        return np.cumsum(self.queried) / np.arange(1, self.n + 1)

    def window_rows(self) -> list[dict]:
        """Tumbling-window summaries: one row per full or trailing window."""
        correct = self.correct()
        cum_acc = self.cumulative_accuracy()
        cum_lab = self.cumulative_label_fraction()
        rows = []
        for start in range(0, self.n, self.window):
            end = min(start + self.window, self.n)
            rows.append({
                "index": end,
                "window_accuracy": float(correct[start:end].mean()),
                "accuracy": float(cum_acc[end - 1]),
                "label_fraction": float(cum_lab[end - 1]),
            })
        return rows


def run_prequential(model, stream: Stream, strategy=None,
                    n: int | None = None, window: int = 1000) -> PrequentialResult:
    """Test-then-train loop over a stream.

    With no strategy every label is used (and models exposing a fused
    ``step`` are driven through it); with a strategy the model trains only
    on queried instances.  The model's schema must match the stream's
    before anything is consumed.
    """
    if window < 1:
        raise ConfigurationError("window must be >= 1, got %r" % (window,))
    schema = getattr(model, "schema", None)
    if schema is not None and not schema.compatible(stream.schema):
        raise ConfigurationError(
            "model schema %r does not match stream schema %r"
            % (schema.name, stream.schema.name)
        )
    fused = strategy is None and hasattr(model, "step")
    predicted = []
    actual = []
    queried = []
    t0 = time.perf_counter()
    for inst in stream if n is None else itertools.islice(stream, n):
        if inst.y is None:
            raise DataError("prequential evaluation needs labeled instances")
        if fused:
            proba = model.step(inst.x, inst.y)
            ask = True
        else:
            proba = model.predict_proba(inst.x)
            ask = True if strategy is None else strategy.decide(proba)
            if ask:
                model.train(inst.x, inst.y)
        predicted.append(int(np.argmax(proba)))
        actual.append(inst.y)
        queried.append(ask)
    wall = time.perf_counter() - t0
    predicted = np.asarray(predicted, dtype=np.int32)
    actual = np.asarray(actual, dtype=np.int32)
    queried = np.asarray(queried, dtype=bool)
    report = getattr(model, "drift_report", None)
    return PrequentialResult(
        predicted=predicted,
        actual=actual,
        queried=queried,
        accuracy=float((predicted == actual).mean()) if len(predicted) else 0.0,
        label_fraction=float(queried.mean()) if len(queried) else 0.0,
        warnings=report.warnings if report else 0,
        drifts=report.drifts if report else 0,
        wall_time=wall,
        window=window,
    )


# ---------------------------------------------------------------------------
# Rank statistics


def average_ranks(matrix, methods=None, datasets=None) -> np.ndarray:
    """Mean rank per method over a (datasets x methods) accuracy matrix.

    Rank 1 is the highest accuracy in a row; ties get the average of the
    ranks they straddle.  Missing cells (NaN) are reported by name.
    """
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError("need a 2-D accuracy matrix, got shape %r" % (m.shape,))
    bad = np.argwhere(np.isnan(m))
    if len(bad):
        i, j = bad[0]
        raise DataError(
            "missing accuracy for method %s on dataset %s"
            % (methods[j] if methods else j, datasets[i] if datasets else i)
        )
    ranks = np.apply_along_axis(
        lambda row: stats.rankdata(-row, method="average"), 1, m
    )
    return ranks.mean(axis=0)


@dataclass(frozen=True)
class FriedmanResult:
    statistic: float
    p_value: float
    reject: bool
    critical_distance: float
    mean_ranks: np.ndarray


def friedman_nemenyi(matrix, alpha: float = 0.05, methods=None,
                     datasets=None) -> FriedmanResult:
    """Friedman test over ranks plus the Nemenyi critical distance.

    chi2_F = 12N / (k(k+1)) * (sum_j Rbar_j^2 - k(k+1)^2 / 4) with k
    methods and N datasets, referred to the chi-squared distribution with
    k - 1 degrees of freedom; CD = q_alpha * sqrt(k(k+1) / (6N)).  Only
    alpha = 0.05 is supported (the embedded q table stops there).
    """
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError("need a 2-D accuracy matrix, got shape %r" % (m.shape,))
    n_datasets, k = m.shape
    if k < 3 or n_datasets < 2:
        raise ValueError(
            "need at least 3 methods and 2 datasets, got %d x %d"
            % (n_datasets, k)
        )
    if alpha != 0.05:
        raise ConfigurationError("only alpha = 0.05 is supported")
    if k not in NEMENYI_Q_05:
        raise ConfigurationError("critical distance table covers 2..20 methods")
    mean_ranks = average_ranks(m, methods, datasets)
    statistic = (12.0 * n_datasets / (k * (k + 1))) * (
        float(np.sum(mean_ranks ** 2)) - k * (k + 1) ** 2 / 4.0
    )
    p_value = float(stats.chi2.sf(statistic, k - 1))
    cd = NEMENYI_Q_05[k] * math.sqrt(k * (k + 1) / (6.0 * n_datasets))
    return FriedmanResult(
        statistic=float(statistic),
        p_value=p_value,
        reject=bool(p_value < alpha),
        critical_distance=float(cd),
        mean_ranks=mean_ranks,
    )


def read_accuracy_csv(path: str):
    """(matrix, methods, datasets) from a CSV with a leading name column."""
    methods = None
    datasets = []
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text or text.startswith("#"):
                continue
            parts = [p.strip() for p in text.split(",")]
            if methods is None:
                methods = parts[1:]
                if not methods:
                    raise DataError("header has no method columns", line=line_no)
                continue
            if len(parts) != len(methods) + 1:
                raise DataError(
                    "expected %d fields, got %d" % (len(methods) + 1, len(parts)),
                    line=line_no,
                )
            datasets.append(parts[0])
            try:
                rows.append([float(p) for p in parts[1:]])
            except ValueError:
                raise DataError("non-numeric accuracy cell", line=line_no) from None
    if methods is None or not rows:
        raise DataError("no accuracy rows found")
    return np.asarray(rows, dtype=np.float64), methods, datasets


# ---------------------------------------------------------------------------
# Experiment drivers


def _cascade_for(schema, n_layers, n_trees, seed, tree: HNBTConfig | None = None):
    return CascadeForest(
        schema, CascadeConfig.make(n_layers=n_layers, n_trees=n_trees,
                                   tree=tree, seed=seed)
    )


def depth_experiment(stream_names, length: int, layers=(1, 2, 3),
                     n_trees: int = 10, seeds=(1, 2, 3),
                     window: int = 1000) -> list[dict]:
    """Layer-count ablation: one prequential run per stream x seed x depth."""
    rows = []
    for name in stream_names:
        for seed in seeds:
            for n_layers in layers:
                stream = make_stream(name, seed=seed, length=length)
                model = _cascade_for(
                    stream.schema, n_layers, n_trees, core.mix_seed(seed, n_layers)
                )
                res = run_prequential(model, stream, n=length, window=window)
                rows.append({
                    "stream": name,
                    "seed": seed,
                    "layers": n_layers,
                    "accuracy": res.accuracy,
                    "wall_time": res.wall_time,
                })
    return rows


def budget_sweep(stream_name: str, length: int, budgets,
                 strategies=("vu", "avu"), seed: int = 1,
                 n_layers: int = 2, n_trees: int = 10, step: float = 0.01,
                 window: int = 1000) -> list[dict]:
    """Strategy x budget grid on one stream; fresh model per cell."""
    rows = []
    for strategy_name in strategies:
        for budget in budgets:
            stream = make_stream(stream_name, seed=seed, length=length)
            model = _cascade_for(stream.schema, n_layers, n_trees, seed)
            strategy = make_strategy(strategy_name, budget, step=step, seed=seed)
            res = run_prequential(model, stream, strategy=strategy,
                                  n=length, window=window)
            rows.append({
                "strategy": strategy_name,
                "budget": budget,
                "accuracy": res.accuracy,
                "label_fraction": res.label_fraction,
                "warnings": res.warnings,
                "drifts": res.drifts,
                "wall_time": res.wall_time,
            })
    return rows
