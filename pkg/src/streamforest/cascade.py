"""Streaming deep forest: layered adaptive random forests over class vectors.

Each of the L layers holds exactly four forests.  Layer 0 consumes the raw
feature vector x (dimension d); every deeper layer consumes the previous
layer's four posterior vectors concatenated ahead of x (dimension 4M + d,
class vectors first).  The cascade's prediction is the unweighted mean of
the last layer's four posteriors, argmax with ties toward the lowest class.

Training updates the layers front to back.  Layer L's input is built from
layer L-1's outputs computed *before* layer L-1 was updated on the current
instance, so every layer trains on exactly the feature distribution it
predicts from.  Drift handling happens entirely inside the member forests;
there are no layer-level resets.

The four forests in a layer differ by their per-tree feature-subset size,
drawn positionally from {floor(sqrt(d')) + 1, floor(log2(d')) + 1, d' / 2,
0.7 d' rounded} for layer input dimension d'.  Varying the subspace is a
declared diversity choice; any explicit ``subspace_size`` in a forest's
tree config overrides its positional rule.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._backend import core
from .arf import ArfConfig, DriftReport
from .errors import ConfigurationError
from .hoeffding import LEAF_MODES, HNBTConfig
from .streams import StreamSchema

__all__ = [
    "FORESTS_PER_LAYER",
    "CascadeConfig",
    "CascadeForest",
    "diversity_subspace",
    "layer_input",
]

FORESTS_PER_LAYER = 4


def diversity_subspace(rule: int, d: int) -> int:
    """Subset size for positional rule 0..3 at input dimension ``d``."""
    if rule == 0:
        m = math.isqrt(d) + 1
    elif rule == 1:
        m = int(math.log2(d)) + 1
    elif rule == 2:
        m = d // 2
    elif rule == 3:
        m = round(0.7 * d)
    else:
        raise ValueError("rule must be 0..3, got %r" % (rule,))
    return min(max(m, 1), d)


def layer_input(layer_index: int, x, prev=None) -> np.ndarray:
    """Input vector for one layer: x itself at depth 0, [cv*4 | x] deeper."""
    if layer_index == 0:
        if prev is not None:
            raise ValueError("layer 0 takes no previous class vectors")
        return np.asarray(x, dtype=np.float64)
    if prev is None or len(prev) != FORESTS_PER_LAYER:
        raise ValueError(
            "layers beyond the first take exactly %d class vectors"
            % FORESTS_PER_LAYER
        )
    parts = [np.asarray(v, dtype=np.float64) for v in prev]
    parts.append(np.asarray(x, dtype=np.float64))
    return np.concatenate(parts)


@dataclass(frozen=True)
class CascadeConfig:
    """Layer structure: a tuple of layers, each exactly four forest configs.

    Forest seeds are taken verbatim from the nested configs, so
    ``CascadeConfig.make`` derives distinct per-forest seeds from one
    cascade seed; hand-assembled layers should do the same.  A nested tree
    config with ``subspace_size=None`` gets the positional diversity rule
    for its slot at build time.
    """

    layers: tuple
    seed: int = 0

    def __post_init__(self):
        if not self.layers:
            raise ConfigurationError("cascade needs at least one layer")
        for i, layer in enumerate(self.layers):
            if len(layer) != FORESTS_PER_LAYER:
                raise ConfigurationError(
                    "layer %d has %d forests, expected exactly %d"
                    % (i, len(layer), FORESTS_PER_LAYER)
                )
            for cfg in layer:
                if not isinstance(cfg, ArfConfig):
                    raise ConfigurationError(
                        "layer %d holds a %r, expected ArfConfig"
                        % (i, type(cfg).__name__)
                    )

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    @staticmethod
    def make(
        n_layers: int = 2,
        n_trees: int = 50,
        tree: HNBTConfig | None = None,
        lam: float = 6.0,
        delta_warning: float = 1e-4,
        delta_drift: float = 1e-5,
        disable_background: bool = False,
        seed: int = 0,
    ) -> "CascadeConfig":
        """Uniform cascade: every forest shares the knobs, seeds derived."""
        if n_layers < 1:
            raise ConfigurationError("n_layers must be >= 1, got %r" % (n_layers,))
        tree = tree or HNBTConfig()
        layers = []
        for l in range(n_layers):
            layer_seed = core.mix_seed(seed, l)
            layers.append(tuple(
                ArfConfig(
                    n_trees=n_trees,
                    lam=lam,
                    delta_warning=delta_warning,
                    delta_drift=delta_drift,
                    tree=tree,
                    seed=core.mix_seed(layer_seed, j),
                    disable_background=disable_background,
                )
                for j in range(FORESTS_PER_LAYER)
            ))
        return CascadeConfig(tuple(layers), seed)


class CascadeForest:
    """The layered model; single-writer.

    ``parallel=True`` runs the four forests of a layer on a thread pool.
    Forests are independent, so the states are identical to sequential
    execution; this exists as a contract (and for backends that release
    the interpreter lock), not as a measured speedup.
    """

    def __init__(self, schema: StreamSchema, config: CascadeConfig | None = None,
                 parallel: bool = False):
        config = config or CascadeConfig.make()
        self.schema = schema
        self.config = config
        d = schema.n_features
        M = schema.n_classes
        base_values = schema.nominal_value_counts()
        deep_values = np.concatenate(
            [np.zeros(FORESTS_PER_LAYER * M, dtype=np.int32), base_values]
        )
        self.forests: list[list] = []
        self.input_dims: list[int] = []
        for l, layer in enumerate(config.layers):
            d_in = d if l == 0 else d + FORESTS_PER_LAYER * M
            values = base_values if l == 0 else deep_values
            row = []
            for j, cfg in enumerate(layer):
                m = cfg.tree.subspace_size
                if m is None:
                    m = diversity_subspace(j, d_in)
                elif m > d_in:
                    raise ConfigurationError(
                        "layer %d forest %d: subspace_size %d exceeds input "
                        "dimension %d" % (l, j, m, d_in)
                    )
                row.append(core.Forest(
                    M,
                    values,
                    cfg.n_trees,
                    m,
                    float(cfg.tree.grace_period),
                    cfg.tree.split_confidence,
                    cfg.tree.tie_threshold,
                    LEAF_MODES[cfg.tree.leaf_classifier],
                    cfg.lam,
                    cfg.delta_warning,
                    cfg.delta_drift,
                    cfg.seed,
                    cfg.disable_background,
                ))
            self.forests.append(row)
            self.input_dims.append(d_in)
        self._buf = np.empty(d + FORESTS_PER_LAYER * M)
        self._outs = [np.empty(M) for _ in range(FORESTS_PER_LAYER)]
        self._pool = ThreadPoolExecutor(max_workers=FORESTS_PER_LAYER) if parallel else None

    @property
    def n_classes(self) -> int:
        return self.schema.n_classes

    @property
    def n_layers(self) -> int:
        return len(self.forests)

    def _fill_buffer(self, x):
        """Deep-layer input: the four class vectors, then the raw features."""
        M = self.schema.n_classes
        for j in range(FORESTS_PER_LAYER):
            self._buf[j * M:(j + 1) * M] = self._outs[j]
        self._buf[FORESTS_PER_LAYER * M:] = x

    def _sweep(self, forests, cur, y, do_train):
        if self._pool is not None:
            jobs = [
                self._pool.submit(f.predict_then_train, cur, y, do_train, out)
                for f, out in zip(forests, self._outs)
            ]
            for job in jobs:
                job.result()
        else:
            for f, out in zip(forests, self._outs):
                f.predict_then_train(cur, y, do_train, out)

    def _forward(self, x, y, do_train) -> np.ndarray:
        x = np.ascontiguousarray(x, dtype=np.float64)
        cur = x
        last = len(self.forests) - 1
        for l, forests in enumerate(self.forests):
            self._sweep(forests, cur, y, do_train)
            if l < last:
                self._fill_buffer(x)
                cur = self._buf
        final = self._outs[0].copy()
        for j in range(1, FORESTS_PER_LAYER):
            final += self._outs[j]
        final /= FORESTS_PER_LAYER
        return final

    def predict_proba(self, x) -> np.ndarray:
        return self._forward(x, -1, False)

    def predict(self, x) -> int:
        return int(np.argmax(self.predict_proba(x)))

    def train(self, x, y: int) -> DriftReport:
        """Front-to-back update; every layer sees pre-update upstream outputs."""
        if y is None:
            raise ValueError("training requires a labeled instance")
        w0, d0 = self._counts()
        self._forward(x, y, True)
        w1, d1 = self._counts()
        return DriftReport(w1 - w0, d1 - d0)

    def step(self, x, y: int) -> np.ndarray:
        """Predict and train in one forward pass.

        Returns exactly what ``predict_proba`` would have returned before
        the update: each layer's outputs are computed pre-update and those
        same outputs feed the next layer, which is the training protocol.
        """
        if y is None:
            raise ValueError("step requires a labeled instance")
        return self._forward(x, y, True)

    # ---- introspection ----

    def _counts(self) -> tuple[int, int]:
        w = d = 0
        for row in self.forests:
            for f in row:
                w += f.warn_count
                d += f.drift_count
        return int(w), int(d)

    @property
    def drift_report(self) -> DriftReport:
        return DriftReport(*self._counts())

    def summary(self) -> dict:
        """Structured model snapshot for the harness and the CLI."""
        layers = []
        for l, row in enumerate(self.forests):
            layers.append({
                "layer": l,
                "input_dim": self.input_dims[l],
                "forests": [
                    {
                        "n_trees": int(f.n_trees),
                        "subspace": int(f.subspace),
                        "nodes": int(f.total_nodes()),
                        "warnings": int(f.warn_count),
                        "drifts": int(f.drift_count),
                    }
                    for f in row
                ],
            })
        w, d = self._counts()
        return {
            "n_layers": self.n_layers,
            "n_classes": self.schema.n_classes,
            "n_features": self.schema.n_features,
            "warnings": w,
            "drifts": d,
            "layers": layers,
        }
