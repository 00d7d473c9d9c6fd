"""Instance data model, synthetic drifting stream generators, and file ingestion.

Five generator families are provided (SEA, AGRAWAL, RBF, HYPERPLANE, RTG),
each a deterministic function of its seed.  Label functions follow the
canonical definitions from the generators' original descriptions; every
formula is written out in the relevant class docstring so the behaviour is
auditable without external references.

Concept drift is injected by wrapping two streams in a :class:`DriftStream`,
which switches from the base to the successor concept with probability
``1 / (1 + exp(-4 (t - p) / w))`` at instance index ``t`` (1-based).  Width
``w = 1`` gives an effectively abrupt switch at position ``p``.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from ._backend import core
from .errors import ConfigurationError, DataError, SchemaError

__all__ = [
    "Feature",
    "StreamSchema",
    "Instance",
    "Stream",
    "ArrayStream",
    "SeaConfig",
    "AgrawalConfig",
    "RbfConfig",
    "HyperplaneConfig",
    "RtgConfig",
    "SeaGenerator",
    "AgrawalGenerator",
    "RbfGenerator",
    "HyperplaneGenerator",
    "RtgGenerator",
    "DriftSpec",
    "DriftStream",
    "drift_mix_probability",
    "create_generator",
    "make_stream",
    "limit",
    "from_instances",
    "load_dataset",
    "write_csv",
    "STREAM_NAMES",
]


# ---------------------------------------------------------------------------
# Data model


@dataclass(frozen=True)
class Feature:
    """One feature descriptor: numeric, or nominal with a finite value set."""

    name: str
    values: tuple[str, ...] = ()

    @property
    def is_nominal(self) -> bool:
        return len(self.values) > 0

    def __post_init__(self):
        if not self.name:
            raise ConfigurationError("feature name must be non-empty")


@dataclass(frozen=True)
class StreamSchema:
    """Feature and class-label metadata shared by every instance of a stream."""

    name: str
    features: tuple[Feature, ...]
    class_labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.features) < 1:
            raise ConfigurationError("schema needs at least one feature")
        if len(self.class_labels) < 2:
            raise ConfigurationError("schema needs at least two class labels")
        if len(set(self.class_labels)) != len(self.class_labels):
            raise ConfigurationError("class labels must be unique")

    @property
    def n_features(self) -> int:
        return len(self.features)

    @property
    def n_classes(self) -> int:
        return len(self.class_labels)

    def nominal_value_counts(self) -> np.ndarray:
        """Per-feature nominal cardinality, 0 for numeric features (int32)."""
        return np.array([len(f.values) for f in self.features], dtype=np.int32)

    def compatible(self, other: "StreamSchema") -> bool:
        """Structural equality: feature kinds, value sets and labels match.

        Stream and feature names are ignored, so a generator restarted under
        a different display name still counts as the same concept space.
        """
        if self.class_labels != other.class_labels:
            return False
        if len(self.features) != len(other.features):
            return False
        return all(
            a.values == b.values for a, b in zip(self.features, other.features)
        )


@dataclass(eq=False, slots=True)
class Instance:
    """A feature vector plus an optional class index.

    Nominal features are stored as value indices; numeric features as floats.
    ``y`` is ``None`` for unlabeled instances (file streams may omit labels,
    generators never do).
    """

    x: np.ndarray
    y: int | None = None


class Stream:
    """Single-consumer iterator of instances with an attached schema."""

    def __init__(self, schema: StreamSchema):
        self._schema = schema

    @property
    def schema(self) -> StreamSchema:
        return self._schema

    def __iter__(self):
        return self

    def __next__(self) -> Instance:
        raise NotImplementedError

    def take(self, n: int) -> list[Instance]:
        """Up to ``n`` next instances; shorter if the stream ends first."""
        out = []
        for _ in range(n):
            try:
                out.append(next(self))
            except StopIteration:
                break
        return out


class ArrayStream(Stream):
    """Stream over pre-materialized arrays, used by file loaders and tests."""

    def __init__(self, schema, x, y=None):
        super().__init__(schema)
        self._x = np.asarray(x, dtype=np.float64)
        if self._x.ndim != 2 or self._x.shape[1] != schema.n_features:
            raise ConfigurationError(
                "data matrix must be (n, %d), got %r"
                % (schema.n_features, self._x.shape)
            )
        self._y = None if y is None else np.asarray(y, dtype=np.int64)
        if self._y is not None and len(self._y) != len(self._x):
            raise ConfigurationError("label vector length does not match data")
        self._pos = 0

    def __len__(self) -> int:
        return len(self._x)

    def __next__(self) -> Instance:
        if self._pos >= len(self._x):
            raise StopIteration
        i = self._pos
        self._pos += 1
        y = None if self._y is None else int(self._y[i])
        return Instance(self._x[i].copy(), y)


def from_instances(schema: StreamSchema, instances) -> ArrayStream:
    """Materialize an instance list back into a replayable stream."""
    inst = list(instances)
    x = np.array([i.x for i in inst], dtype=np.float64)
    if len(inst) and all(i.y is not None for i in inst):
        y = np.array([i.y for i in inst], dtype=np.int64)
    else:
        y = None
    return ArrayStream(schema, x.reshape(len(inst), schema.n_features), y)


class _Limited(Stream):
    def __init__(self, base: Stream, n: int):
        super().__init__(base.schema)
        self._base = base
        self._left = n

    def __next__(self) -> Instance:
        if self._left <= 0:
            raise StopIteration
        self._left -= 1
        return next(self._base)


def limit(stream: Stream, n: int) -> Stream:
    """Cap a stream at ``n`` instances."""
    if n < 0:
        raise ConfigurationError("length must be >= 0, got %d" % n)
    return _Limited(stream, n)


def _check_fraction(value, name):
    if not 0.0 <= value <= 1.0:
        raise ConfigurationError("%s must be in [0, 1], got %r" % (name, value))


def _check_positive(value, name):
    if value < 1:
        raise ConfigurationError("%s must be >= 1, got %r" % (name, value))


# ---------------------------------------------------------------------------
# SEA


SEA_THRESHOLDS = (8.0, 9.0, 7.0, 9.5)


@dataclass(frozen=True)
class SeaConfig:
    """Three uniform features on [0, 10]; only the first two matter.

    Label: class 0 iff ``f1 + f2 <= threshold``, then flipped with
    probability ``noise``.  The four classic concepts use thresholds
    8, 9, 7 and 9.5 (see ``SEA_THRESHOLDS``).
    """

    threshold: float = 8.0
    noise: float = 0.10
    seed: int = 1
    length: int | None = None

    def __post_init__(self):
        _check_fraction(self.noise, "noise")
        if self.length is not None and self.length < 0:
            raise ConfigurationError("length must be >= 0")


def _sea_schema() -> StreamSchema:
    return StreamSchema(
        "sea",
        tuple(Feature("f%d" % (i + 1)) for i in range(3)),
        ("0", "1"),
    )


class SeaGenerator(Stream):
    def __init__(self, config: SeaConfig):
        super().__init__(_sea_schema())
        self._cfg = config
        self._rng = core.Rng(config.seed)
        self._left = config.length

    def __next__(self) -> Instance:
        if self._left is not None:
            if self._left <= 0:
                raise StopIteration
            self._left -= 1
        rng = self._rng
        x = np.empty(3, dtype=np.float64)
        x[0] = rng.next_float() * 10.0
        x[1] = rng.next_float() * 10.0
        x[2] = rng.next_float() * 10.0
        y = 0 if x[0] + x[1] <= self._cfg.threshold else 1
        # The noise draw happens unconditionally so the feature sequence
        # does not depend on the noise setting.
        if rng.next_float() < self._cfg.noise:
            y = 1 - y
        return Instance(x, y)


def sea_label(f1: float, f2: float, threshold: float) -> int:
    """Noise-free SEA label: 0 iff ``f1 + f2 <= threshold``."""
    return 0 if f1 + f2 <= threshold else 1


# ---------------------------------------------------------------------------
# AGRAWAL


@dataclass(frozen=True)
class AgrawalConfig:
    """Loan-application generator with ten classification functions.

    Feature draw order and ranges:

    ==========  =======================================================
    salary      ``20000 + 130000 u``
    commission  0 if salary >= 75000, else ``10000 + 65000 u``
    age         ``20 + int(61 u)``  (20..80)
    elevel      nominal, ``int(5 u)``
    car         nominal, ``int(20 u)``
    zipcode     nominal, ``int(9 u)``
    hvalue      ``(9 - zipcode) * 100000 * (0.5 + u)``
    hyears      ``1 + int(30 u)``  (1..30)
    loan        ``500000 u``
    ==========  =======================================================

    The label is computed by function 1..10 *before* perturbation; with
    ``perturbation = p > 0`` each numeric value v then gets
    ``v + range * p * (2u - 1)`` clamped to its range (age and hyears are
    rounded back to integers, commission only when positive).
    """

    function: int = 1
    perturbation: float = 0.05
    seed: int = 1
    length: int | None = None

    def __post_init__(self):
        if not 1 <= self.function <= 10:
            raise ConfigurationError(
                "function must be in 1..10, got %r" % (self.function,)
            )
        _check_fraction(self.perturbation, "perturbation")
        if self.length is not None and self.length < 0:
            raise ConfigurationError("length must be >= 0")


def _agrawal_schema() -> StreamSchema:
    # elevel/car/zipcode are conceptually categorical but every stream
    # toolkit encodes them as numeric columns; trees then learn ordinal
    # cuts instead of fragmenting on 20-way branches.
    return StreamSchema(
        "agrawal",
        (
            Feature("salary"),
            Feature("commission"),
            Feature("age"),
            Feature("elevel"),
            Feature("car"),
            Feature("zipcode"),
            Feature("hvalue"),
            Feature("hyears"),
            Feature("loan"),
        ),
        ("0", "1"),
    )


def agrawal_label(
    function: int,
    salary: float,
    commission: float,
    age: float,
    elevel: float,
    car: float,
    zipcode: float,
    hvalue: float,
    hyears: float,
    loan: float,
) -> int:
    """Classification functions 1..10; returns 0 (group A) or 1 (group B)."""
    if function == 1:
        return 0 if age < 40 or age >= 60 else 1
    if function == 2:
        if age < 40:
            return 0 if 50000 <= salary <= 100000 else 1
        if age < 60:
            return 0 if 75000 <= salary <= 125000 else 1
        return 0 if 25000 <= salary <= 75000 else 1
    if function == 3:
        if age < 40:
            return 0 if elevel in (0, 1) else 1
        if age < 60:
            return 0 if 1 <= elevel <= 3 else 1
        return 0 if 2 <= elevel <= 4 else 1
    if function == 4:
        if age < 40:
            if elevel in (0, 1):
                return 0 if 25000 <= salary <= 75000 else 1
            return 0 if 50000 <= salary <= 100000 else 1
        if age < 60:
            if 1 <= elevel <= 3:
                return 0 if 50000 <= salary <= 100000 else 1
            return 0 if 75000 <= salary <= 125000 else 1
        if 2 <= elevel <= 4:
            return 0 if 50000 <= salary <= 100000 else 1
        return 0 if 25000 <= salary <= 75000 else 1
    if function == 5:
        if age < 40:
            if 50000 <= salary <= 100000:
                return 0 if 100000 <= loan <= 300000 else 1
            return 0 if 200000 <= loan <= 400000 else 1
        if age < 60:
            if 75000 <= salary <= 125000:
                return 0 if 200000 <= loan <= 400000 else 1
            return 0 if 300000 <= loan <= 500000 else 1
        if 25000 <= salary <= 75000:
            return 0 if 300000 <= loan <= 500000 else 1
        return 0 if 100000 <= loan <= 300000 else 1
    total = salary + commission
    if function == 6:
        if age < 40:
            return 0 if 50000 <= total <= 100000 else 1
        if age < 60:
            return 0 if 75000 <= total <= 125000 else 1
        return 0 if 25000 <= total <= 75000 else 1
    if function == 7:
        disposable = (2.0 * total) / 3.0 - loan / 5.0 - 20000.0
        return 0 if disposable > 0.0 else 1
    if function == 8:
        disposable = (2.0 * total) / 3.0 - 5000.0 * elevel - 20000.0
        return 0 if disposable > 0.0 else 1
    if function == 9:
        disposable = (2.0 * total) / 3.0 - 5000.0 * elevel - loan / 5.0 - 10000.0
        return 0 if disposable > 0.0 else 1
    # function == 10
    equity = hvalue * (hyears - 20.0) / 10.0 if hyears >= 20 else 0.0
    disposable = (2.0 * total) / 3.0 - 5000.0 * elevel + equity / 5.0 - 10000.0
    return 0 if disposable > 0.0 else 1


class AgrawalGenerator(Stream):
    def __init__(self, config: AgrawalConfig):
        super().__init__(_agrawal_schema())
        self._cfg = config
        self._rng = core.Rng(config.seed)
        self._left = config.length

    def _perturb(self, value, rng_range, lo, hi, rng):
        value += rng_range * self._cfg.perturbation * (2.0 * rng.next_float() - 1.0)
        return min(max(value, lo), hi)

    def __next__(self) -> Instance:
        if self._left is not None:
            if self._left <= 0:
                raise StopIteration
            self._left -= 1
        rng = self._rng
        salary = 20000.0 + 130000.0 * rng.next_float()
        commission = 0.0 if salary >= 75000.0 else 10000.0 + 65000.0 * rng.next_float()
        age = 20.0 + rng.next_below(61)
        elevel = float(rng.next_below(5))
        car = float(rng.next_below(20))
        zipcode = float(rng.next_below(9))
        hvalue = (9.0 - zipcode) * 100000.0 * (0.5 + rng.next_float())
        hyears = 1.0 + rng.next_below(30)
        loan = 500000.0 * rng.next_float()
        y = agrawal_label(
            self._cfg.function,
            salary, commission, age, elevel, car, zipcode, hvalue, hyears, loan,
        )
        if self._cfg.perturbation > 0.0:
            salary = self._perturb(salary, 130000.0, 20000.0, 150000.0, rng)
            if commission > 0.0:
                commission = self._perturb(commission, 65000.0, 10000.0, 75000.0, rng)
            age = round(self._perturb(age, 60.0, 20.0, 80.0, rng))
            hvalue = self._perturb(
                hvalue, (9.0 - zipcode) * 100000.0, 0.0, 1350000.0, rng
            )
            hyears = round(self._perturb(hyears, 29.0, 1.0, 30.0, rng))
            loan = self._perturb(loan, 500000.0, 0.0, 500000.0, rng)
        x = np.array(
            [salary, commission, age, elevel, car, zipcode, hvalue, hyears, loan],
            dtype=np.float64,
        )
        return Instance(x, y)


# ---------------------------------------------------------------------------
# RBF


@dataclass(frozen=True)
class RbfConfig:
    """Gaussian radial-basis generator with optionally moving centroids.

    Centroids live in [0, 1]^d with a random class, weight and spread, all
    drawn from a model stream seeded independently of the instance stream.
    Each instance picks a centroid proportionally to weight, then offsets it
    by a random direction scaled to ``gauss() * spread``.  With
    ``drift_speed > 0`` the first ``n_drift_centroids`` centroids move that
    far per instance along fixed unit directions, bouncing off the cube.
    """

    n_centroids: int = 50
    n_classes: int = 5
    n_features: int = 10
    drift_speed: float = 0.0
    n_drift_centroids: int = 50
    seed: int = 1
    length: int | None = None

    def __post_init__(self):
        _check_positive(self.n_centroids, "n_centroids")
        _check_positive(self.n_features, "n_features")
        if self.n_classes < 2:
            raise ConfigurationError("n_classes must be >= 2")
        if self.drift_speed < 0:
            raise ConfigurationError("drift_speed must be >= 0")
        if self.n_drift_centroids < 0:
            raise ConfigurationError("n_drift_centroids must be >= 0")
        if self.length is not None and self.length < 0:
            raise ConfigurationError("length must be >= 0")


class RbfGenerator(Stream):
    def __init__(self, config: RbfConfig):
        d = config.n_features
        schema = StreamSchema(
            "rbf",
            tuple(Feature("a%d" % i) for i in range(d)),
            tuple(str(c) for c in range(config.n_classes)),
        )
        super().__init__(schema)
        self._cfg = config
        model = core.Rng(core.mix_seed(config.seed, 1))
        self._rng = core.Rng(core.mix_seed(config.seed, 2))
        k = config.n_centroids
        self._centres = np.empty((k, d), dtype=np.float64)
        self._labels = np.empty(k, dtype=np.int64)
        self._spreads = np.empty(k, dtype=np.float64)
        self._weights = np.empty(k, dtype=np.float64)
        for i in range(k):
            for j in range(d):
                self._centres[i, j] = model.next_float()
            self._labels[i] = model.next_below(config.n_classes)
            self._spreads[i] = model.next_float()
            self._weights[i] = model.next_float()
        self._wsum = float(self._weights.sum())
        n_drift = min(config.n_drift_centroids, k)
        self._directions = np.zeros((n_drift, d), dtype=np.float64)
        for i in range(n_drift):
            norm = 0.0
            for j in range(d):
                v = 2.0 * model.next_float() - 1.0
                self._directions[i, j] = v
                norm += v * v
            norm = math.sqrt(norm)
            if norm > 0.0:
                self._directions[i] /= norm
        self._left = config.length

    def _move_centroids(self):
        speed = self._cfg.drift_speed
        for i in range(len(self._directions)):
            centre = self._centres[i]
            direction = self._directions[i]
            for j in range(len(centre)):
                centre[j] += direction[j] * speed
                if centre[j] > 1.0:
                    centre[j] = 1.0
                    direction[j] = -direction[j]
                elif centre[j] < 0.0:
                    centre[j] = 0.0
                    direction[j] = -direction[j]

    def __next__(self) -> Instance:
        if self._left is not None:
            if self._left <= 0:
                raise StopIteration
            self._left -= 1
        if self._cfg.drift_speed > 0.0:
            self._move_centroids()
        rng = self._rng
        pick = rng.next_float() * self._wsum
        idx = 0
        acc = self._weights[0]
        while acc <= pick and idx + 1 < len(self._weights):
            idx += 1
            acc += self._weights[idx]
        d = self._cfg.n_features
        x = np.empty(d, dtype=np.float64)
        norm = 0.0
        for j in range(d):
            v = 2.0 * rng.next_float() - 1.0
            x[j] = v
            norm += v * v
        norm = math.sqrt(norm)
        scale = rng.gauss() * self._spreads[idx]
        if norm > 0.0:
            scale /= norm
        centre = self._centres[idx]
        for j in range(d):
            x[j] = centre[j] + x[j] * scale
        return Instance(x, int(self._labels[idx]))


# ---------------------------------------------------------------------------
# HYPERPLANE


@dataclass(frozen=True)
class HyperplaneConfig:
    """Rotating-hyperplane generator with incremental weight drift.

    Features are uniform on [0, 1]; the label is 1 iff
    ``sum(w_i x_i) >= sum(w_i) / 2``, flipped with probability ``noise``.
    After every instance the first ``n_drift_features`` weights move by
    ``direction * magnitude`` and each direction flips sign with
    probability ``sigma``.
    """

    n_features: int = 10
    magnitude: float = 0.0
    n_drift_features: int = 2
    noise: float = 0.05
    sigma: float = 0.10
    seed: int = 1
    length: int | None = None

    def __post_init__(self):
        _check_positive(self.n_features, "n_features")
        if not 0 <= self.n_drift_features <= self.n_features:
            raise ConfigurationError(
                "n_drift_features must be in [0, n_features]"
            )
        if self.magnitude < 0:
            raise ConfigurationError("magnitude must be >= 0")
        _check_fraction(self.noise, "noise")
        _check_fraction(self.sigma, "sigma")
        if self.length is not None and self.length < 0:
            raise ConfigurationError("length must be >= 0")


class HyperplaneGenerator(Stream):
    def __init__(self, config: HyperplaneConfig):
        d = config.n_features
        schema = StreamSchema(
            "hyperplane",
            tuple(Feature("a%d" % i) for i in range(d)),
            ("0", "1"),
        )
        super().__init__(schema)
        self._cfg = config
        model = core.Rng(core.mix_seed(config.seed, 1))
        self._rng = core.Rng(core.mix_seed(config.seed, 2))
        self._weights = np.array(
            [model.next_float() for _ in range(d)], dtype=np.float64
        )
        self._dirs = np.ones(config.n_drift_features, dtype=np.float64)
        self._left = config.length

    def __next__(self) -> Instance:
        if self._left is not None:
            if self._left <= 0:
                raise StopIteration
            self._left -= 1
        rng = self._rng
        d = self._cfg.n_features
        x = np.empty(d, dtype=np.float64)
        total = 0.0
        wsum = 0.0
        for i in range(d):
            x[i] = rng.next_float()
            total += self._weights[i] * x[i]
            wsum += self._weights[i]
        y = 1 if total >= 0.5 * wsum else 0
        if rng.next_float() < self._cfg.noise:
            y = 1 - y
        # Weight drift; sign-flip draws happen regardless of magnitude so
        # the instance sequence only depends on magnitude through the labels.
        for i in range(self._cfg.n_drift_features):
            self._weights[i] += self._dirs[i] * self._cfg.magnitude
            if rng.next_float() < self._cfg.sigma:
                self._dirs[i] = -self._dirs[i]
        return Instance(x, y)


# ---------------------------------------------------------------------------
# RTG (random tree generator)


@dataclass(frozen=True)
class RtgConfig:
    """Labels drawn from a randomly built decision tree.

    The tree splits on nominal features at most once per path and on numeric
    features with uniform thresholds inside the current range.  From
    ``first_leaf_level`` down, each node turns into a leaf with probability
    ``leaf_fraction``; at ``max_depth`` it always does.  Leaves carry a
    uniformly random class.
    """

    n_nominal: int = 5
    n_values: int = 5
    n_numeric: int = 5
    n_classes: int = 2
    max_depth: int = 5
    first_leaf_level: int = 3
    leaf_fraction: float = 0.15
    seed: int = 1
    length: int | None = None

    def __post_init__(self):
        if self.n_nominal < 0 or self.n_numeric < 0:
            raise ConfigurationError("feature counts must be >= 0")
        if self.n_nominal + self.n_numeric < 1:
            raise ConfigurationError("need at least one feature")
        if self.n_nominal > 0 and self.n_values < 2:
            raise ConfigurationError("n_values must be >= 2")
        if self.n_classes < 2:
            raise ConfigurationError("n_classes must be >= 2")
        if self.max_depth < 1:
            raise ConfigurationError("max_depth must be >= 1")
        if not 0 <= self.first_leaf_level <= self.max_depth:
            raise ConfigurationError(
                "first_leaf_level must be in [0, max_depth]"
            )
        _check_fraction(self.leaf_fraction, "leaf_fraction")
        if self.length is not None and self.length < 0:
            raise ConfigurationError("length must be >= 0")


class _RtgNode:
    __slots__ = ("feature", "threshold", "children", "label")

    def __init__(self):
        self.feature = -1
        self.threshold = 0.0
        self.children = None
        self.label = -1


class RtgGenerator(Stream):
    def __init__(self, config: RtgConfig):
        features = tuple(
            Feature("nom%d" % i, tuple(str(v) for v in range(config.n_values)))
            for i in range(config.n_nominal)
        ) + tuple(Feature("num%d" % i) for i in range(config.n_numeric))
        schema = StreamSchema(
            "rtg", features, tuple(str(c) for c in range(config.n_classes))
        )
        super().__init__(schema)
        self._cfg = config
        tree_rng = core.Rng(core.mix_seed(config.seed, 1))
        self._rng = core.Rng(core.mix_seed(config.seed, 2))
        lo = np.zeros(config.n_numeric, dtype=np.float64)
        hi = np.ones(config.n_numeric, dtype=np.float64)
        self._root = self._build(
            0, list(range(config.n_nominal)), lo, hi, tree_rng
        )
        self._left = config.length

    def _build(self, depth, nominal_candidates, lo, hi, rng):
        cfg = self._cfg
        node = _RtgNode()
        make_leaf = depth >= cfg.max_depth or (
            not nominal_candidates and cfg.n_numeric == 0
        )
        if not make_leaf and depth >= cfg.first_leaf_level:
            make_leaf = rng.next_float() < cfg.leaf_fraction
        if make_leaf:
            node.label = rng.next_below(cfg.n_classes)
            return node
        pick = rng.next_below(len(nominal_candidates) + cfg.n_numeric)
        if pick < len(nominal_candidates):
            node.feature = nominal_candidates[pick]
            rest = nominal_candidates[:pick] + nominal_candidates[pick + 1:]
            node.children = [
                self._build(depth + 1, rest, lo, hi, rng)
                for _ in range(cfg.n_values)
            ]
        else:
            j = pick - len(nominal_candidates)
            node.feature = cfg.n_nominal + j
            node.threshold = lo[j] + (hi[j] - lo[j]) * rng.next_float()
            left_hi = hi.copy()
            left_hi[j] = node.threshold
            right_lo = lo.copy()
            right_lo[j] = node.threshold
            node.children = [
                self._build(depth + 1, nominal_candidates, lo, left_hi, rng),
                self._build(depth + 1, nominal_candidates, right_lo, hi, rng),
            ]
        return node

    def _classify(self, x):
        node = self._root
        cfg = self._cfg
        while node.children is not None:
            f = node.feature
            if f < cfg.n_nominal:
                node = node.children[int(x[f])]
            else:
                node = node.children[0 if x[f] < node.threshold else 1]
        return node.label

    def __next__(self) -> Instance:
        if self._left is not None:
            if self._left <= 0:
                raise StopIteration
            self._left -= 1
        rng = self._rng
        cfg = self._cfg
        x = np.empty(cfg.n_nominal + cfg.n_numeric, dtype=np.float64)
        for i in range(cfg.n_nominal):
            x[i] = rng.next_below(cfg.n_values)
        for i in range(cfg.n_numeric):
            x[cfg.n_nominal + i] = rng.next_float()
        return Instance(x, self._classify(x))


# ---------------------------------------------------------------------------
# Drift wrapping


@dataclass(frozen=True)
class DriftSpec:
    """Change point: position ``p`` (1-based instance index) and width ``w``."""

    position: int
    width: int = 1

    def __post_init__(self):
        if self.position < 1:
            raise ConfigurationError("position must be >= 1")
        if self.width < 1:
            raise ConfigurationError("width must be >= 1")


def drift_mix_probability(t: int, position: int, width: int) -> float:
    """Probability of drawing from the successor at instance index ``t``."""
    z = 4.0 * (t - position) / width
    if z < -700.0:  # exp would overflow; the sigmoid is 0 to machine precision
        return 0.0
    return 1.0 / (1.0 + math.exp(-z))


class DriftStream(Stream):
    """Sigmoid mixture of a base and a successor stream.

    Only the chosen side advances on each draw, so the unchosen concept's
    own sequence is not consumed.  The mixing coin uses a dedicated RNG,
    by default seeded from the ``DriftSpec``, so base and successor
    streams stay byte-identical to their standalone counterparts.
    """

    def __init__(self, base: Stream, successor: Stream, spec: DriftSpec,
                 seed: int | None = None):
        if not base.schema.compatible(successor.schema):
            raise ConfigurationError(
                "base and successor schemas are incompatible"
            )
        super().__init__(base.schema)
        self._base = base
        self._successor = successor
        self._spec = spec
        if seed is None:
            seed = core.mix_seed(spec.position, spec.width)
        self._rng = core.Rng(seed)
        self._t = 0

    def __next__(self) -> Instance:
        self._t += 1
        p = drift_mix_probability(self._t, self._spec.position, self._spec.width)
        if self._rng.next_float() < p:
            return next(self._successor)
        return next(self._base)


# ---------------------------------------------------------------------------
# Registry


def create_generator(config) -> Stream:
    """Build the generator matching a config dataclass."""
    if isinstance(config, SeaConfig):
        return SeaGenerator(config)
    if isinstance(config, AgrawalConfig):
        return AgrawalGenerator(config)
    if isinstance(config, RbfConfig):
        return RbfGenerator(config)
    if isinstance(config, HyperplaneConfig):
        return HyperplaneGenerator(config)
    if isinstance(config, RtgConfig):
        return RtgGenerator(config)
    raise ConfigurationError("unknown generator config %r" % type(config).__name__)


STREAM_NAMES = (
    "sea", "sea_a", "sea_g",
    "agr", "agr_a", "agr_g",
    "rbf", "rbf_m", "rbf_f",
    "hyper", "rtg",
)


def _concept_chain(concepts, length, width, seed):
    """Chain 4 concepts with change points at n/4, n/2 and 3n/4.

    Change positions follow the community convention of quarter points for
    the named abrupt/gradual variants; the positions are not intrinsic to
    the generator families.
    """
    positions = [length // 4, length // 2, (3 * length) // 4]
    stream = concepts[0]
    for i, successor in enumerate(concepts[1:]):
        spec = DriftSpec(max(1, positions[i]), width)
        stream = DriftStream(
            stream, successor, spec, seed=core.mix_seed(seed, 1000 + i)
        )
    return limit(stream, length)


def make_stream(name: str, seed: int = 1, length: int | None = None) -> Stream:
    """Named stream registry used by the CLI and the evaluation harness.

    ``sea``/``agr``/``rbf``/``hyper``/``rtg`` are the stationary (or
    intrinsically drifting) bases.  ``*_a`` and ``*_g`` add abrupt (w=1)
    and gradual (w=n/20) concept changes at the quarter points, cycling
    through four concepts; these require ``length``.  ``rbf_m`` and
    ``rbf_f`` move centroids at speeds 0.0001 and 0.001.
    """
    name = name.lower()
    if name not in STREAM_NAMES:
        raise ConfigurationError(
            "unknown stream %r (choose from %s)" % (name, ", ".join(STREAM_NAMES))
        )
    if name in ("sea_a", "sea_g", "agr_a", "agr_g") and not length:
        raise ConfigurationError("%s requires a length for its change points" % name)

    def bounded(stream):
        return stream if length is None else limit(stream, length)

    if name == "sea":
        return bounded(SeaGenerator(SeaConfig(seed=seed)))
    if name in ("sea_a", "sea_g"):
        width = 1 if name == "sea_a" else max(1, length // 20)
        concepts = [
            SeaGenerator(SeaConfig(threshold=t, seed=core.mix_seed(seed, 10 + i)))
            for i, t in enumerate(SEA_THRESHOLDS)
        ]
        return _concept_chain(concepts, length, width, seed)
    if name == "agr":
        return bounded(AgrawalGenerator(AgrawalConfig(seed=seed)))
    if name in ("agr_a", "agr_g"):
        width = 1 if name == "agr_a" else max(1, length // 20)
        concepts = [
            AgrawalGenerator(
                AgrawalConfig(function=f, seed=core.mix_seed(seed, 10 + i))
            )
            for i, f in enumerate((1, 2, 3, 4))
        ]
        return _concept_chain(concepts, length, width, seed)
    if name == "rbf":
        return bounded(RbfGenerator(RbfConfig(seed=seed)))
    if name == "rbf_m":
        return bounded(RbfGenerator(RbfConfig(drift_speed=0.0001, seed=seed)))
    if name == "rbf_f":
        return bounded(RbfGenerator(RbfConfig(drift_speed=0.001, seed=seed)))
    if name == "hyper":
        return bounded(
            HyperplaneGenerator(HyperplaneConfig(magnitude=0.001, seed=seed))
        )
    return bounded(RtgGenerator(RtgConfig(seed=seed)))


# ---------------------------------------------------------------------------
# File ingestion


def _float_or_error(token, line_no, column):
    try:
        return float(token)
    except ValueError:
        raise DataError(
            "column %r has non-numeric value %r" % (column, token), line=line_no
        ) from None


def _load_csv(path, class_column):
    header = None
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text or text.startswith("#"):
                continue
            parts = [p.strip() for p in text.split(",")]
            if header is None:
                header = parts
                continue
            rows.append((line_no, parts))
    if header is None:
        raise SchemaError("no header line found", line=1)
    if class_column is None:
        class_column = "class"
    lowered = [h.lower() for h in header]
    if class_column.lower() not in lowered:
        raise SchemaError(
            "class column %r not found in header %r" % (class_column, header)
        )
    class_idx = lowered.index(class_column.lower())
    feature_names = [h for i, h in enumerate(header) if i != class_idx]
    if not feature_names:
        raise SchemaError("no feature columns besides the class column")

    labels = sorted({parts[class_idx] for _, parts in rows if len(parts) == len(header)})
    if len(labels) < 2:
        raise SchemaError("need at least two distinct class labels, got %r" % labels)
    label_index = {lab: i for i, lab in enumerate(labels)}

    x = np.empty((len(rows), len(feature_names)), dtype=np.float64)
    y = np.empty(len(rows), dtype=np.int64)
    for r, (line_no, parts) in enumerate(rows):
        if len(parts) != len(header):
            raise DataError(
                "expected %d fields, got %d" % (len(header), len(parts)),
                line=line_no,
            )
        c = 0
        for i, token in enumerate(parts):
            if i == class_idx:
                y[r] = label_index[token]
            else:
                x[r, c] = _float_or_error(token, line_no, feature_names[c])
                c += 1
    schema = StreamSchema(
        os.path.splitext(os.path.basename(path))[0],
        tuple(Feature(n) for n in feature_names),
        tuple(labels),
    )
    return ArrayStream(schema, x, y)


def _load_arff(path, class_column):
    relation = None
    attributes = []  # (name, values tuple or None, line_no)
    data_rows = []
    in_data = False
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text or text.startswith("%"):
                continue
            if not in_data:
                low = text.lower()
                if low.startswith("@relation"):
                    relation = text[len("@relation"):].strip().strip("'\"") or "arff"
                elif low.startswith("@attribute"):
                    body = text[len("@attribute"):].strip()
                    if body.startswith("{"):
                        raise DataError("attribute without a name", line=line_no)
                    if body.startswith(("'", '"')):
                        quote = body[0]
                        end = body.index(quote, 1)
                        name = body[1:end]
                        rest = body[end + 1:].strip()
                    else:
                        split = body.split(None, 1)
                        if len(split) != 2:
                            raise DataError(
                                "attribute needs a name and a type", line=line_no
                            )
                        name, rest = split
                    rest = rest.strip()
                    if rest.startswith("{"):
                        if not rest.endswith("}"):
                            raise DataError(
                                "unterminated nominal value set", line=line_no
                            )
                        values = tuple(
                            v.strip().strip("'\"") for v in rest[1:-1].split(",")
                        )
                        if not values or any(not v for v in values):
                            raise DataError("empty nominal value", line=line_no)
                        attributes.append((name, values, line_no))
                    elif rest.lower() in ("numeric", "real", "integer"):
                        attributes.append((name, None, line_no))
                    else:
                        raise DataError(
                            "unsupported attribute type %r" % rest, line=line_no
                        )
                elif low.startswith("@data"):
                    in_data = True
                else:
                    raise DataError("unrecognized declaration %r" % text, line=line_no)
            else:
                data_rows.append((line_no, [p.strip() for p in text.split(",")]))
    if not in_data:
        raise SchemaError("missing @data section")
    if not attributes:
        raise SchemaError("no attributes declared")

    if class_column is None:
        named = [i for i, (n, _, _) in enumerate(attributes) if n.lower() == "class"]
        class_idx = named[0] if named else len(attributes) - 1
    else:
        named = [
            i for i, (n, _, _) in enumerate(attributes)
            if n.lower() == class_column.lower()
        ]
        if not named:
            raise SchemaError("class attribute %r not declared" % class_column)
        class_idx = named[0]
    class_name, class_values, _ = attributes[class_idx]
    if class_values is None:
        raise SchemaError(
            "class attribute %r must be nominal" % class_name
        )
    features = [a for i, a in enumerate(attributes) if i != class_idx]
    if not features:
        raise SchemaError("no feature attributes besides the class")
    value_maps = [
        None if values is None else {v: k for k, v in enumerate(values)}
        for _, values, _ in features
    ]
    label_map = {v: k for k, v in enumerate(class_values)}

    x = np.empty((len(data_rows), len(features)), dtype=np.float64)
    y = np.empty(len(data_rows), dtype=np.int64)
    for r, (line_no, parts) in enumerate(data_rows):
        if len(parts) != len(attributes):
            raise DataError(
                "expected %d fields, got %d" % (len(attributes), len(parts)),
                line=line_no,
            )
        c = 0
        for i, token in enumerate(parts):
            token = token.strip().strip("'\"")
            if i == class_idx:
                if token not in label_map:
                    raise DataError(
                        "unknown class value %r" % token, line=line_no
                    )
                y[r] = label_map[token]
            else:
                vmap = value_maps[c]
                if vmap is None:
                    x[r, c] = _float_or_error(token, line_no, features[c][0])
                else:
                    if token not in vmap:
                        raise DataError(
                            "unknown value %r for nominal attribute %r"
                            % (token, features[c][0]),
                            line=line_no,
                        )
                    x[r, c] = vmap[token]
                c += 1
    schema = StreamSchema(
        relation or os.path.splitext(os.path.basename(path))[0],
        tuple(
            Feature(n, values if values is not None else ())
            for n, values, _ in features
        ),
        tuple(class_values),
    )
    return ArrayStream(schema, x, y)


def load_dataset(path: str, fmt: str | None = None,
                 class_column: str | None = None) -> ArrayStream:
    """Load a CSV or ARFF dataset as a finite stream.

    CSV: comma separated, first non-comment line is the header, features are
    numeric, the class column is named ``class`` unless ``class_column``
    says otherwise; labels are mapped to indices in sorted order.  ARFF: a
    subset with numeric and nominal attributes; the class attribute is the
    one named ``class`` (or ``class_column``), falling back to the last
    declared attribute, and must be nominal.
    """
    if fmt is None:
        ext = os.path.splitext(path)[1].lower()
        fmt = {".csv": "csv", ".arff": "arff"}.get(ext)
        if fmt is None:
            raise ConfigurationError(
                "cannot infer format from %r; pass fmt='csv' or 'arff'" % path
            )
    fmt = fmt.lower()
    if fmt == "csv":
        return _load_csv(path, class_column)
    if fmt == "arff":
        return _load_arff(path, class_column)
    raise ConfigurationError("unknown format %r (expected csv or arff)" % fmt)


def write_csv(path: str, schema: StreamSchema, instances, comment: str | None = None):
    """Write instances as CSV; numerics use repr for exact round-trips."""
    with open(path, "w", encoding="utf-8") as fh:
        if comment:
            for part in comment.splitlines():
                fh.write("# %s\n" % part)
        fh.write(",".join([f.name for f in schema.features] + ["class"]) + "\n")
        for inst in instances:
            cells = []
            for f, v in zip(schema.features, inst.x):
                cells.append(str(int(v)) if f.is_nominal else repr(float(v)))
            if inst.y is None:
                raise DataError("cannot write an unlabeled instance")
            cells.append(schema.class_labels[inst.y])
            fh.write(",".join(cells) + "\n")
