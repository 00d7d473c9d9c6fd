"""Generators, drift wrapping and file ingestion."""

from __future__ import annotations

import math
import random

import numpy as np
import pytest

from streamforest import streams
from streamforest.errors import ConfigurationError, DataError, SchemaError
from streamforest.streams import (
    AgrawalConfig,
    AgrawalGenerator,
    ArrayStream,
    DriftSpec,
    DriftStream,
    Feature,
    HyperplaneConfig,
    Instance,
    RbfConfig,
    RtgConfig,
    SeaConfig,
    SeaGenerator,
    StreamSchema,
    agrawal_label,
    create_generator,
    drift_mix_probability,
    from_instances,
    load_dataset,
    make_stream,
    sea_label,
    write_csv,
)

# ---------------------------------------------------------------------------
# Data model


def test_schema_counts_and_value_table():
    schema = StreamSchema(
        "toy",
        (Feature("a"), Feature("b", ("x", "y", "z"))),
        ("neg", "pos"),
    )
    assert schema.n_features == 2
    assert schema.n_classes == 2
    assert list(schema.nominal_value_counts()) == [0, 3]


def test_schema_invariants_rejected():
    with pytest.raises(ConfigurationError):
        StreamSchema("s", (Feature("a"),), ("only",))  # M < 2
    with pytest.raises(ConfigurationError):
        StreamSchema("s", (), ("0", "1"))  # d < 1
    with pytest.raises(ConfigurationError):
        StreamSchema("s", (Feature("a"),), ("0", "0"))  # duplicate labels
    with pytest.raises(ConfigurationError):
        Feature("")  # empty feature name


def test_schema_compatibility_ignores_names_only():
    left = StreamSchema("l", (Feature("a"), Feature("b", ("0", "1"))), ("x", "y"))
    renamed = StreamSchema("r", (Feature("c"), Feature("d", ("0", "1"))), ("x", "y"))
    other_values = StreamSchema("r", (Feature("c"), Feature("d", ("0", "2"))), ("x", "y"))
    other_labels = StreamSchema("r", (Feature("a"), Feature("b", ("0", "1"))), ("x", "z"))
    assert left.compatible(renamed)
    assert not left.compatible(other_values)
    assert not left.compatible(other_labels)
    assert not left.compatible(StreamSchema("r", (Feature("a"),), ("x", "y")))


def test_take_and_length_contract():
    stream = make_stream("sea", seed=3, length=100)
    got = stream.take(1000)
    assert len(got) == 100
    with pytest.raises(StopIteration):
        next(stream)
    assert len(make_stream("sea", seed=3, length=100).take(40)) == 40


def test_array_stream_round_trip():
    schema = StreamSchema("toy", (Feature("a"), Feature("b")), ("0", "1"))
    instances = [Instance(np.array([float(i), float(-i)]), i % 2) for i in range(5)]
    stream = from_instances(schema, instances)
    back = stream.take(10)
    assert len(back) == 5
    for orig, copy in zip(instances, back):
        assert np.array_equal(orig.x, copy.x)
        assert orig.y == copy.y


# ---------------------------------------------------------------------------
# SEA


def test_sea_label_examples_and_random_oracle():
    assert sea_label(3.0, 4.0, 8.0) == 0
    assert sea_label(5.0, 4.0, 8.0) == 1
    rng = random.Random(17)
    for _ in range(1000):
        f1, f2 = rng.uniform(0, 10), rng.uniform(0, 10)
        threshold = rng.choice(streams.SEA_THRESHOLDS)
        assert sea_label(f1, f2, threshold) == (0 if f1 + f2 <= threshold else 1)


def test_sea_generator_noise_rate_and_balance():
    taken = SeaGenerator(SeaConfig(seed=5)).take(20000)
    xs = np.array([inst.x for inst in taken])
    ys = np.array([inst.y for inst in taken])
    assert xs.min() >= 0.0 and xs.max() < 10.0
    clean = np.array([sea_label(x[0], x[1], 8.0) for x in xs])
    agreement = (clean == ys).mean()
    assert abs(agreement - 0.9) < 0.01  # label noise is 10%
    # P(f1+f2 <= 8) = 0.32, flipped with probability 0.1: P(y=1) = 0.644
    assert abs(ys.mean() - 0.644) < 0.015


def test_sea_config_validation():
    with pytest.raises(ConfigurationError):
        SeaConfig(noise=1.5)
    with pytest.raises(ConfigurationError):
        SeaConfig(length=-1)


# ---------------------------------------------------------------------------
# AGRAWAL

_BANDS = ((20, 40), (40, 60), (60, 81))


def _band(age):
    for i, (lo, hi) in enumerate(_BANDS):
        if lo <= age < hi or (i == 2 and age >= 60):
            return i
    return 0 if age < 40 else 2


def _oracle_group_a(fn, salary, commission, age, elevel, car, zipcode,
                    hvalue, hyears, loan):
    """Independent transcription of the ten loan predicates (group A test)."""
    band = 0 if age < 40 else (1 if age < 60 else 2)
    total = salary + commission
    if fn == 1:
        return band != 1
    if fn == 2:
        lo, hi = [(50000, 100000), (75000, 125000), (25000, 75000)][band]
        return lo <= salary <= hi
    if fn == 3:
        return elevel in [{0, 1}, {1, 2, 3}, {2, 3, 4}][band]
    if fn == 4:
        table = [
            ({0, 1}, (25000, 75000), (50000, 100000)),
            ({1, 2, 3}, (50000, 100000), (75000, 125000)),
            ({2, 3, 4}, (50000, 100000), (25000, 75000)),
        ]
        eset, inside, outside = table[band]
        lo, hi = inside if elevel in eset else outside
        return lo <= salary <= hi
    if fn == 5:
        table = [
            ((50000, 100000), (100000, 300000), (200000, 400000)),
            ((75000, 125000), (200000, 400000), (300000, 500000)),
            ((25000, 75000), (300000, 500000), (100000, 300000)),
        ]
        srange, inside, outside = table[band]
        lo, hi = inside if srange[0] <= salary <= srange[1] else outside
        return lo <= loan <= hi
    if fn == 6:
        lo, hi = [(50000, 100000), (75000, 125000), (25000, 75000)][band]
        return lo <= total <= hi
    if fn == 7:
        return 2 * total / 3 - loan / 5 - 20000 > 0
    if fn == 8:
        return 2 * total / 3 - 5000 * elevel - 20000 > 0
    if fn == 9:
        return 2 * total / 3 - 5000 * elevel - loan / 5 - 10000 > 0
    equity = hvalue * (hyears - 20) / 10 if hyears >= 20 else 0.0
    return 2 * total / 3 - 5000 * elevel + equity / 5 - 10000 > 0


def test_agrawal_label_hand_cases():
    base = dict(salary=60000.0, commission=0.0, age=30.0, elevel=0.0, car=3.0,
                zipcode=2.0, hvalue=500000.0, hyears=10.0, loan=0.0)

    def lab(fn, **kw):
        return agrawal_label(fn, **{**base, **kw})

    assert lab(1, age=39) == 0 and lab(1, age=40) == 1
    assert lab(1, age=59) == 1 and lab(1, age=60) == 0
    assert lab(2, age=30, salary=50000) == 0
    assert lab(2, age=30, salary=49999) == 1
    assert lab(2, age=50, salary=100000) == 0
    assert lab(2, age=65, salary=75000) == 0
    assert lab(3, age=30, elevel=1) == 0 and lab(3, age=30, elevel=2) == 1
    assert lab(7, salary=90000, loan=0) == 0
    assert lab(7, salary=30000, loan=0) == 1  # disposable exactly 0 is group B
    assert lab(10, salary=60000, elevel=0, hyears=20, hvalue=100000) == 0


def test_agrawal_label_random_oracle():
    rng = random.Random(23)
    for _ in range(1000):
        args = dict(
            salary=rng.uniform(20000, 150000),
            commission=rng.choice([0.0, rng.uniform(10000, 75000)]),
            age=float(rng.randrange(20, 81)),
            elevel=float(rng.randrange(5)),
            car=float(rng.randrange(20)),
            zipcode=float(rng.randrange(9)),
            hvalue=rng.uniform(0, 1350000),
            hyears=float(rng.randrange(1, 31)),
            loan=rng.uniform(0, 500000),
        )
        for fn in range(1, 11):
            expected = 0 if _oracle_group_a(fn, **args) else 1
            assert agrawal_label(fn, **args) == expected, (fn, args)


def test_agrawal_generator_matches_label_function_without_perturbation():
    gen = AgrawalGenerator(AgrawalConfig(function=4, perturbation=0.0, seed=9))
    for inst in gen.take(1000):
        assert inst.y == agrawal_label(4, *inst.x)


def test_agrawal_feature_ranges():
    for inst in AgrawalGenerator(AgrawalConfig(seed=2)).take(2000):
        s, com, age, elevel, car, zc, hv, hy, loan = inst.x
        assert 20000 <= s <= 150000
        assert com == 0.0 or 10000 <= com <= 75000
        assert 20 <= age <= 80 and age == int(age)
        assert elevel in range(5) and car in range(20) and zc in range(9)
        assert 0.0 <= hv <= 1350000.0
        assert 1 <= hy <= 30 and hy == int(hy)
        assert 0.0 <= loan <= 500000.0


def test_agrawal_config_validation():
    with pytest.raises(ConfigurationError):
        AgrawalConfig(function=11)
    with pytest.raises(ConfigurationError):
        AgrawalConfig(perturbation=-0.1)


# ---------------------------------------------------------------------------
# Schema conformance and determinism across every generator


def _conforms(schema, inst):
    assert inst.x.shape == (schema.n_features,)
    assert np.isfinite(inst.x).all()
    for j, count in enumerate(schema.nominal_value_counts()):
        if count:
            v = inst.x[j]
            assert v == int(v) and 0 <= v < count
    assert inst.y is not None and 0 <= inst.y < schema.n_classes


@pytest.mark.parametrize(
    "config",
    [
        SeaConfig(seed=11),
        AgrawalConfig(function=6, seed=11),
        RbfConfig(seed=11),
        HyperplaneConfig(magnitude=0.001, seed=11),
        RtgConfig(seed=11),
    ],
    ids=lambda c: type(c).__name__,
)
def test_schema_conformance_10k_draws(config):
    stream = create_generator(config)
    schema = stream.schema
    for inst in stream.take(10000):
        _conforms(schema, inst)


@pytest.mark.parametrize("name", streams.STREAM_NAMES)
def test_named_streams_deterministic(name):
    first = make_stream(name, seed=7, length=300).take(300)
    second = make_stream(name, seed=7, length=300).take(300)
    assert len(first) == len(second) == 300
    for a, b in zip(first, second):
        assert np.array_equal(a.x, b.x) and a.y == b.y
    other = make_stream(name, seed=8, length=300).take(300)
    assert any(
        not np.array_equal(a.x, c.x) or a.y != c.y for a, c in zip(first, other)
    )


def test_generator_examples_schemas():
    assert make_stream("sea").schema.n_features == 3
    assert make_stream("sea").schema.n_classes == 2
    assert make_stream("agr").schema.n_features == 9
    assert make_stream("agr").schema.n_classes == 2
    assert make_stream("rbf").schema.n_features == 10
    assert make_stream("rbf").schema.n_classes == 5


def test_make_stream_errors():
    with pytest.raises(ConfigurationError):
        make_stream("nope")
    with pytest.raises(ConfigurationError):
        make_stream("sea_a")  # change points need a length
    with pytest.raises(ConfigurationError):
        create_generator(object())


# ---------------------------------------------------------------------------
# Drift wrapping


def test_mix_probability_anchors():
    assert drift_mix_probability(500, 500, 40) == 0.5
    assert drift_mix_probability(100, 500, 40) < 1e-15
    expected = 1.0 / (1.0 + math.exp(-4.0))
    assert abs(drift_mix_probability(540, 500, 40) - expected) < 1e-12
    assert drift_mix_probability(1, 10**9, 1) == 0.0  # far tail, no overflow


def _constant_streams(n):
    schema = StreamSchema("c", (Feature("a"),), ("0", "1"))
    zeros = lambda: ArrayStream(schema, np.zeros((n, 1)), np.zeros(n, dtype=int))
    ones = lambda: ArrayStream(schema, np.ones((n, 1)), np.ones(n, dtype=int))
    return zeros, ones


def test_mix_frequency_tracks_sigmoid():
    """Successor frequency at fixed offsets, 10k independent mixes per point."""
    position, width = 20, 8
    t_max = position + width
    zeros, ones = _constant_streams(t_max)
    hits = np.zeros(t_max)
    n_runs = 10000
    for seed in range(n_runs):
        run = DriftStream(zeros(), ones(), DriftSpec(position, width), seed=seed)
        for t, inst in enumerate(run.take(t_max)):
            hits[t] += inst.y
    for t in (position - width, position - width // 2, position,
              position + width // 2, position + width):
        expected = drift_mix_probability(t, position, width)
        assert abs(hits[t - 1] / n_runs - expected) < 0.03


def test_drift_stream_prefix_and_schema_guard():
    zeros, ones = _constant_streams(200)
    run = DriftStream(zeros(), ones(), DriftSpec(100, 1), seed=4)
    head = run.take(25)
    assert all(inst.y == 0 for inst in head)  # sigmoid is ~0 far before p
    incompatible = ArrayStream(
        StreamSchema("w", (Feature("a"), Feature("b")), ("0", "1")),
        np.zeros((5, 2)),
        np.zeros(5, dtype=int),
    )
    with pytest.raises(ConfigurationError):
        DriftStream(zeros(), incompatible, DriftSpec(3, 1))
    with pytest.raises(ConfigurationError):
        DriftSpec(0, 1)
    with pytest.raises(ConfigurationError):
        DriftSpec(5, 0)


def test_chained_variant_switches_concepts():
    """The abrupt SEA variant turns over its concept at the quarter points."""
    n = 8000
    taken = make_stream("sea_a", seed=1, length=n).take(n)
    xs = np.array([inst.x for inst in taken])
    ys = np.array([inst.y for inst in taken])
    # threshold 8 then 9: the second quarter should label more sums as class 0
    q1 = slice(0, n // 4)
    q2 = slice(n // 4, n // 2)
    frac0_q1 = (ys[q1] == 0).mean()
    frac0_q2 = (ys[q2] == 0).mean()
    assert frac0_q2 > frac0_q1 + 0.03
    # and the feature marginals stay put
    assert abs(xs[q1].mean() - xs[q2].mean()) < 0.2


# ---------------------------------------------------------------------------
# File ingestion


def test_csv_load_basic(tmp_path):
    path = tmp_path / "toy.csv"
    path.write_text(
        "# comment line\n"
        "f1,f2,class\n"
        "1.5,2.0,yes\n"
        "0.5,1.0,no\n"
        "2.5,3.5,yes\n"
    )
    stream = load_dataset(str(path))
    assert stream.schema.n_features == 2
    assert stream.schema.n_classes == 2
    assert stream.schema.class_labels == ("no", "yes")  # sorted
    got = stream.take(10)
    assert len(got) == 3
    assert got[0].y == 1 and got[1].y == 0
    assert np.array_equal(got[0].x, [1.5, 2.0])


def test_csv_electricity_shape(tmp_path):
    cols = ["date", "day", "period", "nswprice", "nswdemand", "vicprice",
            "vicdemand", "transfer"]
    rows = ["%s,%d" % (",".join("0.%d" % (i + j) for j in range(8)), i % 2)
            for i in range(4)]
    path = tmp_path / "elec.csv"
    path.write_text(",".join(cols) + ",class\n" + "\n".join(rows) + "\n")
    stream = load_dataset(str(path))
    assert stream.schema.n_features == 8
    assert stream.schema.n_classes == 2


def test_csv_errors(tmp_path):
    missing_class = tmp_path / "a.csv"
    missing_class.write_text("f1,f2\n1,2\n")
    with pytest.raises(SchemaError):
        load_dataset(str(missing_class))

    short_row = tmp_path / "b.csv"
    short_row.write_text("f1,f2,class\n1,2,x\n1,y\n2,3,y\n")
    with pytest.raises(DataError) as err:
        load_dataset(str(short_row))
    assert "line 3" in str(err.value)

    bad_value = tmp_path / "c.csv"
    bad_value.write_text("f1,class\n1,x\noops,y\n")
    with pytest.raises(DataError) as err:
        load_dataset(str(bad_value))
    assert "line 3" in str(err.value)

    with pytest.raises(ConfigurationError):
        load_dataset(str(bad_value), fmt="xml")


def test_csv_class_column_flag(tmp_path):
    path = tmp_path / "flag.csv"
    path.write_text("target,f1\nup,1.0\ndown,2.0\n")
    stream = load_dataset(str(path), class_column="target")
    assert stream.schema.n_features == 1
    assert stream.schema.class_labels == ("down", "up")


ARFF_TEXT = """% a comment
@relation toy
@attribute width numeric
@attribute kind {a, b}
@attribute class {neg, pos}
@data
1.5, a, pos
2.5, b, neg
"""


def test_arff_load_basic(tmp_path):
    path = tmp_path / "toy.arff"
    path.write_text(ARFF_TEXT)
    stream = load_dataset(str(path))
    schema = stream.schema
    assert schema.name == "toy"
    assert schema.n_features == 2
    assert list(schema.nominal_value_counts()) == [0, 2]
    got = stream.take(5)
    assert got[0].y == 1 and got[1].y == 0
    assert got[0].x[1] == 0.0 and got[1].x[1] == 1.0


def test_arff_unknown_nominal_value_names_line(tmp_path):
    path = tmp_path / "bad.arff"
    path.write_text(ARFF_TEXT + "3.5, c, pos\n")
    with pytest.raises(DataError) as err:
        load_dataset(str(path))
    assert "line 9" in str(err.value)
    assert "'c'" in str(err.value)


def test_arff_schema_errors(tmp_path):
    numeric_class = tmp_path / "nc.arff"
    numeric_class.write_text(
        "@relation r\n@attribute f numeric\n@attribute class numeric\n@data\n1,2\n"
    )
    with pytest.raises(SchemaError):
        load_dataset(str(numeric_class))

    no_data = tmp_path / "nd.arff"
    no_data.write_text("@relation r\n@attribute f numeric\n")
    with pytest.raises(SchemaError):
        load_dataset(str(no_data))


def test_csv_write_read_round_trip(tmp_path):
    stream = make_stream("sea", seed=13, length=50)
    taken = stream.take(50)
    path = tmp_path / "sea.csv"
    write_csv(str(path), stream.schema, taken, comment="round trip")
    back = load_dataset(str(path))
    assert back.schema.compatible(stream.schema)
    got = back.take(100)
    assert len(got) == 50
    for orig, copy in zip(taken, got):
        assert np.array_equal(orig.x, copy.x)
        assert orig.y == copy.y
    assert path.read_text().startswith("#")
