"""Adaptive windowing: exact small-scale replay, statistics, detection."""

from __future__ import annotations

import math
import random

import numpy as np
import pytest

from streamforest.drift import AdwinDetector
from streamforest.errors import ConfigurationError


class WindowReplay:
    """Reference detector keeping every element as its own bucket.

    With ``max_buckets`` at least as large as the element count the real
    histogram never merges, so both sides see identical bucket layouts and
    identical floating-point arithmetic; every field must match exactly.
    """

    def __init__(self, delta):
        self.delta = delta
        self.window = []
        self.width = 0
        self.total = 0.0
        self.var = 0.0
        self.n_detections = 0

    def _scan(self):
        n = float(self.width)
        sigma2 = self.var / n
        lg = math.log(2.0 * n / self.delta)
        a_coef = 2.0 * sigma2 * lg * n
        b_coef = (2.0 / 3.0) * lg * n
        n0 = 0
        s0 = 0.0
        found = -1
        for idx, v in enumerate(self.window):
            n0 += 1
            s0 += v
            n1 = self.width - n0
            if n1 <= 0:
                return found
            lhs = abs(s0 * n1 - (self.total - s0) * n0)
            if lhs >= math.sqrt(a_coef * (1.0 * n0 * n1)) + b_coef:
                found = idx
        return found

    def _drop_oldest(self):
        v = self.window.pop(0)
        rest = self.width - 1
        if rest > 0:
            d = v - (self.total - v) / rest
            self.var -= 0.0 + (1.0 * rest / (1 + rest)) * d * d
            if self.var < 0.0:
                self.var = 0.0
        else:
            self.var = 0.0
        self.width = rest
        self.total -= v

    def add(self, value):
        if self.width > 0:
            d = value - self.total / self.width
            self.var += d * d * self.width / (self.width + 1.0)
        self.window.append(value)
        self.width += 1
        self.total += value
        changed = False
        while self.width >= 2:
            cut = self._scan()
            if cut < 0:
                break
            changed = True
            for _ in range(cut + 1):
                self._drop_oldest()
        if changed:
            self.n_detections += 1
        return changed


def test_two_value_example():
    det = AdwinDetector()
    assert det.add(0.0) is False
    assert det.add(1.0) is False
    assert det.width == 2
    assert det.estimate == 0.5
    assert det.total == 1.0


def test_empty_detector():
    det = AdwinDetector()
    assert det.width == 0
    assert det.estimate == 0.0
    assert det.n_detections == 0


def test_domain_and_config_errors():
    det = AdwinDetector()
    with pytest.raises(ValueError):
        det.add(-0.1)
    with pytest.raises(ValueError):
        det.add(1.5)
    with pytest.raises(ConfigurationError):
        AdwinDetector(delta=0.0)
    with pytest.raises(ConfigurationError):
        AdwinDetector(delta=1.0)
    with pytest.raises(ConfigurationError):
        AdwinDetector(max_buckets=0)


@pytest.mark.parametrize("case", ["bernoulli", "uniform"])
def test_uncompressed_histogram_replays_exactly(case):
    delta = 0.01
    det = AdwinDetector(delta=delta, max_buckets=1024)
    ref = WindowReplay(delta)
    rng = random.Random(99 if case == "bernoulli" else 7)
    for t in range(500):
        if case == "bernoulli":
            p = 0.3 if t < 300 else 0.9
            v = 1.0 if rng.random() < p else 0.0
        else:
            v = rng.uniform(0.0, 0.4) if t < 250 else rng.uniform(0.6, 1.0)
        assert det.add(v) == ref.add(v)
        assert det.width == ref.width
        assert det.total == ref.total
        assert det.variance_sum == ref.var
        assert det.n_detections == ref.n_detections
    assert ref.n_detections > 0  # the shift was large enough to be caught
    assert det.buckets() == [(1, v, 0.0) for v in ref.window]


def test_compressed_histogram_integrity():
    """Default bucket budget: counts stay exact, moments stay consistent."""
    det = AdwinDetector(delta=1e-7)
    rng = random.Random(5)
    raw = []
    for _ in range(3000):
        v = float(rng.random() < 0.5)
        raw.append(v)
        det.add(v)
    assert det.n_detections == 0  # stationary and a tiny delta
    assert det.width == 3000
    assert det.total == sum(raw)
    assert math.isclose(det.variance_sum, np.var(raw) * len(raw), rel_tol=1e-9)
    buckets = det.buckets()
    sizes = [b[0] for b in buckets]
    assert sum(sizes) == det.width
    assert math.isclose(sum(b[1] for b in buckets), det.total, rel_tol=1e-12)
    assert all(size & (size - 1) == 0 for size in sizes)  # powers of two
    assert sizes == sorted(sizes, reverse=True)  # oldest buckets are largest
    for size in set(sizes):
        assert sizes.count(size) <= det.max_buckets + 1


def test_window_tracks_the_new_level():
    det = AdwinDetector(delta=0.002)
    rng = random.Random(11)
    for t in range(2000):
        p = 0.2 if t < 1000 else 0.8
        det.add(float(rng.random() < p))
    assert det.n_detections >= 1
    assert abs(det.estimate - 0.8) < 0.05
    assert det.width < 1500  # the pre-change half was discarded


def test_step_change_is_flagged_quickly():
    hits = 0
    for seed in range(30):
        rng = random.Random(1000 + seed)
        det = AdwinDetector(delta=0.002)
        flags = []
        for t in range(1, 701):
            p = 0.2 if t <= 500 else 0.8
            if det.add(float(rng.random() < p)):
                flags.append(t)
        if len(flags) == 1 and 500 <= flags[0] <= 650:
            hits += 1
    assert hits >= 27


def test_stationary_false_positive_rate():
    noisy = 0
    for seed in range(30):
        rng = random.Random(2000 + seed)
        det = AdwinDetector(delta=1e-5)
        if any(det.add(float(rng.random() < 0.5)) for _ in range(3000)):
            noisy += 1
    assert noisy <= 2
