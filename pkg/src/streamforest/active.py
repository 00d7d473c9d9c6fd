"""Budgeted active-learning strategies over posterior certainty.

All strategies share one accountant: k counts instances seen, c labels
bought, and queries are only allowed while c/k stays below the budget B
(k already includes the instance being decided, which is what lets a
budget of 1 label everything and a budget of 0 label nothing).  The
certainty score is the maximum posterior probability.

Strategies:

* ``vu``   variable uncertainty: query when certainty < theta, then
  shrink theta by (1 - s); otherwise grow it by (1 + s).  The threshold
  chases the certainty distribution, spending about half the stream.
* ``vru``  randomized variant: the comparison uses theta * max(eta, 0)
  with eta ~ N(1, 1) redrawn per decision; theta itself updates as in vu.
* ``ss``   selective sampling: ignore theta, query with probability
  b / (b + margin) where margin is the gap between the two largest
  posterior entries.
* ``avu``  augmented vu: like vu, but when certainty >= theta it still
  queries with probability 2(B - 0.5), which is what makes the full
  budget reachable for B > 0.5 while collapsing to vu for B <= 0.5.

``threshold_trajectory`` iterates the expected-threshold recurrence for
certainty uniform on [a, b]:

    theta' = ((theta - a)/(b - a)) theta (1 - s)
           + ((b - theta)/(b - a)) theta (1 + s)

whose fixed point is (a + b)/2, the analytic anchor the vu strategies
are tested against.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from ._backend import core
from .errors import ConfigurationError

__all__ = [
    "BudgetState",
    "VariableUncertainty",
    "RandomizedVariableUncertainty",
    "SelectiveSampling",
    "AugmentedVariableUncertainty",
    "make_strategy",
    "threshold_trajectory",
    "label_fraction_simulation",
    "STRATEGY_NAMES",
]

STRATEGY_NAMES = ("vu", "vru", "ss", "avu")


@dataclass
class BudgetState:
    """Labeling accountant: c of k instances labeled under budget B."""

    budget: float
    step: float = 0.01
    c: int = 0
    k: int = 0
    threshold: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.budget <= 1.0:
            raise ConfigurationError(
                "budget must be in [0, 1], got %r" % (self.budget,)
            )
        if not 0.0 < self.step < 1.0:
            raise ConfigurationError(
                "step must be in (0, 1), got %r" % (self.step,)
            )

    @property
    def label_fraction(self) -> float:
        return self.c / self.k if self.k else 0.0


class _Strategy:
    """Shared budget gate and posterior scoring."""

    def __init__(self, budget: float, step: float = 0.01, seed: int = 0):
        self.state = BudgetState(budget=budget, step=step)
        self._rng = random.Random(seed)

    def decide(self, posterior) -> bool:
        """True when the label for this instance should be bought."""
        p = np.sort(np.asarray(posterior, dtype=np.float64))
        margin = p[-1] - p[-2] if len(p) > 1 else p[-1]
        return self.decide_scored(float(p[-1]), float(margin))

    def decide_scored(self, certainty: float, margin: float = 0.0) -> bool:
        """Decide from precomputed scores; the budget gate runs first.

        A gated decision changes nothing but k, in particular not the
        threshold.
        """
        st = self.state
        st.k += 1
        if not st.c / st.k < st.budget:
            return False
        if self._wants(certainty, margin):
            st.c += 1
            return True
        return False

    def _wants(self, certainty: float, margin: float) -> bool:
        raise NotImplementedError


class VariableUncertainty(_Strategy):
    def _wants(self, certainty, margin):
        st = self.state
        if certainty < st.threshold:
            st.threshold *= 1.0 - st.step
            return True
        st.threshold *= 1.0 + st.step
        return False


class AugmentedVariableUncertainty(_Strategy):
    def _wants(self, certainty, margin):
        st = self.state
        rho = self._rng.random()
        if certainty < st.threshold:
            st.threshold *= 1.0 - st.step
            return True
        st.threshold *= 1.0 + st.step
        return rho < 2.0 * (st.budget - 0.5)


class RandomizedVariableUncertainty(_Strategy):
    """The comparison threshold is theta times a positive-clamped N(1, 1).

    Mean 1 keeps the randomization centered on the adaptive threshold;
    a zero-mean multiplier would disable querying half the time outright.
    """

    def _wants(self, certainty, margin):
        st = self.state
        randomized = st.threshold * max(self._rng.gauss(1.0, 1.0), 0.0)
        if certainty < randomized:
            st.threshold *= 1.0 - st.step
            return True
        st.threshold *= 1.0 + st.step
        return False


class SelectiveSampling(_Strategy):
    def __init__(self, budget: float, step: float = 0.01, seed: int = 0,
                 b: float = 1.0):
        super().__init__(budget, step, seed)
        if b <= 0:
            raise ConfigurationError("b must be > 0, got %r" % (b,))
        self.b = b

    def _wants(self, certainty, margin):
        return self._rng.random() < self.b / (self.b + abs(margin))


def make_strategy(name: str, budget: float, step: float = 0.01, seed: int = 0,
                  b: float = 1.0) -> _Strategy:
    name = name.lower()
    if name == "vu":
        return VariableUncertainty(budget, step, seed)
    if name == "vru":
        return RandomizedVariableUncertainty(budget, step, seed)
    if name == "ss":
        return SelectiveSampling(budget, step, seed, b)
    if name == "avu":
        return AugmentedVariableUncertainty(budget, step, seed)
    raise ConfigurationError(
        "unknown strategy %r (choose from %s)" % (name, ", ".join(STRATEGY_NAMES))
    )


def threshold_trajectory(a: float, b: float, step: float, iterations: int,
                         start: float | None = None) -> np.ndarray:
    """Expected-threshold recurrence under certainty uniform on [a, b].

    Starts at b (or ``start``) and returns the whole trajectory including
    the starting point; converges monotonically to (a + b) / 2.
    """
    if not a < b:
        raise ValueError("need a < b, got a=%r b=%r" % (a, b))
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    theta = b if start is None else start
    out = np.empty(iterations + 1)
    out[0] = theta
    span = b - a
    for i in range(iterations):
        down = (theta - a) / span
        theta = down * theta * (1.0 - step) + (1.0 - down) * theta * (1.0 + step)
        out[i + 1] = theta
    return out


def label_fraction_simulation(name: str, budget: float, n: int, seed: int = 0,
                              low: float = 0.0, high: float = 1.0,
                              step: float = 0.01, b: float = 1.0) -> np.ndarray:
    """Run a strategy over synthetic uniform certainty draws.

    Returns c/k after every decision.  The margin handed to ``ss`` is the
    two-class margin ``|2 certainty - 1|``; the other strategies ignore it.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not low < high:
        raise ValueError("need low < high")
    strategy = make_strategy(name, budget, step=step,
                             seed=core.mix_seed(seed, 1), b=b)
    draws = random.Random(core.mix_seed(seed, 2))
    out = np.empty(n)
    st = strategy.state
    for i in range(n):
        certainty = low + (high - low) * draws.random()
        strategy.decide_scored(certainty, abs(2.0 * certainty - 1.0))
        out[i] = st.c / st.k
    return out
