# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False, cdivision=False
"""Hot-path kernel: RNG, adaptive windowing, incremental trees and forests.

This module is written in Cython's pure-Python mode.  When the package is
built with a C compiler it is compiled to an extension module and the inner
loops run at C speed; otherwise the very same file executes on the plain
interpreter.  Both paths perform identical floating-point operations, so
results are bit-for-bit reproducible across backends.

Everything here is deliberately low level.  User-facing classes with
validation and friendlier constructors live in the sibling modules
(``hoeffding``, ``drift``, ``arf``).
"""

import cython
import numpy as np

if cython.compiled:
    from cython.cimports.libc.math import exp, fabs, log, sqrt
else:
    from math import exp, fabs, log, sqrt

COMPILED = cython.compiled

MASK64 = cython.declare(cython.ulonglong, 0xFFFFFFFFFFFFFFFF)
INV_2_53 = cython.declare(cython.double, 1.0 / 9007199254740992.0)
LOG2_E = cython.declare(cython.double, 1.4426950408889634)  # 1/ln(2)
INV_SQRT_2PI = cython.declare(cython.double, 0.3989422804014327)

# leaf statistics layout (per slot, see Tree): numeric slots hold five blocks
# of n_classes doubles each
_W = cython.declare(cython.int, 0)
_MEAN = cython.declare(cython.int, 1)
_M2 = cython.declare(cython.int, 2)
_MIN = cython.declare(cython.int, 3)
_MAX = cython.declare(cython.int, 4)


def mix_seed(a, b):
    """Derive a new 64-bit seed from two integers (splitmix-style scramble)."""
    z = (
        (int(a) & 0xFFFFFFFFFFFFFFFF) * 0xBF58476D1CE4E5B9
        + (int(b) & 0xFFFFFFFFFFFFFFFF) * 0x94D049BB133111EB
        + 0x9E3779B97F4A7C15
    ) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return z ^ (z >> 31)


@cython.cclass
class Rng:
    """splitmix64 generator; small, fast, and identical on both backends."""

    state: cython.ulonglong
    _spare: cython.double
    _has_spare: cython.bint

    def __init__(self, seed):
        self.state = int(seed) & 0xFFFFFFFFFFFFFFFF
        self._spare = 0.0
        self._has_spare = False

    @cython.cfunc
    def _next_u64(self) -> cython.ulonglong:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z: cython.ulonglong = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    @cython.ccall
    def next_float(self) -> cython.double:
        """Uniform draw in [0, 1) with 53 random bits."""
        return (self._next_u64() >> 11) * INV_2_53

    @cython.ccall
    def next_below(self, n: cython.int) -> cython.int:
        """Uniform integer in [0, n)."""
        v: cython.int = cython.cast(cython.int, self.next_float() * n)
        return v

    @cython.ccall
    def gauss(self) -> cython.double:
        """Standard normal draw (Marsaglia polar, cached spare)."""
        if self._has_spare:
            self._has_spare = False
            return self._spare
        u: cython.double = 0.0
        v: cython.double = 0.0
        s: cython.double = 0.0
        while s >= 1.0 or s == 0.0:
            u = 2.0 * self.next_float() - 1.0
            v = 2.0 * self.next_float() - 1.0
            s = u * u + v * v
        mul: cython.double = sqrt(-2.0 * log(s) / s)
        self._spare = v * mul
        self._has_spare = True
        return u * mul

    @cython.ccall
    def poisson(self, lam: cython.double) -> cython.int:
        """Poisson draw by CDF inversion (fine for the small means used here)."""
        u: cython.double = self.next_float()
        p: cython.double = exp(-lam)
        acc: cython.double = p
        k: cython.int = 0
        while u > acc and k < 1000:
            k += 1
            p *= lam / k
            acc += p
        return k

    @cython.ccall
    def subset(self, n: cython.int, m: cython.int):
        """m distinct indices drawn from range(n), returned sorted."""
        pool = np.arange(n, dtype=np.int32)
        buf: cython.int[::1] = pool
        i: cython.int
        j: cython.int
        tmp: cython.int
        for i in range(m):
            j = i + self.next_below(n - i)
            tmp = buf[i]
            buf[i] = buf[j]
            buf[j] = tmp
        out = np.sort(pool[:m])
        return out

    @cython.ccall
    def spawn(self, tag):
        """Derived generator whose stream is independent of this one's future."""
        return Rng(mix_seed(self._next_u64(), tag))


@cython.cfunc
def _norm_cdf(x: cython.double) -> cython.double:
    """Standard normal CDF, polynomial approximation (abs err < 7.5e-8).

    Implemented with exp() only so both backends evaluate the exact same
    arithmetic; interpreter and C library erf() are not guaranteed to agree
    in the last ulp.
    """
    ax: cython.double = fabs(x)
    t: cython.double = 1.0 / (1.0 + 0.2316419 * ax)
    poly: cython.double = (
        ((((1.330274429 * t - 1.821255978) * t + 1.781477937) * t - 0.356563782) * t + 0.319381530) * t
    )
    tail: cython.double = exp(-0.5 * ax * ax) * INV_SQRT_2PI * poly
    if x >= 0.0:
        return 1.0 - tail
    return tail


@cython.cclass
class Adwin:
    """Adaptive sliding window over values in [0, 1].

    Stores the window as an exponential histogram: rows of buckets where row
    r holds summaries of 2**r elements and at most ``max_buckets`` buckets
    (one extra slot absorbs the overflow before compression).  Every insert
    re-checks all admissible cuts between adjacent buckets; when two
    sub-windows disagree beyond the deviation bound, the older portion up to
    and including the most recent offending cut is dropped and the scan
    repeats until no cut fires.
    """

    delta = cython.declare(cython.double, visibility="readonly")
    max_buckets = cython.declare(cython.int, visibility="readonly")
    n_detections = cython.declare(cython.longlong, visibility="readonly")
    n_seen = cython.declare(cython.longlong, visibility="readonly")

    _cap: cython.int
    _n_rows: cython.int
    _max_row: cython.int
    _cnt: cython.int[::1]
    _sums: cython.double[:, ::1]
    _vars: cython.double[:, ::1]
    _width: cython.longlong
    _total: cython.double
    _var: cython.double

    def __init__(self, delta, max_buckets=5):
        if not 0.0 < delta < 1.0:
            raise ValueError(f"delta must be in (0, 1), got {delta}")
        if max_buckets < 1:
            raise ValueError(f"max_buckets must be >= 1, got {max_buckets}")
        self.delta = delta
        self.max_buckets = max_buckets
        self._cap = max_buckets + 1
        self._n_rows = 4
        self._max_row = 0
        self._cnt = np.zeros(self._n_rows, dtype=np.int32)
        self._sums = np.zeros((self._n_rows, self._cap))
        self._vars = np.zeros((self._n_rows, self._cap))
        self._width = 0
        self._total = 0.0
        self._var = 0.0
        self.n_detections = 0
        self.n_seen = 0

    def _grow_rows(self):
        new_rows = self._n_rows * 2
        cnt = np.zeros(new_rows, dtype=np.int32)
        sums = np.zeros((new_rows, self._cap))
        vrs = np.zeros((new_rows, self._cap))
        cnt[: self._n_rows] = np.asarray(self._cnt)
        sums[: self._n_rows] = np.asarray(self._sums)
        vrs[: self._n_rows] = np.asarray(self._vars)
        self._cnt = cnt
        self._sums = sums
        self._vars = vrs
        self._n_rows = new_rows

    @cython.cfunc
    def _compress(self):
        r: cython.int = 0
        i: cython.int
        while self._cnt[r] == self._cap:
            if r + 1 >= self._n_rows:
                self._grow_rows()
            size: cython.double = cython.cast(cython.double, cython.cast(cython.longlong, 1) << r)
            mu0: cython.double = self._sums[r, 0] / size
            mu1: cython.double = self._sums[r, 1] / size
            d: cython.double = mu0 - mu1
            merged_sum: cython.double = self._sums[r, 0] + self._sums[r, 1]
            merged_var: cython.double = self._vars[r, 0] + self._vars[r, 1] + 0.5 * size * d * d
            nxt: cython.int = self._cnt[r + 1]
            self._sums[r + 1, nxt] = merged_sum
            self._vars[r + 1, nxt] = merged_var
            self._cnt[r + 1] = nxt + 1
            if r + 1 > self._max_row:
                self._max_row = r + 1
            for i in range(self._cnt[r] - 2):
                self._sums[r, i] = self._sums[r, i + 2]
                self._vars[r, i] = self._vars[r, i + 2]
            self._cnt[r] -= 2
            r += 1

    @cython.cfunc
    def _drop_oldest(self):
        """Remove the single oldest bucket and patch the running moments."""
        r: cython.int = self._max_row
        while self._cnt[r] == 0:
            r -= 1
        size: cython.longlong = cython.cast(cython.longlong, 1) << r
        bsum: cython.double = self._sums[r, 0]
        bvar: cython.double = self._vars[r, 0]
        rest: cython.longlong = self._width - size
        if rest > 0:
            mu_b: cython.double = bsum / size
            mu_rest: cython.double = (self._total - bsum) / rest
            d: cython.double = mu_b - mu_rest
            self._var -= bvar + (cython.cast(cython.double, size) * rest / (size + rest)) * d * d
            if self._var < 0.0:
                self._var = 0.0
        else:
            self._var = 0.0
        self._width = rest
        self._total -= bsum
        i: cython.int
        for i in range(self._cnt[r] - 1):
            self._sums[r, i] = self._sums[r, i + 1]
            self._vars[r, i] = self._vars[r, i + 1]
        self._cnt[r] -= 1
        while self._max_row > 0 and self._cnt[self._max_row] == 0:
            self._max_row -= 1

    @cython.cfunc
    def _scan(self) -> cython.int:
        """Index (oldest-first) of the newest cut that violates the bound, or -1.

        The textbook test is |s0/n0 - s1/n1| >= sqrt(2 sigma2 lg / m) +
        (2/3) lg / m with 1/m = 1/n0 + 1/n1.  Multiplying through by n0*n1
        turns it into the division-free form used below (n0*n1*(1/n0+1/n1)
        equals the window size), which matters because this runs on every
        insertion.
        """
        n: cython.double = cython.cast(cython.double, self._width)
        sigma2: cython.double = self._var / n
        lg: cython.double = log(2.0 * n / self.delta)  # ln(2/delta'), delta' = delta/n
        a_coef: cython.double = 2.0 * sigma2 * lg * n
        b_coef: cython.double = (2.0 / 3.0) * lg * n
        n0: cython.longlong = 0
        s0: cython.double = 0.0
        found: cython.int = -1
        idx: cython.int = 0
        r: cython.int
        i: cython.int
        for r in range(self._max_row, -1, -1):
            size: cython.longlong = cython.cast(cython.longlong, 1) << r
            for i in range(self._cnt[r]):
                n0 += size
                s0 += self._sums[r, i]
                n1: cython.longlong = self._width - n0
                if n1 <= 0:
                    return found
                prod: cython.double = 1.0 * n0 * n1
                lhs: cython.double = fabs(s0 * n1 - (self._total - s0) * n0)
                if lhs >= sqrt(a_coef * prod) + b_coef:
                    found = idx
                idx += 1
        return found

    @cython.ccall
    def add(self, value: cython.double) -> cython.bint:
        """Insert a value; True when the window shrank on a detected change."""
        if value < 0.0 or value > 1.0:
            raise ValueError(f"value must be in [0, 1], got {value}")
        self.n_seen += 1
        if self._width > 0:
            d: cython.double = value - self._total / self._width
            self._var += d * d * self._width / (self._width + 1.0)
        c0: cython.int = self._cnt[0]
        self._sums[0, c0] = value
        self._vars[0, c0] = 0.0
        self._cnt[0] = c0 + 1
        self._width += 1
        self._total += value
        self._compress()

        changed: cython.bint = False
        k: cython.int
        while self._width >= 2:
            cut: cython.int = self._scan()
            if cut < 0:
                break
            changed = True
            for k in range(cut + 1):
                self._drop_oldest()
        if changed:
            self.n_detections += 1
        return changed

    @cython.ccall
    def width(self) -> cython.longlong:
        return self._width

    @cython.ccall
    def estimate(self) -> cython.double:
        if self._width == 0:
            return 0.0
        return self._total / self._width

    @cython.ccall
    def total(self) -> cython.double:
        return self._total

    @cython.ccall
    def variance_sum(self) -> cython.double:
        """Accumulated sum of squared deviations over the current window."""
        return self._var

    def buckets(self):
        """(size, sum, variance_sum) per bucket, oldest first.  For tests."""
        out = []
        for r in range(self._max_row, -1, -1):
            for i in range(self._cnt[r]):
                out.append((1 << r, self._sums[r, i], self._vars[r, i]))
        return out


@cython.cclass
class Node:
    """One tree node; a leaf carries sufficient statistics until it splits."""

    is_leaf = cython.declare(cython.bint, visibility="readonly")
    split_feature = cython.declare(cython.int, visibility="readonly")
    threshold = cython.declare(cython.double, visibility="readonly")
    children = cython.declare(list, visibility="readonly")
    frozen_weight = cython.declare(cython.double, visibility="readonly")
    active = cython.declare(cython.int[::1], visibility="readonly")
    class_counts = cython.declare(cython.double[::1], visibility="readonly")
    total_weight = cython.declare(cython.double, visibility="readonly")
    nb_ok = cython.declare(cython.double, visibility="readonly")
    mc_ok = cython.declare(cython.double, visibility="readonly")
    n_pos_classes = cython.declare(cython.int, visibility="readonly")

    _stat: cython.double[::1]
    _off: cython.int[::1]
    _last_attempt: cython.double

    def __init__(self):
        self.is_leaf = True
        self.split_feature = -1
        self.threshold = 0.0
        self.children = None
        self.frozen_weight = 0.0
        self.total_weight = 0.0
        self.nb_ok = 0.0
        self.mc_ok = 0.0
        self.n_pos_classes = 0
        self._last_attempt = 0.0

    def stat_array(self):
        """Copy of the raw statistics block (tests, audits)."""
        if self._stat is None:
            return None
        return np.asarray(self._stat).copy()

    def slot_offsets(self):
        if self._off is None:
            return None
        return np.asarray(self._off).copy()


@cython.cclass
class Tree:
    """Incremental decision tree with adaptive naive-Bayes leaves.

    Split decisions use the deviation bound for information gain estimated
    from the leaf's accumulated class counts; numeric features are summarised
    per class by Gaussian sufficient statistics, nominal features by count
    tables.  Each leaf watches only ``subspace`` randomly chosen features,
    fixed at leaf creation.
    """

    n_classes = cython.declare(cython.int, visibility="readonly")
    n_features = cython.declare(cython.int, visibility="readonly")
    subspace = cython.declare(cython.int, visibility="readonly")
    grace = cython.declare(cython.double, visibility="readonly")
    split_confidence = cython.declare(cython.double, visibility="readonly")
    tie_threshold = cython.declare(cython.double, visibility="readonly")
    leaf_mode = cython.declare(cython.int, visibility="readonly")  # 0 adaptive, 1 nb, 2 mc
    tree_id = cython.declare(cython.longlong, visibility="readonly")
    n_splits = cython.declare(cython.longlong, visibility="readonly")
    trained_weight = cython.declare(cython.double, visibility="readonly")
    root = cython.declare(Node, visibility="readonly")
    audit = cython.declare(cython.bint, visibility="readonly")
    split_log = cython.declare(list, visibility="readonly")

    _n_values: cython.int[::1]
    _rng: Rng
    _range: cython.double  # log2(n_classes), the metric's value range
    _scratch: cython.double[::1]
    _right: cython.double[::1]
    _thr: cython.double[::1]

    def __init__(
        self,
        n_classes,
        n_values,
        subspace,
        grace=50.0,
        split_confidence=0.01,
        tie_threshold=0.05,
        leaf_mode=0,
        seed=0,
        audit=False,
        tree_id=0,
    ):
        self.n_classes = n_classes
        self._n_values = np.ascontiguousarray(n_values, dtype=np.int32)
        self.n_features = self._n_values.shape[0]
        self.subspace = subspace
        self.grace = grace
        self.split_confidence = split_confidence
        self.tie_threshold = tie_threshold
        self.leaf_mode = leaf_mode
        self.tree_id = tree_id
        self.audit = audit
        self.split_log = [] if audit else None
        self.n_splits = 0
        self.trained_weight = 0.0
        self._rng = Rng(seed)
        self._range = log(n_classes) * LOG2_E
        self._scratch = np.empty(n_classes)
        self._right = np.empty(n_classes)
        self._thr = np.zeros(1)
        self.root = self._make_leaf()

    @cython.cfunc
    def _make_leaf(self) -> Node:
        node: Node = Node()
        m: cython.int = self.subspace
        node.active = self._rng.subset(self.n_features, m)
        node.class_counts = np.zeros(self.n_classes)
        off = np.zeros(m, dtype=np.int32)
        size: cython.int = 0
        j: cython.int
        f: cython.int
        v: cython.int
        for j in range(m):
            off[j] = size
            f = node.active[j]
            v = self._n_values[f]
            if v > 0:
                size += v * self.n_classes
            else:
                size += 5 * self.n_classes
        node._off = off
        stat = np.zeros(size)
        node._stat = stat
        # initialise the min/max blocks of numeric slots
        M: cython.int = self.n_classes
        c: cython.int
        for j in range(m):
            f = node.active[j]
            if self._n_values[f] == 0:
                base: cython.int = node._off[j]
                for c in range(M):
                    node._stat[base + _MIN * M + c] = np.inf
                    node._stat[base + _MAX * M + c] = -np.inf
        return node

    @cython.cfunc
    def _route(self, x: cython.double[::1]) -> Node:
        node: Node = self.root
        idx: cython.int
        while not node.is_leaf:
            f: cython.int = node.split_feature
            if self._n_values[f] > 0:
                idx = cython.cast(cython.int, x[f])
            else:
                idx = 0 if x[f] <= node.threshold else 1
            node = cython.cast(Node, node.children[idx])
        return node

    @cython.cfunc
    def _leaf_scores(self, node: Node, x: cython.double[::1], out: cython.double[::1], mode: cython.int):
        """Fill ``out`` with the leaf's class distribution under ``mode``."""
        M: cython.int = self.n_classes
        c: cython.int
        tot: cython.double = node.total_weight
        if tot <= 0.0:
            for c in range(M):
                out[c] = 1.0 / M
            return
        use_nb: cython.bint
        if mode == 1:
            use_nb = True
        elif mode == 2:
            use_nb = False
        else:
            use_nb = node.nb_ok >= node.mc_ok
        # with a single observed class both rules emit the same one-hot vector
        if use_nb and node.n_pos_classes > 1 and self._nb_scores(node, x, out):
            return
        for c in range(M):
            out[c] = node.class_counts[c] / tot

    @cython.cfunc
    def _nb_scores(self, node: Node, x: cython.double[::1], out: cython.double[::1]) -> cython.bint:
        """Naive-Bayes posterior from leaf statistics; False if degenerate."""
        M: cython.int = self.n_classes
        m: cython.int = node.active.shape[0]
        c: cython.int
        j: cython.int
        tot: cython.double = node.total_weight
        for c in range(M):
            out[c] = node.class_counts[c] / tot
        for j in range(m):
            f: cython.int = node.active[j]
            base: cython.int = node._off[j]
            nv: cython.int = self._n_values[f]
            v: cython.double = x[f]
            if nv > 0:
                vi: cython.int = cython.cast(cython.int, v)
                for c in range(M):
                    if out[c] == 0.0:
                        continue
                    col: cython.double = 0.0
                    k: cython.int
                    for k in range(nv):
                        col += node._stat[base + k * M + c]
                    out[c] *= (node._stat[base + vi * M + c] + 1.0) / (col + nv)
            else:
                for c in range(M):
                    if out[c] == 0.0:
                        continue
                    w: cython.double = node._stat[base + _W * M + c]
                    if w <= 0.0:
                        continue
                    mu: cython.double = node._stat[base + _MEAN * M + c]
                    var: cython.double = 0.0
                    if w > 1.0:
                        var = node._stat[base + _M2 * M + c] / (w - 1.0)
                    if var > 0.0:
                        sd: cython.double = sqrt(var)
                        z: cython.double = (v - mu) / sd
                        out[c] *= exp(-0.5 * z * z) * INV_SQRT_2PI / sd
                    elif v != mu:
                        out[c] = 0.0
        s: cython.double = 0.0
        for c in range(M):
            s += out[c]
        if s <= 0.0:
            return False
        for c in range(M):
            out[c] /= s
        return True

    @cython.ccall
    def predict_proba(self, x: cython.double[::1], out: cython.double[::1]):
        node: Node = self._route(x)
        self._leaf_scores(node, x, out, self.leaf_mode)

    @cython.ccall
    def train(self, x: cython.double[::1], y: cython.int, weight: cython.double):
        if weight <= 0.0:
            return
        node: Node = self._route(x)
        M: cython.int = self.n_classes
        c: cython.int
        # bookkeeping for the adaptive leaf rule, using pre-update statistics
        if node.total_weight > 0.0:
            best: cython.int = 0
            for c in range(1, M):
                if node.class_counts[c] > node.class_counts[best]:
                    best = c
            if best == y:
                node.mc_ok += weight
            nb_best: cython.int = best  # degenerate posterior falls back to the count vote
            if node.n_pos_classes > 1 and self._nb_scores(node, x, self._scratch):
                nb_best = 0
                for c in range(1, M):
                    if self._scratch[c] > self._scratch[nb_best]:
                        nb_best = c
            if nb_best == y:
                node.nb_ok += weight
        if node.class_counts[y] == 0.0:
            node.n_pos_classes += 1
        node.class_counts[y] += weight
        node.total_weight += weight
        self.trained_weight += weight
        m: cython.int = node.active.shape[0]
        j: cython.int
        for j in range(m):
            f: cython.int = node.active[j]
            base: cython.int = node._off[j]
            nv: cython.int = self._n_values[f]
            v: cython.double = x[f]
            if nv > 0:
                node._stat[base + cython.cast(cython.int, v) * M + y] += weight
            else:
                w0: cython.double = node._stat[base + _W * M + y]
                w1: cython.double = w0 + weight
                mu: cython.double = node._stat[base + _MEAN * M + y]
                d: cython.double = v - mu
                mu += weight * d / w1
                node._stat[base + _W * M + y] = w1
                node._stat[base + _MEAN * M + y] = mu
                node._stat[base + _M2 * M + y] += weight * d * (v - mu)
                if v < node._stat[base + _MIN * M + y]:
                    node._stat[base + _MIN * M + y] = v
                if v > node._stat[base + _MAX * M + y]:
                    node._stat[base + _MAX * M + y] = v
        if node.total_weight - node._last_attempt >= self.grace:
            node._last_attempt = node.total_weight
            self._attempt_split(node)

    @cython.cfunc
    def _entropy(self, counts: cython.double[::1], total: cython.double) -> cython.double:
        if total <= 0.0:
            return 0.0
        h: cython.double = 0.0
        c: cython.int
        for c in range(counts.shape[0]):
            w: cython.double = counts[c]
            if w > 0.0:
                p: cython.double = w / total
                h -= p * log(p) * LOG2_E
        return h

    @cython.cfunc
    def _gain_numeric(self, node: Node, j: cython.int, h0: cython.double, best_thr: cython.double[::1]) -> cython.double:
        M: cython.int = self.n_classes
        base: cython.int = node._off[j]
        lo: cython.double = np.inf
        hi: cython.double = -np.inf
        c: cython.int
        for c in range(M):
            if node._stat[base + _W * M + c] > 0.0:
                if node._stat[base + _MIN * M + c] < lo:
                    lo = node._stat[base + _MIN * M + c]
                if node._stat[base + _MAX * M + c] > hi:
                    hi = node._stat[base + _MAX * M + c]
        if not hi > lo:
            return -1.0
        left: cython.double[::1] = self._scratch
        rbuf: cython.double[::1] = self._right
        best: cython.double = -1.0
        k: cython.int
        for k in range(1, 11):
            t: cython.double = lo + (hi - lo) * k / 11.0
            if t <= lo or t >= hi:
                continue
            wl: cython.double = 0.0
            wr: cython.double = 0.0
            for c in range(M):
                w: cython.double = node._stat[base + _W * M + c]
                if w <= 0.0:
                    left[c] = 0.0
                    rbuf[c] = 0.0
                    continue
                lmass: cython.double
                if t < node._stat[base + _MIN * M + c]:
                    lmass = 0.0
                elif t >= node._stat[base + _MAX * M + c]:
                    lmass = w
                else:
                    var: cython.double = 0.0
                    if w > 1.0:
                        var = node._stat[base + _M2 * M + c] / (w - 1.0)
                    if var > 0.0:
                        mu: cython.double = node._stat[base + _MEAN * M + c]
                        lmass = w * _norm_cdf((t - mu) / sqrt(var))
                    else:
                        lmass = w if t >= node._stat[base + _MEAN * M + c] else 0.0
                left[c] = lmass
                rbuf[c] = w - lmass
                if rbuf[c] < 0.0:
                    rbuf[c] = 0.0
                wl += left[c]
                wr += rbuf[c]
            tot: cython.double = wl + wr
            if tot <= 0.0:
                continue
            g: cython.double = h0 - (wl / tot) * self._entropy(left, wl) - (wr / tot) * self._entropy(rbuf, wr)
            if g > best:
                best = g
                best_thr[0] = t
        return best

    @cython.cfunc
    def _attempt_split(self, node: Node):
        if node.n_pos_classes < 2:
            return
        c: cython.int
        h0: cython.double = self._entropy(node.class_counts, node.total_weight)
        m: cython.int = node.active.shape[0]
        g1: cython.double = -1.0
        g2: cython.double = -1.0
        j1: cython.int = -1
        thr1: cython.double = 0.0
        tbuf: cython.double[::1] = self._thr
        j: cython.int
        for j in range(m):
            f: cython.int = node.active[j]
            g: cython.double
            t: cython.double = 0.0
            if self._n_values[f] > 0:
                g = self._nominal_gain(node, j, h0)
            else:
                g = self._gain_numeric(node, j, h0, tbuf)
                t = tbuf[0]
            if g > g1:
                g2 = g1
                g1 = g
                j1 = j
                thr1 = t
            elif g > g2:
                g2 = g
        if g1 <= 0.0:
            return
        if g2 < 0.0:
            g2 = 0.0
        n: cython.double = node.total_weight
        eps: cython.double = sqrt(self._range * self._range * log(1.0 / self.split_confidence) / (2.0 * n))
        if not (g1 - g2 > eps or eps < self.tie_threshold):
            return
        f1: cython.int = node.active[j1]
        if self.audit:
            self.split_log.append(
                {
                    "feature": int(f1),
                    "threshold": float(thr1) if self._n_values[f1] == 0 else None,
                    "g1": float(g1),
                    "g2": float(g2),
                    "eps": float(eps),
                    "n": float(n),
                    "class_counts": np.asarray(node.class_counts).copy(),
                    "stat": np.asarray(node._stat).copy(),
                    "offsets": np.asarray(node._off).copy(),
                    "active": np.asarray(node.active).copy(),
                }
            )
        node.is_leaf = False
        node.split_feature = f1
        node.frozen_weight = node.total_weight
        n_children: cython.int = 2
        if self._n_values[f1] > 0:
            n_children = self._n_values[f1]
            node.threshold = 0.0
        else:
            node.threshold = thr1
        kids = []
        k: cython.int
        for k in range(n_children):
            kids.append(self._make_leaf())
        node.children = kids
        node._stat = None
        node._off = None
        self.n_splits += 1

    @cython.cfunc
    def _nominal_gain(self, node: Node, j: cython.int, h0: cython.double) -> cython.double:
        M: cython.int = self.n_classes
        base: cython.int = node._off[j]
        nv: cython.int = self._n_values[node.active[j]]
        child: cython.double[::1] = self._scratch
        acc: cython.double = 0.0
        v: cython.int
        c: cython.int
        for v in range(nv):
            wv: cython.double = 0.0
            for c in range(M):
                child[c] = node._stat[base + v * M + c]
                wv += child[c]
            if wv > 0.0:
                acc += (wv / node.total_weight) * self._entropy(child, wv)
        return h0 - acc

    # ---- introspection (plain Python speed is fine here) ----

    def n_nodes(self):
        """(internal, leaf) node counts."""
        internal = 0
        leaves = 0
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                leaves += 1
            else:
                internal += 1
                stack.extend(node.children)
        return internal, leaves

    def depth(self):
        best = 0
        stack = [(self.root, 0)]
        while stack:
            node, d = stack.pop()
            if node.is_leaf:
                if d > best:
                    best = d
            else:
                stack.extend((ch, d + 1) for ch in node.children)
        return best

    def root_split(self):
        """(feature, threshold-or-None) of the root, or None while a leaf."""
        if self.root.is_leaf:
            return None
        f = self.root.split_feature
        if self._n_values[f] > 0:
            return f, None
        return f, self.root.threshold

    def n_values_array(self):
        return np.asarray(self._n_values).copy()

    def dump(self):
        """Indented text rendering of the tree structure."""
        lines = []

        def walk(node, indent, label):
            pad = "  " * indent
            if node.is_leaf:
                counts = ", ".join(f"{v:g}" for v in np.asarray(node.class_counts))
                lines.append(f"{pad}{label}leaf n={node.total_weight:g} counts=[{counts}]")
            else:
                f = node.split_feature
                if self._n_values[f] > 0:
                    lines.append(f"{pad}{label}split x{f} (nominal, {self._n_values[f]} branches)")
                else:
                    lines.append(f"{pad}{label}split x{f} <= {node.threshold:.6g}")
                for i, ch in enumerate(node.children):
                    walk(ch, indent + 1, f"[{i}] ")

        walk(self.root, 0, "")
        return "\n".join(lines)


@cython.cclass
class Member:
    """One forest member: live tree, optional background tree, two detectors."""

    tree = cython.declare(Tree, visibility="readonly")
    bkg = cython.declare(Tree, visibility="readonly")
    warn = cython.declare(Adwin, visibility="readonly")
    drift = cython.declare(Adwin, visibility="readonly")
    n_warnings = cython.declare(cython.longlong, visibility="readonly")
    n_drifts = cython.declare(cython.longlong, visibility="readonly")

    _rng: Rng
    _seed_base: cython.ulonglong
    _spawn: cython.longlong

    def __init__(self, tree, seed_base, poisson_seed, delta_warning, delta_drift):
        self.tree = tree
        self.bkg = None
        self.warn = Adwin(delta_warning)
        self.drift = Adwin(delta_drift)
        self._rng = Rng(poisson_seed)
        self._seed_base = int(seed_base) & 0xFFFFFFFFFFFFFFFF
        self._spawn = 0
        self.n_warnings = 0
        self.n_drifts = 0


@cython.cclass
class Forest:
    """Bagged ensemble of trees with per-member change monitoring.

    Each member resamples every instance with a Poisson weight, watches its
    own pre-update 0/1 error through two windows (a sensitive one for
    warnings, a conservative one for drifts), grows a background tree during
    a warning, and swaps it in when the drift window fires.  Votes are
    weighted by each member's windowed accuracy.
    """

    n_classes = cython.declare(cython.int, visibility="readonly")
    n_features = cython.declare(cython.int, visibility="readonly")
    n_trees = cython.declare(cython.int, visibility="readonly")
    subspace = cython.declare(cython.int, visibility="readonly")
    lam = cython.declare(cython.double, visibility="readonly")
    delta_warning = cython.declare(cython.double, visibility="readonly")
    delta_drift = cython.declare(cython.double, visibility="readonly")
    disable_background = cython.declare(cython.bint, visibility="readonly")
    warn_count = cython.declare(cython.longlong, visibility="readonly")
    drift_count = cython.declare(cython.longlong, visibility="readonly")
    members = cython.declare(list, visibility="readonly")

    _grace: cython.double
    _split_confidence: cython.double
    _tie_threshold: cython.double
    _leaf_mode: cython.int
    _n_values: cython.int[::1]
    _tmp: cython.double[::1]
    _acc: cython.double[::1]
    _next_tree_id: cython.longlong

    def __init__(
        self,
        n_classes,
        n_values,
        n_trees,
        subspace,
        grace=50.0,
        split_confidence=0.01,
        tie_threshold=0.05,
        leaf_mode=0,
        lam=6.0,
        delta_warning=1e-4,
        delta_drift=1e-5,
        seed=0,
        disable_background=False,
    ):
        self.n_classes = n_classes
        self._n_values = np.ascontiguousarray(n_values, dtype=np.int32)
        self.n_features = self._n_values.shape[0]
        self.n_trees = n_trees
        self.subspace = subspace
        self.lam = lam
        self.delta_warning = delta_warning
        self.delta_drift = delta_drift
        self.disable_background = disable_background
        self._grace = grace
        self._split_confidence = split_confidence
        self._tie_threshold = tie_threshold
        self._leaf_mode = leaf_mode
        self._tmp = np.empty(n_classes)
        self._acc = np.empty(n_classes)
        self._next_tree_id = 0
        self.warn_count = 0
        self.drift_count = 0
        self.members = []
        i: cython.int
        for i in range(n_trees):
            base = mix_seed(seed, i)
            tree = self._new_tree(mix_seed(base, 1))
            self.members.append(Member(tree, base, mix_seed(base, 2), delta_warning, delta_drift))

    @cython.cfunc
    def _new_tree(self, seed) -> Tree:
        tid: cython.longlong = self._next_tree_id
        self._next_tree_id = tid + 1
        return Tree(
            self.n_classes,
            np.asarray(self._n_values),
            self.subspace,
            self._grace,
            self._split_confidence,
            self._tie_threshold,
            self._leaf_mode,
            seed,
            False,
            tid,
        )

    @cython.cfunc
    def _train_member(self, mem: Member, x: cython.double[::1], y: cython.int, predicted: cython.int):
        """Resample-train one member and feed its monitors the pre-update error."""
        err: cython.double = 0.0 if predicted == y else 1.0
        k: cython.int = mem._rng.poisson(self.lam)
        if k > 0:
            mem.tree.train(x, y, k)
            if mem.bkg is not None:
                mem.bkg.train(x, y, k)
        warned: cython.bint = mem.warn.add(err)
        drifted: cython.bint = mem.drift.add(err)
        if warned:
            mem.n_warnings += 1
            self.warn_count += 1
            if not self.disable_background:
                mem._spawn += 1
                mem.bkg = self._new_tree(mix_seed(mem._seed_base, 100 + mem._spawn))
            mem.warn = Adwin(self.delta_warning)
        if drifted:
            mem.n_drifts += 1
            self.drift_count += 1
            if mem.bkg is not None:
                mem.tree = mem.bkg
                mem.bkg = None
            else:
                mem._spawn += 1
                mem.tree = self._new_tree(mix_seed(mem._seed_base, 100 + mem._spawn))
            mem.warn = Adwin(self.delta_warning)
            mem.drift = Adwin(self.delta_drift)

    @cython.ccall
    def train(self, x: cython.double[::1], y: cython.int):
        """One test-then-train step for every member."""
        M: cython.int = self.n_classes
        i: cython.int
        c: cython.int
        for i in range(self.n_trees):
            mem: Member = cython.cast(Member, self.members[i])
            mem.tree.predict_proba(x, self._tmp)
            best: cython.int = 0
            for c in range(1, M):
                if self._tmp[c] > self._tmp[best]:
                    best = c
            self._train_member(mem, x, y, best)

    @cython.ccall
    def predict_proba(self, x: cython.double[::1], out: cython.double[::1]):
        """Accuracy-weighted mean of member posteriors.

        Falls back to the unweighted mean when no member has positive
        weight, so unanimous members pass through regardless of weights.
        """
        M: cython.int = self.n_classes
        c: cython.int
        i: cython.int
        for c in range(M):
            out[c] = 0.0
            self._acc[c] = 0.0
        wsum: cython.double = 0.0
        for i in range(self.n_trees):
            mem: Member = cython.cast(Member, self.members[i])
            mem.tree.predict_proba(x, self._tmp)
            w: cython.double = 1.0 - mem.warn.estimate()
            for c in range(M):
                self._acc[c] += self._tmp[c]
            if w > 0.0:
                for c in range(M):
                    out[c] += w * self._tmp[c]
                wsum += w
        if wsum > 0.0:
            for c in range(M):
                out[c] /= wsum
        else:
            for c in range(M):
                out[c] = self._acc[c] / self.n_trees

    @cython.ccall
    def predict_then_train(self, x: cython.double[::1], y: cython.int, do_train: cython.bint, out: cython.double[::1]):
        """Vote and (optionally) train in one member sweep.

        Members are independent, so computing each member's vote immediately
        before its own update yields exactly the same numbers as a full
        predict pass followed by a full train pass, at two-thirds the cost.
        """
        M: cython.int = self.n_classes
        c: cython.int
        i: cython.int
        for c in range(M):
            out[c] = 0.0
            self._acc[c] = 0.0
        wsum: cython.double = 0.0
        for i in range(self.n_trees):
            mem: Member = cython.cast(Member, self.members[i])
            mem.tree.predict_proba(x, self._tmp)
            w: cython.double = 1.0 - mem.warn.estimate()
            for c in range(M):
                self._acc[c] += self._tmp[c]
            if w > 0.0:
                for c in range(M):
                    out[c] += w * self._tmp[c]
                wsum += w
            if do_train:
                best: cython.int = 0
                for c in range(1, M):
                    if self._tmp[c] > self._tmp[best]:
                        best = c
                self._train_member(mem, x, y, best)
        if wsum > 0.0:
            for c in range(M):
                out[c] /= wsum
        else:
            for c in range(M):
                out[c] = self._acc[c] / self.n_trees

    # ---- introspection ----

    def member_weight(self, i):
        mem = cython.cast(Member, self.members[i])
        return 1.0 - mem.warn.estimate()

    def member_predict_proba(self, i, x):
        mem = cython.cast(Member, self.members[i])
        out = np.empty(self.n_classes)
        mem.tree.predict_proba(np.ascontiguousarray(x, dtype=np.float64), out)
        return out

    def member_state(self, i):
        """Snapshot of one member, for tests and summaries."""
        mem = cython.cast(Member, self.members[i])
        internal, leaves = mem.tree.n_nodes()
        return {
            "tree_id": int(mem.tree.tree_id),
            "background_id": int(mem.bkg.tree_id) if mem.bkg is not None else None,
            "weight": 1.0 - mem.warn.estimate(),
            "warn_width": int(mem.warn.width()),
            "drift_width": int(mem.drift.width()),
            "n_warnings": int(mem.n_warnings),
            "n_drifts": int(mem.n_drifts),
            "tree_internal": internal,
            "tree_leaves": leaves,
        }

    def total_nodes(self):
        tot = 0
        for i in range(self.n_trees):
            mem = cython.cast(Member, self.members[i])
            internal, leaves = mem.tree.n_nodes()
            tot += internal + leaves
        return tot
