"""Hot numeric kernels: CART split search and batch tree routing.

Each kernel exists twice. The loop form is compiled with numba ``@njit``
and is the default; a vectorized pure-numpy twin is selected instead when
``WARDEN_NUMBA=0`` is set or numba is unavailable. Both twins mirror each
other's arithmetic expression-for-expression so they return bit-identical
results (tests/test_kernels.py checks this; benchmarks/bench_kernels.py
compares their speed).

Split candidates are ordered by weighted child impurity with ties going
to the lower feature index, then the lower threshold. Ties are decided
in exact integer arithmetic, not floats: mathematically equal impurities
can differ in the last ulp when computed from different count splits, and
a float-only comparison would then pick the wrong candidate. Candidates
whose float impurities differ by more than 1e-9 are ordered by the float
fast path (float error is ~1e-15, far below the band); anything closer
is resolved exactly.

Kernel contracts are fixed to the binary-label, float64-feature layout:
``X`` C-contiguous (n, f) float64, ``y`` int64 with values in {0, 1}, and
``feature_indices`` an int64 array sorted ascending (the caller sorts; the
ascending scan is what makes the lower-feature-index tie-break hold).
"""

from __future__ import annotations

import logging
import os

import numpy as np

logger = logging.getLogger(__name__)

ENV_FLAG = "WARDEN_NUMBA"
_FALSY = {"0", "false", "off", "no"}

_TIE_BAND = 1e-9

# Exact candidate ordering: weighted impurity times n equals A/n_l + B/n_r
# with A = n_l^2 - zeros_l^2 - ones_l^2 (and B likewise for the right), all
# integers. Comparing A1/nl1 + B1/nr1 against A2/nl2 + B2/nr2 cross-multiplies
# to pure integer arithmetic. The int64 products can wrap for huge nodes, but
# wrapping is a ring homomorphism mod 2^64, so the difference of the two cross
# products still carries the true sign while the true difference is below
# 2^63; inside the 1e-9 float band that holds for any node under ~10^5 rows.


# -- loop forms (numba-compilable) -------------------------------------------


def best_split_loops(X, y, feature_indices):
    """Exhaustive midpoint split search minimizing weighted child Gini.

    Scans every feature in the given (ascending) order and every midpoint
    between consecutive distinct sorted values; the running best only
    changes on a strictly better candidate, so the first optimum in scan
    order wins. Returns ``(found, feature, threshold, weighted_impurity)``;
    not found when the node is pure or no feature has two distinct values.
    """
    n = X.shape[0]
    total_ones = 0
    for i in range(n):
        total_ones += y[i]
    total_zeros = n - total_ones
    if total_zeros == 0 or total_ones == 0:
        return False, -1, 0.0, 0.0
    found = False
    best_feature = -1
    best_threshold = 0.0
    best_impurity = np.inf
    best_num = 0
    best_den = 1
    n_f = float(n)
    for k in range(feature_indices.shape[0]):
        j = feature_indices[k]
        col = X[:, j]
        order = np.argsort(col)
        left_zeros = 0
        left_ones = 0
        for i in range(n - 1):
            if y[order[i]] == 1:
                left_ones += 1
            else:
                left_zeros += 1
            v = col[order[i]]
            v_next = col[order[i + 1]]
            if v == v_next:
                continue
            n_left = float(i + 1)
            n_right = n_f - n_left
            p_l0 = left_zeros / n_left
            p_l1 = left_ones / n_left
            gini_left = 1.0 - (p_l0 * p_l0 + p_l1 * p_l1)
            p_r0 = (total_zeros - left_zeros) / n_right
            p_r1 = (total_ones - left_ones) / n_right
            gini_right = 1.0 - (p_r0 * p_r0 + p_r1 * p_r1)
            weighted = (n_left / n_f) * gini_left + (n_right / n_f) * gini_right
            nl = i + 1
            nr = n - nl
            rz = total_zeros - left_zeros
            ro = total_ones - left_ones
            num = (nl * nl - left_zeros * left_zeros - left_ones * left_ones) * nr + (
                nr * nr - rz * rz - ro * ro
            ) * nl
            den = nl * nr
            if not found:
                take = True
            elif weighted < best_impurity - _TIE_BAND:
                take = True
            elif weighted <= best_impurity + _TIE_BAND:
                take = num * best_den - best_num * den < 0
            else:
                take = False
            if take:
                found = True
                best_feature = j
                best_threshold = (v + v_next) / 2.0
                best_impurity = weighted
                best_num = num
                best_den = den
    if not found:
        return False, -1, 0.0, 0.0
    return True, int(best_feature), best_threshold, best_impurity


def route_tree_loops(node_feature, node_threshold, node_left, node_right, node_value, X):
    """Route every row of X through a flattened tree; returns the leaf classes.

    Nodes are parallel arrays (preorder); ``node_feature`` is -1 at leaves.
    Routing goes left when value <= threshold, right otherwise.
    """
    n = X.shape[0]
    out = np.empty(n, dtype=np.int64)
    for r in range(n):
        node = 0
        while node_feature[node] >= 0:
            if X[r, node_feature[node]] <= node_threshold[node]:
                node = node_left[node]
            else:
                node = node_right[node]
        out[r] = node_value[node]
    return out


# -- vectorized numpy twins ---------------------------------------------------

_WRAP = 1 << 64


def _signed_mod(value: int) -> int:
    """Python-int equivalent of two's-complement int64 wrapping."""
    value %= _WRAP
    return value - _WRAP if value >= (_WRAP >> 1) else value


def best_split_numpy(X, y, feature_indices):
    """Vectorized twin of :func:`best_split_loops` (identical contract and results)."""
    n = X.shape[0]
    total_ones = int(y.sum())
    total_zeros = n - total_ones
    if total_zeros == 0 or total_ones == 0:
        return False, -1, 0.0, 0.0
    n_f = float(n)
    w_parts = []
    thr_parts = []
    feat_parts = []
    num_parts = []
    den_parts = []
    for j in feature_indices:
        col = X[:, j]
        order = np.argsort(col)
        sorted_vals = col[order]
        sorted_y = y[order]
        cut = np.nonzero(sorted_vals[:-1] != sorted_vals[1:])[0]
        if cut.size == 0:
            continue
        left_ones_i = np.cumsum(sorted_y)[cut]
        nl_i = cut + 1
        left_zeros_i = nl_i - left_ones_i
        nr_i = n - nl_i
        rz_i = total_zeros - left_zeros_i
        ro_i = total_ones - left_ones_i

        n_left = nl_i.astype(np.float64)
        left_ones = left_ones_i.astype(np.float64)
        left_zeros = n_left - left_ones
        n_right = n_f - n_left
        p_l0 = left_zeros / n_left
        p_l1 = left_ones / n_left
        gini_left = 1.0 - (p_l0 * p_l0 + p_l1 * p_l1)
        p_r0 = (total_zeros - left_zeros) / n_right
        p_r1 = (total_ones - left_ones) / n_right
        gini_right = 1.0 - (p_r0 * p_r0 + p_r1 * p_r1)
        weighted = (n_left / n_f) * gini_left + (n_right / n_f) * gini_right

        w_parts.append(weighted)
        thr_parts.append((sorted_vals[cut] + sorted_vals[cut + 1]) / 2.0)
        feat_parts.append(np.full(cut.size, j, dtype=np.int64))
        num_parts.append(
            (nl_i * nl_i - left_zeros_i * left_zeros_i - left_ones_i * left_ones_i) * nr_i
            + (nr_i * nr_i - rz_i * rz_i - ro_i * ro_i) * nl_i
        )
        den_parts.append(nl_i * nr_i)
    if not w_parts:
        return False, -1, 0.0, 0.0
    w_all = np.concatenate(w_parts)
    thr_all = np.concatenate(thr_parts)
    feat_all = np.concatenate(feat_parts)
    num_all = np.concatenate(num_parts)
    den_all = np.concatenate(den_parts)

    # candidates are already in scan order (ascending feature, then threshold);
    # resolve everything within the float band of the minimum exactly
    near = np.nonzero(w_all <= w_all.min() + _TIE_BAND)[0]
    best = -1
    best_num = 0
    best_den = 1
    for idx in near:
        num = int(num_all[idx])
        den = int(den_all[idx])
        if best < 0 or _signed_mod(num * best_den - best_num * den) < 0:
            best = int(idx)
            best_num = num
            best_den = den
    return True, int(feat_all[best]), float(thr_all[best]), float(w_all[best])


def route_tree_numpy(node_feature, node_threshold, node_left, node_right, node_value, X):
    """Vectorized twin of :func:`route_tree_loops` using pointer jumping."""
    n = X.shape[0]
    node = np.zeros(n, dtype=np.int64)
    active = node_feature[node] >= 0
    while active.any():
        idx = np.nonzero(active)[0]
        current = node[idx]
        go_left = X[idx, node_feature[current]] <= node_threshold[current]
        node[idx] = np.where(go_left, node_left[current], node_right[current])
        active[idx] = node_feature[node[idx]] >= 0
    return node_value[node]


# -- backend selection --------------------------------------------------------


def _numba_requested() -> bool:
    return os.environ.get(ENV_FLAG, "").strip().lower() not in _FALSY


def jit_kernels():
    """Compile and return the numba builds of both kernels.

    Raises ImportError when numba is not installed; used by the module
    initializer and by the benchmark script, which needs both backends
    regardless of the env flag.
    """
    from numba import njit

    return (
        njit(cache=True)(best_split_loops),
        njit(cache=True)(route_tree_loops),
    )


def _select_backend():
    if _numba_requested():
        try:
            split, route = jit_kernels()
            return "numba", split, route
        except ImportError:
            logger.warning("numba unavailable; falling back to the numpy kernels")
    return "numpy", best_split_numpy, route_tree_numpy


_BACKEND, best_split_kernel, route_tree_kernel = _select_backend()


def active_backend() -> str:
    """Which kernel build is live: ``"numba"`` or ``"numpy"``."""
    return _BACKEND
