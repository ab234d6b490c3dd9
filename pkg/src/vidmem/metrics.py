"""Spearman's rank correlation with fractional (average) tie ranks.

The shortcut 6*sum(d^2)/(n(n^2-1)) formula is invalid under ties, so SRCC is
always computed as the Pearson correlation of the two rank vectors.
"""

from __future__ import annotations

import numpy as np


class ConstantInputError(ValueError):
    """Raised when either input has no rank variance; correlation undefined."""


def fractional_ranks(values) -> np.ndarray:
    """1-based ranks; tied values all receive the mean of their rank run."""
    v = np.asarray(values, dtype=float)
    order = np.argsort(v, kind="stable")
    ranks = np.empty(len(v))
    i = 0
    while i < len(v):
        j = i
        while j + 1 < len(v) and v[order[j + 1]] == v[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def srcc(predictions, truths) -> float:
    """Spearman rank correlation between two parallel score lists."""
    p = np.asarray(predictions, dtype=float)
    t = np.asarray(truths, dtype=float)
    if p.shape != t.shape or p.ndim != 1:
        raise ValueError("inputs must be parallel 1-d lists")
    if len(p) < 2:
        raise ValueError("need at least two pairs")
    if not (np.all(np.isfinite(p)) and np.all(np.isfinite(t))):
        raise ValueError("inputs must be finite")

    rp = fractional_ranks(p)
    rt = fractional_ranks(t)
    rp_c = rp - rp.mean()
    rt_c = rt - rt.mean()
    var_p = float(rp_c @ rp_c)
    var_t = float(rt_c @ rt_c)
    if var_p == 0.0 or var_t == 0.0:
        raise ConstantInputError("constant input: rank correlation undefined")
    return float(rp_c @ rt_c) / np.sqrt(var_p * var_t)
