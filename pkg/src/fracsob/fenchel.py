"""Legendre-Fenchel conjugates of sampled convex functions.

Two routes are provided and are meant to be checked against each other:

* :func:`conjugate_brute` maximises ``x*y_i - g_i`` over every sample.
* :func:`conjugate_linear` builds the lower convex hull of the samples and
  merges it with the sorted query slopes in a single sweep (the linear-time
  Legendre transform).

Queries outside the range of slopes attained by the samples return ``inf``;
a sampled function stands in for a convex function whose conjugate is
infinite beyond its extreme slopes.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "NonConvexError",
    "lower_hull",
    "is_convex",
    "slope_range",
    "conjugate_brute",
    "conjugate_linear",
    "biconjugate",
    "young_fenchel",
]

# relative slack on the slope-range guard, absorbs rounding in the hull slopes
_SLOPE_RTOL = 1e-9


class NonConvexError(ValueError):
    """Raised when samples that must be convex are not."""


def _prepare(y, g):
    y = np.asarray(y, dtype=float)
    g = np.asarray(g, dtype=float)
    if y.ndim != 1 or y.shape != g.shape:
        raise ValueError("y and g must be 1-D arrays of equal length")
    if y.size < 2:
        raise ValueError("at least two samples are required")
    if np.any(np.diff(y) <= 0):
        raise ValueError("y must be strictly increasing")
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(g))):
        raise ValueError("samples must be finite")
    return y, g


def lower_hull(y, g) -> np.ndarray:
    """Indices of the vertices of the lower convex hull (monotone chain)."""
    y, g = _prepare(y, g)
    hull: list[int] = []
    for i in range(y.size):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            # drop b when it lies on or above the chord a -> i
            cross = (y[b] - y[a]) * (g[i] - g[a]) - (g[b] - g[a]) * (y[i] - y[a])
            if cross <= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    return np.asarray(hull, dtype=int)


def is_convex(y, g, rtol: float = 1e-10) -> bool:
    """True when consecutive chord slopes are non-decreasing (within rtol)."""
    y, g = _prepare(y, g)
    s = np.diff(g) / np.diff(y)
    if s.size < 2:
        return True
    scale = np.maximum(np.abs(s[1:]), np.abs(s[:-1])) + 1.0
    return bool(np.all(np.diff(s) >= -rtol * scale))


def convexity_violations(y, g, rtol: float = 1e-10) -> np.ndarray:
    """Interior sample indices where the chord slope decreases."""
    y, g = _prepare(y, g)
    s = np.diff(g) / np.diff(y)
    scale = np.maximum(np.abs(s[1:]), np.abs(s[:-1])) + 1.0
    return np.nonzero(np.diff(s) < -rtol * scale)[0] + 1


def slope_range(y, g) -> tuple[float, float]:
    """Smallest and largest slope of the lower convex hull.

    Computed directly from the samples (no hull construction): the first
    hull edge is the steepest-descending chord from the leftmost point and
    the last edge the steepest-ascending chord into the rightmost point.
    """
    y, g = _prepare(y, g)
    lo = np.min((g[1:] - g[0]) / (y[1:] - y[0]))
    hi = np.max((g[-1] - g[:-1]) / (y[-1] - y[:-1]))
    return float(lo), float(hi)


def _outside(x, lo, hi, closed=(False, False)):
    # a closed side means the sample grid ends at the true domain boundary,
    # so slopes beyond it are still attained (at the end sample)
    tol_lo = _SLOPE_RTOL * (abs(lo) + 1.0)
    tol_hi = _SLOPE_RTOL * (abs(hi) + 1.0)
    below = np.zeros(np.shape(x), bool) if closed[0] else x < lo - tol_lo
    above = np.zeros(np.shape(x), bool) if closed[1] else x > hi + tol_hi
    return below | above


def conjugate_brute(y, g, x, closed=(False, False)) -> np.ndarray:
    """``g*(x) = max_i (x*y_i - g_i)`` by exhaustive search.

    O(len(y) * len(x)); used as the oracle for :func:`conjugate_linear`.
    """
    y, g = _prepare(y, g)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    lo, hi = slope_range(y, g)
    out = np.empty(x.shape)
    chunk = max(1, 2_000_000 // y.size)
    flat = x.ravel()
    res = out.ravel()
    for s in range(0, flat.size, chunk):
        xs = flat[s:s + chunk]
        res[s:s + chunk] = np.max(xs[:, None] * y[None, :] - g[None, :], axis=1)
    out[_outside(x, lo, hi, closed)] = np.inf
    return out


def conjugate_linear(y, g, x, closed=(False, False)) -> np.ndarray:
    """Linear-time Legendre transform of sampled ``g`` at query slopes ``x``.

    The lower hull is built in O(n); the sorted queries are then merged with
    the increasing hull slopes in one pass, so the total cost is
    O(n + m) for sorted queries (plus an O(m log m) sort otherwise).
    Non-convex samples are handled implicitly through the hull, which leaves
    the conjugate unchanged.

    ``closed`` marks grid ends that coincide with the boundary of the
    function's domain; queries beyond the slope range on such a side are
    finite (the supremum sits at the end sample).
    """
    y, g = _prepare(y, g)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    idx = lower_hull(y, g)
    hy, hg = y[idx], g[idx]
    slopes = np.diff(hg) / np.diff(hy)

    flat = x.ravel()
    order = np.argsort(flat, kind="stable")
    res = np.empty(flat.size)
    k = 0
    nk = slopes.size
    for j in order:
        xj = flat[j]
        # advance to the vertex whose incoming slope <= xj <= outgoing slope
        while k < nk and slopes[k] < xj:
            k += 1
        res[j] = xj * hy[k] - hg[k]
    res = res.reshape(x.shape)
    lo = slopes[0] if nk else -np.inf
    hi = slopes[-1] if nk else np.inf
    res[_outside(x, lo, hi, closed)] = np.inf
    return res


def biconjugate(y, g, method: str = "linear") -> np.ndarray:
    """``g**`` at the sample nodes, using the hull slopes as dual grid."""
    y, g = _prepare(y, g)
    idx = lower_hull(y, g)
    slopes = np.diff(g[idx]) / np.diff(y[idx])
    conj = conjugate_linear if method == "linear" else conjugate_brute
    gs = conj(y, g, slopes)
    # g**(y) = max_k (s_k*y - g*(s_k)); g*(s_k) is finite on hull slopes.
    # g* is linear beyond the extreme slopes, so the dual grid is closed.
    if slopes.size >= 2:
        return conj(slopes, gs, y, closed=(True, True))
    return y * slopes[0] - gs[0]


def young_fenchel(g, x, y=None, method: str = "linear",
                  check_convex: bool = True):
    """Young-Fenchel transform ``g*(x) = sup_y (x*y - g(y))``.

    Parameters
    ----------
    g : array_like or callable
        Samples of a convex function on ``y``, or a callable evaluated on
        ``y``.
    x : float or array_like
        Query slopes.
    y : array_like
        Strictly increasing sample grid; required.
    method : {"linear", "brute"}
        Production sweep or exhaustive oracle.
    check_convex : bool
        Verify convexity of the samples first.

    Returns
    -------
    float or ndarray
        Conjugate values, ``inf`` outside the attainable slope range.
    """
    if y is None:
        raise ValueError("a sample grid y is required")
    y = np.asarray(y, dtype=float)
    gv = np.asarray(g(y) if callable(g) else g, dtype=float)
    if check_convex and not is_convex(y, gv):
        bad = convexity_violations(y, gv)
        raise NonConvexError(
            f"samples are not convex near y={y[bad[:5]].tolist()}")
    if method == "linear":
        out = conjugate_linear(y, gv, x)
    elif method == "brute":
        out = conjugate_brute(y, gv, x)
    else:
        raise ValueError(f"unknown method {method!r}")
    return float(out[0]) if np.ndim(x) == 0 else out
