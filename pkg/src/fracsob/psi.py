"""Psi-functions, Young-Orlicz functions and fundamental functions.

A psi-function is a positive weight on an exponent interval ``(A, B)``
(``1 <= A < B <= inf``); it defines the Grand Lebesgue norm
``sup_p |f|_p / psi(p)`` and the fundamental function
``phi(delta) = sup_p delta**(1/p) / psi(p)``.

All suprema over ``p`` are computed by :func:`maximize_over_support`: a dense
scan (uniform in ``p`` for bounded support, in ``t`` with
``p = A + t/(1-t)`` otherwise), golden-section refinement around the best
node, and explicit endpoint limits for the closed-form families.
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .fenchel import NonConvexError, conjugate_linear, convexity_violations, is_convex

__all__ = [
    "PsiFunction",
    "YoungFunction",
    "OutsideTabulationError",
    "DegeneratePsiError",
    "grr_log_coefficient",
    "eval_psi",
    "maximize_over_support",
    "fundamental_function",
    "log_fundamental_function",
    "truncated_fundamental_function",
    "psi_from_orlicz",
    "orlicz_from_psi",
    "tail_bound_from_psi",
    "orlicz_fundamental",
    "natural_function_from_family",
    "orlicz_roundtrip",
    "psi_to_text",
    "psi_from_text",
    "young_to_text",
    "young_from_text",
]

INF = math.inf
SCAN_NODES = 512
GOLDEN_ITERS = 80
# threshold below which Orlicz functions built from psi are patched by C*u**2
ORLICZ_PATCH_AT = 3.0


class OutsideTabulationError(ValueError):
    """Exponent lies inside the support but outside the tabulated hull."""


class DegeneratePsiError(ValueError):
    """A would-be psi-function has no point of finite positive value."""


def grr_log_coefficient(alpha: Sequence[float], p):
    """``log(8**d * 4**(d/p) * prod_k (a_k + 1/p) / (a_k - 1/p))``.

    ``inf`` where ``p <= max_k 1/a_k``.
    """
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    p = np.asarray(p, dtype=float)
    d = alpha.size
    inv = 1.0 / p
    out = d * math.log(8.0) + d * inv * math.log(4.0)
    for a in alpha:
        with np.errstate(divide="ignore", invalid="ignore"):
            term = np.log((a + inv) / (a - inv))
        out = out + np.where(a - inv > 0, term, np.inf)
    return out


@dataclass(frozen=True, eq=False)
class PsiFunction:
    """A psi-function on the open exponent interval ``(lower, upper)``.

    Use the class-method constructors; ``kind`` selects the rule:

    ``power_pole``  ``(p - A)**-a * (B - p)**-b``
    ``power``       ``p**beta``
    ``point``       ``value`` at ``p == r``, infinite elsewhere
    ``constant``    ``c``
    ``tabulated``   log-linear interpolation through ``(nodes, values)``

    ``grr_alpha``, when set, multiplies the rule by the GRR coefficient
    ``8**d 4**(d/p) prod (a_k + 1/p)/(a_k - 1/p)`` and raises the lower end
    of the support to ``max(lower, max_k 1/a_k)``.
    """

    kind: str
    lower: float
    upper: float
    params: tuple = ()
    nodes: np.ndarray | None = None
    values: np.ndarray | None = None
    grr_alpha: tuple | None = None

    # constructors ---------------------------------------------------------

    @classmethod
    def power_pole(cls, a: float, b: float, lower: float, upper: float) -> "PsiFunction":
        if not (a > 0 and b > 0):
            raise ValueError("pole exponents a, b must be positive")
        if not math.isfinite(upper):
            raise ValueError("power_pole needs a finite upper end")
        return cls._checked("power_pole", lower, upper, (float(a), float(b)))

    @classmethod
    def power(cls, beta: float, lower: float = 1.0, upper: float = INF) -> "PsiFunction":
        if beta <= 0:
            raise ValueError("beta must be positive")
        return cls._checked("power", lower, upper, (float(beta),))

    @classmethod
    def point(cls, r: float, value: float = 1.0) -> "PsiFunction":
        if not (r >= 1 and math.isfinite(r)):
            raise ValueError("r must be a finite exponent >= 1")
        if not (value > 0 and math.isfinite(value)):
            raise ValueError("value must be finite and positive")
        return cls("point", float(r), float(r), (float(value),))

    @classmethod
    def constant(cls, c: float = 1.0, lower: float = 1.0, upper: float = INF) -> "PsiFunction":
        if not (c > 0 and math.isfinite(c)):
            raise ValueError("c must be finite and positive")
        return cls._checked("constant", lower, upper, (float(c),))

    @classmethod
    def tabulated(cls, nodes, values, lower: float | None = None,
                  upper: float | None = None) -> "PsiFunction":
        nodes = np.asarray(nodes, dtype=float).copy()
        values = np.asarray(values, dtype=float).copy()
        if nodes.ndim != 1 or nodes.shape != values.shape or nodes.size < 1:
            raise ValueError("nodes and values must be equal-length 1-D arrays")
        if nodes.size > 1 and np.any(np.diff(nodes) <= 0):
            raise ValueError("nodes must be strictly increasing")
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            raise ValueError("tabulated psi values must be finite and positive")
        lo = float(nodes[0]) if lower is None else float(lower)
        hi = float(nodes[-1]) if upper is None else float(upper)
        if lo > nodes[0] or hi < nodes[-1]:
            raise ValueError("support must contain every tabulation node")
        if nodes.size == 1:
            return cls("point", float(nodes[0]), float(nodes[0]), (float(values[0]),))
        nodes.setflags(write=False)
        values.setflags(write=False)
        return cls._checked("tabulated", lo, hi, (), nodes, values)

    @classmethod
    def _checked(cls, kind, lower, upper, params, nodes=None, values=None):
        lower = float(lower)
        upper = float(upper)
        if not lower >= 1.0:
            raise ValueError("support lower end A must be >= 1")
        if not lower < upper:
            raise ValueError("support must satisfy A < B")
        return cls(kind, lower, upper, params, nodes, values)

    def with_grr_coefficient(self, alpha: Sequence[float]) -> "PsiFunction":
        """Multiply by the GRR coefficient of ``alpha`` (see class doc).

        Tabulated and point rules are rescaled node by node (nodes at or
        below ``max_k 1/alpha_k`` are dropped); closed forms keep the
        coefficient as a factor so the pole at ``p0`` is exact.
        """
        alpha = tuple(float(a) for a in alpha)
        if self.grr_alpha is not None:
            raise ValueError("GRR coefficient already applied")
        p0 = max(1.0 / a for a in alpha)
        if self.kind == "point":
            r = self.lower
            if not r > p0:
                raise DegeneratePsiError(
                    f"effective support is empty: r={r} <= max_k 1/alpha_k={p0}")
            c = float(np.exp(grr_log_coefficient(alpha, r)))
            return PsiFunction.point(r, self.params[0] * c)
        if self.kind == "tabulated":
            keep = self.nodes > p0
            if not np.any(keep):
                raise DegeneratePsiError(
                    f"effective support is empty: no node above max_k 1/alpha_k={p0}")
            nd = self.nodes[keep]
            vals = self.values[keep] * np.exp(grr_log_coefficient(alpha, nd))
            if nd.size == 1:
                return PsiFunction.point(float(nd[0]), float(vals[0]))
            return PsiFunction.tabulated(nd, vals, max(self.lower, float(nd[0])), self.upper)
        if not p0 < self.upper:
            raise DegeneratePsiError(
                f"effective support is empty: max(A, {p0}) >= B={self.upper}")
        return PsiFunction(self.kind, self.lower, self.upper, self.params,
                           self.nodes, self.values, alpha)

    # support --------------------------------------------------------------

    @property
    def p0(self) -> float:
        if self.grr_alpha is None:
            return -INF
        return max(1.0 / a for a in self.grr_alpha)

    @property
    def support(self) -> tuple[float, float]:
        """Effective ``(A, B)``; for ``point`` both ends equal ``r``."""
        lo = max(self.lower, self.p0) if self.grr_alpha is not None else self.lower
        return lo, self.upper

    @property
    def is_degenerate(self) -> bool:
        return self.kind == "point"

    def _tab_hull(self):
        return float(self.nodes[0]), float(self.nodes[-1])

    # evaluation -----------------------------------------------------------

    def log_value(self, p):
        """``log psi(p)``; ``inf`` off the support."""
        p = np.asarray(p, dtype=float)
        out = np.full(p.shape, np.inf)
        lo, hi = self.support
        k = self.kind
        if k == "point":
            r = self.lower
            hit = np.isclose(p, r, rtol=1e-12, atol=0.0)
            out = np.where(hit, math.log(self.params[0]), np.inf)
        else:
            inside = (p > lo) & (p < hi)
            if k == "tabulated":
                a, b = self._tab_hull()
                inside = (p >= a) & (p <= b)
                stray = ((p > lo) & (p < a)) | ((p > b) & (p < hi))
                if np.any(stray):
                    bad = np.atleast_1d(p[stray])[:3].tolist()
                    raise OutsideTabulationError(
                        f"p={bad} lies in the support ({lo}, {hi}) but outside "
                        f"the tabulated range [{a}, {b}]")
            pi = p[inside]
            if k == "power_pole":
                a_, b_ = self.params
                v = -a_ * np.log(pi - self.lower) - b_ * np.log(self.upper - pi)
            elif k == "power":
                v = self.params[0] * np.log(pi)
            elif k == "constant":
                v = np.full(pi.shape, math.log(self.params[0]))
            elif k == "tabulated":
                v = np.interp(pi, self.nodes, np.log(self.values))
            else:
                raise ValueError(f"unknown psi kind {k!r}")
            out = out.copy()
            out[inside] = v
        if self.grr_alpha is not None:
            with np.errstate(invalid="ignore"):
                out = out + grr_log_coefficient(self.grr_alpha, p)
            out = np.where(np.isnan(out), np.inf, out)
        return out

    def __call__(self, p):
        v = np.exp(self.log_value(p))
        return float(v) if np.ndim(p) == 0 else v

    def limit_log_value(self, side: str) -> float:
        """Limit of ``log psi`` at the open ends of the support.

        ``side`` is ``"lower"`` or ``"upper"``. Tabulated rules have closed
        hulls and report ``inf`` (their ends are scanned as nodes).
        """
        lo, hi = self.support
        k = self.kind
        if k in ("point", "tabulated") or k == "power_pole":
            return INF
        end = lo if side == "lower" else hi
        if k == "power":
            base = self.params[0] * math.log(end) if math.isfinite(end) else INF
        else:
            base = math.log(self.params[0])
        if self.grr_alpha is None:
            return base
        if side == "lower" and self.p0 >= self.lower:
            return INF
        if math.isfinite(end):
            return base + float(grr_log_coefficient(self.grr_alpha, end))
        return base + len(self.grr_alpha) * math.log(8.0)

    def dense_grid(self, n: int = 4000, p_cap: float = 1e5) -> np.ndarray:
        """A dense set of exponents inside the support (for brute maxima)."""
        lo, hi = self.support
        if self.kind == "point":
            return np.array([self.lower])
        if self.kind == "tabulated":
            a, b = self._tab_hull()
            return np.union1d(self.nodes, np.linspace(a, b, n))
        top = min(hi, p_cap)
        t = np.linspace(0.0, 1.0, n + 2)[1:-1]
        span = top - lo
        # geometric clustering towards the lower end where poles live
        g = lo + span * (np.expm1(t * math.log1p(span * 1e6)) / (span * 1e6))
        g = g[(g > lo) & (g < hi)]
        return g


def eval_psi(psi: PsiFunction, p: float) -> float:
    """``psi(p)`` with ``inf`` off the support."""
    if not math.isfinite(p):
        raise ValueError("p must be finite")
    return float(np.exp(psi.log_value(np.float64(p))))


# ---------------------------------------------------------------------------
# supremum over the support


def _golden_max(fun, a, b, iters=GOLDEN_ITERS):
    inv = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - inv * (b - a)
    d = a + inv * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = fun(d)
        if b - a < 1e-15:
            break
    return (c, fc) if fc >= fd else (d, fd)


def maximize_over_support(psi: PsiFunction, numerator: Callable, limits=(None, None),
                          q: float | None = None, nodes: int = SCAN_NODES):
    """Maximise ``numerator(p) - log psi(p)`` over the support of ``psi``.

    Parameters
    ----------
    psi : PsiFunction
    numerator : callable
        Vectorised ``p -> log`` numerator (e.g. ``log(delta)/p``).
    limits : pair
        Limits of the numerator at the lower/upper support ends (``None``
        when the end is not approached, e.g. tabulated hulls).
    q : float, optional
        Restrict to ``p > q`` (truncated supremum).

    Returns
    -------
    (float, float)
        The maximal log value and the maximising exponent (``inf`` for a
        limit at an infinite upper end). Ties go to the smaller exponent.
    """
    lo, hi = psi.support
    if psi.kind == "point":
        r = psi.lower
        if q is not None and not r > q:
            raise ValueError("empty support above q")
        val = float(numerator(np.array([r]))[0] - psi.log_value(np.array([r]))[0])
        return val, r

    tab = psi.kind == "tabulated"
    if tab:
        lo_eff, hi_eff = psi._tab_hull()
        closed_lo = q is None or q < lo_eff
    else:
        lo_eff, hi_eff = lo, hi
        closed_lo = False
    if q is not None:
        if not (lo < q < hi):
            raise ValueError(f"q={q} must lie inside the support ({lo}, {hi})")
        lo_eff = max(lo_eff, q)
    if not lo_eff < hi_eff:
        raise ValueError("empty support")

    unbounded = not math.isfinite(hi_eff)

    def to_p(t):
        t = np.asarray(t, dtype=float)
        if unbounded:
            with np.errstate(divide="ignore"):
                return lo_eff + t / (1.0 - t)
        return lo_eff + t * (hi_eff - lo_eff)

    def obj_t(t):
        p = to_p(t)
        with np.errstate(invalid="ignore", over="ignore"):
            v = numerator(p) - psi.log_value(p)
        return np.where(np.isnan(v), -np.inf, v)

    t = np.linspace(0.0, 1.0, nodes + 2)
    closed_lo = tab and closed_lo
    ts = t[(t > 0) | closed_lo]
    ts = ts[ts < 1] if (unbounded or not tab) else ts
    if tab:
        # every tabulation node inside the window is a candidate
        nd = psi.nodes[(psi.nodes > lo_eff) & (psi.nodes <= hi_eff)]
        ts = np.union1d(ts, (nd - lo_eff) / (hi_eff - lo_eff))
    vals = obj_t(ts)
    i = int(np.argmax(vals))
    best_v, best_t = float(vals[i]), float(ts[i])
    if math.isfinite(best_v):
        ta = ts[i - 1] if i > 0 else (ts[i] if closed_lo else 0.0)
        tb = ts[i + 1] if i + 1 < ts.size else (ts[i] if tab and not unbounded else 1.0)
        if tb > ta:
            tg, vg = _golden_max(lambda s: float(obj_t(np.array([s]))[0]), ta, tb)
            if vg > best_v + 1e-15 * abs(best_v):
                best_v, best_t = vg, tg
    best_p = float(to_p(best_t))

    cand = []
    if limits[0] is not None and q is None and not tab:
        cand.append((float(limits[0]) - psi.limit_log_value("lower"), lo_eff))
    if limits[1] is not None and not tab:
        cand.append((float(limits[1]) - psi.limit_log_value("upper"), hi_eff))
    for v, p in cand:
        if v > best_v + 1e-13 * max(1.0, abs(best_v)) or (v >= best_v and p < best_p):
            best_v, best_p = v, p
    return best_v, best_p


def _fundamental_limits(psi, log_delta, q=None):
    lo, hi = psi.support
    start = lo if q is None else q
    lo_lim = log_delta / start
    hi_lim = 0.0 if not math.isfinite(hi) else log_delta / hi
    return lo_lim, hi_lim


def log_fundamental_function(psi: PsiFunction, log_delta: float, q: float | None = None) -> float:
    """``log phi(G psi, delta)`` from ``log delta`` (works for tiny deltas)."""
    if not log_delta <= 0 and not math.isfinite(log_delta):
        raise ValueError("delta must be positive and finite")
    if psi.kind == "point":
        r = psi.lower
        if q is not None:
            raise ValueError("truncation needs a non-degenerate support")
        return log_delta / r - float(psi.log_value(np.array([r]))[0])
    v, _ = maximize_over_support(psi, lambda p: log_delta / p,
                                 _fundamental_limits(psi, log_delta, q), q=q)
    if not math.isfinite(v):
        raise ValueError("psi has empty effective support")
    return v


def fundamental_function(psi: PsiFunction, delta: float) -> float:
    """``phi(G psi, delta) = sup_p delta**(1/p) / psi(p)``."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    return math.exp(log_fundamental_function(psi, math.log(delta)))


def truncated_fundamental_function(psi: PsiFunction, q: float, delta: float) -> float:
    """``phi_q(G psi, delta) = sup_{p in (q, B)} delta**(1/p) / psi(p)``."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    lo, hi = psi.support
    if psi.kind == "point" or not (lo < q < hi):
        raise ValueError(f"q={q} must lie strictly inside the support ({lo}, {hi})")
    return math.exp(log_fundamental_function(psi, math.log(delta), q=q))


# ---------------------------------------------------------------------------
# Young-Orlicz functions


def _log_expm1(v):
    v = np.asarray(v, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        small = np.log(np.expm1(np.minimum(v, 700.0)))
    big = v + np.log1p(-np.exp(-np.maximum(v, 30.0)))
    return np.where(v > 30.0, big, small)


@dataclass(frozen=True, eq=False)
class YoungFunction:
    """An even Young-Orlicz function ``Phi``.

    Kinds: ``power`` (``|u|**e``), ``exp_power`` (``exp(|u|**m/m) - 1``),
    ``exp_mu`` (``exp(mu(|u|)) - exp(mu(0))`` for tabulated convex ``mu``) and
    ``tabulated`` (nodes ``0 = u_0 < u_1 < ...`` with ``log Phi`` values; linear
    in ``Phi`` on ``[0, u_1]`` and linear in ``log Phi`` beyond).
    """

    kind: str
    exponent: float = 2.0
    nodes: np.ndarray | None = None
    values: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @classmethod
    def power(cls, e: float) -> "YoungFunction":
        if not e > 0:
            raise ValueError("exponent must be positive")
        return cls("power", float(e))

    @classmethod
    def exp_power(cls, m: float) -> "YoungFunction":
        if not m > 0:
            raise ValueError("m must be positive")
        return cls("exp_power", float(m))

    @classmethod
    def exp_mu(cls, u, mu, growth: float = 10.0) -> "YoungFunction":
        u = np.asarray(u, dtype=float).copy()
        mu = np.asarray(mu, dtype=float).copy()
        if u.ndim != 1 or u.shape != mu.shape or u.size < 3 or u[0] != 0.0:
            raise ValueError("mu must be tabulated on nodes starting at 0")
        if np.any(np.diff(u) <= 0) or np.any(np.diff(mu) <= 0):
            raise ValueError("mu must be strictly increasing on increasing nodes")
        if not is_convex(u, mu):
            raise NonConvexError("mu samples are not convex")
        if math.exp(min(mu[-1] - mu[0], 700.0)) - 1.0 < growth * math.expm1(mu[1] - mu[0]):
            raise ValueError("Phi does not grow by the configured factor over the table")
        return cls("exp_mu", 0.0, u, mu)

    @classmethod
    def tabulated(cls, u, log_phi, growth: float = 10.0, meta: dict | None = None) -> "YoungFunction":
        u = np.asarray(u, dtype=float).copy()
        lv = np.asarray(log_phi, dtype=float).copy()
        if u.ndim != 1 or u.shape != lv.shape or u.size < 3 or u[0] != 0.0:
            raise ValueError("tabulated Phi needs nodes starting at 0")
        if lv[0] != -np.inf:
            raise ValueError("Phi(0) must be 0 (log value -inf)")
        if np.any(np.diff(u) <= 0) or np.any(np.diff(lv[1:]) <= 0):
            raise ValueError("Phi must be strictly increasing")
        if lv[-1] - lv[1] < math.log(growth):
            raise ValueError("Phi does not grow by the configured factor over the table")
        return cls("tabulated", 0.0, u, lv, dict(meta or {}))

    @property
    def u_max(self) -> float:
        return INF if self.nodes is None else float(self.nodes[-1])

    def log_value(self, u):
        a = np.abs(np.asarray(u, dtype=float))
        if np.any(a > self.u_max * (1 + 1e-12)):
            raise ValueError(f"Phi is tabulated only up to u={self.u_max}")
        k = self.kind
        with np.errstate(divide="ignore"):
            if k == "power":
                return self.exponent * np.log(a)
            if k == "exp_power":
                return _log_expm1(a ** self.exponent / self.exponent)
            if k == "exp_mu":
                mu = np.interp(a, self.nodes, self.values)
                return mu + np.log(-np.expm1(self.values[0] - mu))
            if k == "tabulated":
                u1 = self.nodes[1]
                lin = self.values[1] + np.log(a / u1)
                return np.where(a < u1, lin, np.interp(a, self.nodes[1:], self.values[1:]))
        raise ValueError(f"unknown Young function kind {k!r}")

    def __call__(self, u):
        v = np.exp(self.log_value(u))
        return float(v) if np.ndim(u) == 0 else v

    def inverse(self, v, rtol: float = 1e-10, max_iter: int = 200):
        """``Phi^{-1}(v)`` for ``v >= 0``.

        Closed form for ``power`` and ``exp_power``; bisection on the stored
        rule otherwise (``inverse_bisect`` forces bisection for any kind).
        """
        scalar = np.ndim(v) == 0
        vs = np.atleast_1d(np.asarray(v, dtype=float))
        if np.any(vs < 0) or np.any(np.isnan(vs)):
            raise ValueError("Phi^{-1} needs v >= 0")
        if self.kind == "power":
            out = vs ** (1.0 / self.exponent)
            return float(out[0]) if scalar else out
        if self.kind == "exp_power":
            m = self.exponent
            out = (m * np.log1p(vs)) ** (1.0 / m)
            return float(out[0]) if scalar else out
        out = np.empty(vs.shape)
        for i, vi in enumerate(vs.ravel()):
            out.ravel()[i] = self._inverse_one(float(vi), rtol, max_iter)
        return float(out[0]) if scalar else out

    def inverse_bisect(self, v, rtol: float = 1e-10, max_iter: int = 200) -> float:
        """Bisection inverse regardless of kind (oracle for the closed forms)."""
        return self._inverse_one(float(v), rtol, max_iter)

    def _inverse_one(self, v, rtol, max_iter):
        if v < 0 or math.isnan(v):
            raise ValueError("Phi^{-1} needs v >= 0")
        if v == 0.0:
            return 0.0
        if math.isinf(v):
            return INF
        target = math.log(v)
        lo, hi = 0.0, min(1.0, self.u_max)
        while float(self.log_value(hi)) < target:
            if hi >= self.u_max:
                raise ValueError(f"Phi is not invertible at {v}: table ends at u={self.u_max}")
            lo, hi = hi, min(2.0 * hi, self.u_max)
            if hi > 1e300:
                raise ValueError("Phi^{-1} bracket diverged")
        for _ in range(max_iter):
            mid = 0.5 * (lo + hi)
            if float(self.log_value(mid)) < target:
                lo = mid
            else:
                hi = mid
            if hi - lo <= rtol * hi:
                break
        return 0.5 * (lo + hi)


def orlicz_fundamental(phi: YoungFunction, delta: float) -> float:
    """``delta * Phi^{-1}(1/delta)``, the inverse by bisection on the stored rule."""
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    return delta * phi.inverse_bisect(1.0 / delta)


def _log_n_exp_grid(N: YoungFunction, p_top: float, x_lo: float, n_x: int):
    """Grid ``x`` and samples of ``log N(e^x)`` reaching slope ``> p_top``."""
    if N.nodes is not None:
        x_hi = math.log(N.u_max)
    else:
        x_hi = 1.0
        while True:
            xs = np.array([x_hi - 1e-3, x_hi])
            h = N.log_value(np.exp(xs))
            if (h[1] - h[0]) / 1e-3 > 1.5 * p_top or x_hi > 50:
                break
            x_hi += 0.5
    x = np.linspace(x_lo, x_hi, n_x)
    return x, N.log_value(np.exp(x))


def psi_from_orlicz(N: YoungFunction, p_grid=None, x_lo: float = -40.0,
                    n_x: int = 20001, convexify: bool = False) -> PsiFunction:
    """psi-function ``p -> exp([log N(e^x)]^*(p) / p)`` tabulated on ``p_grid``.

    ``log N(e^x)`` must be convex on its sample grid; with ``convexify``
    the conjugate of its convex minorant (which is the same conjugate) is
    used instead of raising. Exponents where the conjugate is infinite
    are dropped.
    """
    p_grid = np.geomspace(1.0, 200.0, 256) if p_grid is None else np.asarray(p_grid, float)
    x, h = _log_n_exp_grid(N, float(np.max(p_grid)), x_lo, n_x)
    if not is_convex(x, h, rtol=1e-9) and not convexify:
        bad = convexity_violations(x, h, rtol=1e-9)
        raise NonConvexError(
            f"log N(e^x) is not convex near x={np.round(x[bad[:5]], 4).tolist()}")
    conj = conjugate_linear(x, h, p_grid)
    ok = np.isfinite(conj)
    if not np.any(ok):
        raise DegeneratePsiError("conjugate is infinite on the whole p-grid")
    return PsiFunction.tabulated(p_grid[ok], np.exp(conj[ok] / p_grid[ok]))


def _psi_p_grid(psi: PsiFunction, p_max: float, n_p: int) -> np.ndarray:
    lo, hi = psi.support
    if psi.kind == "tabulated":
        return psi.dense_grid(n_p)
    top = min(hi, p_max)
    off = np.geomspace(1e-9, top - lo, n_p)
    return lo + off


def orlicz_from_psi(psi: PsiFunction, p_max: float = 1e4, n_p: int = 4000,
                    n_u: int = 2000, threshold: float = ORLICZ_PATCH_AT) -> YoungFunction:
    """Exponential Young function ``N(u) = exp(tpsi^*(log|u|))`` for ``|u| > 3``.

    ``tpsi(p) = p log psi(p)`` must be convex; below the threshold ``N`` is
    the quadratic ``C u**2`` with ``C`` fixed by continuity at the threshold.
    """
    lo, hi = psi.support
    if math.isfinite(hi):
        raise ValueError("psi with B < inf does not coincide with an Orlicz space")
    p = _psi_p_grid(psi, p_max, n_p)
    tpsi = p * psi.log_value(p)
    keep = np.isfinite(tpsi)
    p, tpsi = p[keep], tpsi[keep]
    if not is_convex(p, tpsi, rtol=1e-8):
        bad = convexity_violations(p, tpsi, rtol=1e-8)
        raise NonConvexError(f"p log psi(p) is not convex near p={p[bad[:5]].tolist()}")
    s_max = (tpsi[-1] - tpsi[-2]) / (p[-1] - p[-2])
    u_top = math.exp(min(s_max, 700.0)) * 0.999
    if not u_top > threshold * 1.01:
        raise ValueError("p-grid too short to tabulate N beyond the patch threshold")
    u_tail = np.geomspace(threshold, u_top, n_u)
    # left end of p-grid is the support boundary: conjugate stays finite there
    log_tail = conjugate_linear(p, tpsi, np.log(u_tail), closed=(True, False))
    if not np.all(np.isfinite(log_tail)):
        raise ValueError("conjugate not finite on the tabulation range")
    log_c = log_tail[0] - 2.0 * math.log(threshold)
    u_head = np.geomspace(threshold * 1e-4, threshold, 64)[:-1]
    u = np.concatenate([[0.0], u_head, u_tail])
    lv = np.concatenate([[-np.inf], log_c + 2.0 * np.log(u_head), log_tail])
    # the patch/tail junction can dip when psi is not of exponential type
    lv[1:] = np.maximum.accumulate(lv[1:])
    strict = np.concatenate([[True], np.diff(lv[1:]) > 0])
    u, lv = np.concatenate([[0.0], u[1:][strict]]), np.concatenate([[-np.inf], lv[1:][strict]])
    return YoungFunction.tabulated(u, lv, meta={"patch_constant": math.exp(log_c),
                                                "threshold": threshold})


def tail_bound_from_psi(psi: PsiFunction, norm: float, z, p_grid=None):
    """``2 exp(-tpsi^*(log(z / norm)))`` with ``tpsi(p) = p log psi(p)``.

    The conjugate is a maximum over the exponents of ``p_grid`` (default: a
    dense grid inside the support); each exponent alone gives a valid
    Chebyshev bound, so a finite grid can only loosen the result. Values
    are capped at 2.
    """
    if not norm > 0:
        raise ValueError("norm must be positive")
    zs = np.atleast_1d(np.asarray(z, dtype=float))
    if np.any(zs < norm * (1 - 1e-12)):
        raise ValueError("the tail bound applies only for z >= norm")
    p = psi.dense_grid() if p_grid is None else np.asarray(p_grid, float)
    lp = psi.log_value(p)
    keep = np.isfinite(lp)
    p, lp = p[keep], lp[keep]
    if p.size == 0:
        raise DegeneratePsiError("no finite psi values on the exponent grid")
    x = np.log(np.maximum(zs / norm, 1.0))
    conj = np.max(x[:, None] * p[None, :] - (p * lp)[None, :], axis=1)
    out = np.minimum(2.0 * np.exp(-conj), 2.0)
    return float(out[0]) if np.ndim(z) == 0 else out


def orlicz_roundtrip(psi: PsiFunction, p_eval, convexify: bool = True) -> dict:
    """Ratio ``psi_back / psi`` for ``psi_back = psi_from_orlicz(orlicz_from_psi(psi))``.

    Exponents of ``p_eval`` outside the tabulated hull of ``psi_back`` are
    dropped and reported. ``convexify`` lets the return leg use the convex
    minorant of ``log N(e^x)`` (the quadratic patch leaves a kink).
    """
    p_eval = np.asarray(p_eval, dtype=float)
    N = orlicz_from_psi(psi)
    back = psi_from_orlicz(N, convexify=convexify)
    inside = (p_eval >= back.nodes[0]) & (p_eval <= back.nodes[-1])
    p = p_eval[inside]
    ratio = np.exp(back.log_value(p) - psi.log_value(p))
    return {"p": p, "ratio": ratio, "psi": psi(p), "psi_back": back(p),
            "dropped": p_eval[~inside], "patch_constant": N.meta.get("patch_constant")}


def natural_function_from_family(p_grid, curves) -> PsiFunction:
    """``psi_F(p) = sup over the family of |xi(t, .)|_p`` on ``p_grid``.

    ``curves`` holds arrays of L_p norms on ``p_grid`` or callables of p.
    """
    p_grid = np.asarray(p_grid, dtype=float)
    curves = list(curves)
    if not curves:
        raise ValueError("empty family")
    rows = []
    for c in curves:
        v = np.asarray(c(p_grid) if callable(c) else c, dtype=float)
        if v.shape != p_grid.shape or not np.all(np.isfinite(v)):
            raise ValueError("every curve must be finite on the p-grid")
        rows.append(v)
    sup = np.max(np.vstack(rows), axis=0)
    if np.any(sup <= 0):
        raise DegeneratePsiError("natural function vanishes on part of the grid")
    return PsiFunction.tabulated(p_grid, sup)


# ---------------------------------------------------------------------------
# plain-text serialisation


def _fmt(a) -> str:
    return " ".join(repr(float(v)) for v in np.asarray(a, dtype=float).ravel())


def _parse(s: str) -> np.ndarray:
    return np.array([float(t) for t in s.split()], dtype=float)


def psi_to_text(psi: PsiFunction) -> str:
    cp = configparser.ConfigParser(interpolation=None)
    sec = {"kind": psi.kind, "lower": repr(psi.lower), "upper": repr(psi.upper)}
    if psi.params:
        sec["params"] = _fmt(psi.params)
    if psi.nodes is not None:
        sec["nodes"] = _fmt(psi.nodes)
        sec["values"] = _fmt(psi.values)
    if psi.grr_alpha is not None:
        sec["grr_alpha"] = _fmt(psi.grr_alpha)
    cp["psi"] = sec
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def psi_from_text(text: str) -> PsiFunction:
    cp = configparser.ConfigParser(interpolation=None)
    cp.read_string(text)
    s = cp["psi"]
    kind = s["kind"]
    lo, hi = float(s["lower"]), float(s["upper"])
    params = tuple(_parse(s.get("params", "")))
    if kind == "power_pole":
        psi = PsiFunction.power_pole(params[0], params[1], lo, hi)
    elif kind == "power":
        psi = PsiFunction.power(params[0], lo, hi)
    elif kind == "point":
        psi = PsiFunction.point(lo, params[0])
    elif kind == "constant":
        psi = PsiFunction.constant(params[0], lo, hi)
    elif kind == "tabulated":
        psi = PsiFunction.tabulated(_parse(s["nodes"]), _parse(s["values"]), lo, hi)
    else:
        raise ValueError(f"unknown psi kind {kind!r}")
    if "grr_alpha" in s:
        psi = psi.with_grr_coefficient(tuple(_parse(s["grr_alpha"])))
    return psi


def young_to_text(phi: YoungFunction) -> str:
    cp = configparser.ConfigParser(interpolation=None)
    sec = {"kind": phi.kind, "exponent": repr(phi.exponent)}
    if phi.nodes is not None:
        sec["nodes"] = _fmt(phi.nodes)
        sec["values"] = _fmt(phi.values)
    cp["young"] = sec
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def young_from_text(text: str) -> YoungFunction:
    cp = configparser.ConfigParser(interpolation=None)
    cp.read_string(text)
    s = cp["young"]
    kind = s["kind"]
    if kind == "power":
        return YoungFunction.power(float(s["exponent"]))
    if kind == "exp_power":
        return YoungFunction.exp_power(float(s["exponent"]))
    if kind == "exp_mu":
        return YoungFunction.exp_mu(_parse(s["nodes"]), _parse(s["values"]))
    if kind == "tabulated":
        return YoungFunction.tabulated(_parse(s["nodes"]), _parse(s["values"]))
    raise ValueError(f"unknown Young function kind {kind!r}")
