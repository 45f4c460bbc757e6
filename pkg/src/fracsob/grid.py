"""Sampled functions on uniform lattices over ``[0, L]^d``.

Holds the rectangle difference operator, the ordinary and rectangle moduli
of continuity, the dilation used for scaling tests and the rectangle
"distance" axiom checks.

All moduli are maxima over lattice pairs, so they under-estimate the
continuous modulus by ``O(h**H)`` for an ``H``-Hölder function.
"""

from __future__ import annotations

import ast
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.ndimage import maximum_filter1d, minimum_filter1d

__all__ = [
    "GridFunction",
    "FractionalIndex",
    "SizeCapError",
    "compile_expression",
    "sample_function",
    "rectangle_difference",
    "modulus_of_continuity",
    "modulus_brute",
    "rectangle_modulus",
    "rectangle_modulus_table",
    "extend_tapered",
    "dilate",
    "DistanceReport",
    "rectangle_distance_check",
    "grid_to_csv",
    "grid_from_csv",
]

# d*log(n) budget: 2**26 lattice values
MAX_LOG_SIZE = 26 * math.log(2)
# brute-force pair sweep caps
BRUTE_CAP_1D = 4096
RECT_CAP = {1: 1 << 15, 2: 64, 3: 16}
_EPS = 1e-9


class SizeCapError(ValueError):
    """A brute-force sweep would exceed its configured size cap."""


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Values on the lattice ``x_j = j*h``, ``h = extent/(n-1)``, per axis.

    Parameters
    ----------
    values : ndarray
        Shape ``(n,) * d``; index ``[j1, ..., jd]`` is the node
        ``(j1*h, ..., jd*h)``.
    extent : float
        Side length of the cube (1 for ``[0,1]^d``).
    """

    values: np.ndarray
    extent: float = 1.0

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim < 1:
            raise ValueError("values must have at least one axis")
        n = v.shape[0]
        if n < 2 or any(s != n for s in v.shape):
            raise ValueError("values must be a cube of side n >= 2")
        if v.ndim * math.log(n) > MAX_LOG_SIZE:
            raise SizeCapError("lattice exceeds the memory budget")
        if not np.all(np.isfinite(v)):
            bad = np.argwhere(~np.isfinite(v))[0]
            raise ValueError(f"non-finite value at node {tuple(int(b) for b in bad)}")
        if not self.extent > 0:
            raise ValueError("extent must be positive")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def d(self) -> int:
        return self.values.ndim

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def h(self) -> float:
        return self.extent / (self.n - 1)

    @property
    def axis(self) -> np.ndarray:
        return np.linspace(0.0, self.extent, self.n)

    def __add__(self, other: "GridFunction") -> "GridFunction":
        self._check_same(other)
        return GridFunction(self.values + other.values, self.extent)

    def scaled(self, c: float) -> "GridFunction":
        return GridFunction(c * self.values, self.extent)

    def _check_same(self, other):
        if self.values.shape != other.values.shape or self.extent != other.extent:
            raise ValueError("grid functions live on different lattices")


@dataclass(frozen=True)
class FractionalIndex:
    """Smoothness vector ``alpha`` with ``alpha_k in (0, 1]``."""

    alpha: tuple

    def __post_init__(self):
        a = tuple(float(v) for v in np.atleast_1d(self.alpha))
        if not a:
            raise ValueError("alpha must be non-empty")
        if any(not (0 < v <= 1) for v in a):
            raise ValueError("each alpha_k must lie in (0, 1]")
        object.__setattr__(self, "alpha", a)

    @classmethod
    def of(cls, alpha, d: int | None = None) -> "FractionalIndex":
        """Accept a scalar (broadcast to ``d`` axes), a sequence or an index."""
        if isinstance(alpha, FractionalIndex):
            return alpha
        if np.ndim(alpha) == 0:
            return cls((float(alpha),) * (d or 1))
        return cls(tuple(alpha))

    @property
    def d(self) -> int:
        return len(self.alpha)

    @property
    def alpha0(self) -> float:
        return min(self.alpha)

    @property
    def p0(self) -> float:
        return 1.0 / self.alpha0

    @property
    def multiplicity(self) -> int:
        return sum(1 for a in self.alpha if a == self.alpha0)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.alpha)


# ---------------------------------------------------------------------------
# expressions

_ALLOWED_NODES = (
    ast.Expression, ast.BinOp, ast.UnaryOp, ast.Call, ast.Name, ast.Load,
    ast.Constant, ast.Attribute, ast.Compare, ast.IfExp, ast.BoolOp,
    ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.Mod, ast.FloorDiv,
    ast.USub, ast.UAdd, ast.Lt, ast.LtE, ast.Gt, ast.GtE, ast.Eq, ast.NotEq,
    ast.And, ast.Or, ast.Tuple,
)
_NAMESPACE = {k: getattr(np, k) for k in (
    "sin", "cos", "tan", "exp", "log", "sqrt", "abs", "pi", "e", "where",
    "minimum", "maximum", "sign", "floor", "tanh", "sinh", "cosh", "arctan",
    "clip", "log1p", "expm1", "heaviside", "power")}
_NAMESPACE["np"] = np


def compile_expression(expr: str, d: int) -> Callable:
    """Compile an arithmetic expression in ``x`` (d=1) or ``x1..xd``.

    Only arithmetic, comparisons and a whitelist of numpy functions are
    accepted; anything else raises ``ValueError``.
    """
    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse expression {expr!r}: {exc.msg}") from None
    names = {"x"} if d == 1 else {f"x{k + 1}" for k in range(d)}
    for node in ast.walk(tree):
        if not isinstance(node, _ALLOWED_NODES):
            raise ValueError(f"disallowed syntax {type(node).__name__} in {expr!r}")
        if isinstance(node, ast.Attribute) and not (
                isinstance(node.value, ast.Name) and node.value.id == "np"):
            raise ValueError(f"attribute access only allowed on np in {expr!r}")
        if isinstance(node, ast.Attribute) and node.attr.startswith("_"):
            raise ValueError(f"private attribute in {expr!r}")
        if isinstance(node, ast.Name) and node.id not in names | set(_NAMESPACE):
            raise ValueError(f"unknown name {node.id!r} in {expr!r}")
    code = compile(tree, "<expr>", "eval")

    def fn(*xs):
        env = dict(_NAMESPACE)
        if d == 1:
            env["x"] = xs[0]
        else:
            env.update({f"x{k + 1}": v for k, v in enumerate(xs)})
        with np.errstate(all="ignore"):
            out = eval(code, {"__builtins__": {}}, env)
        return np.broadcast_to(np.asarray(out, dtype=float), np.shape(xs[0]))

    fn.expr = expr
    return fn


def _as_callable(spec, d):
    if isinstance(spec, str):
        return compile_expression(spec, d)
    if callable(spec):
        return spec
    c = float(spec)
    return lambda *xs: np.full(np.shape(xs[0]), c)


def sample_function(spec, d: int, n: int, extent: float = 1.0) -> GridFunction:
    """Evaluate ``spec`` on the lattice of ``[0, extent]^d`` with ``n`` nodes per axis.

    ``spec`` is an expression string, a callable taking ``d`` coordinate
    arrays, or a constant.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if d < 1:
        raise ValueError("d must be >= 1")
    fn = _as_callable(spec, d)
    ax = np.linspace(0.0, extent, n)
    coords = np.meshgrid(*([ax] * d), indexing="ij")
    with np.errstate(all="ignore"):
        vals = np.broadcast_to(np.asarray(fn(*coords), dtype=float), coords[0].shape)
    bad = ~np.isfinite(vals)
    if np.any(bad):
        idx = tuple(int(i) for i in np.argwhere(bad)[0])
        x = tuple(float(ax[i]) for i in idx)
        raise ValueError(f"non-finite value at node {idx} (x={x})")
    return GridFunction(np.array(vals), extent)


# ---------------------------------------------------------------------------
# rectangle difference and moduli


def _index(f: GridFunction, x) -> tuple:
    x = tuple(int(v) for v in np.atleast_1d(x))
    if len(x) != f.d:
        raise IndexError(f"expected {f.d} indices, got {len(x)}")
    if any(not 0 <= v < f.n for v in x):
        raise IndexError(f"lattice index {x} out of range [0, {f.n})")
    return x


def rectangle_difference(f: GridFunction, x, y) -> float:
    """``sum over corners c of (-1)**#(c_k = x_k) * f(c)``.

    For d=1 this is ``f(y) - f(x)``; for d=2
    ``f(y1,y2) - f(x1,y2) - f(y1,x2) + f(x1,x2)``.
    """
    x = _index(f, x)
    y = _index(f, y)
    total = 0.0
    for pick in itertools.product((0, 1), repeat=f.d):
        corner = tuple(y[k] if s else x[k] for k, s in enumerate(pick))
        sign = -1.0 if (f.d - sum(pick)) % 2 else 1.0
        total += sign * f.values[corner]
    return float(total)


def _gap(delta: float, h: float) -> int:
    return int(math.floor(delta / h + _EPS))


def _window_range_max(v: np.ndarray, k: int) -> float:
    # max over windows of k+1 consecutive samples of (max - min)
    if k <= 0:
        return 0.0
    k = min(k, v.size - 1)
    size = k + 1
    hi = maximum_filter1d(v, size=size, mode="nearest")
    lo = minimum_filter1d(v, size=size, mode="nearest")
    return float(np.max(hi - lo))


def modulus_brute(f: GridFunction, delta: float, cap: int = BRUTE_CAP_1D) -> float:
    """All-pairs ``max |f(x) - f(y)|`` over ``|x - y| <= delta`` (d=1 oracle)."""
    if f.d != 1:
        raise ValueError("modulus_brute is one-dimensional")
    if f.n > cap:
        raise SizeCapError(f"n={f.n} exceeds the pair-sweep cap {cap}; subsample first")
    v = f.values
    idx = np.arange(f.n)
    best = 0.0
    k = _gap(delta, f.h)
    for i in range(f.n):
        j = idx[(idx > i) & (idx - i <= k)]
        if j.size:
            best = max(best, float(np.max(np.abs(v[j] - v[i]))))
    return best


def modulus_of_continuity(f: GridFunction, delta: float, cap: int = RECT_CAP[2]) -> float:
    """``omega(f, delta)``: max ``|f(x) - f(y)|`` over lattice pairs ``|x - y| <= delta``.

    d=1 uses sliding-window max/min filters (exact, O(n) per delta); d>=2
    enumerates Euclidean offsets and is capped at ``cap`` nodes per axis.
    """
    if delta < 0:
        raise ValueError("delta must be non-negative")
    if f.d == 1:
        return _window_range_max(f.values, _gap(delta, f.h))
    if f.n > cap:
        raise SizeCapError(f"n={f.n} exceeds the cap {cap} for d={f.d}; subsample first")
    kmax = _gap(delta, f.h)
    v = f.values
    best = 0.0
    rng = range(-kmax, kmax + 1)
    for g in itertools.product(range(0, kmax + 1), *([rng] * (f.d - 1))):
        if sum(t * t for t in g) * f.h ** 2 > delta ** 2 * (1 + 1e-12) or not any(g):
            continue
        if g[0] == 0 and next(t for t in g if t != 0) < 0:
            continue
        a = tuple(slice(max(0, -t), f.n - max(0, t)) for t in g)
        b = tuple(slice(max(0, t), f.n - max(0, -t)) for t in g)
        if any(s.stop <= s.start for s in a):
            continue
        best = max(best, float(np.max(np.abs(v[b] - v[a]))))
    return best


def _box_diff(v: np.ndarray, g: Sequence[int]) -> np.ndarray:
    out = v
    for ax, gk in enumerate(g):
        n = out.shape[ax]
        hi = [slice(None)] * out.ndim
        lo = [slice(None)] * out.ndim
        hi[ax] = slice(gk, n)
        lo[ax] = slice(0, n - gk)
        out = out[tuple(hi)] - out[tuple(lo)]
    return out


def rectangle_modulus_table(f: GridFunction, kmax: Sequence[int] | None = None,
                            cap: int | None = None) -> np.ndarray:
    """``T[g] = max |box difference|`` over pairs with per-axis gaps ``<= g``.

    Axis ``k`` gaps run over ``0..kmax[k]``; the table is a running maximum,
    so ``rectangle_modulus`` is a lookup.
    """
    cap = RECT_CAP.get(f.d, 8) if cap is None else cap
    if f.n > cap:
        raise SizeCapError(f"n={f.n} exceeds the rectangle-sweep cap {cap} for d={f.d}")
    kmax = [f.n - 1] * f.d if kmax is None else [min(int(k), f.n - 1) for k in kmax]
    T = np.zeros([k + 1 for k in kmax])
    for g in itertools.product(*[range(1, k + 1) for k in kmax]):
        T[g] = np.max(np.abs(_box_diff(f.values, g)))
    for ax in range(f.d):
        T = np.maximum.accumulate(T, axis=ax)
    return T


def rectangle_modulus(f: GridFunction, delta, cap: int | None = None) -> float:
    """``Omega(f, delta_vec)``: sup of ``|box diff|`` with ``|x_k - y_k| <= delta_k``.

    For d=1 this is the ordinary modulus.
    """
    dv = np.atleast_1d(np.asarray(delta, dtype=float))
    if dv.size == 1 and f.d > 1:
        dv = np.full(f.d, dv[0])
    if dv.size != f.d:
        raise ValueError("delta vector length must equal the dimension")
    if np.any(dv < 0):
        raise ValueError("delta components must be non-negative")
    if f.d == 1:
        return modulus_of_continuity(f, float(dv[0]))
    g = [_gap(x, f.h) for x in dv]
    if min(g) == 0:
        return 0.0
    return float(rectangle_modulus_table(f, g, cap)[tuple(min(x, f.n - 1) for x in g)])


# ---------------------------------------------------------------------------
# dilation


def extend_tapered(spec) -> Callable:
    """Continue a 1-D function from ``[0,1]`` linearly to 0 at ``x = 2``, 0 beyond."""
    fn = _as_callable(spec, 1)
    f1 = float(np.asarray(fn(np.array([1.0])))[0])

    def ext(x):
        x = np.asarray(x, dtype=float)
        inner = np.clip(x, 0.0, 1.0)
        with np.errstate(all="ignore"):
            base = np.asarray(fn(inner), dtype=float)
        taper = f1 * (2.0 - x)
        return np.where(x <= 1.0, base, np.where(x <= 2.0, taper, 0.0))

    return ext


def dilate(spec, lam: float, n: int) -> GridFunction:
    """Samples of ``x -> f_ext(lam * x)`` on ``[0, 2/lam]``.

    ``f_ext`` is the tapered extension of ``spec``; the lattice covers the
    whole support of the dilated function.
    """
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if lam > 1:
        raise ValueError("lambda must lie in (0, 1]")
    ext = extend_tapered(spec)
    width = 2.0 / lam
    x = np.linspace(0.0, width, n)
    return GridFunction(ext(lam * x), width)


# ---------------------------------------------------------------------------
# rectangle distance axioms


@dataclass
class DistanceReport:
    """Findings of :func:`rectangle_distance_check`; empty lists mean no violation."""

    trials: int
    nonneg_or_degenerate: list = field(default_factory=list)
    symmetry: list = field(default_factory=list)
    triangle: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.nonneg_or_degenerate or self.symmetry or self.triangle)

    def summary(self) -> dict:
        return {"trials": self.trials,
                "nonneg_or_degenerate_violations": len(self.nonneg_or_degenerate),
                "symmetry_violations": len(self.symmetry),
                "triangle_violations": len(self.triangle)}


def rectangle_distance_check(f: GridFunction, trials: int, seed: int,
                             tol: float = 1e-12, keep: int = 20) -> DistanceReport:
    """Test ``rho(x,y) = |box diff(x,y)|`` against the metric axioms on random triples.

    (a) ``rho >= 0`` and ``rho(x,y) = 0`` when some ``x_j = y_j``;
    (b) ``rho(x,y) = rho(y,x)``; (c) ``rho(x,z) <= rho(x,y) + rho(y,z)``.
    The first ``keep`` violating triples of each kind are recorded.
    """
    rng = np.random.default_rng(seed)
    rep = DistanceReport(trials)
    scale = float(np.max(np.abs(f.values))) + 1.0

    def rho(a, b):
        return abs(rectangle_difference(f, a, b))

    for _ in range(trials):
        x, y, z = (tuple(int(v) for v in rng.integers(0, f.n, f.d)) for _ in range(3))
        # mix in shared coordinates so the degenerate branch of (a) is exercised
        if rng.random() < 0.25:
            j = int(rng.integers(f.d))
            y = y[:j] + (x[j],) + y[j + 1:]
        rxy, ryx = rho(x, y), rho(y, x)
        degenerate = any(a == b for a, b in zip(x, y))
        if rxy < 0 or (degenerate and rxy > tol * scale):
            if len(rep.nonneg_or_degenerate) < keep:
                rep.nonneg_or_degenerate.append((x, y, rxy))
        if abs(rxy - ryx) > tol * scale and len(rep.symmetry) < keep:
            rep.symmetry.append((x, y, rxy, ryx))
        rxz, ryz = rho(x, z), rho(y, z)
        if rxz > rxy + ryz + tol * scale and len(rep.triangle) < keep:
            rep.triangle.append((x, y, z, rxz, rxy + ryz))
    return rep


# ---------------------------------------------------------------------------
# CSV


def grid_to_csv(f: GridFunction, path) -> None:
    """Header comment, ``d,n,extent`` row, then values in row-major order."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# fracsob-csv v1 kind=grid\n")
        fh.write("d,n,extent\n")
        fh.write(f"{f.d},{f.n},{f.extent!r}\n")
        for v in f.values.ravel(order="C"):
            fh.write(f"{float(v)!r}\n")


def grid_from_csv(path) -> GridFunction:
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    if len(lines) < 2 or not lines[0].startswith("d,n"):
        raise ValueError("missing 'd,n' header row")
    head = lines[1].split(",")
    d, n = int(head[0]), int(head[1])
    extent = float(head[2]) if len(head) > 2 else 1.0
    vals = np.array([float(t) for t in lines[2:]], dtype=float)
    if vals.size != n ** d:
        raise ValueError(f"expected {n ** d} values, found {vals.size}")
    return GridFunction(vals.reshape((n,) * d), extent)
