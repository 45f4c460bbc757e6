"""Modulus-of-continuity certificates and the sharpness experiments.

A certificate pairs a measured modulus (lattice maximum) with a
theoretical bound over a grid of distances. All Grand Lebesgue bounds take
the form ``delta**alpha / phi(G psi_alpha, delta) * ||f||`` with
``psi_alpha = psi * GRR coefficient`` and ``||f|| = sup_p zeta_f(p) / psi(p)``,
``zeta_f(p)`` being the Gagliardo seminorm of ``f``. For the natural choice
``psi = zeta_f`` the norm is 1; for a point weight ``psi_(r)`` the bound is
the plain GRR bound at ``p = r``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .grid import (FractionalIndex, GridFunction, dilate, modulus_of_continuity,
                   rectangle_modulus_table, sample_function)
from .norms import (SeminormConfig, default_p_grid, gagliardo_seminorm_1d,
                    psi_alpha, seminorm_curve)
from .psi import (DegeneratePsiError, PsiFunction, YoungFunction,
                  grr_log_coefficient, log_fundamental_function, orlicz_from_psi)

__all__ = [
    "GRID_BIAS_TOL",
    "ContinuityCertificate",
    "grr_coefficient",
    "grr_bound_1d",
    "grr_bound_nd",
    "gl_norm_of_seminorms",
    "certify_theorem_2_1",
    "certify_theorem_3_1",
    "certify_inf_over_alpha",
    "orlicz_grr_bound",
    "OrliczBound",
    "fractional_orlicz_sobolev_bound",
    "SobolevOrliczBound",
    "exactness_experiment",
    "scaling_experiment",
]

# measured moduli are lattice maxima (biased low); a certificate holds when
# measured <= bound * (1 + GRID_BIAS_TOL)
GRID_BIAS_TOL = 0.02


@dataclass
class ContinuityCertificate:
    """Measured modulus against bound on a grid of distances.

    ``deltas`` has shape ``(m,)`` (d=1) or ``(m, d)``; ``slack`` is
    ``bound / measured`` (``inf`` where the measured value is 0).
    """

    deltas: np.ndarray
    measured: np.ndarray
    bound: np.ndarray
    params: dict = field(default_factory=dict)
    tol: float = GRID_BIAS_TOL

    def __post_init__(self):
        self.deltas = np.asarray(self.deltas, dtype=float)
        self.measured = np.asarray(self.measured, dtype=float)
        self.bound = np.asarray(self.bound, dtype=float)
        m = self.measured.shape[0]
        if self.bound.shape != (m,) or self.deltas.shape[0] != m:
            raise ValueError("certificate arrays must share one length")

    @property
    def slack(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            s = self.bound / self.measured
        return np.where(self.measured > 0, s, np.inf)

    @property
    def status(self) -> list:
        ok = self.measured <= self.bound * (1 + self.tol)
        return ["holds" if o else "violated" for o in ok]

    @property
    def holds(self) -> bool:
        return bool(np.all(self.measured <= self.bound * (1 + self.tol)))

    def rows(self) -> list[dict]:
        out = []
        for i in range(self.measured.size):
            dl = np.atleast_1d(self.deltas[i])
            row = {f"delta_{k + 1}": float(v) for k, v in enumerate(dl)} if dl.size > 1 \
                else {"delta": float(dl[0])}
            row.update(measured=float(self.measured[i]), bound=float(self.bound[i]),
                       slack=float(self.slack[i]), status=self.status[i])
            out.append(row)
        return out

    def to_dict(self) -> dict:
        return {"params": self.params, "tolerance": self.tol, "holds": self.holds,
                "rows": self.rows()}


# ---------------------------------------------------------------------------
# plain GRR bounds


def grr_coefficient(alpha, p: float) -> float:
    """``8**d 4**(d/p) prod_k (alpha_k + 1/p)/(alpha_k - 1/p)``."""
    idx = FractionalIndex.of(alpha)
    if not p > idx.p0:
        raise ValueError(f"p={p} must exceed max_k 1/alpha_k={idx.p0}")
    return float(np.exp(grr_log_coefficient(idx.alpha, p)))


def grr_bound_1d(alpha: float, p: float, delta: float, seminorm: float) -> float:
    """``8 4**(1/p) (alpha+1/p)/(alpha-1/p) delta**(alpha-1/p) * seminorm``."""
    if not p * alpha > 1:
        raise ValueError(f"p={p} must exceed 1/alpha={1 / alpha}")
    if not delta > 0:
        raise ValueError("delta must be positive")
    return grr_coefficient((alpha,), p) * delta ** (alpha - 1.0 / p) * seminorm


def grr_bound_nd(alpha, p: float, delta_vec, seminorm: float) -> float:
    """``coef * prod_k delta_k**alpha_k * (prod_k delta_k)**(-1/p) * seminorm``."""
    idx = FractionalIndex.of(alpha)
    dv = np.atleast_1d(np.asarray(delta_vec, dtype=float))
    if dv.size != idx.d:
        raise ValueError("delta vector length must equal the dimension")
    if np.any(dv <= 0):
        raise ValueError("delta components must be positive")
    c = grr_coefficient(idx, p)
    return c * float(np.prod(dv ** idx.as_array())) * float(np.prod(dv)) ** (-1.0 / p) * seminorm


# ---------------------------------------------------------------------------
# Grand Lebesgue certificates


def _psi_p_grid(psi: PsiFunction, p0: float, cfg: SeminormConfig, count: int | None):
    if psi.kind == "point":
        return np.array([psi.lower])
    if psi.kind == "tabulated":
        return psi.nodes[psi.nodes > p0]
    lo = max(psi.support[0], p0)
    if not lo < psi.support[1]:
        return np.empty(0)
    c = cfg if count is None else SeminormConfig(p_count=count, p_offset=cfg.p_offset,
                                                 p_max=cfg.p_max)
    return default_p_grid(lo, psi.support[1], c)


def gl_norm_of_seminorms(p_nodes, seminorms, psi: PsiFunction) -> float:
    """``max_p zeta_f(p) / psi(p)`` over the exponent nodes."""
    p_nodes = np.asarray(p_nodes, dtype=float)
    z = np.asarray(seminorms, dtype=float)
    if np.any(~np.isfinite(z)):
        return math.inf
    lp = psi.log_value(p_nodes)
    with np.errstate(divide="ignore"):
        r = np.where(z > 0, np.log(np.where(z > 0, z, 1.0)), -np.inf) - lp
    v = float(np.max(r))
    return math.exp(v) if v > -math.inf else 0.0


def _gl_bound(psi_a: PsiFunction, alpha_sum_log: np.ndarray, log_meas: np.ndarray, norm: float):
    out = np.empty(log_meas.size)
    for i, (lda, lm) in enumerate(zip(alpha_sum_log, log_meas)):
        out[i] = math.exp(lda - log_fundamental_function(psi_a, lm)) * norm
    return out


def _natural_or_given(f, idx, psi, p_grid, cfg, p_count):
    """Resolve the weight and the norm of ``f`` with respect to it."""
    if psi is None:
        if p_grid is None:
            c = cfg if p_count is None else SeminormConfig(
                p_count=p_count, p_offset=cfg.p_offset, p_max=cfg.p_max)
            pg = default_p_grid(idx.p0, cfg=c)
        else:
            pg = np.asarray(p_grid, float)
        res = seminorm_curve(f, idx, pg, cfg)
        vals = np.array([r.value for r in res])
        keep = np.isfinite(vals) & (vals > 0)
        if not np.any(keep):
            if np.all(vals[np.isfinite(vals)] == 0) and np.any(np.isfinite(vals)):
                return None, 0.0, pg, vals
            raise ValueError("seminorm diverges on the whole p-grid")
        if keep.sum() == 1:
            psi = PsiFunction.point(float(pg[keep][0]), float(vals[keep][0]))
        else:
            psi = PsiFunction.tabulated(pg[keep], vals[keep])
        return psi, 1.0, pg, vals
    pg = _psi_p_grid(psi, idx.p0, cfg, p_count) if p_grid is None else np.asarray(p_grid, float)
    lo, hi = psi.support
    pg = pg[(pg > idx.p0) & (pg >= lo) & (pg <= hi)]
    if pg.size == 0:
        raise DegeneratePsiError(
            f"effective support (max(A, {idx.p0}), B) of the weight is empty")
    res = seminorm_curve(f, idx, pg, cfg)
    vals = np.array([r.value for r in res])
    return psi, gl_norm_of_seminorms(pg, vals, psi), pg, vals


def certify_theorem_2_1(f: GridFunction, alpha: float, psi: PsiFunction | None,
                        delta_grid, cfg: SeminormConfig | None = None,
                        p_grid=None, p_count: int | None = 24) -> ContinuityCertificate:
    """One-dimensional Grand Lebesgue certificate.

    Parameters
    ----------
    f : GridFunction
    alpha : float
    psi : PsiFunction or None
        Weight; ``None`` uses the natural function of ``f`` tabulated on
        ``p_grid`` (norm 1).
    delta_grid : sequence of float
    p_grid : array_like, optional
        Exponents at which seminorms of ``f`` are evaluated for the norm.
    """
    if f.d != 1:
        raise ValueError("certify_theorem_2_1 is one-dimensional; use certify_theorem_3_1")
    return certify_theorem_3_1(f, (alpha,), psi, [np.asarray(delta_grid, float)], cfg,
                               p_grid, p_count, cartesian=False)


def certify_theorem_3_1(f: GridFunction, alpha, psi: PsiFunction | None, delta_grids,
                        cfg: SeminormConfig | None = None, p_grid=None,
                        p_count: int | None = 24, cartesian: bool = True) -> ContinuityCertificate:
    """Rectangle-modulus certificate in any dimension.

    ``delta_grids`` is one grid per axis; with ``cartesian`` every
    combination is certified, otherwise the grids are zipped (and a single
    grid is broadcast to all axes).
    """
    cfg = cfg or SeminormConfig()
    idx = FractionalIndex.of(alpha, f.d)
    if idx.d != f.d:
        raise ValueError("alpha has the wrong dimension")
    grids = [np.atleast_1d(np.asarray(g, dtype=float)) for g in delta_grids]
    if len(grids) == 1 and f.d > 1:
        grids = grids * f.d
    if len(grids) != f.d:
        raise ValueError("need one delta grid per axis")
    if cartesian:
        deltas = np.array(np.meshgrid(*grids, indexing="ij")).reshape(f.d, -1).T
    else:
        deltas = np.column_stack(np.broadcast_arrays(*grids))
    if np.any(deltas <= 0) or np.any(deltas > f.extent):
        raise ValueError("delta components must lie in (0, extent]")

    psi_used, norm, pg, vals = _natural_or_given(f, idx, psi, p_grid, cfg, p_count)
    if f.d == 1:
        measured = np.array([modulus_of_continuity(f, float(d[0])) for d in deltas])
    else:
        gaps = np.floor(deltas / f.h + 1e-9).astype(int)
        T = rectangle_modulus_table(f, np.max(gaps, axis=0))
        measured = np.array([0.0 if np.min(g) == 0 else T[tuple(g)] for g in gaps])

    params = {"form": "grand-lebesgue", "alpha": list(idx.alpha), "d": f.d,
              "weight": "natural" if psi is None else psi.kind,
              "norm": norm, "p_nodes": [float(p) for p in pg],
              "seminorms": [float(v) for v in vals],
              "coefficient_placement": "psi_alpha = psi * 8^d 4^(d/p) prod (a+1/p)/(a-1/p); "
                                       "norm = sup_p seminorm(p) / psi(p)"}
    if psi_used is None or norm == 0.0:
        return ContinuityCertificate(deltas[:, 0] if f.d == 1 else deltas, measured,
                                     np.zeros(measured.size), params)
    psi_a = psi_alpha(psi_used, idx)
    log_prod = np.sum(np.log(deltas), axis=1)
    log_da = np.log(deltas) @ idx.as_array()
    bound = _gl_bound(psi_a, log_da, log_prod, norm)
    return ContinuityCertificate(deltas[:, 0] if f.d == 1 else deltas, measured, bound, params)


def certify_inf_over_alpha(f: GridFunction, alpha_grid, psi_provider: Callable | None,
                           delta_grid, cfg: SeminormConfig | None = None,
                           p_count: int | None = 24) -> ContinuityCertificate:
    """Minimum over ``alpha_grid`` of the one-dimensional certificate bound.

    ``psi_provider(alpha)`` returns the weight for each ``alpha`` (``None``
    or a provider returning ``None`` selects the natural function). The
    minimising ``alpha`` per distance is stored in ``params["argmin_alpha"]``.
    """
    alphas = [float(a) for a in np.atleast_1d(alpha_grid)]
    if not alphas:
        raise ValueError("empty alpha grid")
    if any(not 0 < a <= 1 for a in alphas):
        raise ValueError("alpha values must lie in (0, 1]")
    certs = []
    for a in alphas:
        psi = psi_provider(a) if psi_provider is not None else None
        certs.append(certify_theorem_2_1(f, a, psi, delta_grid, cfg, p_count=p_count))
    B = np.vstack([c.bound for c in certs])
    k = np.argmin(B, axis=0)
    best = B[k, np.arange(B.shape[1])]
    params = {"form": "inf-over-alpha", "alpha_grid": alphas,
              "argmin_alpha": [alphas[i] for i in k],
              "per_alpha_bounds": B.tolist()}
    return ContinuityCertificate(certs[0].deltas, certs[0].measured, best, params)


# ---------------------------------------------------------------------------
# Orlicz form


def _distance_rule(pk):
    """``(p, dp)`` callables from a rule: ``("power", gamma)`` or a callable pair."""
    if isinstance(pk, tuple) and len(pk) == 2 and isinstance(pk[0], str):
        kind, g = pk
        if kind != "power":
            raise ValueError(f"unknown distance rule {kind!r}")
        g = float(g)
        if not g > 0:
            raise ValueError("power distance needs gamma > 0")
        return (lambda u: u ** g), (lambda u: g * u ** (g - 1.0))
    if isinstance(pk, (tuple, list)) and len(pk) == 2 and all(callable(c) for c in pk):
        return pk[0], pk[1]
    raise ValueError("distance rule must be ('power', gamma) or (p, dp)")


@dataclass(frozen=True)
class OrliczBound:
    value: float
    status: str = "ok"

    def __float__(self) -> float:
        return self.value


def orlicz_grr_bound(phi: YoungFunction, p_k: Sequence, B_value: float, delta_vec,
                     shells: int = 80, ratio: float = 0.6, order: int = 6) -> OrliczBound:
    """``8**d int_0^delta Phi^{-1}(4**d B / prod u_j**2) prod dp_k(u_k)``.

    Tensor Gauss-Legendre quadrature on geometric shells towards 0 in every
    axis; ``dp_k = p_k'(u) du``. The part below the last shell is added as
    a geometric tail fitted to the last two shell sums; the integral is
    declared divergent when those sums stop decaying.
    """
    dv = np.atleast_1d(np.asarray(delta_vec, dtype=float))
    d = dv.size
    rules = [_distance_rule(p) for p in (p_k if len(p_k) == d else list(p_k) * d)]
    if len(rules) != d:
        raise ValueError("need one distance rule per axis")
    if B_value < 0:
        raise ValueError("B must be non-negative")
    if np.any(dv <= 0):
        raise ValueError("delta components must be positive")
    if B_value == 0:
        return OrliczBound(0.0)
    x, w = np.polynomial.legendre.leggauss(order)
    x, w = 0.5 * (x + 1), 0.5 * w
    axes_u, axes_w, axes_shell = [], [], []
    for k in range(d):
        edges = dv[k] * ratio ** np.arange(shells + 1)
        u = (edges[1:, None] + (edges[:-1] - edges[1:])[:, None] * x[None, :]).ravel()
        wt = ((edges[:-1] - edges[1:])[:, None] * w[None, :]).ravel()
        axes_u.append(u)
        axes_w.append(wt * rules[k][1](u))
        axes_shell.append(np.repeat(np.arange(shells), order))
    grids = np.meshgrid(*axes_u, indexing="ij")
    wts = np.meshgrid(*axes_w, indexing="ij")
    prod_u2 = np.prod([g ** 2 for g in grids], axis=0)
    W = np.prod(wts, axis=0)
    vals = phi.inverse((4.0 ** d) * B_value / prod_u2) * W
    total = float(np.sum(vals))
    if not math.isfinite(total):
        return OrliczBound(math.inf, "divergent")
    # L-shaped shell sums (outermost shell index over the axes); their decay
    # ratio is geometric in the limit, which gives the tail beyond the last shell
    sh = np.meshgrid(*axes_shell, indexing="ij")
    level = np.max(np.stack(sh), axis=0)
    c = np.bincount(level.ravel(), weights=vals.ravel(), minlength=shells)
    if c[-1] <= 0 or total <= 0:
        return OrliczBound(8.0 ** d * total)
    r = c[-1] / c[-2]
    if not r < 1.0 - 1e-3:
        return OrliczBound(math.inf, "divergent")
    tail = c[-1] * r / (1.0 - r)
    if tail > 1e3 * total:
        return OrliczBound(math.inf, "divergent")
    return OrliczBound(8.0 ** d * (total + tail))


@dataclass
class SobolevOrliczBound:
    """Fractional Orlicz-Sobolev bound over a distance grid."""

    deltas: np.ndarray
    bound: np.ndarray
    constant: float
    norm: float
    young: YoungFunction | None
    params: dict = field(default_factory=dict)


def fractional_orlicz_sobolev_bound(f: GridFunction, alpha, delta_vecs, tau: PsiFunction,
                                    cfg: SeminormConfig | None = None,
                                    alpha_grid=None) -> SobolevOrliczBound:
    """``C(alpha, d) * delta**alpha * ||f|| / phi(G tau, prod delta_k)``.

    ``C = 8**d 4**(d/A) prod_k (a_k+1/A)/(a_k-1/A)`` bounds the GRR
    coefficient on ``(A, inf)`` (it decreases in ``p``), so the Grand
    Lebesgue certificate with ``psi_alpha = tau * coefficient`` implies this
    bound with ``||f|| = sup_p zeta_f(p)/tau(p)``. The exponential Young
    function ``N_alpha`` generated by ``tau`` is built and returned; the
    constant of the Orlicz/Grand Lebesgue norm equivalence is not
    computed and stays absorbed.

    With ``alpha_grid`` (sequence of alpha vectors) the bound is the
    minimum over the grid, ``tau`` then being a callable ``alpha -> tau``.
    """
    cfg = cfg or SeminormConfig()
    dvs = np.atleast_2d(np.asarray(delta_vecs, dtype=float))
    if dvs.shape[1] != f.d:
        dvs = dvs.T
    if alpha_grid is not None:
        parts = [fractional_orlicz_sobolev_bound(f, a, dvs, tau(a) if callable(tau) else tau, cfg)
                 for a in alpha_grid]
        B = np.vstack([p.bound for p in parts])
        k = np.argmin(B, axis=0)
        return SobolevOrliczBound(dvs, B[k, np.arange(B.shape[1])], math.nan, math.nan, None,
                                  {"alpha_grid": [list(FractionalIndex.of(a, f.d).alpha)
                                                  for a in alpha_grid],
                                   "argmin": [int(i) for i in k]})
    idx = FractionalIndex.of(alpha, f.d)
    A, B_ = tau.support
    if math.isfinite(B_):
        raise ValueError("tau must be supported on (A, inf)")
    if not A > idx.p0:
        raise ValueError(f"tau support must start above max_k 1/alpha_k={idx.p0}")
    C = grr_coefficient(idx, A)
    pg = _psi_p_grid(tau, idx.p0, cfg, 24)
    vals = np.array([r.value for r in seminorm_curve(f, idx, pg, cfg)])
    norm = gl_norm_of_seminorms(pg, vals, tau)
    try:
        young = orlicz_from_psi(tau)
    except ValueError:
        young = None
    out = np.empty(dvs.shape[0])
    for i, dv in enumerate(dvs):
        if norm == 0:
            out[i] = 0.0
            continue
        lphi = log_fundamental_function(tau, float(np.sum(np.log(dv))))
        out[i] = C * math.exp(float(np.log(dv) @ idx.as_array()) - lphi) * norm
    return SobolevOrliczBound(dvs, out, C, norm, young,
                              {"alpha": list(idx.alpha), "A": A,
                               "equivalence_constant": "absorbed (not computed)"})


# ---------------------------------------------------------------------------
# experiments


def exactness_experiment(alpha: float, p: float, delta_list, Delta_list, n: int = 4097,
                         cfg: SeminormConfig | None = None) -> list[dict]:
    """Log-ratio ``V = |log omega(f_D, delta)| / |log bound(delta)|`` for ``f_D = x**(alpha-1/p+D)``.

    The bound is the certificate with the point weight at ``p`` (the plain
    GRR bound). One row per ``(Delta, delta)``.
    """
    cfg = cfg or SeminormConfig()
    s0 = alpha - 1.0 / p
    if not s0 > 0:
        raise ValueError("need alpha - 1/p > 0")
    hi = 1.0 - alpha + 1.0 / p
    for D in Delta_list:
        if not 0 < D < hi:
            raise ValueError(f"Delta={D} outside the admissible range (0, {hi})")
    rows = []
    for D in Delta_list:
        s = s0 + D
        f = sample_function(lambda x, s=s: x ** s, 1, n)
        w = gagliardo_seminorm_1d(f, alpha, p, cfg).value
        for dl in delta_list:
            om = modulus_of_continuity(f, dl)
            b = grr_bound_1d(alpha, p, dl, w)
            lb = abs(math.log(b))
            v = abs(math.log(om)) / lb if lb > 0 and om > 0 else math.inf
            rows.append({"Delta": float(D), "delta": float(dl), "omega": om,
                         "omega_expected": dl ** s, "bound": b, "seminorm": w, "V": v})
    return rows


def scaling_experiment(spec, alpha: float, p: float, lambda_list, n: int = 1025,
                       cfg: SeminormConfig | None = None) -> list[dict]:
    """Dilation identity ``||T_l f|| = l**(alpha-1/p) ||f||`` for the tapered extension.

    ``f`` is sampled on ``[0, 2]`` with ``n`` nodes; ``T_l f`` on
    ``[0, 2/l]`` with the same spacing, so the two quadratures share no
    nodes beyond the origin. Seminorms are taken over the support boxes.
    """
    cfg = cfg or SeminormConfig()
    base = dilate(spec, 1.0, n)
    if abs(base.values[-1]) > 1e-12:
        raise ValueError("support escapes the computational box")
    ref = gagliardo_seminorm_1d(base, alpha, p, cfg).value
    rows = []
    for lam in lambda_list:
        lam = float(lam)
        if not 0 < lam <= 1:
            raise ValueError("lambda must lie in (0, 1]")
        m = int(round((n - 1) / lam)) + 1
        g = dilate(spec, lam, m)
        val = gagliardo_seminorm_1d(g, alpha, p, cfg).value
        rows.append({"lambda": lam, "seminorm": val, "reference": ref,
                     "ratio": val / (lam ** (alpha - 1.0 / p) * ref), "n": m})
    return rows
