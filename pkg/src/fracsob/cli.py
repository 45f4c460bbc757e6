"""Batch experiment runner.

Every subcommand reads its section of an INI configuration (built-in
defaults, then ``--config``, then ``--set section.key=value``), validates all
parameters before any computation, writes ``<subcommand>.csv`` and/or
``<subcommand>.json`` into the output directory and prints one summary line.

Exit codes: 0 all checks pass, 1 a check failed (artefacts still written),
2 configuration or input error (nothing written).
"""

from __future__ import annotations

import argparse
import ast
import configparser
import math
import operator
import os
import sys
from pathlib import Path

import numpy as np

from . import certificates as cert
from . import fields
from . import grid
from . import norms
from . import psi as psimod
from .report import csv_text, json_text, write_text_atomic

ENV_OUT = "FRACSOB_OUT"

DEFAULTS = """\
[general]
seed = 0
workers = 1
format = both

[seminorm]
function = x
d = 1
n = 1025
alpha = 0.5
p = 4
method = exact
expected =
rtol = 1e-3

[glnorm]
function = x
d = 1
n = 1001
psi = power:1
expected =
rtol = 1e-6

[fundamental]
psi = pole:1,1,2,4
deltas = 1e-6 1e-5 1e-4 1e-3 1e-2 1e-1 1
q =

[certify-1d]
function = x**0.6
n = 1025
alpha = 0.5
psi = natural
deltas = 2**-1 2**-2 2**-3 2**-4 2**-5 2**-6 2**-7 2**-8
p_count = 12
tolerance = 0.02

[certify-nd]
function = x1**0.7 * x2**0.8
n = 64
alpha = 0.5 0.5
deltas = 2**-1 2**-2 2**-3 2**-4 2**-5
p_count = 8
tolerance = 0.02

[exactness]
alpha = 0.9
p = 8
n = 4097
deltas = 2**-4 2**-5 2**-6 2**-7 2**-8 2**-9 2**-10
shifts = 0.2 0.1 0.05
v_floor = 0.98
v_target = 1.05

[scaling]
function = sin(pi*x)**2
alpha = 0.5
p = 4
n = 1025
lambdas = 0.5 0.25
tolerance = 0.01

[orlicz-roundtrip]
m = 1 2 4
p_min = 2
p_max = 100
p_count = 50
band = 4

[field-thm41]
kind = brownian_motion
n = 16385
hurst =
alpha = 0.4
deltas = 2**-2 2**-3 2**-4 2**-5 2**-6 2**-7
paths = 10000
theta_paths = 1000
p_count = 24
min_holds_fraction = 0.99

[field-thm42]
kind = brownian_motion
n = 16385
hurst =
shifts = 1 3 7
deltas = 2**-4 2**-5 2**-6 2**-7 2**-8 2**-9 2**-10 2**-11 2**-12 2**-13 2**-14
paths = 10000
ratio_limit = 10

[field-tails]
kind = brownian_motion
n = 4097
hurst =
alpha = 0.4
q = 4
delta = 2**-6
paths = 10000
theta_paths = 1000
p_count = 24

[distance-axioms]
function = x1*x2
d = 2
n = 33
trials = 2000
require_triangle = false
"""


class ConfigError(ValueError):
    """Invalid configuration or input; exit status 2."""


# ---------------------------------------------------------------------------
# value parsing

_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
        ast.Div: operator.truediv, ast.Pow: operator.pow, ast.USub: operator.neg,
        ast.UAdd: operator.pos}


def _num(token: str) -> float:
    """Arithmetic literal such as ``2**-7`` or ``1e-3``."""
    def ev(node):
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return node.value
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.operand))
        raise ValueError(token)
    try:
        return float(ev(ast.parse(token.strip(), mode="eval").body))
    except (SyntaxError, ValueError, ZeroDivisionError, OverflowError):
        raise ConfigError(f"not a number: {token!r}") from None


def _nums(text: str) -> list[float]:
    out = [_num(t) for t in text.replace(",", " ").split()]
    if not out:
        raise ConfigError("empty number list")
    return out


def _int(text: str) -> int:
    v = _num(text)
    if v != int(v):
        raise ConfigError(f"not an integer: {text!r}")
    return int(v)


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def parse_psi(text: str):
    """``natural`` | ``power:b`` | ``point:r`` | ``constant:c[,lower]`` | ``pole:a,b,lower,upper``."""
    t = text.strip()
    if t == "natural":
        return None
    kind, _, args = t.partition(":")
    vals = _nums(args) if args else []
    try:
        if kind == "power" and len(vals) == 1:
            return psimod.PsiFunction.power(vals[0])
        if kind == "point" and len(vals) == 1:
            return psimod.PsiFunction.point(vals[0])
        if kind == "constant" and len(vals) in (1, 2):
            return psimod.PsiFunction.constant(*vals)
        if kind == "pole" and len(vals) == 4:
            return psimod.PsiFunction.power_pole(*vals)
    except ValueError as e:
        raise ConfigError(f"invalid weight {text!r}: {e}") from None
    raise ConfigError(f"unknown weight spec {text!r}")


def _function(text: str, d: int):
    try:
        return grid.compile_expression(text, d)
    except (ValueError, SyntaxError) as e:
        raise ConfigError(f"invalid function {text!r}: {e}") from None


def _model(sec, seed: int) -> fields.RandomFieldModel:
    h = sec.get("hurst", "").strip()
    try:
        return fields.RandomFieldModel(sec["kind"], n=_int(sec["n"]), seed=seed,
                                       hurst=_num(h) if h else None)
    except ValueError as e:
        raise ConfigError(str(e)) from None


# ---------------------------------------------------------------------------
# subcommands: each has a validator (section -> params) and a runner
# (params -> (rows, summary dict, passed, message))


def _v_seminorm(s, g):
    d = _int(s["d"])
    alpha = _nums(s["alpha"])
    if len(alpha) == 1 and d > 1:
        alpha = alpha * d
    if s["method"] not in ("exact", "graded"):
        raise ConfigError("method must be exact or graded")
    p = _num(s["p"])
    idx = _index(alpha, d)
    if not p > idx.p0:
        raise ConfigError(f"p={p} must exceed max_k 1/alpha_k={idx.p0}")
    return dict(f=grid.sample_function(_function(s["function"], d), d, _int(s["n"])),
                alpha=idx, p=p, cfg=norms.SeminormConfig(method=s["method"]),
                expected=_num(s["expected"]) if s["expected"].strip() else None,
                rtol=_num(s["rtol"]))


def _index(alpha, d):
    try:
        idx = grid.FractionalIndex.of(alpha, d)
    except ValueError as e:
        raise ConfigError(str(e)) from None
    if idx.d != d:
        raise ConfigError("alpha needs one entry per axis")
    return idx


def _r_seminorm(P, g):
    f, idx = P["f"], P["alpha"]
    if f.d == 1:
        r = norms.gagliardo_seminorm_1d(f, idx.alpha[0], P["p"], P["cfg"])
    else:
        r = norms.gagliardo_seminorm_nd(f, idx, P["p"], P["cfg"])
    ok = r.status == "ok" if hasattr(r, "status") else math.isfinite(r.value)
    row = {"alpha": " ".join(map(repr, idx.alpha)), "p": P["p"], "n": f.n,
           "value": r.value, "status": r.status}
    if P["expected"] is not None:
        err = abs(r.value - P["expected"]) / abs(P["expected"])
        row.update(expected=P["expected"], rel_error=err)
        ok = ok and err <= P["rtol"]
    return [row], row, ok, f"seminorm={r.value:.10g} status={r.status}"


def _v_glnorm(s, g):
    d = _int(s["d"])
    psi = parse_psi(s["psi"])
    if psi is None:
        raise ConfigError("glnorm needs an explicit weight")
    return dict(f=grid.sample_function(_function(s["function"], d), d, _int(s["n"])), psi=psi,
                expected=_num(s["expected"]) if s["expected"].strip() else None,
                rtol=_num(s["rtol"]))


def _r_glnorm(P, g):
    r = norms.grand_lebesgue_norm(P["f"], P["psi"])
    row = {"value": r.value, "argmax_p": r.argmax_p, "divergent_suspect": r.divergent_suspect}
    ok = math.isfinite(r.value)
    if P["expected"] is not None:
        err = abs(r.value - P["expected"]) / abs(P["expected"])
        row.update(expected=P["expected"], rel_error=err)
        ok = ok and err <= P["rtol"]
    return [row], row, ok, f"glnorm={r.value:.10g} at p={r.argmax_p:.6g}"


def _v_fundamental(s, g):
    psi = parse_psi(s["psi"])
    if psi is None:
        raise ConfigError("fundamental needs an explicit weight")
    deltas = _nums(s["deltas"])
    if any(not 0 < x <= 1 for x in deltas):
        raise ConfigError("deltas must lie in (0, 1]")
    q = _num(s["q"]) if s["q"].strip() else None
    if q is not None and not psi.support[0] < q < psi.support[1]:
        raise ConfigError(f"q must lie inside the support {psi.support}")
    return dict(psi=psi, deltas=sorted(deltas), q=q)


def _r_fundamental(P, g):
    rows = []
    for dl in P["deltas"]:
        row = {"delta": dl, "phi": psimod.fundamental_function(P["psi"], dl)}
        if P["q"] is not None:
            row["phi_q"] = psimod.truncated_fundamental_function(P["psi"], P["q"], dl)
        rows.append(row)
    phis = [r["phi"] for r in rows]
    ok = all(0 < v < math.inf for v in phis) and all(b >= a * (1 - 1e-12)
                                                    for a, b in zip(phis, phis[1:]))
    if P["q"] is not None:
        ok = ok and all(r["phi_q"] <= r["phi"] * (1 + 1e-12) for r in rows)
    return rows, {"rows": rows, "monotone_positive": ok}, ok, f"{len(rows)} deltas"


def _v_certify_1d(s, g):
    alpha = _num(s["alpha"])
    if not 0 < alpha <= 1:
        raise ConfigError("alpha must lie in (0, 1]")
    deltas = _nums(s["deltas"])
    if any(not 0 < x <= 1 for x in deltas):
        raise ConfigError("deltas must lie in (0, 1]")
    return dict(f=grid.sample_function(_function(s["function"], 1), 1, _int(s["n"])),
                alpha=alpha, psi=parse_psi(s["psi"]), deltas=deltas,
                p_count=_int(s["p_count"]), tol=_num(s["tolerance"]))


def _r_certify_1d(P, g):
    c = cert.certify_theorem_2_1(P["f"], P["alpha"], P["psi"], P["deltas"], p_count=P["p_count"])
    c.tol = P["tol"]
    return _cert_out(c)


def _cert_out(c):
    rows = c.rows()
    fin = c.slack[np.isfinite(c.slack)]
    smin = float(fin.min()) if fin.size else math.inf
    return rows, c.to_dict(), c.holds, f"min slack={smin:.4g} over {len(rows)} cells"


def _v_certify_nd(s, g):
    alpha = _nums(s["alpha"])
    d = len(alpha)
    if d < 2:
        raise ConfigError("certify-nd needs one alpha per axis (d >= 2)")
    idx = _index(alpha, d)
    deltas = _nums(s["deltas"])
    if any(not 0 < x <= 1 for x in deltas):
        raise ConfigError("deltas must lie in (0, 1]")
    n = _int(s["n"])
    if n > grid.RECT_CAP.get(d, 8):
        raise ConfigError(f"n={n} exceeds the rectangle-sweep cap {grid.RECT_CAP.get(d, 8)}")
    return dict(f=grid.sample_function(_function(s["function"], d), d, n), alpha=idx,
                deltas=deltas, p_count=_int(s["p_count"]), tol=_num(s["tolerance"]))


def _r_certify_nd(P, g):
    c = cert.certify_theorem_3_1(P["f"], P["alpha"], None, [P["deltas"]], p_count=P["p_count"])
    c.tol = P["tol"]
    return _cert_out(c)


def _v_exactness(s, g):
    alpha, p = _num(s["alpha"]), _num(s["p"])
    if not 0 < alpha <= 1 or not alpha - 1 / p > 0:
        raise ConfigError("need 0 < alpha <= 1 and alpha - 1/p > 0")
    hi = 1 - alpha + 1 / p
    Ds = _nums(s["shifts"])
    bad = [D for D in Ds if not 0 < D < hi]
    if bad:
        raise ConfigError(f"Delta {bad} outside the admissible range (0, 1 - alpha + 1/p) "
                          f"= (0, {hi:.6g})")
    return dict(alpha=alpha, p=p, n=_int(s["n"]), deltas=_nums(s["deltas"]), Ds=Ds,
                v_floor=_num(s["v_floor"]), v_target=_num(s["v_target"]))


def _r_exactness(P, g):
    rows = cert.exactness_experiment(P["alpha"], P["p"], P["deltas"], P["Ds"], n=P["n"])
    floor_ok = all(r["V"] >= P["v_floor"] for r in rows)
    d_min = min(P["deltas"])
    seq = [r["V"] for D in sorted(P["Ds"], reverse=True) for r in rows
           if r["Delta"] == D and r["delta"] == d_min]
    mono = all(b <= a for a, b in zip(seq, seq[1:]))
    target = seq[-1] <= P["v_target"]
    summ = {"floor_ok": floor_ok, "monotone_at_smallest_delta": mono,
            "target_reached": target, "V_at_smallest_delta": seq}
    return rows, summ, floor_ok and mono and target, \
        f"V(min delta)={' '.join(f'{v:.4g}' for v in seq)}"


def _v_scaling(s, g):
    alpha, p = _num(s["alpha"]), _num(s["p"])
    if not alpha - 1 / p > 0:
        raise ConfigError("need alpha - 1/p > 0")
    lams = _nums(s["lambdas"])
    if any(not 0 < x <= 1 for x in lams):
        raise ConfigError("lambdas must lie in (0, 1]")
    return dict(fn=_function(s["function"], 1), alpha=alpha, p=p, n=_int(s["n"]),
                lams=lams, tol=_num(s["tolerance"]))


def _r_scaling(P, g):
    rows = cert.scaling_experiment(P["fn"], P["alpha"], P["p"], P["lams"], n=P["n"])
    ok = all(abs(r["ratio"] - 1) <= P["tol"] for r in rows)
    return rows, {"rows": rows, "expected_exponent": P["alpha"] - 1 / P["p"]}, ok, \
        "ratios " + " ".join(f"{r['ratio']:.6f}" for r in rows)


def _v_roundtrip(s, g):
    ms = _nums(s["m"])
    if any(m <= 0 for m in ms):
        raise ConfigError("m must be positive")
    lo, hi = _num(s["p_min"]), _num(s["p_max"])
    if not 1 <= lo < hi:
        raise ConfigError("need 1 <= p_min < p_max")
    return dict(ms=ms, p=np.geomspace(lo, hi, _int(s["p_count"])), band=_num(s["band"]))


def _r_roundtrip(P, g):
    rows, ok, parts = [], True, []
    for m in P["ms"]:
        r = psimod.orlicz_roundtrip(psimod.PsiFunction.power(1 / m), P["p"])
        inband = bool(np.all((r["ratio"] >= 1 / P["band"]) & (r["ratio"] <= P["band"]))
                      and r["dropped"].size == 0)
        ok &= inband
        parts.append(f"m={m:g}:[{r['ratio'].min():.3g},{r['ratio'].max():.3g}]")
        rows += [{"m": m, "p": p, "psi": a, "psi_back": b, "ratio": q}
                 for p, a, b, q in zip(r["p"], r["psi"], r["psi_back"], r["ratio"])]
    return rows, {"band": P["band"], "ok": ok}, ok, " ".join(parts)


def _mc(g, paths):
    return fields.MCConfig(n_paths=paths, workers=g["workers"])


def _v_thm41(s, g):
    m = _model(s, g["seed"])
    idx = _index(_nums(s["alpha"]), m.d) if len(_nums(s["alpha"])) == m.d \
        else _index(_nums(s["alpha"]) * m.d, m.d)
    deltas = _nums(s["deltas"])
    if any(not 0 < x <= 1 for x in deltas):
        raise ConfigError("deltas must lie in (0, 1]")
    return dict(model=m, alpha=idx, deltas=deltas, paths=_int(s["paths"]),
                theta_paths=_int(s["theta_paths"]), p_count=_int(s["p_count"]),
                min_frac=_num(s["min_holds_fraction"]))


def _r_thm41(P, g):
    m, idx = P["model"], P["alpha"]
    pg = idx.p0 + np.geomspace(0.05, 40.0, P["p_count"])
    th = fields.theta_natural(m, idx, pg, _mc(g, P["theta_paths"]))
    rep = fields.thm41_experiment(m, idx, P["deltas"], _mc(g, P["paths"]), theta=th)
    ok = rep["holds_fraction"] >= P["min_frac"]
    return rep["rows"], rep, ok, \
        f"holds in {rep['holds_fraction']:.3f} of cells; bound exponent {rep['bound_exponent']:.4f}"


def _v_thm42(s, g):
    m = _model(s, g["seed"])
    if m.kind != "brownian_motion":
        raise ConfigError("the Delta family is defined for Brownian motion")
    deltas = _nums(s["deltas"])
    if any(not 0 < x <= 1 / math.e for x in deltas):
        raise ConfigError("deltas must lie in (0, 1/e]")
    if min(deltas) < m.h:
        raise ConfigError("smallest delta is below the lattice spacing")
    Ds = _nums(s["shifts"])
    if any(D <= 0 for D in Ds):
        raise ConfigError("Delta must be positive")
    return dict(model=m, deltas=deltas, Ds=Ds, paths=_int(s["paths"]),
                ratio_limit=_num(s["ratio_limit"]))


def _r_thm42(P, g):
    m = P["model"]
    mc = _mc(g, P["paths"])
    om = fields.path_moduli(m, P["deltas"], mc)
    rows, reps, ok = [], [], True
    for D in P["Ds"]:
        a = 2 + 2 * D
        K = fields.gaussian_abs_moment(a)
        try:
            rep = fields.thm42_experiment(m, a, [D], K, P["deltas"], mc, omega=om)
        except fields.PreconditionError as e:
            reps.append({"Delta": D, "error": str(e)})
            ok = False
            continue
        rep["Delta"] = D
        reps.append(rep)
        ok &= rep["R_ratio"] < P["ratio_limit"] and rep["floor_min_ratio"] > 0
        rows += [{"Delta": D, "alpha": a, "beta": D, "normalizer_exponent": D / a,
                  "delta": d[0], "mean_R": r} for d, r in zip(rep["deltas"], rep["mean_R"])]
    msg = " ".join(f"D={r['Delta']:g}:ratio={r.get('R_ratio', math.nan):.3g}" for r in reps)
    return rows, {"runs": reps}, ok, msg


def _v_tails(s, g):
    m = _model(s, g["seed"])
    a = _nums(s["alpha"])
    idx = _index(a if len(a) == m.d else a * m.d, m.d)
    q = _num(s["q"])
    if not q > idx.p0:
        raise ConfigError(f"q must exceed {idx.p0}")
    return dict(model=m, alpha=idx, q=q, delta=_nums(s["delta"]), paths=_int(s["paths"]),
                theta_paths=_int(s["theta_paths"]), p_count=_int(s["p_count"]))


def _r_tails(P, g):
    m, idx = P["model"], P["alpha"]
    pg = idx.p0 + np.geomspace(0.05, 40.0, P["p_count"])
    th = fields.theta_natural(m, idx, pg, _mc(g, P["theta_paths"]))
    rep = fields.tail_report(m, idx, P["q"], P["delta"], _mc(g, P["paths"]), theta=th)
    bad = sum(not r["ok"] for r in rep["rows"])
    return rep["rows"], rep, rep["ok"], f"{len(rep['rows'])} thresholds, {bad} violations"


def _v_distance(s, g):
    d = _int(s["d"])
    return dict(f=grid.sample_function(_function(s["function"], d), d, _int(s["n"])),
                trials=_int(s["trials"]), req_tri=_bool(s["require_triangle"]))


def _r_distance(P, g):
    rep = grid.rectangle_distance_check(P["f"], P["trials"], g["seed"])
    summ = rep.summary()
    ok = not rep.nonneg_or_degenerate and not rep.symmetry and \
        (not P["req_tri"] or not rep.triangle)
    rows = [{"axiom": k, "violations": v} for k, v in summ.items() if k != "trials"]
    summ["triangle_examples"] = [list(map(str, t)) for t in rep.triangle[:5]]
    return rows, summ, ok, ", ".join(f"{r['axiom']}={r['violations']}" for r in rows)


SUBCOMMANDS = {
    "seminorm": (_v_seminorm, _r_seminorm),
    "glnorm": (_v_glnorm, _r_glnorm),
    "fundamental": (_v_fundamental, _r_fundamental),
    "certify-1d": (_v_certify_1d, _r_certify_1d),
    "certify-nd": (_v_certify_nd, _r_certify_nd),
    "exactness": (_v_exactness, _r_exactness),
    "scaling": (_v_scaling, _r_scaling),
    "orlicz-roundtrip": (_v_roundtrip, _r_roundtrip),
    "field-thm41": (_v_thm41, _r_thm41),
    "field-thm42": (_v_thm42, _r_thm42),
    "field-tails": (_v_tails, _r_tails),
    "distance-axioms": (_v_distance, _r_distance),
}


# ---------------------------------------------------------------------------
# driver


def load_config(path: str | None, overrides: list[str]) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None)
    cp.read_string(DEFAULTS)
    known = {s: set(cp[s]) for s in cp.sections()}
    if path:
        try:
            text = Path(path).read_text()
        except OSError as e:
            raise ConfigError(f"cannot read config: {e}") from None
        user = configparser.ConfigParser(interpolation=None)
        try:
            user.read_string(text)
        except configparser.Error as e:
            raise ConfigError(f"malformed config: {e}") from None
        for sec in user.sections():
            if sec not in known:
                raise ConfigError(f"unknown section [{sec}]")
            for k, v in user[sec].items():
                if k not in known[sec]:
                    raise ConfigError(f"unknown key {k!r} in [{sec}]")
                cp[sec][k] = v
    for ov in overrides:
        key, eq, val = ov.partition("=")
        sec, dot, k = key.rpartition(".")
        if not eq or not dot or sec not in known or k not in known[sec]:
            raise ConfigError(f"bad override {ov!r} (expected section.key=value)")
        cp[sec][k] = val
    return cp


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fracsob", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=list(SUBCOMMANDS) + ["defaults"])
    ap.add_argument("--config", metavar="PATH")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--workers", type=int)
    ap.add_argument("--out", metavar="DIR")
    ap.add_argument("--format", choices=("csv", "json", "both"))
    ap.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                    help="override one configuration value")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    if args.command == "defaults":
        sys.stdout.write(DEFAULTS)
        return 0
    try:
        cp = load_config(args.config, args.set)
        gen = cp["general"]
        g = {"seed": args.seed if args.seed is not None else _int(gen["seed"]),
             "workers": args.workers if args.workers is not None else _int(gen["workers"]),
             "format": args.format or gen["format"].strip()}
        if g["format"] not in ("csv", "json", "both"):
            raise ConfigError("format must be csv, json or both")
        if g["workers"] < 1:
            raise ConfigError("workers must be >= 1")
        if not 0 <= g["seed"] < 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        validate, run = SUBCOMMANDS[args.command]
        params = validate(cp[args.command], g)
    except (ConfigError, ValueError, KeyError) as e:
        print(f"fracsob {args.command}: configuration error: {e}", file=sys.stderr)
        return 2
    out = Path(args.out or os.environ.get(ENV_OUT) or "fracsob-out")
    rows, summary, ok, msg = run(params, g)
    doc = {"command": args.command, "seed": g["seed"], "passed": bool(ok),
           "config": {k: dict(cp[k]) for k in ("general", args.command)}, "summary": summary}
    texts = {}
    if g["format"] in ("csv", "both"):
        texts[out / f"{args.command}.csv"] = csv_text(rows, args.command)
    if g["format"] in ("json", "both"):
        texts[out / f"{args.command}.json"] = json_text(doc)
    for path, text in texts.items():
        write_text_atomic(path, text)
    print(f"{'PASS' if ok else 'FAIL'} {args.command}: {msg}")
    return 0 if ok else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
