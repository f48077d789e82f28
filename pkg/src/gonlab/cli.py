"""Command-line front end.

Every subcommand maps to one library operation.  Options come from flags or
from a JSON ``--config`` file (flags win; unknown keys are rejected).  Exit
codes: 0 success, 1 an audit or invariant check failed (the report is still
written), 2 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction

from . import badlab, bestapprox, dynamics, minima, templates
from .core import scalar as sc
from .core.linalg import Dims, Grid, LatticeBasis, lattice_from_matrix
from .io import csv_text, json_report


class InputError(ValueError):
    """Invalid command-line or config input (exit code 2)."""


# -- literal parsing ---------------------------------------------------------------

def _json(text, what):
    if not isinstance(text, str):
        return text
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{what}: not valid JSON ({exc.msg})") from exc


def parse_matrix_arg(text):
    data = _json(text, "matrix")
    if not isinstance(data, list) or not data or not all(isinstance(r, list) and r for r in data):
        raise InputError("matrix must be a nonempty JSON list of rows")
    if len({len(r) for r in data}) != 1:
        raise InputError("matrix rows must have equal length")
    return [[sc.parse_scalar(x) for x in row] for row in data]


def parse_vector_arg(text):
    data = _json(text, "vector")
    if not isinstance(data, list):
        raise InputError("vector must be a JSON list")
    return [sc.parse_scalar(x) for x in data]


def parse_int_rows(text):
    """Integer rows from JSON or from a CSV file path."""
    if isinstance(text, str) and not text.lstrip().startswith("["):
        with open(text, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
        try:
            return [[int(x) for x in r] for r in rows]
        except ValueError:
            return [[int(x) for x in r] for r in rows[1:]]
    data = _json(text, "rows")
    return [[int(x) for x in r] for r in data]


def scalar_arg(x):
    return sc.parse_scalar(x) if isinstance(x, str) else (Fraction(x) if isinstance(x, int) else x)


def grid_arg(text, count_default=11):
    """``start:stop:count`` (inclusive, evenly spaced rationals) or a JSON list."""
    if isinstance(text, list):
        return [scalar_arg(x) for x in text]
    s = str(text)
    if s.lstrip().startswith("["):
        return [scalar_arg(x) for x in _json(s, "grid")]
    parts = s.split(":")
    if len(parts) not in (2, 3):
        raise InputError("grid must be start:stop[:count] or a JSON list")
    a, b = sc.parse_scalar(parts[0]), sc.parse_scalar(parts[1])
    k = int(parts[2]) if len(parts) == 3 else count_default
    if k < 1:
        raise InputError("grid count must be positive")
    if k == 1:
        return [a]
    return [a + (b - a) * Fraction(i, k - 1) for i in range(k)]


def _dims(cfg, A=None):
    m, n = cfg.get("m"), cfg.get("n")
    if A is not None:
        m = m or len(A)
        n = n or len(A[0])
        if (len(A), len(A[0])) != (m, n):
            raise InputError(f"matrix shape {len(A)}x{len(A[0])} does not match m={m}, n={n}")
    if not m or not n:
        raise InputError("--m and --n are required")
    return Dims(int(m), int(n))


# -- handlers: each returns (result, rows or None, ok) -------------------------------------

def cmd_psi(cfg):
    A = parse_matrix_arg(cfg["matrix"])
    dims = _dims(cfg, A)
    seq = bestapprox.best_approx_sequence(A, int(cfg["tmax"]), dims)
    result = {"jumps": seq.rows(cfg["digits"]), "flags": seq.flags}
    if cfg.get("t") is not None:
        res = bestapprox.psi(A, scalar_arg(cfg["t"]), dims)
        result["psi"] = {"t": cfg["t"], "value": res.value, "witness": res.witness, "flags": list(res.flags)}
    return result, seq.rows(cfg["digits"]), True


def cmd_seq(cfg):
    A = parse_matrix_arg(cfg["matrix"])
    dims = _dims(cfg, A)
    seq = bestapprox.best_approx_sequence(A, int(cfg["tmax"]), dims, method=cfg["method"])
    bad = seq.check_invariants()
    growth = bestapprox.growth_audit(seq)
    result = {"jumps": seq.rows(cfg["digits"]), "violations": bad, "growth": growth, "flags": seq.flags}
    return result, seq.rows(cfg["digits"]), not bad and growth.verdict != "violated"


def cmd_classc(cfg):
    A = parse_matrix_arg(cfg["matrix"])
    dims = _dims(cfg, A)
    seq = bestapprox.best_approx_sequence(A, int(cfg["tmax"]), dims)
    sub = cfg.get("subsequence") or "auto"
    if sub != "auto":
        sub = _json(sub, "subsequence")
    rep = bestapprox.class_c_test(seq, sub)
    rows = [{"k": k + 1, "l_k": l, "partial_sum": s, "H_k": rep.H[k] if k < len(rep.H) else ""}
            for k, (l, s) in enumerate(zip(rep.subsequence, rep.partial_sums))]
    return rep, rows, True


def cmd_minima(cfg):
    A = parse_matrix_arg(cfg["matrix"])
    Q = sc.exp(scalar_arg(cfg["q"])) if cfg.get("q") is not None else scalar_arg(cfg["Q"])
    body = minima.log_body(A, Q)
    mins = minima.body_minima(body)
    audit = minima.minkowski_audit(body, mins)
    rows = [{"j": j + 1, "lambda": lam, "witness": w} for j, (lam, w) in enumerate(zip(mins.lambdas, mins.witnesses))]
    return {"minima": mins, "audit": audit}, rows, audit.passed


def cmd_profile(cfg):
    A = parse_matrix_arg(cfg["matrix"])
    prof = minima.log_minima_profile(A, grid_arg(cfg["qgrid"]))
    ok = prof.ordered and prof.sum_deviation <= prof.sum_bound
    return prof, prof.rows(cfg["digits"]), ok


def _template(cfg):
    Q = scalar_arg(cfg["Q"])
    return Q, templates.appendix_template(Q)


def cmd_template(cfg):
    Q, P = _template(cfg)
    levels = int(cfg["levels"])
    ext = templates.self_similar_extend(P, levels, Q)
    sysm = ext.system if levels else P
    ok = True
    result = {"template": json.loads(sysm.to_json())}
    if cfg.get("validate"):
        rep = templates.validate_three_system(sysm)
        result["validation"] = rep
        ok = rep.valid and all(c for _, c in ext.junction_checks)
    rows = sysm.sample_rows(sysm.breakpoints, cfg["digits"], cfg["symbolic"])
    return result, rows, ok


def cmd_extend(cfg):
    Q, P = _template(cfg)
    ext = templates.self_similar_extend(P, int(cfg["levels"]), Q)
    rows = ext.system.sample_rows(ext.system.breakpoints, cfg["digits"], cfg["symbolic"])
    ok = all(c for _, c in ext.junction_checks)
    return {"template": json.loads(ext.system.to_json()), "junctions": ext.junction_checks}, rows, ok


def cmd_claims(cfg):
    Q, P = _template(cfg)
    ext = templates.self_similar_extend(P, int(cfg["levels"]), Q)
    rep = templates.template_claims_check(ext)
    rows = [{"q": q, "P1": v[0], "bound": q / (Q + 1)} for q, v in zip(ext.system.breakpoints, ext.system.values)]
    return rep, rows, rep.bound_holds and rep.equality_at_ends


def cmd_transfer(cfg):
    slope, offset = scalar_arg(cfg["slope"]), scalar_arg(cfg["offset"])
    if cfg["direction"] == "lower":
        tb = templates.psi_lower_from_L1(slope, offset, scalar_arg(cfg["theta_norm"]))
    else:
        tb = templates.psi_upper_from_L1(slope, offset)
    rows = [{"direction": tb.direction, "coefficient": tb.coefficient, "exponent": tb.exponent}]
    return tb, rows, True


def _basis(cfg):
    if cfg.get("basis") is not None:
        B = parse_matrix_arg(cfg["basis"])
        dims = _dims(cfg)
        if len(B) != dims.d:
            raise InputError("basis must be d x d")
        return LatticeBasis(dims, B), dims
    A = parse_matrix_arg(cfg["matrix"])
    dims = _dims(cfg, A)
    return lattice_from_matrix(A, dims), dims


def cmd_flow(cfg):
    basis, dims = _basis(cfg)
    curve = dynamics.systole_curve(basis, grid_arg(cfg["tgrid"]), dims)
    return curve, curve.rows(cfg["digits"]), True


def cmd_weights(cfg):
    dims = _dims(cfg)
    tab = dynamics.wedge_weights(dims, int(cfg["k"]))
    rows = [{"I": I, "exponent": e, "zero": e == 0} for I, e in tab.rows]
    ok = not (cfg.get("require_nonzero") and tab.has_zero)
    return {"rows": rows, "zero_rows": tab.zero_rows}, rows, ok


def cmd_values(cfg):
    basis, dims = _basis(cfg)
    shift = parse_vector_arg(cfg["shift"]) if cfg.get("shift") else [Fraction(0)] * dims.d
    sample = dynamics.value_set_sample(Grid(basis, tuple(shift)), int(cfg["Q"]), dims, window=scalar_arg(cfg["window"]))
    rows = [{"value": v} for v in sample.values]
    return {"report": sample.report, "count": len(sample.values)}, rows, True


def cmd_fourier(cfg):
    b = parse_vector_arg(cfg["b"])
    dims = Dims(int(cfg["m"]), int(cfg["n"])) if cfg.get("m") and cfg.get("n") else None
    mp = parse_matrix_arg(cfg["map"]) if cfg.get("map") else scalar_arg(cfg["t"])
    if cfg["measure"] == "line":
        meas = dynamics.LineMeasure(parse_vector_arg(cfg["base"]), parse_vector_arg(cfg["direction"]))
    else:
        meas = "haar-fundamental-domain"
    try:
        coef = dynamics.pushforward_fourier(meas, mp, b, dims)
    except dynamics.NotDualVector as exc:
        raise InputError(str(exc)) from exc
    rows = [{"real": coef.value.real, "imag": coef.value.imag, "abs": abs(coef.value), "error": coef.error}]
    return coef, rows, True


def cmd_coset(cfg):
    rep = dynamics.coset_extract(parse_int_rows(cfg["gammas"]), int(cfg["tail_start"]))
    rows = [{"b": rel[:-1], "a": rel[-1]} for rel in rep.relations]
    return rep, rows, True


def cmd_tailspan(cfg):
    data = _json(cfg["subspaces"], "subspaces")
    if not data:
        raise InputError("subspaces must be a nonempty list of bases")
    d = int(cfg.get("ambient") or len(data[0][0]))
    Vs = [dynamics.RationalSubspace(d, [tuple(v) for v in B]) for B in data]
    rep = dynamics.tail_span_limit(Vs)
    rows = [{"j": j, "dim": k} for j, k in enumerate(rep.spans)]
    return rep, rows, True


def _eta(cfg, m):
    return parse_vector_arg(cfg["eta"]) if cfg.get("eta") else [Fraction(0)] * m


def cmd_bad(cfg):
    A = parse_matrix_arg(cfg["matrix"])
    dims = _dims(cfg, A)
    res = badlab.badness_score(A, _eta(cfg, dims.m), (int(cfg["Q0"]), int(cfg["Q"])), dims)
    rows = [{"score": res.score, "q": res.q, "p": res.p}]
    return res, rows, True


def cmd_scan(cfg):
    A = parse_matrix_arg(cfg["matrix"])
    dims = _dims(cfg, A)
    p0 = parse_vector_arg(cfg["p0"])
    q0 = parse_vector_arg(cfg["q0"]) if cfg.get("q0") else [0] * dims.n
    rep = badlab.coset_scan(A, ([int(x) for x in q0], [int(x) for x in p0]), _eta(cfg, dims.m),
                            grid_arg(cfg["tgrid"]), (int(cfg["Q0"]), int(cfg["Q"])), scalar_arg(cfg["epsilon"]), dims)
    rows = [{"t": t, "score": s} for t, s in zip(rep.points, rep.scores)]
    return {"fraction_above": rep.fraction_above, "epsilon": rep.epsilon}, rows, True


def cmd_measure(cfg):
    A = parse_matrix_arg(cfg["matrix"])
    dims = _dims(cfg, A)
    rep = badlab.bad_measure_estimate(A, int(cfg["resolution"]), (int(cfg["Q0"]), int(cfg["Q"])),
                                      scalar_arg(cfg["epsilon"]), dims)
    rows = [{"eta": e, "score": s} for e, s in zip(rep.points, rep.scores)]
    return {"fraction_above": rep.fraction_above, "epsilon": rep.epsilon}, rows, True


def cmd_pell(cfg):
    cert = badlab.pell_certificate(int(cfg["m"]), int(cfg["Q"]), range(int(cfg["tmax"]) + 1))
    rows = [{"t": t, "systole": s} for t, s in cert.systoles]
    return cert, rows, cert.passed


def cmd_boxcheck(cfg):
    A = parse_matrix_arg(cfg["matrix"])
    m = len(A)
    etas = badlab.eta_grid(m, int(cfg["resolution"]))
    rep = badlab.box_cover_check(A, int(cfg["l"]), etas)
    rows = [{"eta": e, "q": h[0] if h else "", "p": h[1] if h else ""} for e, h in zip(etas, rep.hits)]
    return {"l": rep.l, "radius": rep.radius, "side": rep.side, "failures": rep.failures}, rows, rep.passed


def cmd_cover(cfg):
    A = parse_matrix_arg(cfg["matrix"])
    sub = cfg.get("subsequence") or "auto"
    if sub != "auto":
        sub = _json(sub, "subsequence")
    plan = badlab.covering_plan_build(A, scalar_arg(cfg["epsilon"]), int(cfg["kmax"]), subsequence=sub,
                                      t_max=int(cfg["tmax"]), on_ff2_failure=cfg["on_ff2_failure"])
    rows = [{"k": lv.k, "l": lv.l, "W": lv.W, "W_sparse": lv.W_sparse, "phi": lv.phi, "phi_target": lv.phi_target,
             "ff2_ok": lv.ff2_ok, "half_width": lv.half_width, "measure": lv.measure, "disjoint": lv.disjoint}
            for lv in plan.levels]
    ok = all(lv.disjoint is not False for lv in plan.levels)
    summary = {"truncated": plan.truncated, "levels": rows, "partial_sums": plan.partial_sums,
               "measure_sums": plan.measure_sums, "intersections": plan.intersections}
    return summary, rows, ok


def cmd_auxcount(cfg):
    rep = badlab.aux_count_audit(int(cfg["M"]), scalar_arg(cfg["delta"]), [int(x) for x in _json(cfg["a"], "a")],
                                 _theta(cfg))
    return rep, [{"count": rep.count, "bound": rep.bound, "passed": rep.passed}], rep.passed


def _theta(cfg):
    return tuple(parse_vector_arg(cfg["theta"])) if cfg.get("theta") else badlab.DEFAULT_THETA


def cmd_bmeasure(cfg):
    rep = badlab.bme_measure_audit(int(cfg["M"]), scalar_arg(cfg["epsilon"]), int(cfg["m"]), _theta(cfg),
                                   int(cfg["samples"]), int(cfg["seed"]))
    return rep, [dict(estimate=rep.estimate, std_error=rep.std_error, K=rep.K, bound=rep.bound)], rep.passed


def cmd_etasearch(cfg):
    theta = parse_vector_arg(cfg["theta"])
    rep = badlab.eta_search(theta, int(cfg["Q"]), int(cfg["budget"]), int(cfg["seed"]))
    return rep, [{"eta": rep.eta, "score": rep.score}], True


# -- command table ---------------------------------------------------------------------------

MATRIX = ("--matrix", dict(help="JSON matrix of scalar literals, e.g. '[[\"sqrt:2\"]]'"))
M_ = ("--m", dict(type=int, help="target dimension m"))
N_ = ("--n", dict(type=int, help="coefficient dimension n"))
TMAX = ("--tmax", dict(type=int, help="horizon for the jump sequence"))
QQ = ("--Q", dict(help="scalar parameter Q"))
LEVELS = ("--levels", dict(type=int, help="number of self-similar levels"))
EPS = ("--epsilon", dict(help="threshold epsilon"))
ETA = ("--eta", dict(help="JSON target vector"))
SHELL = [("--Q0", dict(type=int, help="inner shell radius")), ("--Q", dict(type=int, help="outer shell radius"))]

COMMANDS = {
    "psi": (cmd_psi, "irrationality measure function and its jump points",
            [MATRIX, M_, N_, TMAX, ("--t", dict(help="evaluate psi at t"))], {"tmax": 100}),
    "seq": (cmd_seq, "best approximation sequence with the bound Delta_l <= 1 and the growth audit",
            [MATRIX, M_, N_, TMAX, ("--method", dict(choices=["lattice", "shell"]))], {"tmax": 100, "method": "lattice"}),
    "classc": (cmd_classc, "finite-horizon diagnostic for the class C conditions",
               [MATRIX, M_, N_, TMAX, ("--subsequence", dict(help="JSON index list or 'auto'"))], {"tmax": 10**5}),
    "minima": (cmd_minima, "successive minima of the log body with the Minkowski second-theorem audit",
               [MATRIX, ("--Q", dict(help="body parameter Q")), ("--q", dict(help="log parameter q (Q = e^q)"))], {}),
    "profile": (cmd_profile, "log-minima profile L_j(q) along a grid",
                [MATRIX, ("--qgrid", dict(help="start:stop:count or JSON list"))], {"qgrid": "0:8:9"}),
    "template": (cmd_template, "explicit three-system template on [1, Q-1]",
                 [QQ, LEVELS, ("--validate", dict(action="store_true", default=None, help="check S1-S3"))],
                 {"levels": 0}),
    "extend": (cmd_extend, "self-similar extension of the template", [QQ, LEVELS], {"levels": 2}),
    "claims": (cmd_claims, "inequality P1(q) <= q/(Q+1) with equality at level endpoints", [QQ, LEVELS], {"levels": 3}),
    "transfer": (cmd_transfer, "transference from an affine bound on L1 to a power bound on psi",
                 [("--slope", dict(help="affine slope in (0,1)")), ("--offset", dict(help="affine offset")),
                  ("--theta-norm", dict(dest="theta_norm", help="norm of theta")),
                  ("--direction", dict(choices=["lower", "upper"]))], {"theta_norm": "0", "direction": "upper"}),
    "flow": (cmd_flow, "systole of the flowed lattice (Mahler compactness diagnostic)",
             [MATRIX, ("--basis", dict(help="JSON d x d basis (columns generate)")), M_, N_,
              ("--tgrid", dict(help="start:stop:count or JSON list"))], {"tgrid": "0:5:6"}),
    "weights": (cmd_weights, "weights of the flow on exterior powers",
                [M_, N_, ("--k", dict(type=int, help="exterior degree")),
                 ("--require-nonzero", dict(dest="require_nonzero", action="store_true", default=None,
                                            help="fail when a zero weight occurs"))], {}),
    "values": (cmd_values, "value set of the product form on a grid",
               [MATRIX, ("--basis", dict(help="JSON d x d basis")), M_, N_, ("--shift", dict(help="JSON shift")),
                ("--Q", dict(type=int, help="coefficient bound")), ("--window", dict(help="coverage window [0, s]"))],
               {"Q": 5, "window": "1"}),
    "fourier": (cmd_fourier, "Fourier coefficient of a pushed line or Haar measure",
                [("--measure", dict(choices=["line", "haar"])), ("--base", dict(help="JSON base point")),
                 ("--direction", dict(help="JSON direction")), ("--b", dict(help="JSON dual vector")),
                 ("--map", dict(help="JSON matrix")), ("--t", dict(help="flow time")), M_, N_],
                {"measure": "line"}),
    "coset": (cmd_coset, "integer relations of a vector sequence and the unimodular reduction",
              [("--gammas", dict(help="JSON integer rows or a CSV file")),
               ("--tail-start", dict(dest="tail_start", type=int, help="first index of the tail"))], {"tail_start": 0}),
    "tailspan": (cmd_tailspan, "limit of tail spans of a subspace sequence",
                 [("--subspaces", dict(help="JSON list of bases")), ("--ambient", dict(type=int))], {}),
    "bad": (cmd_bad, "badness score on a shell", [MATRIX, M_, N_, ETA] + SHELL, {"Q0": 1}),
    "scan": (cmd_scan, "scores along a line of targets",
             [MATRIX, M_, N_, ETA, ("--p0", dict(help="JSON integer vector")), ("--q0", dict(help="JSON integer vector")),
              ("--tgrid", dict(help="start:stop:count or JSON list")), EPS] + SHELL, {"Q0": 1}),
    "measure": (cmd_measure, "fraction of a target grid with score above epsilon",
                [MATRIX, M_, N_, ("--resolution", dict(type=int)), EPS] + SHELL, {"Q0": 1, "resolution": 100}),
    "pell": (cmd_pell, "certificate that a grid has no small product values and a bounded orbit",
             [("--m", dict(type=int)), ("--Q", dict(type=int)), TMAX], {"m": 2, "Q": 10**4, "tmax": 20}),
    "boxcheck": (cmd_boxcheck, "box covering lemma for approximation points",
                 [MATRIX, ("--l", dict(type=int)), ("--resolution", dict(type=int))], {"resolution": 100}),
    "cover": (cmd_cover, "covering construction with disjointness and intersection audits",
              [MATRIX, EPS, ("--kmax", dict(type=int)), TMAX, ("--subsequence", dict()),
               ("--on-ff2-failure", dict(dest="on_ff2_failure", choices=["truncate", "record"]))],
              {"kmax": 4, "tmax": 10**5, "on_ff2_failure": "truncate"}),
    "auxcount": (cmd_auxcount, "exact count of integer triples meeting a slab",
                 [("--M", dict(type=int)), ("--delta", dict()), ("--a", dict(help="JSON list a_3..a_m")),
                  ("--theta", dict(help="JSON pair theta_1, theta_2"))], {}),
    "bmeasure": (cmd_bmeasure, "Monte-Carlo measure of a union of slabs against K epsilon",
                 [("--M", dict(type=int)), EPS, ("--m", dict(type=int)), ("--theta", dict()),
                  ("--samples", dict(type=int))], {"samples": 100_000}),
    "etasearch": (cmd_etasearch, "search for a target with a large badness score",
                  [("--theta", dict(help="JSON vector")), ("--Q", dict(type=int)), ("--budget", dict(type=int))],
                  {"budget": 64}),
}

COMMON_DEFAULTS = {"format": None, "digits": 12, "symbolic": False, "seed": 0, "threads": 1, "precision": 256}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gonlab", description="Finite-scale experiments in Diophantine approximation.")
    sub = parser.add_subparsers(dest="command", metavar="command")
    for name, (_, helptext, opts, _) in COMMANDS.items():
        p = sub.add_parser(name, help=helptext, description=helptext)
        seen = set()
        for flag, kw in opts:
            if flag in seen:
                continue
            seen.add(flag)
            kw = dict(kw)
            kw.setdefault("default", None)
            p.add_argument(flag, **kw)
        p.add_argument("--config", help="JSON file of options (flags take precedence)")
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--format", choices=["csv", "json"], default=None, help="output format (default from --out suffix, else json)")
        p.add_argument("--digits", type=int, default=None, help="decimal digits in reports")
        p.add_argument("--symbolic", action="store_true", default=None, help="render exact values symbolically")
        p.add_argument("--seed", type=int, default=None, help="64-bit seed for Monte-Carlo audits")
        p.add_argument("--threads", type=int, default=None, help="worker count (results do not depend on it)")
        p.add_argument("--precision", type=int, default=None, help="working precision in bits")
    return parser


def _merge(name, ns, parser) -> dict:
    _, _, opts, defaults = COMMANDS[name]
    dests = {kw.get("dest", flag.lstrip("-").replace("-", "_")) for flag, kw in opts}
    dests |= set(COMMON_DEFAULTS) | {"out"}
    cfg = {}
    if ns.config:
        try:
            with open(ns.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config: {exc}") from exc
        if not isinstance(data, dict):
            raise InputError("config must be a JSON object")
        unknown = sorted(set(data) - dests - {"command"})
        if unknown:
            raise InputError(f"unknown config keys: {', '.join(unknown)}")
        if data.get("command", name) != name:
            raise InputError("config names a different command")
        cfg.update({k: v for k, v in data.items() if k != "command"})
    for key in dests:
        val = getattr(ns, key, None)
        if val is not None:
            cfg[key] = val
    for key, val in {**COMMON_DEFAULTS, **defaults}.items():
        cfg.setdefault(key, val)
    for key in dests:
        cfg.setdefault(key, None)
    return cfg


def _required(name, cfg):
    need = {
        "psi": ["matrix"], "seq": ["matrix"], "classc": ["matrix"], "minima": ["matrix"], "profile": ["matrix"],
        "template": ["Q"], "extend": ["Q"], "claims": ["Q"], "transfer": ["slope", "offset"],
        "weights": ["m", "n", "k"], "fourier": ["b"], "coset": ["gammas"], "tailspan": ["subspaces"],
        "bad": ["matrix", "Q"], "scan": ["matrix", "p0", "tgrid", "epsilon", "Q"],
        "measure": ["matrix", "epsilon", "Q"], "boxcheck": ["matrix", "l"], "cover": ["matrix", "epsilon"],
        "auxcount": ["M", "delta", "a"], "bmeasure": ["M", "epsilon", "m"], "etasearch": ["theta", "Q"],
    }.get(name, [])
    if name in ("flow", "values") and cfg.get("matrix") is None and cfg.get("basis") is None:
        need = ["matrix"]
    if name == "minima" and cfg.get("Q") is None and cfg.get("q") is None:
        need = ["Q"]
    if name == "fourier" and cfg.get("map") is None and cfg.get("t") is None:
        need = ["map"]
    missing = [k for k in need if cfg.get(k) is None]
    if missing:
        raise InputError("missing option(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    if not ns.command:
        parser.print_help(sys.stderr)
        return 2
    try:
        cfg = _merge(ns.command, ns, parser)
        _required(ns.command, cfg)
        sc.set_precision(int(cfg["precision"]))
        handler = COMMANDS[ns.command][0]
        result, rows, ok = handler(cfg)
    except (InputError, ValueError, KeyError, TypeError, ZeroDivisionError) as exc:
        print(f"gonlab {ns.command}: error: {exc}", file=sys.stderr)
        return 2
    fmt = cfg["format"] or ("csv" if cfg.get("out", "") and str(cfg["out"]).endswith(".csv") else "json")
    query = {k: v for k, v in sorted(cfg.items()) if v is not None and k not in ("out", "threads", "config")}
    if fmt == "csv":
        text = csv_text(rows or [], cfg["digits"], cfg["symbolic"])
    else:
        text = json_report(ns.command, query, result, ok, cfg["digits"], cfg["symbolic"])
    if cfg.get("out"):
        with open(cfg["out"], "w", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    if not ok:
        print(f"gonlab {ns.command}: audit failed", file=sys.stderr)
    return 0 if ok else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
