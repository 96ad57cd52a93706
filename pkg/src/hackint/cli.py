"""Command line front end: ``hackint <command> [options]``.

Every command writes one report (JSON by default, CSV for tabular output) to
stdout or ``--out``. Errors are written to stderr as JSON and mapped to exit
codes: 2 bad data or parameters, 3 infeasible loss budget, 4 degraded solver.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import sys
from datetime import datetime, timezone
from typing import Any

import numpy as np

from . import __version__, _backend
from .data import Dataset, ingest_csv, read_columns
from .errors import DataError, HackintError, MissingFitContext
from .inference import (
    GenBoundInput,
    LossBudget,
    ate_bound_variance,
    classical_ci_equivalence_check,
    generalization_bound,
    resolve_theta,
)
from .interval import HackingInterval
from .kernel import KernelOptions, MetricKernelSpec, kernel_hacking_interval, kernel_min_loss
from .pca import PcaSubsetQuery, subset_hacking_report
from .prescriptive import (
    FeatureHackConstraints,
    KnnSpec,
    knn_interval,
    knn_select_kstar,
    knn_window_sweep,
    new_feature_interval,
    new_feature_sweep,
)
from .regression import ate_interval, fit_ols, ite_interval, prediction_interval
from .simulate import SVM_FIGURE_SEED, TRUE_ATE, kernel_layout, scenario1, scenario2, svm_layout
from .svm import svm_hacking_interval, svm_interval_batch, svm_min_loss

SCHEMA_VERSION = 1


# ---------------------------------------------------------------- helpers


def _clean(obj: Any) -> Any:
    """Make ``obj`` JSON-safe: numpy scalars/arrays to Python, NaN/inf to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def interval_json(iv: HackingInterval, layout: dict | None = None) -> dict:
    return {
        "lower": iv.lower,
        "upper": iv.upper,
        "width": iv.width,
        "stat_at_min_loss": iv.stat_at_min_loss,
        "theta": iv.theta,
        "witnesses": {
            "lower": np.asarray(iv.witness_lower, dtype=float).ravel(),
            "upper": np.asarray(iv.witness_upper, dtype=float).ravel(),
            "layout": layout if layout is not None else iv.info.get("layout", {}),
        },
    }


def _column_layout(names: list[str]) -> dict:
    return {name: [i, i + 1] for i, name in enumerate(names)}


def _floats(text: str | None, what: str) -> list[float] | None:
    if text is None:
        return None
    try:
        return [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError:
        raise DataError(f"{what} must be a comma-separated list of numbers, got {text!r}") from None


def _names(text: str | None) -> list[str]:
    return [v.strip() for v in text.split(",") if v.strip()] if text else []


def _require(args, *names):
    for n in names:
        if getattr(args, n.replace("-", "_"), None) in (None, "", []):
            raise DataError(f"--{n} is required for '{args.command}'")


def _budget(args, default_rel: float | None = None) -> LossBudget:
    if args.theta is not None:
        return LossBudget.absolute(args.theta)
    if args.theta_rel is not None:
        return LossBudget.relative(args.theta_rel)
    if args.alpha is not None:
        return LossBudget.classical(args.alpha)
    if args.sign_flip:
        return LossBudget.sign_flip()
    if default_rel is not None:
        return LossBudget.relative(default_rel)
    raise DataError("one of --theta, --theta-rel, --alpha or --sign-flip is required")


def _budget_echo(b: LossBudget) -> dict:
    return {"policy": b.policy.value, "value": b.value}


def _xnew(args, p: int) -> np.ndarray:
    _require(args, "xnew")
    v = np.array(_floats(args.xnew, "--xnew"))
    if v.shape[0] != p:
        raise DataError(f"--xnew has {v.shape[0]} values but {p} features are bound")
    return v


def _load(args, treatment: bool = False) -> Dataset:
    _require(args, "input", "outcome", "features")
    if treatment:
        _require(args, "treatment")
    return ingest_csv(args.input, args.outcome, _names(args.features), args.treatment if treatment else None)


def _svm_labels(y: np.ndarray) -> np.ndarray:
    vals = set(np.unique(y).tolist())
    if vals <= {-1.0, 1.0}:
        return y
    if vals <= {0.0, 1.0}:
        return np.where(y > 0, 1.0, -1.0)
    raise DataError(f"SVM labels must be -1/+1 or 0/1, found {sorted(vals)}")


# --------------------------------------------------------------- commands


def cmd_ate(args) -> dict:
    data = _load(args, treatment=True)
    fit = fit_ols(data, include_treatment=True)
    budget = _budget(args)
    theta = resolve_theta(budget, fit.sse, fit)
    iv = ate_interval(fit, theta)
    layout = _column_layout(data.names + [args.treatment])
    return {
        "budget": _budget_echo(budget),
        "theta": theta,
        "n": data.n,
        "dropped_rows": data.dropped_rows,
        "sse": fit.sse,
        "ls_estimate": fit.beta0_ls,
        "interval": interval_json(iv, layout),
    }


def cmd_predict(args) -> dict:
    data = _load(args)
    fit = fit_ols(data)
    budget = _budget(args)
    if budget.policy.value == "sign_flip":
        raise MissingFitContext("--sign-flip applies to the treatment coefficient only")
    theta = resolve_theta(budget, fit.sse, fit)
    iv = prediction_interval(fit, _xnew(args, data.p), theta)
    return {
        "budget": _budget_echo(budget),
        "theta": theta,
        "n": data.n,
        "sse": fit.sse,
        "interval": interval_json(iv, _column_layout(data.names)),
    }


def cmd_ite(args) -> dict:
    data = _load(args, treatment=True)
    treated, control = data.split_by_treatment()
    x_new = _xnew(args, data.p)
    budget = _budget(args)
    if budget.policy.value == "sign_flip":
        raise MissingFitContext("--sign-flip applies to the treatment coefficient only")
    thetas = {}
    for arm, d in (("treated", treated), ("control", control)):
        fit = fit_ols(d)
        thetas[arm] = resolve_theta(budget, fit.sse, fit)
    iv = ite_interval(treated, control, x_new, thetas["treated"], thetas["control"])
    layout = {f"treated.{k}": v for k, v in _column_layout(data.names).items()}
    layout.update({f"control.{k}": [v[0] + data.p, v[1] + data.p] for k, v in _column_layout(data.names).items()})
    return {
        "budget": _budget_echo(budget),
        "theta": {"treated": thetas["treated"], "control": thetas["control"]},
        "n": {"treated": treated.n, "control": control.n},
        "interval": interval_json(iv, layout),
        "arms": {
            "treated": {"lower": iv.info["treated"]["lower"], "upper": iv.info["treated"]["upper"]},
            "control": {"lower": iv.info["control"]["lower"], "upper": iv.info["control"]["upper"]},
        },
    }


def _svm_result(iv: HackingInterval, names: list[str]) -> dict:
    layout = _column_layout(names)
    layout["intercept"] = [len(names), len(names) + 1]
    out = interval_json(iv, layout)
    out["outer"] = iv.info["outer"]
    out["degraded"] = iv.info["degraded"]
    return out


def cmd_svm(args) -> dict:
    data = _load(args)
    y = _svm_labels(data.y)
    base = svm_min_loss(data.x, y, args.psi_d)
    budget = _budget(args, default_rel=0.05)
    if budget.policy.value in ("alpha", "sign_flip"):
        raise DataError("SVM budgets take --theta or --theta-rel")
    theta = resolve_theta(budget, base.loss)
    iv = svm_hacking_interval(data.x, y, args.psi_d, _xnew(args, data.p), theta, base=base, strict=args.strict)
    return {
        "budget": _budget_echo(budget),
        "theta": theta,
        "psi_d": args.psi_d,
        "min_loss": base.loss,
        "interval": _svm_result(iv, data.names),
        "_degraded": iv.info["degraded"],
    }


def cmd_svm_batch(args) -> dict:
    data = _load(args)
    _require(args, "queries")
    y = _svm_labels(data.y)
    names = _names(args.features)
    cols = names + ([args.id_column] if args.id_column else [])
    arrays, _ = read_columns(args.queries, cols)
    q = np.column_stack([arrays[c] for c in names])
    ids = [int(v) if float(v).is_integer() else v for v in arrays[args.id_column].tolist()] if args.id_column else list(range(q.shape[0]))
    rel = args.theta_rel if args.theta_rel is not None else 0.05
    res = svm_interval_batch(data.x, y, args.psi_d, rel, q, strict=args.strict)
    rows = []
    for i, (iv, cls) in enumerate(zip(res.intervals, res.classes)):
        rows.append({"row": i, "id": ids[i], "lower": iv.lower, "upper": iv.upper,
                     "baseline": iv.stat_at_min_loss, "class": cls.value, "degraded": iv.info["degraded"]})
    return {
        "theta": res.theta,
        "rel_tolerance": rel,
        "psi_d": args.psi_d,
        "min_loss": res.base.loss,
        "rows": rows,
        "counts": {c: sum(1 for r in rows if r["class"] == c) for c in ("AllNegative", "Straddles", "AllPositive")},
        "_degraded": bool(res.degraded_rows),
    }


def cmd_knn(args) -> dict:
    data = _load(args)
    x_new = _xnew(args, data.p)
    if args.k_min is None or args.k_max is None:
        raise DataError("--k-min and --k-max are required for 'knn'")
    iv = knn_interval(KnnSpec(data.x, data.y, x_new, args.k_min, args.k_max))
    return {
        "k_range": [args.k_min, args.k_max],
        "interval": interval_json(iv, {"k": [0, 1]}),
        "trace": [{"k": k, "prediction": v} for k, v in iv.info["trace"]],
    }


def _feature_cons(args, c=None, or_yu=None) -> FeatureHackConstraints:
    if args.or_yw_x is None:
        raise DataError("--or-yw-x is required")
    return FeatureHackConstraints(
        args.or_yw_x, or_yu if or_yu is not None else args.or_yu, c if c is not None else args.c, args.d
    )


def cmd_feature(args) -> dict:
    if args.or_yu is None or args.c is None:
        raise DataError("--or-yu and --c are required for 'feature'")
    iv = new_feature_interval(_feature_cons(args), clip=not args.no_clip)
    return {
        "constraints": {"or_yw_x": args.or_yw_x, "or_yu": args.or_yu, "c": args.c, "d": args.d},
        "interval": interval_json(iv),
        "af_min": iv.info["af_min"],
        "af_max": iv.info["af_max"],
        "method": iv.info["method"],
        "min_clipped": iv.info.get("min_clipped", False),
    }


def _pca_query(args) -> PcaSubsetQuery:
    _require(args, "input", "features")
    names = _names(args.features)
    arrays, dropped = read_columns(args.input, names)
    x = np.column_stack([arrays[c] for c in names])
    if args.q is None or args.k is None:
        raise DataError("--q and --k are required for 'pca'")
    return PcaSubsetQuery(x, args.q, args.k, args.theta_prime, args.standardize), names


def cmd_pca(args) -> dict:
    query, names = _pca_query(args)
    rep = subset_hacking_report(query)
    out = rep.to_dict(include_losses=args.per_subset)
    out["optimal_features"] = [names[i] for i in rep.optimal_subset]
    grid = _floats(args.theta_prime_grid, "--theta-prime-grid")
    if grid:
        out["curves"] = rep.curves(grid)
    return out


def cmd_genbound(args) -> dict:
    thetas = _floats(args.thetas, "--thetas") or []
    if len(thetas) > 4:
        raise DataError("--thetas takes at most four values")
    thetas = thetas + [0.0] * (4 - len(thetas))
    if args.h is None or args.n is None:
        raise DataError("--h and --n are required for 'genbound'")
    inp = GenBoundInput(args.h, args.n, args.delta, *thetas)
    return {
        "h": args.h, "n": args.n, "delta": args.delta, "thetas": thetas,
        "alternate_form": args.alternate,
        "bound": generalization_bound(inp, alternate=args.alternate),
    }


def cmd_ci_check(args) -> dict:
    if args.alpha is None:
        raise DataError("--alpha is required for 'ci-check'")
    if args.kind == "ate":
        data = _load(args, treatment=True)
        fit = fit_ols(data, include_treatment=True)
        rep = classical_ci_equivalence_check(fit, args.alpha, "ate")
    else:
        data = _load(args)
        fit = fit_ols(data)
        rep = classical_ci_equivalence_check(fit, args.alpha, "prediction", _xnew(args, data.p))
    return {"kind": args.kind, "alpha": args.alpha, "theta": rep.theta,
            "hacking": [rep.hacking.lower, rep.hacking.upper], "classical": list(rep.classical),
            "max_abs_gap": rep.max_abs_gap}


def cmd_variance(args) -> dict:
    r = args.theta_rel if args.theta_rel is not None else 0.0
    if args.input:
        data = _load(args, treatment=True)
        fit = fit_ols(data, include_treatment=True)
        sigma2 = args.sigma2 if args.sigma2 is not None else fit.sse / fit.dof
        v_tt, n, p = fit.v_tt, data.n, data.p
    else:
        if None in (args.sigma2, args.v_tt, args.n, args.p):
            raise DataError("give --input or all of --sigma2, --v-tt, --n, --p")
        sigma2, v_tt, n, p = args.sigma2, args.v_tt, args.n, args.p
    return {"sigma2": sigma2, "v_tt": v_tt, "r": r, "n": n, "p": p,
            "variance": ate_bound_variance(sigma2, v_tt, r, n, p)}


def _parse_window(text: str) -> list[int]:
    try:
        if ".." in text:
            a, b = text.split("..")
            return list(range(int(a), int(b) + 1))
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise DataError(f"window must look like 1..5 or 1,2,3, got {text!r}") from None


def cmd_sweep(args) -> dict:
    kind = args.kind
    rows: list[dict] = []
    extra: dict = {}
    if kind == "knn":
        data = _load(args)
        x_new = _xnew(args, data.p)
        k_star = args.k_star or knn_select_kstar(data.x, data.y)
        for m, lo, hi, iv in knn_window_sweep(data.x, data.y, x_new, k_star, _parse_window(args.kstar_window)):
            rows.append({"window": m, "k_min": lo, "k_max": hi, "lower": iv.lower, "upper": iv.upper})
        extra["k_star"] = k_star
    elif kind == "feature":
        cs = _floats(args.c_values, "--c-values") or [0.1, 0.15, 0.2, 0.25, 0.3]
        oys = _floats(args.or_yu_values, "--or-yu-values") or [1.5, 1.75]
        if args.or_yw_x is None:
            raise DataError("--or-yw-x is required")
        for r in new_feature_sweep(args.or_yw_x, args.d, cs, oys, clip=not args.no_clip):
            rows.append({k: r[k] for k in ("or_yu", "c", "lower", "upper", "width")})
    elif kind == "theta":
        data = _load(args, treatment=True)
        fit = fit_ols(data, include_treatment=True)
        for r in _floats(args.r_values, "--r-values") or [0.0, 0.05, 0.1, 0.2]:
            theta = resolve_theta(LossBudget.relative(r), fit.sse)
            iv = ate_interval(fit, theta)
            rows.append({"r": r, "theta": theta, "lower": iv.lower, "upper": iv.upper})
    elif kind == "pca":
        query, _ = _pca_query(args)
        rep = subset_hacking_report(query)
        grid = _floats(args.theta_prime_grid, "--theta-prime-grid") or [0, 0.5, 1, 2, 5, 10]
        rows = rep.curves(grid)
    return {"kind": kind, "rows": rows, **extra}


def cmd_simulate(args) -> dict:
    scen = args.scenario
    seed = args.seed
    if scen == "scenario1":
        data = scenario1(seed, args.n or 500)
        fit = fit_ols(data, include_treatment=True)
        budget = _budget(args, default_rel=0.1)
        theta = resolve_theta(budget, fit.sse, fit)
        iv = ate_interval(fit, theta)
        out = {"n": data.n, "truth": TRUE_ATE, "ls_estimate": fit.beta0_ls, "theta": theta,
               "interval": interval_json(iv, _column_layout(data.names + ["treated"])),
               "contains_truth": iv.contains(TRUE_ATE)}
        _maybe_dump(args, data.x, data.y, data.names, data.w)
        return out
    if scen == "scenario2":
        treated, control, x_new = scenario2(seed, args.n or 500)
        budget = _budget(args, default_rel=0.1)
        ft, fc = fit_ols(treated), fit_ols(control)
        tt, tc = resolve_theta(budget, ft.sse, ft), resolve_theta(budget, fc.sse, fc)
        iv = ite_interval(treated, control, x_new, tt, tc)
        return {"truth": TRUE_ATE, "x_new": x_new, "theta": {"treated": tt, "control": tc},
                "interval": interval_json(iv), "contains_truth": iv.contains(TRUE_ATE)}
    if scen == "svm-figure":
        lay = svm_layout(seed if args.seed_given else SVM_FIGURE_SEED)
        base = svm_min_loss(lay.x, lay.y, lay.psi_d)
        theta = (1.0 + (args.theta_rel if args.theta_rel is not None else lay.rel_tolerance)) * base.loss
        iv = svm_hacking_interval(lay.x, lay.y, lay.psi_d, lay.x_new, theta, base=base, strict=args.strict)
        _maybe_dump(args, lay.x, lay.y, ["x1", "x2"])
        return {"x_new": lay.x_new, "psi_d": lay.psi_d, "theta": theta, "min_loss": base.loss,
                "interval": _svm_result(iv, ["x1", "x2"]), "_degraded": iv.info["degraded"]}
    if scen == "kernel-figure":
        lay = kernel_layout(seed)
        spec = MetricKernelSpec(lay.x, lay.y, lay.x_new, lay.psi_d, lay.theta, opts=KernelOptions(seed=seed))
        a_min, loss_min = kernel_min_loss(spec)
        iv = kernel_hacking_interval(spec, (a_min, loss_min))
        _maybe_dump(args, lay.x, lay.y, ["x1", "x2"])
        return {"x_new": lay.x_new, "psi_d": lay.psi_d, "theta": lay.theta, "noise_scale": lay.noise_scale,
                "min_loss": loss_min, "interval": interval_json(iv)}
    raise DataError(f"unknown scenario {scen!r}")


def _maybe_dump(args, x, y, names, w=None):
    if not args.emit_data:
        return
    with open(args.emit_data, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(list(names) + (["treated"] if w is not None else []) + ["y"])
        for i in range(len(y)):
            row = [repr(float(v)) for v in x[i]]
            if w is not None:
                row.append(str(int(w[i])))
            row.append(repr(float(y[i])))
            wr.writerow(row)


COMMANDS = {
    "ate": cmd_ate,
    "predict": cmd_predict,
    "ite": cmd_ite,
    "svm": cmd_svm,
    "svm-batch": cmd_svm_batch,
    "knn": cmd_knn,
    "feature": cmd_feature,
    "pca": cmd_pca,
    "genbound": cmd_genbound,
    "ci-check": cmd_ci_check,
    "variance": cmd_variance,
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
}


# ----------------------------------------------------------------- parser


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("data")
    g.add_argument("--input", help="CSV file with a header row")
    g.add_argument("--outcome", help="outcome column")
    g.add_argument("--treatment", help="0/1 treatment column")
    g.add_argument("--features", help="comma-separated feature columns (no intercept is added)")
    g.add_argument("--xnew", help="comma-separated query point")
    b = p.add_argument_group("loss budget").add_mutually_exclusive_group()
    b.add_argument("--theta", type=float, help="absolute loss budget")
    b.add_argument("--theta-rel", type=float, help="budget as (1 + R) times the minimum loss")
    b.add_argument("--alpha", type=float, help="budget matching a two-sided 1-alpha t-interval")
    b.add_argument("--sign-flip", action="store_true", help="budget at which the ATE bound reaches 0")
    o = p.add_argument_group("output")
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--out", help="write the report here instead of stdout")
    o.add_argument("--format", choices=["json", "csv"], default="json")
    o.add_argument("--deterministic", action="store_true", help="omit the timestamp for byte-stable output")
    o.add_argument("--strict", action="store_true", help="treat solver degradation as an error")
    o.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hackint", description="Hacking intervals for common models.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "ate": "treatment-coefficient interval for least squares",
        "predict": "prediction interval at --xnew for least squares",
        "ite": "individual treatment effect at --xnew from separate arm regressions",
        "svm": "SVM decision-value interval at --xnew",
        "svm-batch": "SVM intervals for every row of --queries",
        "knn": "k-NN prediction range over [--k-min, --k-max]",
        "feature": "odds-ratio range after adjusting for a constrained unmeasured feature",
        "pca": "PCA feature-subset report",
        "genbound": "generalization bound for hacked data",
        "ci-check": "compare the hacking interval with the classical t-interval",
        "variance": "sampling variance of the ATE interval bounds",
        "sweep": "tidy CSV/JSON of intervals over a parameter grid",
        "simulate": "regenerate a synthetic illustration",
    }
    for name, h in helps.items():
        p = sub.add_parser(name, help=h, description=h)
        _common(p)
        if name in ("svm", "svm-batch", "simulate"):
            p.add_argument("--psi-d", type=float, default=1.0, help="hinge-loss weight")
        if name == "svm-batch":
            p.add_argument("--queries", help="CSV with the feature columns for each query row")
            p.add_argument("--id-column", help="numeric id column in --queries to echo back")
        if name in ("knn", "sweep"):
            p.add_argument("--k-min", type=int)
            p.add_argument("--k-max", type=int)
        if name in ("feature", "sweep"):
            p.add_argument("--or-yw-x", type=float, help="observed adjusted odds ratio")
            p.add_argument("--or-yu", type=float, help="odds ratio between outcome and the new feature")
            p.add_argument("--c", type=float, help="bound on |p1 - p0|")
            p.add_argument("--d", type=float, default=0.0, help="lower bound on p0")
            p.add_argument("--no-clip", action="store_true",
                           help="use the unconstrained minimum formula even if p1 leaves [0, 1]")
        if name in ("pca", "sweep"):
            p.add_argument("--q", type=int)
            p.add_argument("--k", type=int)
            p.add_argument("--theta-prime", type=float, default=0.0)
            p.add_argument("--theta-prime-grid", help="comma-separated tolerances for report curves")
            p.add_argument("--standardize", action="store_true")
        if name == "pca":
            p.add_argument("--per-subset", action="store_true", help="include every subset's loss")
        if name == "genbound":
            p.add_argument("--h", type=int)
            p.add_argument("--n", type=int)
            p.add_argument("--delta", type=float, default=0.05)
            p.add_argument("--thetas", help="up to four comma-separated theta terms")
            p.add_argument("--alternate", action="store_true", help="use h*log(2en/h) instead of the default form")
        if name == "ci-check":
            p.add_argument("--kind", choices=["ate", "prediction"], default="ate")
        if name == "variance":
            p.add_argument("--sigma2", type=float)
            p.add_argument("--v-tt", type=float)
            p.add_argument("--n", type=int)
            p.add_argument("--p", type=int)
        if name == "sweep":
            p.add_argument("kind", choices=["knn", "feature", "theta", "pca"])
            p.add_argument("--kstar-window", default="1..5", help="window half-widths, e.g. 1..5")
            p.add_argument("--k-star", type=int, help="centre k (default: leave-one-out optimum)")
            p.add_argument("--c-values")
            p.add_argument("--or-yu-values")
            p.add_argument("--r-values")
        if name == "simulate":
            p.add_argument("scenario", choices=["scenario1", "scenario2", "svm-figure", "kernel-figure"])
            p.add_argument("--n", type=int)
            p.add_argument("--emit-data", help="also write the generated data to this CSV")
    return parser


# ---------------------------------------------------------------- output


def _config_echo(args) -> dict:
    skip = {"out", "format", "deterministic", "verbose", "seed_given"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _config_hash(cfg: dict) -> str:
    blob = json.dumps(_clean(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def build_report(args, result: dict) -> dict:
    cfg = _config_echo(args)
    prov = {"version": __version__, "seed": args.seed, "config_hash": _config_hash(cfg), "backend": _backend.BACKEND}
    if not args.deterministic:
        prov["timestamp"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    body = {k: v for k, v in result.items() if not k.startswith("_")}
    return _clean({"schema": SCHEMA_VERSION, "command": args.command, "config": cfg, "result": body,
                   "provenance": prov})


def _flatten(prefix: str, obj: Any, out: dict) -> None:
    if isinstance(obj, dict):
        for k, v in obj.items():
            _flatten(f"{prefix}.{k}" if prefix else k, v, out)
    elif isinstance(obj, list):
        out[prefix] = ";".join("" if v is None else repr(v) for v in obj) if all(
            not isinstance(v, (dict, list)) for v in obj) else json.dumps(obj, sort_keys=True)
    else:
        out[prefix] = obj


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2) + "\n"
    result = report["result"]
    if isinstance(result.get("rows"), list):
        rows = result["rows"]
    else:
        flat: dict = {}
        _flatten("", {k: v for k, v in result.items()}, flat)
        rows = [flat]
    buf = io.StringIO()
    fields: list[str] = []
    for r in rows:
        for k in r:
            if k not in fields:
                fields.append(k)
    wr = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    wr.writeheader()
    for r in rows:
        wr.writerow({k: ("" if r.get(k) is None else r.get(k)) for k in fields})
    return buf.getvalue()


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(argv)
    args.seed_given = "--seed" in argv or any(a.startswith("--seed=") for a in argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s",
                        stream=sys.stderr)
    try:
        result = COMMANDS[args.command](args)
    except HackintError as exc:
        err = exc.to_dict()
        if getattr(exc, "row", None) is not None:
            err["row"] = exc.row
        if getattr(exc, "column", None) is not None:
            err["column"] = exc.column
        sys.stderr.write(json.dumps(_clean(err), sort_keys=True) + "\n")
        return exc.exit_code
    except OSError as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": 2}) + "\n")
        return 2
    text = render(build_report(args, result), args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 4 if result.get("_degraded") else 0


if __name__ == "__main__":
    sys.exit(main())
