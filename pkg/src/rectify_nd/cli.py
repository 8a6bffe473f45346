"""Command-line driver: JSON job in, report JSON and per-sample CSV out.

Usage::

    rectify-nd <analyze|construct|integrate|condition|corpus> --job FILE
               [--out-dir DIR] [--tol-certify 1e-6] [--tol-falsify 1e-2]

Exit codes: 0 certified rectifying, 1 certified not rectifying,
2 inconclusive, 64 malformed job, 65 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from . import curves, frenet, rectify
from .errors import RectifyError, SchemaError
from .expr import number
from .frenetode import CurvatureProfile

COMMANDS = ("analyze", "construct", "integrate", "condition", "corpus")
EXIT = {
    rectify.RECTIFYING: 0,
    rectify.NOT_RECTIFYING: 1,
    rectify.INCONCLUSIVE: 2,
    rectify.UNDETERMINED: 2,
}
EXIT_SCHEMA = 64
EXIT_NUMERIC = 65


@dataclass
class Outcome:
    name: str
    exit_code: int
    report: dict
    header: list
    rows: list


# -- job parsing --------------------------------------------------------------


def _tolerances(job, args):
    tol = job.get("tolerances", {})
    if not isinstance(tol, dict):
        raise SchemaError("'tolerances' must be an object")
    cert = args.tol_certify if args and args.tol_certify is not None else number(tol.get("certify", rectify.TOL_CERTIFY))
    fals = args.tol_falsify if args and args.tol_falsify is not None else number(tol.get("falsify", rectify.TOL_FALSIFY))
    if not (cert > 0 and fals > 0):
        raise SchemaError("tolerances must be positive")
    if cert > fals:
        raise SchemaError("certify tolerance must not exceed falsify tolerance")
    return cert, fals


def _grid(job, domain, n, minimum):
    g = job.get("grid", {})
    if not isinstance(g, dict):
        raise SchemaError("'grid' must be an object {t_min, t_max, count}")
    lo = number(g.get("t_min", domain[0]))
    hi = number(g.get("t_max", domain[1]))
    count = g.get("count", 201)
    if not isinstance(count, int) or isinstance(count, bool):
        raise SchemaError("grid count must be an integer")
    if count < minimum:
        raise SchemaError(f"grid count {count} too small; dimension {n} needs at least {minimum}")
    if not lo < hi:
        raise SchemaError("grid needs t_min < t_max")
    return np.linspace(lo, hi, count)


def _curve(job, key="curve"):
    if key not in job:
        raise SchemaError(f"job needs a '{key}'")
    return _curve_from(job[key])


def _curve_from(d):
    if not isinstance(d, dict):
        raise SchemaError("curve must be an object")
    d = dict(d)
    fam = d.get("family")
    params = d.get("params")
    if fam == "SecScaled" and isinstance(params, dict) and isinstance(params.get("inner"), dict):
        d["params"] = {**params, "inner": _curve_from(params["inner"])}
    if fam == "CurvatureDriven" and isinstance(params, dict) and isinstance(params.get("profile"), dict):
        d["params"] = {**params, "profile": CurvatureProfile.from_dict(params["profile"])}
    return curves.CurveSpec.from_dict(d)


def _origin(job):
    o = job.get("origin")
    if o is None or o == "fixed_point":
        return o
    if isinstance(o, list):
        return np.array([number(v) for v in o])
    raise SchemaError("'origin' must be a point or \"fixed_point\"")


# -- serialization ------------------------------------------------------------


def _fmt(x) -> str:
    x = float(x)
    return "nan" if math.isnan(x) else format(x, ".17g")


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        return None if not math.isfinite(float(x)) else float(x)
    if isinstance(x, np.integer):
        return int(x)
    return x


def csv_header(n: int) -> list:
    mu = range(1, n - 1)
    return (
        ["t", "s", "rho2", "tangential", "normal_inner", "normal_len"]
        + [f"mu_{i}_measured" for i in mu]
        + [f"mu_{i}_predicted" for i in mu]
        + ["condition_residual"]
    )


def _report_rows(rep):
    rows = []
    for j in range(rep.t.size):
        rows.append(
            [rep.t[j], rep.s[j], rep.rho2[j], rep.tangential[j], rep.normal_inner[j], rep.normal_length[j]]
            + list(rep.mu_measured[j])
            + list(rep.mu_predicted[j])
            + [rep.condition[j]]
        )
    return rows


def report_summary(rep, cert, fals) -> dict:
    return {
        "dimension": rep.dimension,
        "samples": int(rep.t.size),
        "rho_rms": rep.rho_rms,
        "c": rep.c,
        "tangential_slope": rep.tangential_slope,
        "rho2_coefficients": rep.rho2_coefficients,
        "normal_residual": rep.normal_residual,
        "tangential_fit_residual": rep.tangential_fit_residual,
        "rho_fit_residual": rep.rho_fit_residual,
        "normal_length_std": rep.normal_length_std,
        "binormal_residual": rep.binormal_residual,
        "sum_rule_spread": rep.sum_rule_spread,
        "condition_offset": rep.condition_offset,
        "condition_residual": rep.condition_residual,
        "condition_excluded": rep.condition_excluded,
        "origin": rep.origin,
        "fixed_point": rep.fixed_point,
        "fixed_point_residual": rep.fixed_point_residual,
        "fixed_point_rank": rep.fixed_point_rank,
        "spherical": rep.spherical,
        "classification": rep.classification(cert, fals),
        "condition_classification": rep.condition_classification(cert, fals),
    }


# -- commands -----------------------------------------------------------------


def _analyze_spec(name, command, spec, job, cert, fals, extra=None, origin=None):
    n = spec.dimension
    grid = _grid(job, spec.domain, n, n + 2)
    anchor = job.get("anchor")
    anchor = None if anchor is None else number(anchor)
    fds = frenet.frames_on_grid(spec, grid, anchor, complete_last=True)
    rep = rectify.measure_components(spec, grid, anchor, origin, frames=fds)
    summary = report_summary(rep, cert, fals)
    if command in ("integrate", "construct") or job.get("beta", False):
        beta = rectify.beta_constancy(spec, grid, frames=fds)
        summary["beta"] = {
            "mean": beta.mean,
            "max_deviation": beta.max_deviation,
            "c": beta.c,
            "excluded": beta.excluded,
        }
    report = {
        "name": name,
        "command": command,
        "curve": spec.to_dict(),
        "tolerances": {"certify": cert, "falsify": fals},
        **(extra or {}),
        **summary,
    }
    code = EXIT[summary["classification"]]
    report["exit_code"] = code
    return Outcome(name, code, report, csv_header(n), _report_rows(rep))


def _run_analyze(name, job, cert, fals):
    return _analyze_spec(name, "analyze", _curve(job), job, cert, fals, origin=_origin(job))


def _run_integrate(name, job, cert, fals):
    if "profile" not in job:
        raise SchemaError("integrate job needs a 'profile'")
    profile = CurvatureProfile.from_dict(job["profile"])
    s_range = tuple(number(v) for v in job.get("s_range", profile.interval))
    step = number(job.get("step", 1e-3))
    spec = curves.curvature_driven(profile, s_range, step)
    origin = _origin(job) or "fixed_point"
    return _analyze_spec(name, "integrate", spec, job, cert, fals, origin=origin)


def _run_construct(name, job, cert, fals):
    kind = job.get("construction")
    if kind == "sec":
        inner = _curve(job, "spherical")
        lo, hi = inner.domain
        check = curves.validate_spherical_arclength(inner, np.linspace(lo, hi, 101))
        if not check.passed:
            raise SchemaError(
                f"'spherical' is not a unit-speed curve on the unit sphere "
                f"(radius dev {check.max_radius_deviation:.3g}, speed dev {check.max_speed_deviation:.3g})"
            )
        a = number(job.get("a", 1.0))
        t0 = number(job.get("t0", 0.0))
        domain = tuple(number(v) for v in job.get("domain", inner.domain))
        spec = curves.sec_scaled(inner, a, t0, domain)
        return _analyze_spec(name, "construct", spec, job, cert, fals, extra={"construction": kind})
    if kind == "kappa_last":
        try:
            n = int(job["dimension"])
            kappas = [number(v) for v in job["kappas"]]
            b = number(job["b"])
            c = number(job.get("c", 0.0))
        except KeyError as exc:
            raise SchemaError(f"kappa_last construction needs {exc}") from None
        sign = number(job.get("sign", 1.0))
        s_range = job.get("s_range")
        s_range = None if s_range is None else tuple(number(v) for v in s_range)
        profile, a = rectify.kappa_last_closed_form(n, kappas, b, c, sign, s_range)
        spec = curves.curvature_driven(profile, profile.interval, number(job.get("step", 1e-3)))
        extra = {"construction": kind, "a": a, "profile": profile.to_dict()}
        return _analyze_spec(name, "construct", spec, job, cert, fals, extra=extra, origin="fixed_point")
    if kind == "e4_case":
        params = {k: number(v) for k, v in job.get("params", {}).items()}
        try:
            profile = rectify.e4_two_constant_profile(job["case"], tuple(number(v) for v in job["s_range"]), **params)
        except KeyError as exc:
            raise SchemaError(f"e4_case construction needs {exc}") from None
        spec = curves.curvature_driven(profile, profile.interval, number(job.get("step", 1e-3)))
        extra = {"construction": kind, "profile": profile.to_dict()}
        return _analyze_spec(name, "construct", spec, job, cert, fals, extra=extra, origin="fixed_point")
    raise SchemaError(f"unknown construction {kind!r}; expected sec, kappa_last or e4_case")


def _run_condition(name, job, cert, fals):
    if "curve" in job:
        out = _analyze_spec(name, "condition", _curve(job), job, cert, fals, origin=_origin(job))
        cls = out.report["condition_classification"]
        out.report["exit_code"] = out.exit_code = EXIT[cls]
        return out
    if "profile" not in job:
        raise SchemaError("condition job needs a 'curve' or a 'profile'")
    profile = CurvatureProfile.from_dict(job["profile"])
    n = profile.dimension
    if n < 3:
        raise SchemaError("the condition needs dimension >= 3")
    grid = _grid(job, profile.interval, n, 2)
    jets = [profile.jets(s, n - 1) for s in grid]
    nan = (math.nan, math.nan)
    aff = np.array([_safe_affine(k, nan) for k in jets])
    c = number(job["c"]) if "c" in job else rectify.fit_offset(aff[:, 0], aff[:, 1])
    cond = np.abs(aff[:, 0] + c * aff[:, 1])
    mu = np.array([_safe_mu(k, c, n) for k in jets])
    worst = float(np.nanmax(cond)) if np.isfinite(cond).any() else math.nan
    cls = rectify.classify(worst, cert, fals)
    code = EXIT[cls]
    report = {
        "name": name,
        "command": "condition",
        "profile": profile.to_dict(),
        "tolerances": {"certify": cert, "falsify": fals},
        "dimension": n,
        "samples": int(grid.size),
        "condition_offset": c,
        "condition_residual": worst,
        "condition_excluded": int(np.sum(~np.isfinite(cond))),
        "condition_classification": cls,
        "exit_code": code,
    }
    blank = [math.nan] * (4 + (n - 2))
    rows = [[s, s] + blank + list(m) + [r] for s, m, r in zip(grid, mu, cond)]
    return Outcome(name, code, report, csv_header(n), rows)


def _safe_affine(kappas, fallback):
    try:
        return rectify.condition_affine(kappas)
    except RectifyError:
        return fallback


def _safe_mu(kappas, c, n):
    try:
        return rectify.mu_recursion(kappas, c).values
    except RectifyError:
        return np.full(n - 2, math.nan)


_RUNNERS = {
    "analyze": _run_analyze,
    "construct": _run_construct,
    "integrate": _run_integrate,
    "condition": _run_condition,
}


# -- driver -------------------------------------------------------------------


def load_job(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            job = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON: {exc}") from None
    except OSError as exc:
        raise SchemaError(f"{path}: {exc.strerror}") from None
    if not isinstance(job, dict):
        raise SchemaError(f"{path}: job must be a JSON object")
    return job


def write_outputs(outcome: Outcome, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / f"{outcome.name}.report.json", "w", encoding="utf-8") as fh:
        json.dump(_jsonable(outcome.report), fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(out_dir / f"{outcome.name}.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(outcome.header)
        for row in outcome.rows:
            w.writerow([_fmt(x) for x in row])


def run_job(job: dict, command: str, name: str, args=None):
    """Run one job; return ``(exit_code, outcome or None, message)``."""
    try:
        jc = job.get("command", command)
        if jc != command:
            raise SchemaError(f"job command {jc!r} does not match {command!r}")
        if command not in _RUNNERS:
            raise SchemaError(f"unknown command {command!r}")
        cert, fals = _tolerances(job, args)
        outcome = _RUNNERS[command](name, job, cert, fals)
        return outcome.exit_code, outcome, outcome.report.get("classification", outcome.report.get("condition_classification"))
    except SchemaError as exc:
        return EXIT_SCHEMA, None, f"schema error: {exc}"
    except RectifyError as exc:
        return EXIT_NUMERIC, None, f"numerical error: {type(exc).__name__}: {exc}"
    except (KeyError, TypeError, ValueError) as exc:
        return EXIT_SCHEMA, None, f"schema error: {type(exc).__name__}: {exc}"


def bundled_jobs() -> list:
    root = resources.files("rectify_nd") / "corpus"
    return sorted(
        (p.name.removesuffix(".json"), json.loads(p.read_text(encoding="utf-8")))
        for p in root.iterdir()
        if p.name.endswith(".json")
    )


def _threads() -> int:
    raw = os.environ.get("RECTIFY_ND_THREADS")
    if raw is None:
        return min(4, os.cpu_count() or 1)
    try:
        return max(1, int(raw))
    except ValueError:
        raise SchemaError(f"RECTIFY_ND_THREADS must be an integer, got {raw!r}") from None


def run_corpus(job: dict | None, base: Path | None, out_dir: Path, args=None):
    """Run corpus jobs concurrently; exit 0 iff every job met its ``expect``."""
    entries = (job or {}).get("jobs", ["bundled"])
    if not isinstance(entries, list):
        raise SchemaError("'jobs' must be a list")
    todo = []
    for e in entries:
        if e == "bundled":
            todo.extend(bundled_jobs())
        else:
            p = (base or Path.cwd()) / e
            todo.append((p.stem, load_job(p)))

    def one(item):
        name, j = item
        if "command" not in j:
            return name, j.get("expect"), EXIT_SCHEMA, None, "schema error: job needs a 'command'"
        code, outcome, msg = run_job(j, j["command"], name, args)
        return name, j.get("expect"), code, outcome, msg

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = list(pool.map(one, todo))
    summary = []
    for name, expect, code, outcome, msg in results:
        if outcome is not None:
            write_outputs(outcome, out_dir)
        summary.append({"name": name, "expect": expect, "exit_code": code, "ok": expect == code, "message": msg})
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "corpus.json", "w", encoding="utf-8") as fh:
        json.dump({"jobs": summary}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return (0 if all(r["ok"] for r in summary) else 1), summary


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rectify-nd", description="Analyze and construct rectifying curves in R^n.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--job", help="job file (JSON); optional for corpus, which defaults to the bundled jobs")
    p.add_argument("--out-dir", default=".", help="directory for report JSON and CSV (default: .)")
    p.add_argument("--tol-certify", type=float, default=None, help="certification threshold (default 1e-6)")
    p.add_argument("--tol-falsify", type=float, default=None, help="falsification threshold (default 1e-2)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out_dir = Path(args.out_dir)
    try:
        job = load_job(args.job) if args.job else None
        if args.command == "corpus":
            code, summary = run_corpus(job, Path(args.job).parent if args.job else None, out_dir, args)
            for r in summary:
                status = "ok" if r["ok"] else "MISMATCH"
                print(f"{r['name']}: exit {r['exit_code']} (expect {r['expect']}) {status}")
            return code
        if job is None:
            raise SchemaError(f"{args.command} needs --job")
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    name = job.get("name") or Path(args.job).stem
    code, outcome, msg = run_job(job, args.command, str(name), args)
    if outcome is not None:
        write_outputs(outcome, out_dir)
        print(f"{name}: {msg} (exit {code})")
    else:
        print(msg, file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
