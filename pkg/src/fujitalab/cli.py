"""Command-line surface: single runs, certificates, (p, q) phase scans and
reference tables, with machine-readable CSV/JSON outputs.

Scan points fan out to a thread pool (capped by FUJITA_THREADS); every
point is computed independently and results are gathered and sorted by
(p, q), so outputs are byte-identical across thread counts.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .certificates import (ForcingSpec, certificate_to_json,
                           gaussian_certificate, gaussian_supersolution,
                           stationary_certificate)
from .core import (ProblemParams, Verdict, classify_positive,
                   critical_exponents)
from .grid import Field, ProfileSpec, RadialGrid, field_to_csv, sample_profile
from .solver import (SolveConfig, SolveStatus, TRUNCATION_NOTE,
                     comparison_tolerance, heat_reference, run, trace_to_csv)

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Scenario config parsing (strict: unknown keys rejected)
# ---------------------------------------------------------------------------

Real = Union[int, float, Fraction]


def _number(value, where: str) -> Real:
    """Accept JSON numbers, or [num, den] pairs for exact rationals."""
    if isinstance(value, bool):
        raise ConfigError(f"{where}: expected a number, got a boolean")
    if isinstance(value, (int, float)):
        return value
    if isinstance(value, list) and len(value) == 2 and all(isinstance(v, int) for v in value):
        num, den = value
        if den == 0:
            raise ConfigError(f"{where}: zero denominator")
        return Fraction(num, den)
    raise ConfigError(f"{where}: expected a number or [num, den] pair, got {value!r}")


def _check_keys(obj: dict, allowed: set, where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {sorted(unknown)}")


def _parse_profile(obj: dict, where: str = "profile") -> ProfileSpec:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ConfigError(f"{where}: expected an object with a 'kind' key")
    kind = obj["kind"]
    if kind == "gaussian":
        _check_keys(obj, {"kind", "amplitude"}, where)
        return ProfileSpec.gaussian(float(_number(obj["amplitude"], where)))
    if kind == "algebraic":
        _check_keys(obj, {"kind", "amplitude", "k"}, where)
        return ProfileSpec.algebraic(float(_number(obj["amplitude"], where)),
                                     float(_number(obj["k"], where)))
    if kind == "annular_bump":
        _check_keys(obj, {"kind", "amplitude", "center", "width"}, where)
        return ProfileSpec.annular_bump(float(_number(obj["amplitude"], where)),
                                        float(_number(obj["center"], where)),
                                        float(_number(obj["width"], where)))
    if kind == "signed_dipole":
        _check_keys(obj, {"kind", "a_plus", "a_minus", "centers", "widths"}, where)
        return ProfileSpec.signed_dipole(float(_number(obj["a_plus"], where)),
                                         float(_number(obj["a_minus"], where)),
                                         [float(c) for c in obj["centers"]],
                                         [float(w) for w in obj["widths"]])
    if kind == "zero":
        _check_keys(obj, {"kind"}, where)
        return ProfileSpec.zero()
    if kind == "sum":
        _check_keys(obj, {"kind", "parts"}, where)
        parts = [_parse_profile(part, f"{where}.parts[{i}]")
                 for i, part in enumerate(obj["parts"])]
        spec = parts[0]
        for extra in parts[1:]:
            spec = spec + extra
        return spec
    raise ConfigError(f"{where}: unknown profile kind {kind!r}")


def _parse_forcing(obj: dict) -> ForcingSpec:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ConfigError("forcing: expected an object with a 'kind' key")
    kind = obj["kind"]
    if kind == "none":
        _check_keys(obj, {"kind"}, "forcing")
        return ForcingSpec("none")
    if kind == "gaussian":
        _check_keys(obj, {"kind", "amplitude"}, "forcing")
        return ForcingSpec("gaussian", amplitude=float(_number(obj["amplitude"], "forcing")))
    if kind == "constructed_stationary":
        _check_keys(obj, {"kind", "eps"}, "forcing")
        eps = obj.get("eps")
        return ForcingSpec("constructed_stationary",
                           eps=None if eps is None else float(_number(eps, "forcing")))
    raise ConfigError(f"forcing: unknown kind {kind!r}")


def parse_scenario(doc: dict):
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    _check_keys(doc, {"problem", "profile", "forcing", "grid", "solve", "output"}, "config")
    for key in ("problem", "profile", "grid", "solve"):
        if key not in doc:
            raise ConfigError(f"config: missing required section '{key}'")

    forcing = _parse_forcing(doc["forcing"]) if "forcing" in doc else ForcingSpec("none")

    prob = doc["problem"]
    _check_keys(prob, {"n", "p", "q", "b", "use_source", "use_gradient"}, "problem")
    params = ProblemParams(
        n=int(prob["n"]),
        p=_number(prob["p"], "problem.p"),
        q=_number(prob["q"], "problem.q"),
        b=_number(prob.get("b", 1.0), "problem.b"),
        use_source=bool(prob.get("use_source", True)),
        use_gradient=bool(prob.get("use_gradient", True)),
        forcing=forcing if forcing.kind != "none" else None,
    )

    gr = doc["grid"]
    _check_keys(gr, {"L", "M"}, "grid")
    grid = RadialGrid(params.n, float(_number(gr["L"], "grid.L")), int(gr["M"]))

    sv = doc["solve"]
    _check_keys(sv, {"t_end", "dt_init", "dt_min", "dt_max", "blowup_threshold",
                     "growth_cap", "theta_scheme", "trace_stride", "kaplan_R"}, "solve")
    kw = {}
    for key in ("t_end", "dt_init", "dt_min", "dt_max", "blowup_threshold",
                "growth_cap", "theta_scheme", "kaplan_R"):
        if key in sv:
            kw[key] = float(_number(sv[key], f"solve.{key}"))
    if "trace_stride" in sv:
        kw["trace_stride"] = int(sv["trace_stride"])

    profile = _parse_profile(doc["profile"])

    out = doc.get("output", {})
    _check_keys(out, {"dir", "stride"}, "output")
    out_dir = out.get("dir", "out")
    if "stride" in out:
        kw["trace_stride"] = int(out["stride"])
    config = SolveConfig(**kw)
    return params, grid, config, profile, forcing, out_dir


def build_forcing_field(forcing: ForcingSpec, params: ProblemParams,
                        grid: RadialGrid) -> Optional[Field]:
    if forcing.kind == "none":
        return None
    if forcing.kind == "gaussian":
        return sample_profile(ProfileSpec.gaussian(forcing.amplitude), grid)
    # constructed_stationary: forcing that makes the algebraic supersolution
    # an exact steady state of the forced problem
    cert = stationary_certificate(params.n, float(params.p), float(params.q),
                                  float(params.b), grid=grid, eps=forcing.eps)
    return cert.h


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _is_pure_heat(params: ProblemParams, forcing: ForcingSpec, profile: ProfileSpec) -> bool:
    single_gaussian = len(profile.parts) == 1 and profile.parts[0].kind == "gaussian"
    return (not params.use_source and not params.use_gradient
            and forcing.kind == "none" and single_gaussian)


def cmd_run(args) -> int:
    path = Path(args.config)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read config {path}: {exc}", file=sys.stderr)
        return 2
    try:
        params, grid, config, profile, forcing, out_dir = parse_scenario(doc)
        h = build_forcing_field(forcing, params, grid)
    except (ConfigError, ValueError) as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return 2

    u0 = sample_profile(profile, grid)
    if forcing.kind != "constructed_stationary":
        u0.values[-1] = 0.0  # Dirichlet truncation

    outcome = run(params, u0, h, config)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "trace.csv").write_text(trace_to_csv(outcome.trace), encoding="utf-8")
    (out / "final_field.csv").write_text(field_to_csv(outcome.final_field), encoding="utf-8")

    doc_out = {
        "schema": SCHEMA_VERSION,
        "status": outcome.status.value,
        "t_star_estimate": outcome.t_star_estimate,
        "fit_quality": outcome.fit_quality,
        "t_last_finite": outcome.t_last_finite,
        "t_stall": outcome.t_stall,
        "records": len(outcome.trace),
        "final_sup": outcome.trace[-1].sup_u,
        "truncation_note": TRUNCATION_NOTE,
    }
    if _is_pure_heat(params, forcing, profile) and outcome.status is SolveStatus.REACHED_HORIZON:
        amp = profile.parts[0].amplitude
        ref = heat_reference(outcome.trace[-1].t, grid)
        err = float(np.max(np.abs(outcome.final_field.values - amp * ref.values)))
        doc_out["max_error_vs_reference"] = err
    (out / "outcome.json").write_text(json.dumps(doc_out, indent=2, sort_keys=True),
                                      encoding="utf-8")
    print(f"status: {outcome.status.value}  (artifacts in {out})")
    return 0


def cmd_certify(args) -> int:
    try:
        if args.kind == "gaussian":
            if args.eps is not None:
                raise ValueError("--eps applies to the stationary kind only "
                                 "(the gaussian amplitude is bisected)")
            cert = gaussian_certificate(args.n, args.p, args.q, args.b)
        else:
            cert = stationary_certificate(args.n, args.p, args.q, args.b, eps=args.eps)
    except ValueError as exc:
        print(f"certificate refused: {exc}", file=sys.stderr)
        return 2
    doc = certificate_to_json(cert)
    text = json.dumps(doc, indent=2, sort_keys=True)
    print(text)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    return 0


def _thread_count() -> int:
    raw = os.environ.get("FUJITA_THREADS", "")
    try:
        cap = int(raw)
    except ValueError:
        cap = 0
    if cap < 1:
        cap = min(8, os.cpu_count() or 1)
    return cap


def _scan_point(n: int, p: float, q: float, b: float, grid_m: int,
                budget: float) -> dict:
    params = ProblemParams(n=n, p=p, q=q, b=b)
    theory = classify_positive(params)
    row = {
        "p": p, "q": q,
        "verdict_theory": theory.verdict.value,
        "triggered_condition": theory.triggered_condition,
        "verdict_numeric": "unresolved",
        "t_star": None,
        "certificate_eps": None,
    }
    grid = RadialGrid(n, 12.0, grid_m)
    if theory.verdict is Verdict.BLOW_UP_ALL:
        u0 = sample_profile(ProfileSpec.gaussian(1.0), grid)
        u0.values[-1] = 0.0
        config = SolveConfig(t_end=budget, dt_init=1e-3, dt_min=1e-9, dt_max=2e-2,
                             trace_stride=5)
        outcome = run(params, u0, None, config)
        if outcome.status is SolveStatus.BLOW_UP:
            row["verdict_numeric"] = "BlowUp"
            row["t_star"] = outcome.t_star_estimate
        elif outcome.status is SolveStatus.REACHED_HORIZON:
            row["verdict_numeric"] = "ReachedHorizon(anomaly)"
        else:
            row["verdict_numeric"] = "unresolved"
    else:
        cert = gaussian_certificate(n, p, q, b)
        row["certificate_eps"] = cert.eps
        u0 = Field(grid, 0.9 * gaussian_supersolution(cert, 0.0, grid).values)
        u0.values[-1] = 0.0
        config = SolveConfig(t_end=min(5.0, budget), dt_init=1e-3, dt_min=1e-9,
                             dt_max=5e-3, trace_stride=20, store_fields=True)
        outcome = run(params, u0, None, config)
        tol = comparison_tolerance(grid, config)
        dominated = outcome.status is SolveStatus.REACHED_HORIZON
        if dominated and outcome.snapshots:
            for t_snap, u_snap in outcome.snapshots:
                z = gaussian_supersolution(cert, t_snap, grid)
                if np.any(u_snap.values > z.values + tol):
                    dominated = False
                    break
        if outcome.status is SolveStatus.BLOW_UP:
            # contradicts a verified certificate: hard failure, surfaced upstream
            row["verdict_numeric"] = "BlowUp(CONTRADICTS_CERTIFICATE)"
        elif dominated:
            row["verdict_numeric"] = "DominatedToHorizon"
        else:
            row["verdict_numeric"] = "unresolved"
    return row


def _float_cell(x) -> str:
    return "" if x is None else repr(float(x))


def scan_csv(rows) -> str:
    lines = ["p,q,verdict_theory,triggered_condition,verdict_numeric,t_star,certificate_eps"]
    for row in rows:
        cond = row["triggered_condition"].replace(",", ";")
        lines.append(f"{row['p']!r},{row['q']!r},{row['verdict_theory']},{cond},"
                     f"{row['verdict_numeric']},{_float_cell(row['t_star'])},"
                     f"{_float_cell(row['certificate_eps'])}")
    return "\n".join(lines) + "\n"


def cmd_scan(args) -> int:
    if args.steps < 0:
        print("error: --steps must be >= 0", file=sys.stderr)
        return 2
    if args.steps == 0:
        ps, qs = [], []
    elif args.steps == 1:
        ps, qs = [float(args.p_range[0])], [float(args.q_range[0])]
    else:
        ps = [float(v) for v in np.linspace(args.p_range[0], args.p_range[1], args.steps)]
        qs = [float(v) for v in np.linspace(args.q_range[0], args.q_range[1], args.steps)]
    points = [(p, q) for p in ps for q in qs]
    for p, q in points:
        if not (p > 1 and q >= 1):
            print(f"error: scan point (p={p}, q={q}) outside standing assumptions",
                  file=sys.stderr)
            return 2

    workers = max(1, _thread_count())
    results = []
    if points:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_scan_point, args.n, p, q, args.b, args.grid_m,
                                   args.budget) for p, q in points]
            results = [f.result() for f in futures]
    results.sort(key=lambda row: (row["p"], row["q"]))

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "scan.csv").write_text(scan_csv(results), encoding="utf-8")
    doc = {
        "schema": SCHEMA_VERSION,
        "n": args.n, "b": args.b,
        "p_range": list(args.p_range), "q_range": list(args.q_range),
        "steps": args.steps, "budget": args.budget, "grid_M": args.grid_m,
        "truncation_note": TRUNCATION_NOTE,
        "points": results,
    }
    (out / "scan.json").write_text(json.dumps(doc, indent=2, sort_keys=True),
                                   encoding="utf-8")
    contradictions = [row for row in results
                      if "CONTRADICTS_CERTIFICATE" in row["verdict_numeric"]]
    if contradictions:
        print(f"error: {len(contradictions)} certified-global point(s) reported "
              f"blow-up; scan is unsound", file=sys.stderr)
        return 3
    print(f"scan: {len(results)} points written to {out}")
    return 0


def cmd_table(args) -> int:
    try:
        crit = critical_exponents(args.n)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    rows = [
        ("p_F = 1 + 2/n", crit.p_fujita,
         "positive data: blow-up for every p <= p_F (source branch)"),
        ("q_F = 1 + 1/(n+1)", crit.q_fujita,
         "positive data: blow-up for every q <= q_F (gradient branch)"),
        ("q_1(n,p) = 1 + 1/(np-1)", None,
         "nonnegative-mean data: blow-up when (q-1)(np-1) <= 1"),
        ("p* = n/(n-2)", crit.p_star,
         "forced problem: blow-up for p < p* with positive-mass forcing"),
        ("q* = n/(n-1)", crit.q_star,
         "forced problem: blow-up for q < q* with positive-mass forcing"),
    ]
    doc = {"schema": SCHEMA_VERSION, "n": args.n, "rows": []}
    for name, value, meaning in rows:
        if value is None and name.startswith("q_1"):
            shown = "formula of p"
        elif value is None:
            shown = "undefined for n = 1"
        elif math.isinf(value):
            shown = "infinity (convention n/(n-2) = infinity for n = 2)"
        else:
            shown = repr(float(value))
        doc["rows"].append({"name": name, "value": shown, "governs": meaning})
        print(f"{name:26s} {shown:44s} {meaning}")
    if args.json_out:
        Path(args.json_out).write_text(json.dumps(doc, indent=2, sort_keys=True),
                                       encoding="utf-8")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fujitalab",
        description="Blow-up vs. global existence experiments for "
                    "u_t - Lap u = |u|^p + b|grad u|^q (+ h) on truncated radial domains.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario config (JSON)")
    p_run.add_argument("config", help="path to the scenario JSON")
    p_run.set_defaults(func=cmd_run)

    p_cert = sub.add_parser("certify", help="construct a supersolution certificate")
    p_cert.add_argument("--n", type=int, required=True)
    p_cert.add_argument("--p", type=float, required=True)
    p_cert.add_argument("--q", type=float, required=True)
    p_cert.add_argument("--b", type=float, default=1.0)
    p_cert.add_argument("--kind", choices=("gaussian", "stationary"), required=True)
    p_cert.add_argument("--eps", type=float, default=None,
                        help="explicit amplitude (stationary only; validated)")
    p_cert.add_argument("--out", default=None, help="also save the JSON here")
    p_cert.set_defaults(func=cmd_certify)

    p_scan = sub.add_parser("scan", help="classify + confirm a (p, q) lattice")
    p_scan.add_argument("--n", type=int, required=True)
    p_scan.add_argument("--b", type=float, default=1.0)
    p_scan.add_argument("--p-range", type=float, nargs=2, required=True,
                        metavar=("PMIN", "PMAX"))
    p_scan.add_argument("--q-range", type=float, nargs=2, required=True,
                        metavar=("QMIN", "QMAX"))
    p_scan.add_argument("--steps", type=int, default=8, help="lattice is steps x steps")
    p_scan.add_argument("--budget", type=float, default=50.0,
                        help="time horizon for confirmation runs")
    p_scan.add_argument("--grid-m", dest="grid_m", type=int, default=400)
    p_scan.add_argument("--out", default="scan_out")
    p_scan.set_defaults(func=cmd_scan)

    p_table = sub.add_parser("table", help="critical-exponent reference table")
    p_table.add_argument("--n", type=int, required=True)
    p_table.add_argument("--json-out", dest="json_out", default=None)
    p_table.set_defaults(func=cmd_table)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
