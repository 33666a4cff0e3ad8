"""Command-line driver: ``dupinkit <command> [options]``.

Exit codes: 0 when every check passes, 1 on a verification failure, 2 on a
usage error (bad arguments, unknown surface, unreadable config).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import catalog as cat
from .conformal import (
    codazzi_residual,
    conformal_frame,
    conformal_tensors,
    dupin_conformal_relation,
    expected_gram,
    gauss_residual,
    light_cone_signature,
    verify_trace_identities,
)
from .errors import DomainError, DupinKitError, NotApplicableError, ParameterError
from .hypersurface import dupin_check, moebius_table
from .indefinite import cluster_groups, random_pseudo_orthogonal
from .moebius import transform_immersion, verify_moebius_invariance
from .report import VerificationReport, render_report

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DEFAULT_TOLERANCES = {
    "trace_B": 1e-9,
    "norm_B": 1e-9,
    "trace_A": 1e-5,
    "div_B": 1e-4,
    "gauss": 1e-4,
    "codazzi": 1e-4,
    "dupin_relation": 1e-4,
    "frame_gram": 1e-8,
    "dupin": 1e-6,
    "moebius_invariance": 1e-6,
}
DEFAULTS = {"tol": None, "seed": 0, "grid": 3, "format": "json"}


class UsageError(Exception):
    pass


def load_config(path: str | None) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    if path is None:
        return {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, value = line.partition("=")
        if not eq:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        out[key.strip()] = value.strip()
    return out


def resolve_settings(args) -> dict:
    cfg = load_config(args.config)
    settings = dict(DEFAULTS)
    tolerances = dict(DEFAULT_TOLERANCES)
    try:
        for key, value in cfg.items():
            if key.startswith("tol."):
                name = key[4:]
                if name not in tolerances:
                    raise UsageError(f"unknown tolerance {name!r} in config")
                tolerances[name] = float(value)
            elif key in ("tol",):
                settings[key] = float(value)
            elif key in ("seed", "grid"):
                settings[key] = int(value)
            elif key == "format":
                settings[key] = value
            else:
                raise UsageError(f"unknown config key {key!r}")
    except ValueError as exc:
        raise UsageError(f"bad config value: {exc}") from exc
    for key in DEFAULTS:
        v = getattr(args, key, None)
        if v is not None:
            settings[key] = v
    if settings["format"] not in ("json", "text"):
        raise UsageError("format must be json or text")
    if settings["grid"] < 1:
        raise UsageError("grid must be positive")
    if settings["tol"] is not None:
        # the global tolerance governs the Dupin and invariance tests
        tolerances["dupin"] = tolerances["moebius_invariance"] = settings["tol"]
    settings["tolerances"] = tolerances
    return settings


def _entry(surface_id: str) -> cat.CatalogEntry:
    try:
        return cat.build(surface_id)
    except ParameterError as exc:
        raise UsageError(str(exc)) from exc


def _sample_points(entry: cat.CatalogEntry, grid: int, points: str | None) -> np.ndarray:
    if points:
        try:
            rows = [[float(v) for v in chunk.split(",")] for chunk in points.split(";")]
        except ValueError as exc:
            raise UsageError("points look like '0.1,0.2,0.3;0.2,0.1,0.0'") from exc
        P = np.array(rows, dtype=float)
        if P.shape[1] != entry.n:
            raise UsageError(f"points need {entry.n} coordinates")
        return P
    return entry.immersion.grid(grid)


def _clusters(values, groups) -> list:
    return [[float(np.mean(values[g])), len(g)] for g in groups]


def point_records(entry: cat.CatalogEntry, P: np.ndarray, ct=None, extra: dict | None = None) -> list:
    ct = conformal_tensors(entry.immersion, P) if ct is None else ct
    out = []
    for s in range(P.shape[0]):
        groups = cluster_groups(ct.lams[s])
        lam = _clusters(ct.lams[s], groups)
        moeb = {}
        if len(groups) >= 3:
            table = moebius_table([v for v, _ in lam])
            moeb = {f"{i + 1}{j + 1}{k + 1}": float(v) for (i, j, k), v in table.items() if i < j < k}
        rec = {
            "chart": [float(v) for v in P[s]],
            "lambda_clusters": lam,
            "H": float(ct.H[s]),
            "e2tau": float(np.exp(2 * ct.tau[s])),
            "b_clusters": _clusters(ct.b[s], groups),
            "moebius": moeb,
            "C": [float(v) for v in ct.C[s]],
        }
        if extra:
            rec["residuals"] = {k: float(v[s]) for k, v in extra.items()}
        out.append(rec)
    return out


def run_verify(
    surface: str,
    grid: int = 3,
    tolerances: dict | None = None,
    seed: int = 0,
    checks: tuple = (),
    seeds: int = 3,
    points: str | None = None,
) -> VerificationReport:
    """Full identity suite over the sample grid; deterministic for a given seed."""
    tolerances = dict(DEFAULT_TOLERANCES if tolerances is None else tolerances)
    entry = _entry(surface)
    imm = entry.immersion
    P = _sample_points(entry, grid, points)
    ct = conformal_tensors(imm, P)
    trace = verify_trace_identities(ct)
    frame = conformal_frame(imm, P)
    gram = np.max(np.abs(frame.gram() - expected_gram(imm.n)), axis=(-2, -1))
    per_point = dict(trace)
    per_point["gauss"] = gauss_residual(ct)
    per_point["codazzi"] = codazzi_residual(ct)
    per_point["dupin_relation"] = np.max(dupin_conformal_relation(imm, P, ct=ct).residual, axis=-1)
    per_point["frame_gram"] = gram
    residuals = {k: float(np.max(v)) for k, v in per_point.items()}
    notes = list(entry.notes)
    dup = dupin_check(imm, P, deriv_tol=tolerances["dupin"])
    residuals["dupin"] = dup.max_violation
    notes.extend(dup.notes)
    used = {k: tolerances[k] for k in residuals}
    if "moebius-invariance" in checks:
        sig = light_cone_signature(imm.n)
        worst = 0.0
        for s in range(seed, seed + seeds):
            T = random_pseudo_orthogonal(sig, s)
            res = verify_moebius_invariance(imm, T, P, tolerances["moebius_invariance"])
            worst = max(worst, res.deviation if res.patterns_match else float("inf"))
            notes.append(
                f"seed {s}: coverage {res.coverage:.3f}, {res.surviving} samples, deviation {res.deviation:.3e}"
            )
        residuals["moebius_invariance"] = worst
        used["moebius_invariance"] = tolerances["moebius_invariance"]
    report = VerificationReport(
        surface,
        _json_params(entry.params),
        used,
        point_records(entry, P, ct, per_point),
        residuals,
        notes=notes,
    )
    return report.finalize()


def _json_params(params: dict) -> dict:
    return {k: (float(v) if isinstance(v, float) else v) for k, v in params.items()}


def _emit(payload, fmt: str, text_lines: list[str] | None = None) -> None:
    if fmt == "json" or text_lines is None:
        sys.stdout.buffer.write(render_report(payload, "json"))
    else:
        sys.stdout.write("\n".join(text_lines) + "\n")
    sys.stdout.flush()


def cmd_catalog(args, settings) -> int:
    entries = cat.catalog(include_controls=True)
    rows = [{"id": e.id, "n": e.n, "label": e.immersion.label, "control": e.control} for e in entries]
    lines = [f"{r['id']:<32} n={r['n']}  {r['label']}" + ("  [control]" if r["control"] else "") for r in rows]
    _emit({"surfaces": rows}, settings["format"], lines)
    return EXIT_PASS


def cmd_invariants(args, settings) -> int:
    entry = _entry(args.surface)
    P = _sample_points(entry, settings["grid"], args.points)
    recs = point_records(entry, P)
    payload = {"surface": args.surface, "params": _json_params(entry.params), "points": recs, "notes": list(entry.notes)}
    lines = [f"surface: {args.surface}"]
    for r in recs:
        lines.append(
            "chart " + ", ".join(f"{v:.4f}" for v in r["chart"])
            + f" | e2tau {r['e2tau']:.6f} | b " + ", ".join(f"{v:.6f}x{m}" for v, m in r["b_clusters"])
        )
    lines.extend(f"note: {n}" for n in entry.notes)
    _emit(payload, settings["format"], lines)
    return EXIT_PASS


def cmd_verify(args, settings) -> int:
    report = run_verify(
        args.surface,
        settings["grid"],
        settings["tolerances"],
        settings["seed"],
        tuple(args.check or ()),
        args.seeds,
        args.points,
    )
    sys.stdout.buffer.write(render_report(report, settings["format"]))
    sys.stdout.flush()
    return EXIT_PASS if report.passed else EXIT_FAIL


def cmd_dupin(args, settings) -> int:
    entry = _entry(args.surface)
    P = _sample_points(entry, settings["grid"], args.points)
    tol = settings["tolerances"]["dupin"]
    rep = dupin_check(entry.immersion, P, deriv_tol=tol)
    patterns = sorted({tuple(p) for p in rep.patterns})
    payload = {
        "surface": args.surface,
        "pass": rep.passed,
        "proper": rep.proper,
        "max_violation": rep.max_violation,
        "tolerance": tol,
        "patterns": [list(p) for p in patterns],
        "notes": rep.notes,
    }
    lines = [
        f"surface: {args.surface}",
        f"multiplicities: {patterns}",
        f"max violation {rep.max_violation:.3e} (tolerance {tol:g})",
        "DUPIN" if rep.passed else "NOT DUPIN",
    ] + [f"note: {n}" for n in rep.notes]
    _emit(payload, settings["format"], lines)
    return EXIT_PASS if rep.passed else EXIT_FAIL


def cmd_transform(args, settings) -> int:
    entry = _entry(args.surface)
    imm = entry.immersion
    P = _sample_points(entry, settings["grid"], args.points)
    T = random_pseudo_orthogonal(light_cone_signature(imm.n), settings["seed"], args.rapidity)
    tol = settings["tolerances"]["moebius_invariance"]
    tr = transform_immersion(imm, T, args.target_c)
    res = verify_moebius_invariance(imm, T, P, tol, args.target_c)
    payload = {
        "surface": args.surface,
        "seed": settings["seed"],
        "target_c": imm.space_form.c if args.target_c is None else args.target_c,
        "coverage": tr.coverage,
        "surviving": res.surviving,
        "moebius_deviation": res.moebius_deviation,
        "b_deviation": res.b_deviation,
        "patterns_match": res.patterns_match,
        "tolerance": tol,
        "pass": res.passed(tol),
        "notes": list(res.notes),
    }
    lines = [f"{k}: {v}" for k, v in payload.items()]
    _emit(payload, settings["format"], lines)
    return EXIT_PASS if payload["pass"] else EXIT_FAIL


def cmd_classify2(args, settings) -> int:
    entry = _entry(args.surface)
    P = _sample_points(entry, settings["grid"], args.points)
    tol = settings["tol"] if settings["tol"] is not None else 1e-7
    try:
        r = cat.classify_two_curvature(entry.immersion, P, tol)
    except NotApplicableError as exc:
        _emit({"surface": args.surface, "pass": False, "notes": [str(exc)]}, settings["format"], [f"not applicable: {exc}"])
        return EXIT_FAIL
    payload = {
        "surface": args.surface,
        "mu": r.mu,
        "lambda_hat": r.lambda_hat,
        "e_norm": r.e_norm,
        "e_inner": r.e_inner,
        "case": r.case,
        "family": cat.CASES[r.case],
        "fit_residual": r.fit_residual,
        "multiplicities": list(r.multiplicities),
        "b_values": list(r.b_values),
        "b_closed_form": list(r.b_closed_form),
        "b_residual": r.b_residual,
        "pass": r.fit_residual < tol and r.b_residual < 1e-9,
        "notes": list(r.notes),
    }
    lines = [f"{k}: {v}" for k, v in payload.items()]
    _emit(payload, settings["format"], lines)
    return EXIT_PASS if payload["pass"] else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, help="tolerance for the Dupin and invariance checks")
    common.add_argument("--seed", type=int, help="seed for random transforms (default 0)")
    common.add_argument("--grid", type=int, help="samples per chart axis (default 3)")
    common.add_argument("--format", choices=("json", "text"), help="output format (default json)")
    common.add_argument("--config", help="flat key=value file with default settings")

    surface = argparse.ArgumentParser(add_help=False)
    surface.add_argument("--surface", required=True, help="catalog id, e.g. cyl:a=2,k=1,n=3")
    surface.add_argument("--points", help="explicit chart points 'u1,u2,..;v1,v2,..' instead of a grid")

    parser = argparse.ArgumentParser(prog="dupinkit", description="Conformal invariants of spacelike Dupin hypersurfaces")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("catalog", parents=[common], help="catalog operations")
    p.add_argument("action", choices=("list",))
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("invariants", parents=[common, surface], help="per-point conformal invariants")
    p.set_defaults(func=cmd_invariants)

    p = sub.add_parser("verify", parents=[common, surface], help="run the identity suite")
    p.add_argument("--check", action="append", choices=("moebius-invariance",), help="extra checks")
    p.add_argument("--seeds", type=int, default=3, help="number of random transforms for --check")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("dupin", parents=[common, surface], help="Dupin criterion")
    p.set_defaults(func=cmd_dupin)

    p = sub.add_parser("transform", parents=[common, surface], help="apply a random conformal transformation")
    p.add_argument("--target-c", type=int, choices=(-1, 0, 1), help="target space form chart")
    p.add_argument("--rapidity", type=float, default=0.5, help="largest boost rapidity")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("classify2", parents=[common, surface], help="two-curvature classification")
    p.set_defaults(func=cmd_classify2)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_PASS
    try:
        settings = resolve_settings(args)
        return args.func(args, settings)
    except (UsageError, DomainError) as exc:
        print(f"dupinkit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DupinKitError as exc:
        print(f"dupinkit: verification failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
