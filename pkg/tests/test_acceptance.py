"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line, printed in the terminal summary.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
import pytest

from dupinkit.catalog import (
    CATALOG_IDS,
    CONTROL_IDS,
    build,
    classify_two_curvature,
    cone_over,
    cylinder_over,
    principal_pattern,
    product_hypersurface,
    spectrum_deviation,
    three_curvature_construction,
    two_curvature_closed_form,
    warped_map,
)
from dupinkit.cli import run_verify
from dupinkit.conformal import (
    conformal_tensors,
    dupin_conformal_relation,
    gauss_residual,
    light_cone_signature,
    verify_trace_identities,
)
from dupinkit.hypersurface import dupin_check, local_geometry, moebius_curvature
from dupinkit.indefinite import random_pseudo_orthogonal
from dupinkit.moebius import verify_moebius_invariance

WARPED_ID = "ex34:p=1,q=1,a=sqrt(2),n=4"
CYL_ID = "cyl:a=2,k=1,n=3"


@lru_cache(maxsize=None)
def grid_tensors(entry_id: str):
    imm = build(entry_id).immersion
    return conformal_tensors(imm, imm.grid(4))


def fmt(value: float) -> str:
    return f"{value:.2e}"


def test_trace_identities(record_criterion):
    worst = {"trace_B": 0.0, "norm_B": 0.0, "trace_A": 0.0, "div_B": 0.0}
    for entry_id in CATALOG_IDS:
        for key, res in verify_trace_identities(grid_tensors(entry_id)).items():
            worst[key] = max(worst[key], float(np.max(res)))
    tol = {"trace_B": 1e-9, "norm_B": 1e-9, "trace_A": 1e-5, "div_B": 1e-4}
    ok = all(worst[k] < tol[k] for k in tol)
    detail = " ".join(f"{k}={fmt(v)}" for k, v in worst.items())
    assert record_criterion(1, "trace identities", ok, detail), detail


def test_cylinder_oracle(record_criterion):
    ct = grid_tensors(CYL_ID)
    errs = {
        "lambda": np.max(np.abs(ct.lams - [-0.5, 0.0, 0.0])),
        "H": np.max(np.abs(ct.H + 1 / 6)),
        "e2tau": np.max(np.abs(ct.e2tau - 0.25)),
        "B": np.max(np.abs(ct.B - np.diag([-2 / 3, 1 / 3, 1 / 3]))),
        "A": np.max(np.abs(ct.A - np.diag([-5 / 18, 1 / 18, 1 / 18]))),
        "C": np.max(np.abs(ct.C)),
        "kappa_g": np.max(np.abs(ct.kappa_g)),
    }
    worst = max(errs.values())
    assert record_criterion(2, "cylinder oracle", worst < 1e-8, f"max error {fmt(worst)}"), errs


def test_warped_three_curvatures(record_criterion):
    imm = build(WARPED_ID).immersion
    P = np.array([[0.0, 1.5, t, 0.0] for t in (0.5, 1.0, 2.0)])
    ct = conformal_tensors(imm, P)
    b = np.sort(ct.b, axis=-1)
    spread = float(np.max(np.ptp(b, axis=0)))
    approx = float(np.max(np.abs(b - [-0.6528, -0.1306, 0.3917, 0.3917])))
    norm = float(np.max(np.abs(np.sum(b**2, axis=-1) - 0.75)))
    c_max = float(np.max(np.abs(ct.C)))
    # distinct curvatures -sqrt2 < -1/sqrt2 < 0, the last one double
    m123 = max(abs(moebius_curvature(lam, 0, 1, 2) - 0.5) for lam in np.sort(ct.lams, axis=-1))
    report = run_verify(WARPED_ID, grid=2)
    noted = any("c^2" in note for note in report.notes)
    ok = spread < 1e-8 and approx < 1e-4 and norm < 1e-9 and c_max < 1e-6 and m123 < 1e-9 and noted
    detail = f"b spread {fmt(spread)} sum b^2 {fmt(norm)} C {fmt(c_max)} M123 {fmt(m123)} note {noted}"
    assert record_criterion(3, "three constant conformal curvatures", ok, detail), detail


def test_moebius_invariance(record_criterion):
    worst, patterns, survivors = 0.0, True, True
    for entry_id in CATALOG_IDS:
        imm = build(entry_id).immersion
        P = imm.grid(3)
        for seed in range(10):
            T = random_pseudo_orthogonal(light_cone_signature(imm.n), seed)
            res = verify_moebius_invariance(imm, T, P)
            worst = max(worst, res.deviation)
            patterns &= res.patterns_match
            survivors &= res.surviving > 0
    ok = worst < 1e-6 and patterns and survivors
    detail = f"max deviation {fmt(worst)} patterns match {patterns}"
    assert record_criterion(4, "moebius invariance", ok, detail), detail


def test_gauss_integrability(record_criterion):
    worst = max(float(np.max(gauss_residual(grid_tensors(e)))) for e in CATALOG_IDS)
    assert record_criterion(5, "gauss integrability", worst < 1e-4, f"max residual {fmt(worst)}")


def test_dupin_criterion(record_criterion):
    catalog_worst = 0.0
    catalog_ok = True
    relation = 0.0
    for entry_id in CATALOG_IDS:
        imm = build(entry_id).immersion
        rep = dupin_check(imm, imm.grid(4))
        catalog_ok &= rep.passed
        catalog_worst = max(catalog_worst, rep.max_violation)
        rel = dupin_conformal_relation(imm, imm.grid(4), ct=grid_tensors(entry_id))
        relation = max(relation, float(np.max(rel.residual)))
    control_violation = 0.0
    for control_id in CONTROL_IDS:
        imm = build(control_id).immersion
        control_violation = dupin_check(imm, imm.grid(4)).max_violation
        rel = dupin_conformal_relation(imm, imm.grid(4), ct=grid_tensors(control_id))
        relation = max(relation, float(np.max(rel.residual)))
    ok = catalog_ok and catalog_worst < 1e-6 and control_violation > 1e-2 and relation < 1e-4
    detail = f"catalog {fmt(catalog_worst)} control {fmt(control_violation)} relation {fmt(relation)}"
    assert record_criterion(6, "dupin criterion", ok, detail), detail


def test_constructions(record_criterion):
    base = product_hypersurface(0, 1, 1.5, 2)
    cyl = cylinder_over(base, 4)
    cyl_dev = max(
        spectrum_deviation(local_geometry(cyl, p).lams, np.concatenate([local_geometry(base, p[:2]).lams, [0, 0]]))
        for p in cyl.grid(3)
    )
    base = product_hypersurface(1, 1, 0.8, 2)
    cone = cone_over(base)
    cone_dev = max(
        spectrum_deviation(local_geometry(cone, p).lams, np.concatenate([local_geometry(base, p[:2]).lams / p[2], [0]]))
        for p in cone.grid(3)
    )
    warped = build(WARPED_ID).immersion
    P = warped.grid(4)
    direct = np.stack(warped_map(1, 1, math.sqrt(2), 4)([P[:, a] for a in range(4)]), axis=-1)
    map_dev = float(np.max(np.abs(warped(P) - direct)))
    three = three_curvature_construction(1, 1, 2)
    pats = {tuple(sorted(principal_pattern(three, p))) for p in three.grid(3)}
    three_ok = pats == {(1, 1, 2)} and three.n == 4 and dupin_check(three, three.grid(3)).passed
    ok = cyl_dev < 1e-7 and cone_dev < 1e-7 and map_dev < 1e-12 and three_ok
    detail = f"cylinder {fmt(cyl_dev)} cone {fmt(cone_dev)} map {fmt(map_dev)} patterns {sorted(pats)}"
    assert record_criterion(7, "constructions", ok, detail), detail


def test_two_curvature_classification(record_criterion):
    imm = build(CYL_ID).immersion
    r = classify_two_curvature(imm, imm.grid(3))
    errs = [abs(r.mu - 1 / 3), abs(r.lambda_hat + 1 / 18), abs(r.e_norm - 2 / 9)]
    fit_ok = max(errs) < 1e-7 and r.fit_residual < 1e-7
    b_dev = 0.0
    for entry_id in CATALOG_IDS[:3]:
        entry = build(entry_id)
        n, k = entry.n, int(entry.params["k"])
        closed = two_curvature_closed_form(n, k)
        for b in grid_tensors(entry_id).b:
            # b_1 is the simple cluster; orientation may flip its sign
            groups = np.sort(b)
            simple = groups[0] if abs(groups[0] - groups[1]) > 1e-6 else groups[-1]
            b_dev = max(b_dev, abs(abs(simple) - closed))
    ok = fit_ok and b_dev < 1e-9
    detail = f"mu {r.mu:.9f} lambda {r.lambda_hat:.9f} e_norm {r.e_norm:.9f} fit {fmt(r.fit_residual)} b {fmt(b_dev)}"
    assert record_criterion(8, "two-curvature classification", ok, detail), detail
