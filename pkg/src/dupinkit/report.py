"""Verification reports and their JSON / text rendering."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field


@dataclass
class VerificationReport:
    surface: str
    params: dict
    tolerances: dict
    points: list = field(default_factory=list)
    residuals: dict = field(default_factory=dict)
    passed: bool = False
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        # key order is part of the output format
        return {
            "surface": self.surface,
            "params": self.params,
            "tolerances": self.tolerances,
            "points": self.points,
            "residuals": self.residuals,
            "pass": self.passed,
            "notes": self.notes,
        }

    def finalize(self) -> VerificationReport:
        """Set ``passed`` to the conjunction of every residual under its tolerance."""
        ok = True
        for name, value in self.residuals.items():
            tol = self.tolerances.get(name)
            if tol is None:
                continue
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value < tol):
                ok = False
        self.passed = ok and bool(self.residuals)
        return self


def _encode(obj) -> str:
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return "%.17g" % obj if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    if hasattr(obj, "item"):  # numpy scalar
        return _encode(obj.item())
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def render_report(report: VerificationReport | dict, fmt: str = "json") -> bytes:
    data = report.to_dict() if isinstance(report, VerificationReport) else report
    if fmt == "json":
        return (_encode(data) + "\n").encode()
    if fmt == "text":
        return render_text(data).encode()
    raise ValueError(f"unknown format {fmt!r}")


def parse_report(blob: bytes | str) -> dict:
    return json.loads(blob)


def _short(v) -> str:
    if isinstance(v, float):
        return f"{v:.3e}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_short(x) for x in v) + "]"
    return str(v)


def render_text(data: dict) -> str:
    lines = [f"surface: {data['surface']}"]
    if data["params"]:
        lines.append("params:  " + ", ".join(f"{k}={_short(v)}" for k, v in data["params"].items()))
    lines.append(f"points:  {len(data['points'])}")
    if data["residuals"]:
        lines.append("")
        lines.append(f"{'check':<22}{'max residual':>14}{'tolerance':>12}  ok")
        for name, value in data["residuals"].items():
            tol = data["tolerances"].get(name)
            ok = "-" if tol is None else ("yes" if value is not None and value < tol else "NO")
            tol_s = "" if tol is None else f"{tol:.0e}"
            lines.append(f"{name:<22}{_short(value):>14}{tol_s:>12}  {ok}")
    lines.append("")
    lines.append("PASS" if data["pass"] else "FAIL")
    for note in data["notes"]:
        lines.append(f"note: {note}")
    return "\n".join(lines) + "\n"
