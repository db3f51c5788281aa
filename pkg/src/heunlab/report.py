"""Check records, report assembly and deterministic serialization."""
import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__


@dataclass
class Check:
    """One verification record."""

    name: str
    anchor: str
    residual: float
    tol: float
    inputs: dict = field(default_factory=dict)
    error: str = None

    @property
    def passed(self):
        return self.error is None and math.isfinite(self.residual) and self.residual < self.tol

    def as_dict(self):
        d = {"name": self.name, "anchor": self.anchor, "inputs": self.inputs,
             "residual": self.residual, "tol": self.tol, "passed": self.passed}
        if self.error is not None:
            d["error"] = self.error
        return d


def failed_check(name, anchor, tol, inputs, exc):
    return Check(name=name, anchor=anchor, residual=math.inf, tol=tol, inputs=inputs,
                 error=f"{type(exc).__name__}: {exc}")


def complex_str(z):
    """``re+imi`` text form (round-trips through :func:`parse_complex`)."""
    z = complex(z)
    im = z.imag
    sign = "-" if math.copysign(1.0, im) < 0 else "+"
    return f"{z.real!r}{sign}{abs(im)!r}i"


def to_jsonable(obj):
    """Recursively convert numpy / complex values; complex becomes ``{re, im}``."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (complex, np.complexfloating)):
        z = complex(obj)
        return {"re": _float(z.real), "im": _float(z.imag)}
    if isinstance(obj, (np.floating, float)):
        return _float(float(obj))
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _float(x):
    # JSON has no inf/nan; keep them readable and deterministic
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def build_report(checks, config):
    checks = sorted(checks, key=lambda c: c.name)
    n_pass = sum(c.passed for c in checks)
    return {
        "version": __version__,
        "config": to_jsonable(config),
        "checks": [to_jsonable(c.as_dict()) for c in checks],
        "summary": {"total": len(checks), "passed": n_pass, "failed": len(checks) - n_pass,
                    "overall": "pass" if n_pass == len(checks) else "fail"},
    }


def report_json(report):
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def report_csv(report):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", "anchor", "residual", "tol", "passed", "error"])
    for c in report["checks"]:
        w.writerow([c["name"], c["anchor"], repr(c["residual"]) if isinstance(c["residual"], float) else c["residual"],
                    repr(c["tol"]), c["passed"], c.get("error", "")])
    return buf.getvalue()


TRAJECTORY_COLUMNS = ("tau", "t", "b1", "delta1", "lambda", "residual_elliptic", "residual_rational", "status")


def trajectory_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRAJECTORY_COLUMNS)
    for r in rows:
        out = []
        for col in TRAJECTORY_COLUMNS:
            v = r.get(col)
            if v is None:
                out.append("")
            elif isinstance(v, complex):
                out.append(complex_str(v))
            elif isinstance(v, float):
                out.append(repr(v))
            else:
                out.append(str(v))
        w.writerow(out)
    return buf.getvalue()


def trajectory_json(rows, meta):
    return json.dumps({"version": __version__, "meta": to_jsonable(meta), "columns": list(TRAJECTORY_COLUMNS),
                       "rows": to_jsonable(rows)}, indent=2, sort_keys=True) + "\n"
