"""One verified inequality instance and CSV emission for a list of them."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional

FIELDS = ["check_id", "d", "m", "gamma", "variant", "n", "lambda", "x",
          "lhs", "rhs", "margin", "pass", "runtime_ms", "note"]


def fmt(v) -> str:
    """17 significant digits for reals, empty for missing values."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def relative_margin(lhs: float, rhs: float) -> float:
    """(rhs - lhs) / max(|rhs|, |lhs|), evaluated without overflow."""
    if lhs == rhs:
        return 0.0
    big = max(abs(lhs), abs(rhs))
    if math.isinf(big):
        if math.isinf(rhs) and rhs > 0 and not math.isinf(lhs):
            return 1.0
        if math.isinf(lhs) and lhs > 0 and not math.isinf(rhs):
            return -1.0
        return 0.0
    return (rhs - lhs) / big


@dataclass
class BoundCheckRecord:
    check_id: str
    d: Optional[int]
    m: Optional[float]
    gamma: Optional[float]
    variant: Optional[str]
    n: Optional[int]
    lam: Optional[float]
    x: Optional[float]
    lhs: float
    rhs: float
    margin: float
    passed: bool
    runtime_ms: float = 0.0
    note: str = ""

    @classmethod
    def make(cls, check_id, spec=None, *, lhs, rhs, tol=1e-5, n=None, lam=None, x=None,
             runtime_ms=0.0, note="", log_lhs=None, log_rhs=None):
        """Build a record; pass iff lhs <= rhs (1 + tol).

        When the raw values overflow, pass log_lhs / log_rhs and the test and
        margin are evaluated in log space.
        """
        lhs, rhs = float(lhs), float(rhs)
        if log_lhs is not None and log_rhs is not None:
            passed = log_lhs <= log_rhs + math.log1p(tol)
            diff = log_rhs - log_lhs
            margin = -math.expm1(-diff) if diff >= 0 else math.expm1(diff)
            if math.isnan(margin):
                margin = 0.0
        else:
            passed = bool(lhs <= rhs * (1 + tol)) if rhs >= 0 else bool(lhs <= rhs * (1 - tol))
            margin = relative_margin(lhs, rhs)
        if math.isnan(lhs) or math.isnan(rhs):
            passed, margin = False, 0.0
        kw = {}
        if spec is not None:
            kw = dict(d=spec.d, m=spec.m, gamma=spec.gamma, variant=spec.variant.value)
        else:
            kw = dict(d=None, m=None, gamma=None, variant=None)
        return cls(check_id=check_id, n=n, lam=lam, x=x, lhs=lhs, rhs=rhs, margin=margin,
                   passed=passed, runtime_ms=runtime_ms, note=note, **kw)

    def row(self) -> list[str]:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        d["pass"] = d.pop("passed")
        return [fmt(d[k]) for k in FIELDS]


def write_records_csv(records: Iterable[BoundCheckRecord], path=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIELDS)
    for r in records:
        w.writerow(r.row())
    text = buf.getvalue()
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


@dataclass
class SuiteReport:
    suite: str
    records: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    skipped: list = field(default_factory=list)

    @property
    def total(self) -> int:
        return len(self.records)

    @property
    def n_pass(self) -> int:
        return sum(r.passed for r in self.records)

    @property
    def n_fail(self) -> int:
        return self.total - self.n_pass

    @property
    def exit_code(self) -> int:
        if self.errors:
            return 2
        return 0 if self.n_fail == 0 else 1

    def summary(self) -> str:
        s = f"suite={self.suite} total={self.total} pass={self.n_pass} fail={self.n_fail}"
        if self.skipped:
            s += f" skipped={len(self.skipped)}"
        if self.errors:
            s += f" errors={len(self.errors)}"
        return s
