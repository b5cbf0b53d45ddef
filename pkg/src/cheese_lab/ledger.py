"""Verification ledgers: append-only rows written as CSV."""
from __future__ import annotations

import csv
import io
import math
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

COLUMNS = ("test_id", "suite", "params", "expected_re", "expected_im", "observed_re",
           "observed_im", "residual", "tolerance", "pass", "millis")


def _dec(x: float) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class LedgerRow:
    test_id: str
    suite: str
    params: str
    expected: complex
    observed: complex
    residual: float
    tolerance: float
    passed: bool
    millis: int = 0

    def __post_init__(self):
        object.__setattr__(self, "expected", complex(self.expected))
        object.__setattr__(self, "observed", complex(self.observed))
        object.__setattr__(self, "residual", float(self.residual))
        object.__setattr__(self, "tolerance", float(self.tolerance))
        if self.passed and not self.residual <= self.tolerance:
            raise ValueError(f"row {self.test_id}: pass flag inconsistent with residual")

    def cells(self) -> list[str]:
        e, o = self.expected, self.observed
        return [self.test_id, self.suite, self.params, _dec(e.real), _dec(e.imag), _dec(o.real),
                _dec(o.imag), _dec(self.residual), _dec(self.tolerance),
                "true" if self.passed else "false", str(int(self.millis))]


def format_params(**kw) -> str:
    """``k=v`` pairs joined by ``;`` in the given order; floats at 17 digits."""
    parts = []
    for k, v in kw.items():
        if isinstance(v, float):
            v = _dec(v)
        elif isinstance(v, (tuple, list)):
            v = "|".join(_dec(x) if isinstance(x, float) else str(x) for x in v)
        parts.append(f"{k}={v}")
    return ";".join(parts)


def parse_params(s: str) -> dict[str, str]:
    return dict(p.split("=", 1) for p in s.split(";") if p)


@dataclass
class Ledger:
    rows: list[LedgerRow] = field(default_factory=list)
    timing: bool = True

    def append(self, row: LedgerRow) -> None:
        self.rows.append(row)

    def add(self, test_id, suite, params, expected, observed, residual, tolerance,
            passed=None, millis=0) -> LedgerRow:
        residual = float(residual)
        if not math.isfinite(residual):
            residual = math.inf
        if passed is None:
            passed = residual <= tolerance
        row = LedgerRow(test_id, suite, params, expected, observed, residual, tolerance,
                        bool(passed) and residual <= tolerance, millis if self.timing else 0)
        self.append(row)
        return row

    @contextmanager
    def timer(self):
        """Yields a one-element list that receives elapsed milliseconds."""
        box = [0]
        t0 = time.perf_counter()
        try:
            yield box
        finally:
            box[0] = int(round((time.perf_counter() - t0) * 1000)) if self.timing else 0

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.rows)

    def failures(self) -> list[LedgerRow]:
        return [r for r in self.rows if not r.passed]

    def suites(self) -> dict[str, tuple[int, int]]:
        """suite -> (passed, total) in first-seen order."""
        out: dict[str, list[int]] = {}
        for r in self.rows:
            c = out.setdefault(r.suite, [0, 0])
            c[0] += r.passed
            c[1] += 1
        return {k: (v[0], v[1]) for k, v in out.items()}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in self.rows:
            w.writerow(r.cells())
        return buf.getvalue()

    def write(self, path) -> Path:
        p = Path(path)
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(self.to_csv(), encoding="utf-8", newline="")
        return p


class LedgerFormatError(ValueError):
    pass


def parse_ledger(text: str) -> Ledger:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise LedgerFormatError("empty ledger") from None
    if tuple(header) != COLUMNS:
        raise LedgerFormatError(f"unexpected header {header}")
    rows = []
    for line_no, cells in enumerate(reader, start=2):
        if len(cells) != len(COLUMNS):
            raise LedgerFormatError(f"line {line_no}: expected {len(COLUMNS)} cells")
        try:
            rows.append(LedgerRow(cells[0], cells[1], cells[2],
                                  complex(float(cells[3]), float(cells[4])),
                                  complex(float(cells[5]), float(cells[6])),
                                  float(cells[7]), float(cells[8]),
                                  {"true": True, "false": False}[cells[9]], int(cells[10])))
        except (ValueError, KeyError) as exc:
            raise LedgerFormatError(f"line {line_no}: {exc}") from None
    return Ledger(rows)


def read_ledger(path) -> Ledger:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise LedgerFormatError(f"cannot read ledger {path}: {exc}") from None
    return parse_ledger(text)
