"""Bell (CHSH) and Wigner test cases with their published reference values.

Experimental values are static overlay data; they are never recomputed.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

BELL_LIMIT = 2.0
WIGNER_LIMIT = 0.0


@dataclass(frozen=True)
class BellCase:
    id: int
    a: float
    b: float
    a_prime: float
    b_prime: float
    qm_prediction: float
    exp_value: float
    exp_error: float
    limit: float = BELL_LIMIT

    @property
    def axis_pairs(self):
        """Axis pairs in sum order: (a,b) - (a,b') + (a',b) + (a',b')."""
        return [(self.a, self.b), (self.a, self.b_prime), (self.a_prime, self.b), (self.a_prime, self.b_prime)]


@dataclass(frozen=True)
class WignerCase:
    id: int
    a: float
    b: float
    c: float
    exp_value: float
    exp_error: float
    limit: float = WIGNER_LIMIT

    def __post_init__(self):
        if abs((self.b - self.a) - (self.c - self.b)) > 1e-12:
            raise ValueError(f"axis b must bisect a and c, got {self.a}, {self.b}, {self.c}")

    @property
    def axis_pairs(self):
        """Axis pairs in combination order: P(a,c) - P(a,b) - P(b,c)."""
        return [(self.a, self.c), (self.a, self.b), (self.b, self.c)]


# case id, step x: settings a=0, b=x, a'=2x, b'=3x
_BELL_ROWS = [
    (1, 25.0, 2.46, 0.67, 2.30),
    (2, 30.0, 2.60, 1.21, 2.42),
    (3, 35.0, 2.72, 1.54, 2.76),
    (4, 40.0, 2.80, 2.11, 2.86),
    (5, 45.0, 2.83, 2.23, 2.48),
    (6, 50.0, 2.79, 2.39, 2.87),
    (7, 55.0, 2.69, 2.58, 2.91),
    (8, 60.0, 2.50, 2.75, 2.95),
]

BELL_CASES = tuple(BellCase(i, 0.0, x, 2 * x, 3 * x, qm, ev, err) for i, x, qm, ev, err in _BELL_ROWS)

# case id, half-opening: a=0, b=x, c=2x
_WIGNER_ROWS = [
    (1, 15.0, 0.20, 0.78),
    (2, 30.0, -0.38, 0.77),
    (3, 45.0, -0.54, 0.79),
    (4, 60.0, -0.71, 0.81),
    (5, 75.0, -0.62, 0.80),
    (6, 90.0, 0.13, 0.76),
]

WIGNER_CASES = tuple(WignerCase(i, 0.0, x, 2 * x, ev, err) for i, x, ev, err in _WIGNER_ROWS)


def bell_case(case_id: int) -> BellCase:
    return BELL_CASES[case_id - 1]


def wigner_case(case_id: int) -> WignerCase:
    return WIGNER_CASES[case_id - 1]


BELL_TABLE_COLUMNS = ["case_id", "a_deg", "b_deg", "a_prime_deg", "b_prime_deg", "qm", "exp", "err", "limit"]
WIGNER_TABLE_COLUMNS = ["case_id", "a_deg", "b_deg", "c_deg", "exp", "err", "limit"]


def _fmt(x):
    return repr(float(x))


def emit_reference_tables():
    """Both tables as CSV text: (bell_csv, wigner_csv)."""
    bell = io.StringIO()
    w = csv.writer(bell, lineterminator="\n")
    w.writerow(BELL_TABLE_COLUMNS)
    for c in BELL_CASES:
        w.writerow([c.id] + [_fmt(v) for v in (c.a, c.b, c.a_prime, c.b_prime, c.qm_prediction,
                                                c.exp_value, c.exp_error, c.limit)])
    wig = io.StringIO()
    w = csv.writer(wig, lineterminator="\n")
    w.writerow(WIGNER_TABLE_COLUMNS)
    for c in WIGNER_CASES:
        w.writerow([c.id] + [_fmt(v) for v in (c.a, c.b, c.c, c.exp_value, c.exp_error, c.limit)])
    return bell.getvalue(), wig.getvalue()


def parse_bell_table(text: str):
    rows = list(csv.DictReader(io.StringIO(text)))
    return tuple(
        BellCase(int(r["case_id"]), float(r["a_deg"]), float(r["b_deg"]), float(r["a_prime_deg"]),
                 float(r["b_prime_deg"]), float(r["qm"]), float(r["exp"]), float(r["err"]), float(r["limit"]))
        for r in rows
    )


def parse_wigner_table(text: str):
    rows = list(csv.DictReader(io.StringIO(text)))
    return tuple(
        WignerCase(int(r["case_id"]), float(r["a_deg"]), float(r["b_deg"]), float(r["c_deg"]),
                   float(r["exp"]), float(r["err"]), float(r["limit"]))
        for r in rows
    )
