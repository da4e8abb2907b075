"""Confusion accounting and sensitivity/specificity reporting.

Counts are kept per site type: the donor set scores every instance as
donor vs non-donor, the acceptor set as acceptor vs non-acceptor.  All
derived statistics use exact rational arithmetic; rendering to percent
happens only in the report.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .seqio import ClassLabel

__all__ = [
    "ConfusionCounts",
    "DerivedMetrics",
    "ComparisonRow",
    "MetricUndefinedError",
    "REFERENCE_ROWS",
    "tally",
    "derive",
    "comparison_report",
]


class MetricUndefinedError(ValueError):
    """A statistic's denominator is zero; ``metric`` names which one."""

    def __init__(self, metric: str, detail: str):
        self.metric = metric
        super().__init__(f"{metric} is undefined: {detail}")


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        for name in ("tp", "fp", "tn", "fn"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class DerivedMetrics:
    """The identity sums and the two rates, exact.

    ap = tp + fn (actual positives), an = tn + fp (actual negatives),
    predicted_positives = tp + fp, pn = tn + fn (predicted negatives),
    sn = tp / ap, sp = tn / an.
    """

    ap: int
    an: int
    predicted_positives: int
    pn: int
    sn: Fraction
    sp: Fraction


def tally(
    pairs: Sequence[tuple[ClassLabel, ClassLabel]]
) -> tuple[ConfusionCounts, ConfusionCounts]:
    """Count (predicted, actual) pairs into donor and acceptor sets.

    For each site type an instance is positive iff the respective label
    equals that type; every pair lands in exactly one cell of each set.
    """
    if not pairs:
        raise ValueError("cannot tally an empty pair list")
    out = []
    for site in (ClassLabel.DONOR, ClassLabel.ACCEPTOR):
        tp = fp = tn = fn = 0
        for predicted, actual in pairs:
            if predicted == site:
                if actual == site:
                    tp += 1
                else:
                    fp += 1
            else:
                if actual == site:
                    fn += 1
                else:
                    tn += 1
        out.append(ConfusionCounts(tp, fp, tn, fn))
    return out[0], out[1]


def derive(c: ConfusionCounts) -> DerivedMetrics:
    """Identity sums and SN/SP for one confusion set, exact rationals."""
    ap = c.tp + c.fn
    an = c.tn + c.fp
    if ap == 0:
        raise MetricUndefinedError("SN", "no actual positives (tp + fn = 0)")
    if an == 0:
        raise MetricUndefinedError("SP", "no actual negatives (tn + fp = 0)")
    return DerivedMetrics(
        ap=ap,
        an=an,
        predicted_positives=c.tp + c.fp,
        pn=c.tn + c.fn,
        sn=Fraction(c.tp, ap),
        sp=Fraction(c.tn, an),
    )


@dataclass(frozen=True)
class ComparisonRow:
    """One line of the comparison table, values in percent."""

    method: str
    sensitivity: Fraction
    specificity: Fraction

    def __post_init__(self):
        for value in (self.sensitivity, self.specificity):
            if not 0 <= value <= 100:
                raise ValueError("percentages must lie in [0, 100]")


#: reference splice-site predictors and their reported percentages
REFERENCE_ROWS: tuple[ComparisonRow, ...] = (
    ComparisonRow("NNsplice", Fraction("66.3"), Fraction("67.4")),
    ComparisonRow("GENIO", Fraction("69.36"), Fraction("72.2")),
    ComparisonRow("HSPL", Fraction("73.3"), Fraction("76.5")),
    ComparisonRow("SpliceView", Fraction("82.3"), Fraction("84.3")),
    ComparisonRow("MACA-MCC (published)", Fraction("88.6"), Fraction("90.3")),
)


def _verbatim(value: Fraction) -> str:
    return f"{float(value):g}"


def _measured(rate: Fraction) -> str:
    return f"{float(rate * 100):.1f}"


def comparison_report(donor: DerivedMetrics, acceptor: DerivedMetrics) -> str:
    """Aligned text table: the reference rows, then this run's two rows.

    Reference percentages render verbatim; measured rates render as
    percentages to one decimal.
    """
    rows = [(r.method, _verbatim(r.sensitivity), _verbatim(r.specificity)) for r in REFERENCE_ROWS]
    rows.append(("This run (donor)", _measured(donor.sn), _measured(donor.sp)))
    rows.append(("This run (acceptor)", _measured(acceptor.sn), _measured(acceptor.sp)))
    header = ("Method", "Sensitivity", "Specificity")
    widths = [
        max(len(header[col]), *(len(row[col]) for row in rows)) for col in range(3)
    ]
    lines = [
        "  ".join(header[col].ljust(widths[col]) for col in range(3)).rstrip(),
        "  ".join("-" * widths[col] for col in range(3)),
    ]
    for row in rows:
        lines.append(
            "  ".join(
                row[col].ljust(widths[col]) if col == 0 else row[col].rjust(widths[col])
                for col in range(3)
            ).rstrip()
        )
    return "\n".join(lines) + "\n"
