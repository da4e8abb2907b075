"""Tests for confusion accounting and the comparison report."""

from fractions import Fraction

import pytest

from macasplice.metrics import (
    REFERENCE_ROWS,
    ComparisonRow,
    ConfusionCounts,
    MetricUndefinedError,
    comparison_report,
    derive,
    tally,
)
from macasplice.seqio import ClassLabel

D, A, N = ClassLabel.DONOR, ClassLabel.ACCEPTOR, ClassLabel.NEITHER


class TestTally:
    def test_all_correct_has_no_errors(self):
        pairs = [(D, D), (A, A), (N, N), (D, D)]
        donor, acceptor = tally(pairs)
        assert (donor.fp, donor.fn) == (0, 0)
        assert (acceptor.fp, acceptor.fn) == (0, 0)
        assert donor.tp == 2 and acceptor.tp == 1

    def test_misprediction_lands_in_both_sets(self):
        donor, acceptor = tally([(D, N)])
        assert (donor.tp, donor.fp, donor.tn, donor.fn) == (0, 1, 0, 0)
        assert (acceptor.tp, acceptor.fp, acceptor.tn, acceptor.fn) == (0, 0, 1, 0)

    def test_counts_sum_to_pair_count(self):
        pairs = [(D, D), (A, N), (N, A), (D, A), (N, N), (A, A), (N, D)]
        donor, acceptor = tally(pairs)
        assert donor.total == len(pairs)
        assert acceptor.total == len(pairs)

    def test_permutation_invariant(self):
        pairs = [(D, D), (A, N), (N, A), (D, A), (N, N)]
        assert tally(pairs) == tally(list(reversed(pairs)))

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            tally([])

    def test_cross_site_confusion(self):
        # acceptor predicted as donor: donor FP, acceptor FN
        donor, acceptor = tally([(D, A)])
        assert donor.fp == 1 and acceptor.fn == 1


class TestDerive:
    def test_sensitivity_formula(self):
        m = derive(ConfusionCounts(tp=43, fp=5, tn=45, fn=7))
        assert m.sn == Fraction(86, 100)

    def test_published_rates_from_counts(self):
        m = derive(ConfusionCounts(tp=886, fp=97, tn=903, fn=114))
        assert m.sn == Fraction(886, 1000)
        assert m.sp == Fraction(903, 1000)
        assert float(m.sn * 100) == pytest.approx(88.6)
        assert float(m.sp * 100) == pytest.approx(90.3)

    def test_identity_sums(self):
        c = ConfusionCounts(tp=11, fp=3, tn=17, fn=5)
        m = derive(c)
        assert m.ap == c.tp + c.fn == 16
        assert m.an == c.tn + c.fp == 20
        assert m.predicted_positives == c.tp + c.fp == 14
        assert m.pn == c.tn + c.fn == 22
        assert m.ap + m.an == c.total

    def test_scaling_invariance(self):
        base = ConfusionCounts(tp=11, fp=3, tn=17, fn=5)
        for k in (2, 7):
            scaled = ConfusionCounts(base.tp * k, base.fp * k, base.tn * k, base.fn * k)
            assert derive(scaled).sn == derive(base).sn
            assert derive(scaled).sp == derive(base).sp

    def test_undefined_sensitivity(self):
        with pytest.raises(MetricUndefinedError, match="SN"):
            derive(ConfusionCounts(tp=0, fp=2, tn=3, fn=0))

    def test_undefined_specificity(self):
        with pytest.raises(MetricUndefinedError, match="SP"):
            derive(ConfusionCounts(tp=1, fp=0, tn=0, fn=1))

    def test_negative_counts_rejected(self):
        with pytest.raises(ValueError, match="non-negative"):
            ConfusionCounts(tp=-1, fp=0, tn=0, fn=0)


def _report():
    donor = derive(ConfusionCounts(tp=43, fp=5, tn=45, fn=7))
    acceptor = derive(ConfusionCounts(tp=30, fp=10, tn=50, fn=10))
    return comparison_report(donor, acceptor)


class TestComparisonReport:
    def test_reference_rows_verbatim(self):
        text = _report()
        for method, sn, sp in [
            ("NNsplice", "66.3", "67.4"),
            ("GENIO", "69.36", "72.2"),
            ("HSPL", "73.3", "76.5"),
            ("SpliceView", "82.3", "84.3"),
            ("MACA-MCC (published)", "88.6", "90.3"),
        ]:
            row = next(l for l in text.splitlines() if l.startswith(method))
            assert row.split()[-2:] == [sn, sp]

    def test_measured_rows_render_one_decimal(self):
        text = _report()
        donor_row = next(l for l in text.splitlines() if l.startswith("This run (donor)"))
        assert donor_row.split()[-2:] == ["86.0", "90.0"]
        acceptor_row = next(l for l in text.splitlines() if l.startswith("This run (acceptor)"))
        assert acceptor_row.split()[-2:] == ["75.0", "83.3"]

    def test_exactly_five_reference_and_two_measured_rows(self):
        lines = _report().splitlines()
        # header, separator, then the data rows
        assert len(lines) == 2 + 5 + 2
        assert len(REFERENCE_ROWS) == 5

    def test_measured_rows_follow_reference_rows(self):
        lines = _report().splitlines()
        assert lines[-2].startswith("This run (donor)")
        assert lines[-1].startswith("This run (acceptor)")

    def test_row_bounds(self):
        with pytest.raises(ValueError, match="\\[0, 100\\]"):
            ComparisonRow("bad", Fraction(101), Fraction(50))
