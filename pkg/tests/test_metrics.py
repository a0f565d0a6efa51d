"""Ledger accounting against a hand-tallied trace, and the slack bound."""

import numpy as np
import pytest

from selverify import (
    Action,
    DecisionRecord,
    ErrorLedger,
    Region,
    Thresholds,
    delta_bound,
)

TH = Thresholds(0.3, 0.7)


def rec(t, w, region, action, g_observed=None, q=0.1, explored=False):
    return DecisionRecord(
        t=t, w=w, region=region, action=action, q=q, explored=explored,
        thresholds_before=TH, g_observed=g_observed, thresholds_after=TH,
    )


def hand_trace():
    """Six rounds tallied by hand; expected counts in the test below."""
    return [
        # unilateral accept of an incorrect item: policy and threshold error
        (rec(1, 0.8, Region.ACCEPT, Action.ACCEPT), 0),
        # escalated uncertain round, incorrect: no error either way
        (rec(2, 0.5, Region.UNCERTAIN, Action.STRONG_VERIFY, g_observed=0, q=1.0), 0),
        # unilateral reject of an incorrect item: correct decision
        (rec(3, 0.1, Region.REJECT, Action.REJECT), 0),
        # unilateral rejects of correct items: policy and threshold errors
        (rec(4, 0.1, Region.REJECT, Action.REJECT), 1),
        (rec(5, 0.2, Region.REJECT, Action.REJECT), 1),
        # escalated uncertain round, correct: no error
        (rec(6, 0.6, Region.UNCERTAIN, Action.STRONG_VERIFY, g_observed=1, q=1.0), 1),
    ]


class TestLedger:
    def test_hand_tally(self):
        led = ErrorLedger()
        for r, g in hand_trace():
            led.record(r, g)
        assert (led.n0, led.n1) == (3, 3)
        assert (led.type1_policy, led.type2_policy) == (1, 2)
        assert (led.type1_threshold, led.type2_threshold) == (1, 2)
        assert (led.sv_count, led.total) == (2, 6)
        assert led.err_type1() == pytest.approx(1 / 3)
        assert led.err_type2() == pytest.approx(2 / 3)
        assert led.sv_rate() == pytest.approx(1 / 3)

    def test_threshold_tally_counts_explored_rounds(self):
        # an explored accept-region round is SV, not a policy error, but the
        # score still fell above the accept threshold
        led = ErrorLedger()
        r = rec(1, 0.9, Region.ACCEPT, Action.STRONG_VERIFY, g_observed=0,
                explored=True)
        led.record(r, 0)
        assert led.type1_policy == 0
        assert led.type1_threshold == 1
        assert led.sv_count == 1

    def test_empty_rates_are_zero(self):
        led = ErrorLedger()
        assert led.err_type1() == 0.0
        assert led.err_type2() == 0.0
        assert led.err_type1_threshold() == 0.0
        assert led.err_type2_threshold() == 0.0
        assert led.sv_rate() == 0.0

    def test_label_mismatch_detected(self):
        led = ErrorLedger()
        r = rec(1, 0.5, Region.UNCERTAIN, Action.STRONG_VERIFY, g_observed=1, q=1.0)
        with pytest.raises(RuntimeError):
            led.record(r, 0)

    def test_bad_latent_label(self):
        led = ErrorLedger()
        with pytest.raises(ValueError):
            led.record(rec(1, 0.5, Region.UNCERTAIN, Action.STRONG_VERIFY,
                           g_observed=1, q=1.0), 2)

    def test_record_observed(self):
        led = ErrorLedger()
        led.record_observed(
            rec(1, 0.5, Region.UNCERTAIN, Action.STRONG_VERIFY, g_observed=1, q=1.0)
        )
        assert (led.n1, led.total) == (1, 1)
        # unilateral rounds have no label: total only
        led.record_observed(rec(2, 0.8, Region.ACCEPT, Action.ACCEPT))
        assert (led.n0, led.n1, led.total) == (0, 1, 2)
        # an unresolved escalation cannot be tallied
        pending = rec(3, 0.5, Region.UNCERTAIN, Action.STRONG_VERIFY, q=1.0)
        with pytest.raises(ValueError):
            led.record_observed(pending)

    def test_merge(self):
        a = ErrorLedger(n0=1, n1=2, type1_policy=1, type2_policy=0,
                        type1_threshold=1, type2_threshold=1, sv_count=1, total=3)
        b = ErrorLedger(n0=2, n1=1, type1_policy=0, type2_policy=1,
                        type1_threshold=1, type2_threshold=1, sv_count=2, total=3)
        merged = a + b
        assert merged == a.merge(b)
        assert (merged.n0, merged.n1, merged.total) == (3, 3, 6)
        assert merged.sv_count == 3
        assert merged.err_type1() == pytest.approx(1 / 3)


class TestDeltaBound:
    def test_worked_value(self):
        # 0.04 + sqrt(2 ln 80 / 100) + ln 80 / 300, summed by hand
        val = delta_bound(1000, 0.05, eta=0.05, q_min=0.1)
        assert val == pytest.approx(0.350648192909, abs=1e-9)
        assert round(val, 5) == 0.35065

    def test_zero_rounds_vacuous(self):
        assert delta_bound(0, 0.05, eta=0.05, q_min=0.1) == 0.0

    def test_shrinks_with_n(self):
        vals = [delta_bound(n, 0.05, eta=0.05, q_min=0.1)
                for n in (10, 100, 1000, 10_000)]
        assert vals == sorted(vals, reverse=True)

    def test_grows_as_delta_shrinks(self):
        assert delta_bound(1000, 0.01, eta=0.05, q_min=0.1) > delta_bound(
            1000, 0.2, eta=0.05, q_min=0.1
        )

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(n=-1, delta=0.05, eta=0.05, q_min=0.1),
            dict(n=10, delta=0.0, eta=0.05, q_min=0.1),
            dict(n=10, delta=1.0, eta=0.05, q_min=0.1),
            dict(n=10, delta=0.05, eta=0.0, q_min=0.1),
            dict(n=10, delta=0.05, eta=0.05, q_min=0.0),
            dict(n=10, delta=0.05, eta=0.05, q_min=1.1),
        ],
    )
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            delta_bound(**kwargs)

    def test_n_must_be_a_plain_int(self):
        with pytest.raises(ValueError):
            delta_bound(np.int64(10), 0.05, eta=0.05, q_min=0.1)
        assert delta_bound(int(np.int64(10)), 0.05, eta=0.05, q_min=0.1) > 0
