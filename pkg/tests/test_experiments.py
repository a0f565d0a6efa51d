"""Experiment runner: bookkeeping, engine/kernel agreement, trace
serialization, bound and claim checks, sweep determinism."""

import dataclasses

import numpy as np
import pytest

from selverify import (
    CalibratedStream,
    DriftStream,
    ParetoPoint,
    PointMass,
    PolicyConfig,
    RunSpec,
    TaskOutcome,
    Trace,
    UniformDist,
    check_claims,
    derive_seed,
    error_curves,
    make_stream,
    preset_drift,
    preset_math_like,
    recompute_ledger,
    run,
    run_one,
    run_rep,
    sweep,
    sweep_point,
    verify_bound,
)

SV = 2  # action code for strong_verify in trace columns


def config(**kw):
    args = dict(
        alpha=0.15,
        beta=0.15,
        eta=0.05,
        q_accept=0.1,
        q_reject=0.1,
        tau_reject_init=0.1,
        tau_accept_init=0.9,
        seed=0,
    )
    args.update(kw)
    return PolicyConfig(**args)


def uniform_run(horizon=10_000, stream_seed=4, **kw):
    return run_one(
        config(**kw), CalibratedStream(UniformDist(), seed=stream_seed), horizon=horizon
    )


TRACE_COLUMNS = (
    "t", "w", "region", "action", "q", "explored", "g_observed", "g_latent",
    "tau_r_before", "tau_a_before", "tau_r_after", "tau_a_after",
)


def assert_traces_equal(a: Trace, b: Trace):
    for col in TRACE_COLUMNS:
        assert np.array_equal(getattr(a, col), getattr(b, col)), col
    assert a.ledger == b.ledger


class TestBookkeeping:
    def test_ledger_totals(self):
        trace = uniform_run()
        led = trace.ledger
        assert len(trace) == 10_000
        assert led.total == 10_000
        assert led.n0 + led.n1 == led.total
        assert led.sv_count == int((trace.action == SV).sum())
        assert led.sv_count == int((trace.g_observed >= 0).sum())
        assert np.array_equal(trace.t, np.arange(1, 10_001))
        assert recompute_ledger(trace) == led

    def test_always_escalating_policy_never_errs(self):
        trace = uniform_run(horizon=2_000, q_accept=1.0, q_reject=1.0)
        led = trace.ledger
        assert led.sv_count == led.total == 2_000
        assert led.err_type1() == 0.0
        assert led.err_type2() == 0.0
        assert led.type1_policy == led.type2_policy == 0

    def test_endless_streams_require_a_horizon(self):
        with pytest.raises(ValueError):
            run_one(config(), CalibratedStream(UniformDist(), seed=0), horizon=None)

    def test_finite_stream_runs_to_exhaustion(self):
        trace = run_one(config(), make_stream(preset_drift(5_000, seed=2)), horizon=None)
        assert len(trace) == 5_000

    def test_reactive_runs_carry_a_task_outcome(self):
        trace = run_one(
            config(), make_stream(preset_math_like("easy", problems=40, seed=3))
        )
        assert isinstance(trace.outcome, TaskOutcome)
        assert trace.outcome.problems_total == 40
        assert uniform_run(horizon=10).outcome is None


class TestEngineKernelAgreement:
    @pytest.mark.parametrize(
        "spec",
        [
            {"kind": "calibrated", "score_dist": UniformDist().to_dict(), "seed": 8},
            {
                "kind": "miscalibrated",
                "score_dist": UniformDist().to_dict(),
                "link": {"kind": "power", "exponent": 2.0},
                "seed": 8,
            },
            preset_drift(total_length=2_000, seed=8),
        ],
    )
    def test_paths_produce_identical_traces(self, spec):
        cfg = config(seed=17)
        fast = run_one(cfg, make_stream(spec), horizon=2_000)
        slow = run_one(cfg, make_stream(spec), horizon=2_000, force_engine=True)
        assert_traces_equal(fast, slow)


class TestSeeds:
    def test_derive_seed_is_deterministic_and_channel_separated(self):
        assert derive_seed(3, 1, 0) == derive_seed(3, 1, 0)
        assert derive_seed(3, 1, 0) != derive_seed(3, 1, 1)
        assert derive_seed(3, 1, 0) != derive_seed(3, 2, 0)
        assert derive_seed(4, 1, 0) != derive_seed(3, 1, 0)

    def test_run_rep_wires_derived_seeds(self):
        spec = RunSpec(
            policy=config(),
            stream={"kind": "calibrated", "score_dist": UniformDist().to_dict(), "seed": 0},
            horizon=50,
            repetitions=3,
            seed_base=11,
        )
        trace = run_rep(spec, 2)
        assert trace.config["policy"]["seed"] == derive_seed(11, 2, 0)
        assert trace.config["stream"]["seed"] == derive_seed(11, 2, 1)
        assert trace.config["rep"] == 2
        assert trace.config["seed_base"] == 11

    def test_repetitions_differ_and_replay(self):
        spec = RunSpec(
            policy=config(),
            stream={"kind": "calibrated", "score_dist": UniformDist().to_dict(), "seed": 0},
            horizon=200,
            repetitions=2,
            seed_base=5,
        )
        traces = run(spec)
        assert len(traces) == 2
        assert not np.array_equal(traces[0].w, traces[1].w)
        assert_traces_equal(traces[1], run_rep(spec, 1))

    def test_rep_out_of_range(self):
        spec = RunSpec(policy=config(), stream=preset_drift(100), repetitions=2)
        with pytest.raises(ValueError):
            run_rep(spec, 2)
        with pytest.raises(ValueError):
            run_rep(spec, -1)

    def test_runspec_validation_and_round_trip(self):
        with pytest.raises(ValueError):
            RunSpec(policy=config(), stream={}, horizon=0)
        with pytest.raises(ValueError):
            RunSpec(policy=config(), stream={}, repetitions=0)
        with pytest.raises(ValueError):
            RunSpec(policy=config(), stream={}, seed_base=-1)
        spec = RunSpec(
            policy=config(), stream=preset_drift(100), horizon=50,
            repetitions=4, seed_base=9,
        )
        assert RunSpec.from_dict(spec.to_dict()) == spec


class TestTraceSerialization:
    def test_round_trip_through_records(self):
        trace = uniform_run(horizon=500)
        records = list(trace.iter_records())
        rebuilt = Trace.from_records(trace.config, records)
        assert_traces_equal(trace, rebuilt)

    def test_round_trip_for_reactive_runs(self):
        trace = run_one(
            config(), make_stream(preset_math_like("medium", problems=60, seed=2))
        )
        rebuilt = Trace.from_records(trace.config, list(trace.iter_records()))
        assert_traces_equal(trace, rebuilt)

    def test_g_observed_serialized_only_when_queried(self):
        trace = uniform_run(horizon=300)
        for rec, action in zip(trace.iter_records(), trace.action):
            assert ("g_observed" in rec) == (action == SV)


class TestErrorCurves:
    def test_final_prefix_matches_ledger(self):
        trace = uniform_run(horizon=3_000)
        curves = error_curves(trace)
        assert curves["type1"].size == 3_000
        assert curves["type1"][-1] == pytest.approx(trace.ledger.err_type1())
        assert curves["type2"][-1] == pytest.approx(trace.ledger.err_type2())
        assert curves["n0"][-1] == trace.ledger.n0
        assert curves["n1"][-1] == trace.ledger.n1

    def test_empty_denominators_report_zero(self):
        trace = run_one(
            config(), CalibratedStream(PointMass(1.0), seed=0), horizon=100
        )
        curves = error_curves(trace)
        assert np.all(curves["type1"] == 0.0)
        assert curves["n0"][-1] == 0


class TestVerifyBound:
    def test_holds_on_a_calibrated_run(self):
        report = verify_bound(uniform_run())
        assert report["pass"] is True
        for side in ("type1", "type2"):
            s = report["sides"][side]
            assert s["bound"] == pytest.approx(s["target"] + s["slack"])
            assert s["margin"] == pytest.approx(s["bound"] - s["err"])
            assert s["vacuous"] is False

    def test_holds_under_drift(self):
        trace = run_one(config(), make_stream(preset_drift(20_000, seed=6)), horizon=None)
        assert verify_bound(trace)["pass"] is True

    def test_one_sided_vacuous_when_a_label_is_absent(self):
        trace = run_one(
            config(), CalibratedStream(PointMass(1.0), seed=0), horizon=200
        )
        side = verify_bound(trace)["sides"]["type1"]
        assert side["vacuous"] is True
        assert side["n"] == 0
        assert side["err"] == 0.0
        assert side["slack"] == 0.0
        assert side["pass"] is True

    def test_smaller_delta_widens_the_slack(self):
        trace = uniform_run(horizon=1_000)
        loose = verify_bound(trace, delta=0.2)["sides"]["type1"]["slack"]
        tight = verify_bound(trace, delta=0.01)["sides"]["type1"]["slack"]
        assert tight > loose


class TestCheckClaims:
    def test_pass_on_standard_runs(self):
        for kw in (dict(), dict(q_accept=1.0, q_reject=1.0), dict(eta=0.2)):
            res = check_claims(uniform_run(horizon=2_000, **kw))
            assert res["pass"] is True, kw

    def test_pass_when_every_round_escalates(self):
        trace = uniform_run(
            horizon=400, q_accept=1.0, q_reject=1.0,
            tau_reject_init=0.0, tau_accept_init=1.0,
        )
        assert trace.ledger.sv_count == 400
        assert check_claims(trace)["pass"] is True

    def test_pass_when_no_round_escalates(self):
        trace = run_one(
            config(
                q_accept=0.001, q_reject=0.001,
                tau_reject_init=0.0, tau_accept_init=0.0, seed=0,
            ),
            CalibratedStream(UniformDist(), seed=5),
            horizon=50,
        )
        assert trace.ledger.sv_count == 0
        res = check_claims(trace)
        assert res["pass"] is True
        assert res["claims"]["telescoping_accept"]["sum"] == 0.0
        assert res["claims"]["telescoping_reject"]["sum"] == 0.0

    def test_detects_a_tampered_threshold(self):
        trace = uniform_run(horizon=200)
        records = list(trace.iter_records())
        records[120]["tau_A_after"] = 5.0  # far outside the reachable band
        tampered = Trace.from_records(trace.config, records)
        res = check_claims(tampered)
        assert res["claims"]["threshold_band"]["pass"] is False
        assert res["pass"] is False


class TestExplorationFloor:
    def test_escalation_rate_stays_near_the_floor(self):
        # equal targets at 0.5 drive the thresholds together; once the band
        # collapses only exploration keeps querying, at rate about q
        trace = uniform_run(
            horizon=50_000, stream_seed=0,
            alpha=0.5, beta=0.5, eta=0.005,
        )
        tail = (trace.action[-20_000:] == SV).mean()
        assert tail == pytest.approx(0.1, abs=0.03)
        band_width = trace.tau_a_after[-1] - trace.tau_r_after[-1]
        assert band_width < 0.1


class TestSweep:
    TARGETS = [(0.1, 0.1), (0.2, 0.2)]

    def template(self):
        return config(q_accept=0.3, q_reject=0.3)

    def spec(self):
        return preset_math_like("easy", problems=60, budget=3, seed=0)

    def test_row_order_and_anchor_flags(self):
        rows = sweep(self.template(), self.spec(), self.TARGETS, repetitions=2, seed_base=1)
        assert len(rows) == 4
        assert (rows[0].alpha, rows[0].beta) == self.TARGETS[0]
        assert (rows[1].alpha, rows[1].beta) == self.TARGETS[1]
        assert rows[2].is_oracle and not rows[2].is_weak_only
        assert rows[3].is_weak_only and not rows[3].is_oracle
        assert rows[2].alpha is None and rows[2].beta is None
        assert rows[2].err1 == rows[2].err2 == 0.0
        assert rows[3].err1 is None and rows[3].err2 is None

    def test_sharded_rows_match_the_serial_sweep(self):
        serial = sweep(self.template(), self.spec(), self.TARGETS, repetitions=2, seed_base=1)
        jobs = [self.TARGETS[1], "weak_only", self.TARGETS[0], "oracle"]
        sharded = {
            str(job): sweep_point(self.template(), self.spec(), job, 2, 1)
            for job in jobs
        }
        assert sharded[str(self.TARGETS[0])] == serial[0]
        assert sharded[str(self.TARGETS[1])] == serial[1]
        assert sharded["oracle"] == serial[2]
        assert sharded["weak_only"] == serial[3]

    def test_single_rep_has_zero_stderr(self):
        row = sweep_point(self.template(), self.spec(), (0.1, 0.1), 1, 0)
        assert row.accuracy_stderr == 0.0
        assert row.reps == 1

    def test_needs_a_task_stream(self):
        with pytest.raises(ValueError):
            sweep_point(
                self.template(),
                {"kind": "calibrated", "score_dist": UniformDist().to_dict(), "seed": 0},
                (0.1, 0.1), 1, 0,
            )

    def test_validation(self):
        with pytest.raises(ValueError):
            sweep(self.template(), self.spec(), [], repetitions=1, seed_base=0)
        with pytest.raises(ValueError):
            sweep_point(self.template(), self.spec(), (0.1, 0.1), 0, 0)

    def test_pareto_point_validation(self):
        kw = dict(alpha=None, beta=None, accuracy=0.5, accuracy_stderr=0.0,
                  strong_per_problem=1.0, weak_per_problem=1.0,
                  err1=None, err2=None, reps=1)
        with pytest.raises(ValueError):
            ParetoPoint(**{**kw, "is_oracle": True, "is_weak_only": True})
        with pytest.raises(ValueError):
            ParetoPoint(**{**kw, "accuracy": 1.5})
        with pytest.raises(ValueError):
            ParetoPoint(**{**kw, "reps": 0})

    def test_rep_columns_do_not_affect_equality(self):
        row = sweep_point(self.template(), self.spec(), (0.1, 0.1), 2, 0)
        stripped = dataclasses.replace(row, rep_accuracy=(), rep_strong=())
        assert stripped == row
