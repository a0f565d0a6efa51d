"""Run orchestration: traces, error bounds, claim checks, target sweeps.

A run drives one policy against one stream and records every round. For
non-reactive streams the loop runs on pre-drawn arrays through the compiled
kernel, which reproduces the engine bit for bit; reactive streams go
through the engine so final decisions can feed back. Sweeps evaluate a
grid of error targets plus the two baseline anchors, with stream seeds
shared across targets and anchors so comparisons are paired.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from . import _kernel
from ._kernel import (
    ACTION_ACCEPT,
    ACTION_REJECT,
    ACTION_STRONG_VERIFY,
    REGION_ACCEPT,
    REGION_REJECT,
    REGION_UNCERTAIN,
)
from .metrics import ErrorLedger, delta_bound
from .policy import Action, PolicyConfig, Region, VerificationPolicy
from .streams import (
    CalibratedStream,
    MiscalibratedStream,
    VerifierStream,
    make_stream,
    run_strong_only,
    run_weak_only,
)

__all__ = [
    "RunSpec",
    "Trace",
    "ParetoPoint",
    "derive_seed",
    "run_one",
    "run",
    "recompute_ledger",
    "error_curves",
    "verify_bound",
    "check_claims",
    "sweep_point",
    "sweep",
    "REGION_NAMES",
    "ACTION_NAMES",
]

REGION_NAMES = ("accept", "reject", "uncertain")
ACTION_NAMES = ("accept", "reject", "strong_verify")
_REGION_CODE = {
    Region.ACCEPT: REGION_ACCEPT,
    Region.REJECT: REGION_REJECT,
    Region.UNCERTAIN: REGION_UNCERTAIN,
}
_ACTION_CODE = {
    Action.ACCEPT: ACTION_ACCEPT,
    Action.REJECT: ACTION_REJECT,
    Action.STRONG_VERIFY: ACTION_STRONG_VERIFY,
}

# Channel tags for per-repetition seed derivation. Stream seeds do not
# depend on the policy settings, so runs at different targets (and the
# baseline anchors) see identical environments rep for rep.
_POLICY_CHANNEL = 0
_STREAM_CHANNEL = 1


def derive_seed(seed_base: int, rep: int, channel: int) -> int:
    return int(
        np.random.SeedSequence([seed_base, rep, channel]).generate_state(1)[0]
    )


@dataclass(frozen=True)
class RunSpec:
    """One experiment: a policy configuration against a stream spec.

    horizon is the number of rounds, or None to run until the stream
    exhausts (only finite or reactive streams support that).
    """

    policy: PolicyConfig
    stream: dict
    horizon: Optional[int] = None
    repetitions: int = 1
    seed_base: int = 0

    def __post_init__(self):
        if self.horizon is not None and self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if self.repetitions < 1:
            raise ValueError(f"repetitions must be >= 1, got {self.repetitions}")
        if self.seed_base < 0:
            raise ValueError(f"seed_base must be nonnegative, got {self.seed_base}")

    def to_dict(self) -> dict:
        return {
            "policy": self.policy.to_dict(),
            "stream": self.stream,
            "horizon": self.horizon,
            "repetitions": self.repetitions,
            "seed_base": self.seed_base,
        }

    @staticmethod
    def from_dict(d: dict) -> "RunSpec":
        return RunSpec(
            policy=PolicyConfig.from_dict(d["policy"]),
            stream=d["stream"],
            horizon=d.get("horizon"),
            repetitions=d.get("repetitions", 1),
            seed_base=d.get("seed_base", 0),
        )


@dataclass
class Trace:
    """Column-oriented record of one run plus its error ledger."""

    config: dict
    t: np.ndarray
    w: np.ndarray
    region: np.ndarray
    action: np.ndarray
    q: np.ndarray
    explored: np.ndarray
    g_observed: np.ndarray
    g_latent: np.ndarray
    tau_r_before: np.ndarray
    tau_a_before: np.ndarray
    tau_r_after: np.ndarray
    tau_a_after: np.ndarray
    ledger: ErrorLedger
    outcome: Optional[object] = None

    def __len__(self) -> int:
        return int(self.t.size)

    def iter_records(self) -> Iterator[dict]:
        """Rounds as plain dicts; g_observed appears only on queried rounds."""
        for i in range(len(self)):
            rec = {
                "t": int(self.t[i]),
                "w": float(self.w[i]),
                "region": REGION_NAMES[int(self.region[i])],
                "action": ACTION_NAMES[int(self.action[i])],
                "q_t": float(self.q[i]),
                "explored": bool(self.explored[i]),
                "g_latent": int(self.g_latent[i]),
                "tau_R_before": float(self.tau_r_before[i]),
                "tau_A_before": float(self.tau_a_before[i]),
                "tau_R_after": float(self.tau_r_after[i]),
                "tau_A_after": float(self.tau_a_after[i]),
            }
            if int(self.g_observed[i]) >= 0:
                rec["g_observed"] = int(self.g_observed[i])
            yield rec

    @staticmethod
    def from_records(config: dict, records: list[dict]) -> "Trace":
        """Rebuild a trace from serialized round records."""
        n = len(records)
        t = np.empty(n, np.int64)
        w = np.empty(n, np.float64)
        region = np.empty(n, np.int64)
        action = np.empty(n, np.int64)
        q = np.empty(n, np.float64)
        explored = np.empty(n, np.bool_)
        g_observed = np.full(n, -1, np.int64)
        g_latent = np.empty(n, np.int64)
        tau_r_before = np.empty(n, np.float64)
        tau_a_before = np.empty(n, np.float64)
        tau_r_after = np.empty(n, np.float64)
        tau_a_after = np.empty(n, np.float64)
        for i, rec in enumerate(records):
            t[i] = rec["t"]
            w[i] = rec["w"]
            region[i] = REGION_NAMES.index(rec["region"])
            action[i] = ACTION_NAMES.index(rec["action"])
            q[i] = rec["q_t"]
            explored[i] = rec["explored"]
            g_latent[i] = rec["g_latent"]
            if "g_observed" in rec:
                g_observed[i] = rec["g_observed"]
            tau_r_before[i] = rec["tau_R_before"]
            tau_a_before[i] = rec["tau_A_before"]
            tau_r_after[i] = rec["tau_R_after"]
            tau_a_after[i] = rec["tau_A_after"]
        trace = Trace(
            config=config,
            t=t,
            w=w,
            region=region,
            action=action,
            q=q,
            explored=explored,
            g_observed=g_observed,
            g_latent=g_latent,
            tau_r_before=tau_r_before,
            tau_a_before=tau_a_before,
            tau_r_after=tau_r_after,
            tau_a_after=tau_a_after,
            ledger=ErrorLedger(),
        )
        trace.ledger = recompute_ledger(trace)
        return trace


def _ledger_from_arrays(w, action, g_latent, tau_r_before, tau_a_before) -> ErrorLedger:
    g0 = g_latent == 0
    g1 = ~g0
    return ErrorLedger(
        n0=int(g0.sum()),
        n1=int(g1.sum()),
        type1_policy=int(((action == ACTION_ACCEPT) & g0).sum()),
        type2_policy=int(((action == ACTION_REJECT) & g1).sum()),
        type1_threshold=int(((w > tau_a_before) & g0).sum()),
        type2_threshold=int(((w < tau_r_before) & g1).sum()),
        sv_count=int((action == ACTION_STRONG_VERIFY).sum()),
        total=int(w.size),
    )


def recompute_ledger(trace: Trace) -> ErrorLedger:
    """Rebuild the ledger from the recorded rounds alone."""
    return _ledger_from_arrays(
        trace.w, trace.action, trace.g_latent, trace.tau_r_before, trace.tau_a_before
    )


def _run_kernel(config: PolicyConfig, stream, horizon: Optional[int], echo: dict) -> Trace:
    if horizon is None:
        blocks = []
        while True:
            w, g = stream.take(1 << 16)
            if w.size == 0:
                break
            blocks.append((w, g))
        if blocks:
            w = np.concatenate([b[0] for b in blocks])
            g = np.concatenate([b[1] for b in blocks])
        else:
            w = np.empty(0)
            g = np.empty(0, dtype=np.int64)
    else:
        w, g = stream.take(horizon)
    u = np.random.default_rng(config.seed).random(w.size)
    (
        region,
        action,
        q,
        explored,
        g_observed,
        tau_r_before,
        tau_a_before,
        tau_r_after,
        tau_a_after,
        _,
    ) = _kernel.run_rounds(
        w.astype(np.float64),
        g.astype(np.int64),
        u,
        config.alpha,
        config.beta,
        config.eta,
        config.q_accept,
        config.q_reject,
        config.tau_reject_init,
        config.tau_accept_init,
    )
    return Trace(
        config=echo,
        t=np.arange(1, w.size + 1, dtype=np.int64),
        w=w,
        region=region,
        action=action,
        q=q,
        explored=explored,
        g_observed=g_observed,
        g_latent=g.astype(np.int64),
        tau_r_before=tau_r_before,
        tau_a_before=tau_a_before,
        tau_r_after=tau_r_after,
        tau_a_after=tau_a_after,
        ledger=_ledger_from_arrays(w, action, g, tau_r_before, tau_a_before),
    )


def _run_engine(config: PolicyConfig, stream, horizon: Optional[int], echo: dict) -> Trace:
    policy = VerificationPolicy(config)
    cols = {name: [] for name in (
        "w", "region", "action", "q", "explored", "g_observed", "g_latent",
        "tau_r_before", "tau_a_before", "tau_r_after", "tau_a_after",
    )}
    rounds = 0
    while horizon is None or rounds < horizon:
        item = stream.next()
        if item is None:
            break
        rec = policy.decide(item.w)
        if rec.action is Action.STRONG_VERIFY:
            g = stream.answer_strong_query()
            policy.feedback(g)
            final = Action.ACCEPT if g == 1 else Action.REJECT
            g_obs = g
        else:
            policy.advance()
            final = rec.action
            g_obs = -1
        if stream.reactive:
            stream.react(final)
        cols["w"].append(rec.w)
        cols["region"].append(_REGION_CODE[rec.region])
        cols["action"].append(_ACTION_CODE[rec.action])
        cols["q"].append(rec.q)
        cols["explored"].append(rec.explored)
        cols["g_observed"].append(g_obs)
        cols["g_latent"].append(item.g_latent)
        cols["tau_r_before"].append(rec.thresholds_before.reject)
        cols["tau_a_before"].append(rec.thresholds_before.accept)
        cols["tau_r_after"].append(rec.thresholds_after.reject)
        cols["tau_a_after"].append(rec.thresholds_after.accept)
        rounds += 1
    w = np.asarray(cols["w"], dtype=np.float64)
    action = np.asarray(cols["action"], dtype=np.int64)
    g_latent = np.asarray(cols["g_latent"], dtype=np.int64)
    tau_r_before = np.asarray(cols["tau_r_before"], dtype=np.float64)
    tau_a_before = np.asarray(cols["tau_a_before"], dtype=np.float64)
    outcome = stream.outcome() if stream.reactive else None
    return Trace(
        config=echo,
        t=np.arange(1, rounds + 1, dtype=np.int64),
        w=w,
        region=np.asarray(cols["region"], dtype=np.int64),
        action=action,
        q=np.asarray(cols["q"], dtype=np.float64),
        explored=np.asarray(cols["explored"], dtype=np.bool_),
        g_observed=np.asarray(cols["g_observed"], dtype=np.int64),
        g_latent=g_latent,
        tau_r_before=tau_r_before,
        tau_a_before=tau_a_before,
        tau_r_after=np.asarray(cols["tau_r_after"], dtype=np.float64),
        tau_a_after=np.asarray(cols["tau_a_after"], dtype=np.float64),
        ledger=_ledger_from_arrays(w, action, g_latent, tau_r_before, tau_a_before),
        outcome=outcome,
    )


def run_one(
    config: PolicyConfig,
    stream: VerifierStream,
    horizon: Optional[int] = None,
    force_engine: bool = False,
    echo: Optional[dict] = None,
) -> Trace:
    """Drive one policy to completion against one stream.

    Non-reactive streams run through the array kernel unless force_engine
    is set; the two paths produce identical traces.
    """
    if echo is None:
        echo = {"policy": config.to_dict(), "stream": stream.spec_dict(), "horizon": horizon}
    if horizon is None and isinstance(stream, (CalibratedStream, MiscalibratedStream)):
        raise ValueError("this stream never exhausts; a horizon is required")
    if stream.reactive or force_engine:
        return _run_engine(config, stream, horizon, echo)
    return _run_kernel(config, stream, horizon, echo)


def run(spec: RunSpec, force_engine: bool = False) -> list[Trace]:
    """All repetitions of a RunSpec, one trace each.

    Per-repetition policy and stream seeds derive from (seed_base, rep,
    channel), so any subset of repetitions can be recomputed independently.
    """
    traces = []
    for rep in range(spec.repetitions):
        traces.append(run_rep(spec, rep, force_engine=force_engine))
    return traces


def run_rep(spec: RunSpec, rep: int, force_engine: bool = False) -> Trace:
    if not 0 <= rep < spec.repetitions:
        raise ValueError(f"rep must be in [0, {spec.repetitions}), got {rep}")
    policy_seed = derive_seed(spec.seed_base, rep, _POLICY_CHANNEL)
    stream_seed = derive_seed(spec.seed_base, rep, _STREAM_CHANNEL)
    config = dataclasses.replace(spec.policy, seed=policy_seed)
    stream = make_stream(spec.stream, seed=stream_seed)
    echo = {
        "policy": config.to_dict(),
        "stream": stream.spec_dict(),
        "horizon": spec.horizon,
        "seed_base": spec.seed_base,
        "rep": rep,
    }
    return run_one(config, stream, spec.horizon, force_engine=force_engine, echo=echo)


def error_curves(trace: Trace) -> dict:
    """Running prefix averages of the two policy error rates.

    Entry t is the error rate over rounds 1..t+1; prefixes with an empty
    denominator report 0.
    """
    g0 = (trace.g_latent == 0).astype(np.float64)
    g1 = (trace.g_latent == 1).astype(np.float64)
    fa = ((trace.action == ACTION_ACCEPT) & (trace.g_latent == 0)).astype(np.float64)
    fr = ((trace.action == ACTION_REJECT) & (trace.g_latent == 1)).astype(np.float64)
    n0 = np.cumsum(g0)
    n1 = np.cumsum(g1)
    with np.errstate(invalid="ignore", divide="ignore"):
        c1 = np.where(n0 > 0, np.cumsum(fa) / np.maximum(n0, 1.0), 0.0)
        c2 = np.where(n1 > 0, np.cumsum(fr) / np.maximum(n1, 1.0), 0.0)
    return {"type1": c1, "type2": c2, "n0": n0.astype(np.int64), "n1": n1.astype(np.int64)}


def verify_bound(trace: Trace, delta: float = 0.05) -> dict:
    """Evaluate both finite-time error inequalities on a finished trace.

    Runs produced here always use constant step size and exploration
    rates, which is what the bound assumes. A side with no items of the
    relevant label is vacuous: the error is 0 by convention and the slack
    term is 0.
    """
    cfg = trace.config["policy"]
    alpha, beta, eta = cfg["alpha"], cfg["beta"], cfg["eta"]
    q_min = min(cfg["q_accept"], cfg["q_reject"])
    led = trace.ledger
    out = {"delta": delta, "sides": {}}
    for side, n, err, target in (
        ("type1", led.n0, led.err_type1(), alpha),
        ("type2", led.n1, led.err_type2(), beta),
    ):
        slack = delta_bound(int(n), delta, eta, q_min)
        bound = target + slack
        out["sides"][side] = {
            "n": int(n),
            "err": err,
            "target": target,
            "slack": slack,
            "bound": bound,
            "margin": bound - err,
            "vacuous": n == 0,
            "pass": err <= bound,
        }
    out["pass"] = all(s["pass"] for s in out["sides"].values())
    return out


def check_claims(trace: Trace) -> dict:
    """Recheck the trace-level guarantees the update rule carries.

    Telescoping: the importance-weighted error sums recomputed from the
    records are bounded by the net threshold displacement over the step
    size (tolerance 1e-9). Band: both thresholds stay inside
    [-eta/q_min, 1 + eta/q_min]. Domination: unilateral policy errors
    never exceed the threshold-induced counts.
    """
    cfg = trace.config["policy"]
    alpha, beta, eta = cfg["alpha"], cfg["beta"], cfg["eta"]
    q_min = min(cfg["q_accept"], cfg["q_reject"])
    sv = trace.g_observed >= 0
    gate0 = sv & (trace.g_observed == 0)
    gate1 = sv & (trace.g_observed == 1)
    ind_a = (trace.w > trace.tau_a_before).astype(np.float64)
    ind_r = (trace.w < trace.tau_r_before).astype(np.float64)
    with np.errstate(invalid="ignore", divide="ignore"):
        sum_accept = float(((ind_a - alpha) / trace.q)[gate0].sum())
        sum_reject = float(((ind_r - beta) / trace.q)[gate1].sum())
    if len(trace):
        disp_accept = float(trace.tau_a_after[-1] - trace.tau_a_before[0]) / eta
        disp_reject = float(trace.tau_r_before[0] - trace.tau_r_after[-1]) / eta
        taus = np.concatenate(
            [trace.tau_r_before, trace.tau_a_before, trace.tau_r_after, trace.tau_a_after]
        )
        lo = float(taus.min())
        hi = float(taus.max())
    else:
        disp_accept = 0.0
        disp_reject = 0.0
        lo, hi = 0.0, 1.0
    band_lo = -eta / q_min
    band_hi = 1.0 + eta / q_min
    led = trace.ledger
    claims = {
        "telescoping_accept": {
            "sum": sum_accept,
            "limit": disp_accept,
            "pass": sum_accept <= disp_accept + 1e-9,
        },
        "telescoping_reject": {
            "sum": sum_reject,
            "limit": disp_reject,
            "pass": sum_reject <= disp_reject + 1e-9,
        },
        "threshold_band": {
            "low": lo,
            "high": hi,
            "band": [band_lo, band_hi],
            # pure float guard; the band itself is exact
            "pass": lo >= band_lo - 1e-12 and hi <= band_hi + 1e-12,
        },
        "domination_type1": {
            "policy": led.type1_policy,
            "threshold": led.type1_threshold,
            "pass": led.type1_policy <= led.type1_threshold,
        },
        "domination_type2": {
            "policy": led.type2_policy,
            "threshold": led.type2_threshold,
            "pass": led.type2_policy <= led.type2_threshold,
        },
    }
    return {"claims": claims, "pass": all(c["pass"] for c in claims.values())}


@dataclass(frozen=True)
class ParetoPoint:
    """One sweep row: a target pair or a baseline anchor.

    Anchor rows carry no targets (alpha/beta are None) and set exactly one
    of is_oracle / is_weak_only. Per-rep columns ride along for paired
    comparisons but are not part of equality or the serialized row.
    """

    alpha: Optional[float]
    beta: Optional[float]
    accuracy: float
    accuracy_stderr: float
    strong_per_problem: float
    weak_per_problem: float
    err1: Optional[float]
    err2: Optional[float]
    reps: int
    is_oracle: bool = False
    is_weak_only: bool = False
    rep_accuracy: tuple = field(default=(), compare=False, repr=False)
    rep_strong: tuple = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        if not 0.0 <= self.accuracy <= 1.0:
            raise ValueError(f"accuracy must be in [0, 1], got {self.accuracy}")
        if self.strong_per_problem < 0 or self.weak_per_problem < 0:
            raise ValueError("per-problem call averages must be nonnegative")
        if self.reps < 1:
            raise ValueError(f"reps must be >= 1, got {self.reps}")
        if self.is_oracle and self.is_weak_only:
            raise ValueError("a row cannot be both anchors at once")


def _aggregate_point(
    alpha, beta, accs, strongs, weaks, err1s, err2s, is_oracle=False, is_weak_only=False
) -> ParetoPoint:
    accs = np.asarray(accs, dtype=np.float64)
    reps = accs.size
    stderr = float(accs.std(ddof=1) / math.sqrt(reps)) if reps > 1 else 0.0
    return ParetoPoint(
        alpha=alpha,
        beta=beta,
        accuracy=float(accs.mean()),
        accuracy_stderr=stderr,
        strong_per_problem=float(np.mean(strongs)),
        weak_per_problem=float(np.mean(weaks)),
        err1=float(np.mean(err1s)) if err1s is not None else None,
        err2=float(np.mean(err2s)) if err2s is not None else None,
        reps=reps,
        is_oracle=is_oracle,
        is_weak_only=is_weak_only,
        rep_accuracy=tuple(float(a) for a in accs),
        rep_strong=tuple(float(s) for s in strongs),
    )


def sweep_point(
    policy_template: PolicyConfig,
    stream_spec: dict,
    target,
    repetitions: int,
    seed_base: int,
) -> ParetoPoint:
    """Evaluate one sweep row: target=(alpha, beta), "oracle", or "weak_only".

    Self-contained given its arguments, so rows can be computed in any
    order or split across processes and still match a serial sweep.
    """
    if repetitions < 1:
        raise ValueError(f"repetitions must be >= 1, got {repetitions}")
    probe = make_stream(stream_spec)
    if not probe.reactive:
        raise ValueError("sweeps need a task stream with per-problem outcomes")
    accs, strongs, weaks = [], [], []
    err1s, err2s = [], []
    for rep in range(repetitions):
        stream_seed = derive_seed(seed_base, rep, _STREAM_CHANNEL)
        stream = make_stream(stream_spec, seed=stream_seed)
        if target == "oracle":
            out = run_strong_only(stream)
            err1s.append(0.0)
            err2s.append(0.0)
        elif target == "weak_only":
            out = run_weak_only(stream)
        else:
            alpha, beta = target
            policy_seed = derive_seed(seed_base, rep, _POLICY_CHANNEL)
            config = dataclasses.replace(
                policy_template, alpha=alpha, beta=beta, seed=policy_seed
            )
            trace = run_one(config, stream, horizon=None)
            out = trace.outcome
            err1s.append(trace.ledger.err_type1())
            err2s.append(trace.ledger.err_type2())
        accs.append(out.accuracy)
        strongs.append(out.strong_calls_per_problem)
        weaks.append(out.weak_calls_per_problem)
    if target == "oracle":
        return _aggregate_point(None, None, accs, strongs, weaks, err1s, err2s, is_oracle=True)
    if target == "weak_only":
        return _aggregate_point(None, None, accs, strongs, weaks, None, None, is_weak_only=True)
    return _aggregate_point(target[0], target[1], accs, strongs, weaks, err1s, err2s)


def sweep(
    policy_template: PolicyConfig,
    stream_spec: dict,
    targets: list,
    repetitions: int,
    seed_base: int,
    include_anchors: bool = True,
) -> list[ParetoPoint]:
    """All target rows in order, then the oracle and weak-only anchors."""
    if not targets:
        raise ValueError("sweep needs at least one (alpha, beta) target")
    rows = [
        sweep_point(policy_template, stream_spec, (float(a), float(b)), repetitions, seed_base)
        for a, b in targets
    ]
    if include_anchors:
        rows.append(sweep_point(policy_template, stream_spec, "oracle", repetitions, seed_base))
        rows.append(sweep_point(policy_template, stream_spec, "weak_only", repetitions, seed_base))
    return rows
