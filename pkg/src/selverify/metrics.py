"""Error accounting and the finite-sample slack bound.

The ledger keeps exact integer counts; rates are formed only at read time,
with empty denominators reading as zero. Two parallel error tallies are
kept: what the policy actually did, and what the thresholds alone would
have implied. The threshold-induced tally always dominates the policy
tally, which is one of the exact claims the test suite fuzzes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .policy import Action, DecisionRecord

__all__ = ["ErrorLedger", "delta_bound"]


@dataclass
class ErrorLedger:
    """Integer counters over finalized rounds.

    n0 / n1 count rounds by latent label; the policy tallies count
    unilateral mistakes (accepting an incorrect item, rejecting a correct
    one); the threshold tallies count how scores fell against the
    thresholds in force, regardless of exploration.
    """

    n0: int = 0
    n1: int = 0
    type1_policy: int = 0
    type2_policy: int = 0
    type1_threshold: int = 0
    type2_threshold: int = 0
    sv_count: int = 0
    total: int = 0

    def record(self, rec: DecisionRecord, g_latent: int) -> None:
        """Tally one finalized round against its latent label."""
        if g_latent not in (0, 1):
            raise ValueError(f"latent label must be 0 or 1, got {g_latent!r}")
        if rec.g_observed is not None and rec.g_observed != g_latent:
            raise RuntimeError(
                f"observed label {rec.g_observed} disagrees with latent label "
                f"{g_latent} at round {rec.t}; the harness is feeding the policy "
                "a different stream than the ledger"
            )
        th = rec.thresholds_before
        if g_latent == 0:
            self.n0 += 1
            if rec.action is Action.ACCEPT:
                self.type1_policy += 1
            if rec.w > th.accept:
                self.type1_threshold += 1
        else:
            self.n1 += 1
            if rec.action is Action.REJECT:
                self.type2_policy += 1
            if rec.w < th.reject:
                self.type2_threshold += 1
        if rec.action is Action.STRONG_VERIFY:
            self.sv_count += 1
        self.total += 1

    def record_observed(self, rec: DecisionRecord) -> None:
        """Tally using only the strong label observed on escalated rounds.

        Deployment-side estimate for when latent labels are unavailable:
        unilateral rounds contribute to `total` but to neither class count,
        so the resulting rates are biased estimates of the latent-label
        rates, not the same quantity `record` tracks.
        """
        if rec.g_observed is not None:
            self.record(rec, rec.g_observed)
            return
        if rec.action is Action.STRONG_VERIFY:
            raise ValueError("escalated round has no observed label; finalize it first")
        self.total += 1

    def merge(self, other: "ErrorLedger") -> "ErrorLedger":
        return ErrorLedger(
            n0=self.n0 + other.n0,
            n1=self.n1 + other.n1,
            type1_policy=self.type1_policy + other.type1_policy,
            type2_policy=self.type2_policy + other.type2_policy,
            type1_threshold=self.type1_threshold + other.type1_threshold,
            type2_threshold=self.type2_threshold + other.type2_threshold,
            sv_count=self.sv_count + other.sv_count,
            total=self.total + other.total,
        )

    __add__ = merge

    def err_type1(self) -> float:
        return self.type1_policy / self.n0 if self.n0 else 0.0

    def err_type2(self) -> float:
        return self.type2_policy / self.n1 if self.n1 else 0.0

    def err_type1_threshold(self) -> float:
        return self.type1_threshold / self.n0 if self.n0 else 0.0

    def err_type2_threshold(self) -> float:
        return self.type2_threshold / self.n1 if self.n1 else 0.0

    def sv_rate(self) -> float:
        return self.sv_count / self.total if self.total else 0.0


def delta_bound(n: int, delta: float, eta: float, q_min: float) -> float:
    """Finite-sample slack added to an error target after n labeled rounds.

    Shrinks roughly as 1/sqrt(n); by convention the slack is 0 when n = 0
    (the corresponding error rate is also 0/0 -> 0).

    Parameters
    ----------
    n : int
        Rounds of the relevant latent class seen so far, >= 0.
    delta : float
        Failure probability of the guarantee, in (0, 1).
    eta : float
        Policy step size, > 0.
    q_min : float
        Smallest exploration probability, in (0, 1].
    """
    if not (isinstance(n, int) and n >= 0):
        raise ValueError(f"n must be a nonnegative integer, got {n!r}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    if not eta > 0.0:
        raise ValueError(f"eta must be positive, got {eta}")
    if not 0.0 < q_min <= 1.0:
        raise ValueError(f"q_min must be in (0, 1], got {q_min}")
    if n == 0:
        return 0.0
    log_term = math.log(4.0 / delta)
    drift = (1.0 + 2.0 * eta / q_min) / (eta * n)
    noise = math.sqrt(2.0 * log_term / (n * q_min))
    corr = log_term / (3.0 * n * q_min)
    return drift + noise + corr
