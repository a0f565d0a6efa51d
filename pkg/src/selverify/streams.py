"""Synthetic verification environments.

Every stream hands out (weak score, latent strong label) pairs through one
small interface: `next` yields the pending item, `answer_strong_query`
reveals its label at the cost of one strong call, and `react` reports the
caller's final accept/reject so task-structured streams can redraw or
finalize. Non-reactive streams (calibrated, miscalibrated, drifting) ignore
`react`; the best-of-n and stepwise streams use it to drive per-problem and
per-episode bookkeeping. An external verifier can stand in for any of these
by implementing the same four methods.

Environment randomness is always a separate generator from policy
randomness, seeded from the stream spec alone, so item sequences replay
independently of how the policy behaves (exactly, for non-reactive streams;
given the same decision sequence, for reactive ones).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .distributions import (
    BetaDist,
    MixtureDist,
    PointMass,
    ScoreDist,
    dist_from_dict,
)
from .policy import Action, ProtocolError

__all__ = [
    "CHUNK",
    "StreamItem",
    "TaskOutcome",
    "VerifierStream",
    "CalibratedStream",
    "MiscalibratedStream",
    "DriftStream",
    "BestOfNStream",
    "StepwiseStream",
    "apply_link",
    "make_stream",
    "run_strong_only",
    "run_weak_only",
    "sample_items",
    "score_report",
    "preset_math_like",
    "preset_ambiguous",
    "preset_calibrated",
    "preset_drift",
    "PRESET_LEVELS",
]

# Non-reactive streams draw in fixed-size blocks so that pulling items one
# at a time and pulling them as arrays consume the generator identically.
CHUNK = 4096


@dataclass
class StreamItem:
    """One candidate: weak score plus the latent strong label.

    problem_id / step_index identify the enclosing problem or episode step
    for task-structured streams and stay None otherwise.
    """

    w: float
    g_latent: int
    problem_id: Optional[int] = None
    step_index: Optional[int] = None


@dataclass(frozen=True)
class TaskOutcome:
    """Aggregate result of a finished task stream."""

    problems_total: int
    problems_correct: int
    strong_calls_per_problem: float
    weak_calls_per_problem: float

    def __post_init__(self):
        if not 0 <= self.problems_correct <= self.problems_total:
            raise ValueError(
                f"problems_correct={self.problems_correct} out of range "
                f"for problems_total={self.problems_total}"
            )
        if self.strong_calls_per_problem < 0 or self.weak_calls_per_problem < 0:
            raise ValueError("per-problem call averages must be nonnegative")

    @property
    def accuracy(self) -> float:
        if self.problems_total == 0:
            return 0.0
        return self.problems_correct / self.problems_total

    def to_dict(self) -> dict:
        return {
            "problems_total": self.problems_total,
            "problems_correct": self.problems_correct,
            "strong_calls_per_problem": self.strong_calls_per_problem,
            "weak_calls_per_problem": self.weak_calls_per_problem,
        }


class VerifierStream:
    """Interface every environment implements.

    `reactive` tells callers whether final decisions feed back into the
    stream. Calling `react` on a non-reactive stream is harmless; it sets
    `react_ignored` so tests can detect the misuse.
    """

    reactive = False

    def __init__(self):
        self.react_ignored = False

    def next(self) -> Optional[StreamItem]:
        """Pending item, or None once the stream is exhausted."""
        raise NotImplementedError

    def answer_strong_query(self) -> int:
        """Reveal the pending item's latent label, charging one strong call."""
        raise NotImplementedError

    def react(self, final: Action) -> None:
        """Report the final accept/reject for the pending item."""
        self.react_ignored = True

    def outcome(self) -> TaskOutcome:
        raise ProtocolError("this stream does not aggregate task outcomes")

    def spec_dict(self) -> dict:
        raise NotImplementedError


def apply_link(link: dict, w: np.ndarray) -> np.ndarray:
    """Evaluate a monotone miscalibration map on scores."""
    kind = link.get("kind")
    if kind == "identity":
        return np.asarray(w, dtype=np.float64)
    if kind == "power":
        k = float(link["exponent"])
        if k <= 0:
            raise ValueError(f"power link exponent must be positive, got {k}")
        return np.power(np.asarray(w, dtype=np.float64), k)
    raise ValueError(f"unknown link kind {kind!r}")


class _BufferedStream(VerifierStream):
    """Non-reactive base: scores in blocks, labels Bernoulli(link(score))."""

    def __init__(self, seed: int):
        super().__init__()
        if not isinstance(seed, (int, np.integer)) or seed < 0:
            raise ValueError(f"seed must be a nonnegative integer, got {seed!r}")
        self.seed = int(seed)
        self._rng = np.random.default_rng(self.seed)
        self._buf_w = np.empty(0)
        self._buf_g = np.empty(0, dtype=np.int64)
        self._pos = 0
        self._exhausted = False
        self._pending: Optional[StreamItem] = None

    def _next_block(self) -> Optional[tuple[np.ndarray, np.ndarray]]:
        """Draw the next block of (scores, labels), or None when done."""
        raise NotImplementedError

    def _draw_block(self, dist: ScoreDist, link: dict, n: int):
        w = dist.sample(self._rng, n)
        u = self._rng.random(n)
        g = (u < apply_link(link, w)).astype(np.int64)
        return w, g

    def take(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Advance by up to n items, returned as arrays.

        Shares the block source with `next`, so interleaving the two access
        styles never changes the item sequence.
        """
        if n < 0:
            raise ValueError(f"n must be nonnegative, got {n}")
        ws, gs = [], []
        need = n
        while need > 0:
            avail = self._buf_w.size - self._pos
            if avail == 0:
                if self._exhausted:
                    break
                block = self._next_block()
                if block is None:
                    self._exhausted = True
                    break
                self._buf_w, self._buf_g = block
                self._pos = 0
                continue
            k = min(avail, need)
            ws.append(self._buf_w[self._pos : self._pos + k])
            gs.append(self._buf_g[self._pos : self._pos + k])
            self._pos += k
            need -= k
        if not ws:
            return np.empty(0), np.empty(0, dtype=np.int64)
        return np.concatenate(ws), np.concatenate(gs)

    def next(self) -> Optional[StreamItem]:
        w, g = self.take(1)
        if w.size == 0:
            self._pending = None
            return None
        self._pending = StreamItem(w=float(w[0]), g_latent=int(g[0]))
        return self._pending

    def answer_strong_query(self) -> int:
        if self._pending is None:
            raise ProtocolError("no pending item to query")
        return self._pending.g_latent


class CalibratedStream(_BufferedStream):
    """Scores i.i.d. from score_dist, labels Bernoulli(score).

    The label draw makes Pr[g=1 | W=w] = w hold by construction.
    """

    def __init__(self, score_dist: ScoreDist, seed: int):
        super().__init__(seed)
        self.score_dist = score_dist

    def _next_block(self):
        return self._draw_block(self.score_dist, {"kind": "identity"}, CHUNK)

    def spec_dict(self) -> dict:
        return {
            "kind": "calibrated",
            "score_dist": self.score_dist.to_dict(),
            "seed": self.seed,
        }


class MiscalibratedStream(_BufferedStream):
    """Scores i.i.d. from score_dist, labels Bernoulli(link(score))."""

    def __init__(self, score_dist: ScoreDist, link: dict, seed: int):
        super().__init__(seed)
        apply_link(link, np.array([0.5]))
        self.score_dist = score_dist
        self.link = dict(link)

    def _next_block(self):
        return self._draw_block(self.score_dist, self.link, CHUNK)

    def spec_dict(self) -> dict:
        return {
            "kind": "miscalibrated",
            "score_dist": self.score_dist.to_dict(),
            "link": dict(self.link),
            "seed": self.seed,
        }


class DriftStream(_BufferedStream):
    """Finite concatenation of calibrated segments with distinct score laws.

    Blocks never straddle a segment boundary, so the item sequence is a
    function of the spec alone.
    """

    def __init__(self, segments: list[tuple[ScoreDist, int]], seed: int):
        super().__init__(seed)
        if not segments:
            raise ValueError("drift stream needs at least one segment")
        for _, length in segments:
            if not isinstance(length, (int, np.integer)) or length < 1:
                raise ValueError(f"segment lengths must be >= 1, got {length!r}")
        self.segments = [(dist, int(length)) for dist, length in segments]
        self._seg_index = 0
        self._seg_pos = 0

    @property
    def total_length(self) -> int:
        return sum(length for _, length in self.segments)

    def _next_block(self):
        if self._seg_index >= len(self.segments):
            return None
        dist, length = self.segments[self._seg_index]
        n = min(CHUNK, length - self._seg_pos)
        self._seg_pos += n
        if self._seg_pos == length:
            self._seg_index += 1
            self._seg_pos = 0
        return self._draw_block(dist, {"kind": "identity"}, n)

    def spec_dict(self) -> dict:
        return {
            "kind": "drift",
            "segments": [
                {"score_dist": dist.to_dict(), "length": length}
                for dist, length in self.segments
            ],
            "seed": self.seed,
        }


class BestOfNStream(VerifierStream):
    """Outcome-level task stream: one answer per problem, redraws on reject.

    Each problem draws a base correctness rate from `difficulty`, then
    candidates with g ~ Bernoulli(base) and w ~ correct/incorrect score
    distribution. Accepting finalizes the problem with the current
    candidate; rejecting redraws until `budget` candidate generations are
    spent, after which the problem finalizes unanswered (counted
    incorrect). A rejection that followed a strong query redraws the same
    way and the redraw still costs budget.
    """

    reactive = True

    def __init__(
        self,
        problems: int,
        budget: int,
        difficulty: ScoreDist,
        correct_scores: ScoreDist,
        incorrect_scores: ScoreDist,
        seed: int,
    ):
        super().__init__()
        if problems < 1:
            raise ValueError(f"problems must be >= 1, got {problems}")
        if budget < 1:
            raise ValueError(f"budget must be >= 1, got {budget}")
        if not isinstance(seed, (int, np.integer)) or seed < 0:
            raise ValueError(f"seed must be a nonnegative integer, got {seed!r}")
        self.problems = int(problems)
        self.budget = int(budget)
        self.difficulty = difficulty
        self.correct_scores = correct_scores
        self.incorrect_scores = incorrect_scores
        self.seed = int(seed)
        self._rng = np.random.default_rng(self.seed)
        self._problem_index = 0
        self._candidates_used = 0
        self._base = 0.0
        self._pending: Optional[StreamItem] = None
        self._correct = 0
        self._weak_calls = 0
        self._strong_calls = 0

    def _draw_candidate(self) -> tuple[float, int]:
        g = 1 if self._rng.random() < self._base else 0
        dist = self.correct_scores if g == 1 else self.incorrect_scores
        w = float(dist.sample(self._rng, 1)[0])
        self._weak_calls += 1
        return w, g

    def next(self) -> Optional[StreamItem]:
        if self._pending is not None:
            raise ProtocolError("pending candidate awaits react()")
        if self._problem_index >= self.problems:
            return None
        if self._candidates_used == 0:
            self._base = float(self.difficulty.sample(self._rng, 1)[0])
        w, g = self._draw_candidate()
        self._candidates_used += 1
        self._pending = StreamItem(w=w, g_latent=g, problem_id=self._problem_index)
        return self._pending

    def answer_strong_query(self) -> int:
        if self._pending is None:
            raise ProtocolError("no pending candidate to query")
        self._strong_calls += 1
        return self._pending.g_latent

    def _finalize_problem(self, correct: bool) -> None:
        self._correct += int(correct)
        self._problem_index += 1
        self._candidates_used = 0

    def react(self, final: Action) -> None:
        if self._pending is None:
            raise ProtocolError("no pending candidate to react to")
        if final is Action.ACCEPT:
            self._finalize_problem(self._pending.g_latent == 1)
        elif final is Action.REJECT:
            if self._candidates_used >= self.budget:
                self._finalize_problem(False)
        else:
            raise ValueError(f"final decision must be accept or reject, got {final!r}")
        self._pending = None

    def outcome(self) -> TaskOutcome:
        if self._problem_index < self.problems or self._pending is not None:
            raise ProtocolError("outcome requested before the stream finished")
        return TaskOutcome(
            problems_total=self.problems,
            problems_correct=self._correct,
            strong_calls_per_problem=self._strong_calls / self.problems,
            weak_calls_per_problem=self._weak_calls / self.problems,
        )

    def run_weak_only(self) -> TaskOutcome:
        """Greedy baseline: spend the full budget per problem, accept the
        candidate with the highest weak score, never query the strong
        verifier."""
        if self._weak_calls or self._problem_index:
            raise ProtocolError("baseline runs need a fresh stream")
        for _ in range(self.problems):
            self._base = float(self.difficulty.sample(self._rng, 1)[0])
            best_w = -1.0
            best_g = 0
            for _ in range(self.budget):
                w, g = self._draw_candidate()
                if w > best_w:
                    best_w = w
                    best_g = g
            self._finalize_problem(best_g == 1)
        return self.outcome()

    def spec_dict(self) -> dict:
        return {
            "kind": "best_of_n",
            "problems": self.problems,
            "budget": self.budget,
            "difficulty": self.difficulty.to_dict(),
            "correct_scores": self.correct_scores.to_dict(),
            "incorrect_scores": self.incorrect_scores.to_dict(),
            "seed": self.seed,
        }


class StepwiseStream(VerifierStream):
    """Episode-level task stream: L steps in sequence, per-step retries.

    Steps are correct independently with probability step_correct_prob.
    Accepting a step appends it; an accepted incorrect step poisons the
    episode, which then counts as failed once it completes. Rejecting a
    step redraws it up to `retries` times, after which the episode fails
    immediately. An episode is correct only if every accepted step was
    latently correct.
    """

    reactive = True

    def __init__(
        self,
        episodes: int,
        steps: int,
        step_correct_prob: float,
        correct_scores: ScoreDist,
        incorrect_scores: ScoreDist,
        retries: int,
        seed: int,
    ):
        super().__init__()
        if episodes < 1 or steps < 1:
            raise ValueError(
                f"episodes and steps must be >= 1, got {episodes}, {steps}"
            )
        if not 0.0 <= step_correct_prob <= 1.0:
            raise ValueError(
                f"step_correct_prob must be in [0, 1], got {step_correct_prob}"
            )
        if retries < 0:
            raise ValueError(f"retries must be >= 0, got {retries}")
        if not isinstance(seed, (int, np.integer)) or seed < 0:
            raise ValueError(f"seed must be a nonnegative integer, got {seed!r}")
        self.episodes = int(episodes)
        self.steps = int(steps)
        self.step_correct_prob = float(step_correct_prob)
        self.correct_scores = correct_scores
        self.incorrect_scores = incorrect_scores
        self.retries = int(retries)
        self.seed = int(seed)
        self._rng = np.random.default_rng(self.seed)
        self._episode_index = 0
        self._step_index = 0
        self._rejects_this_step = 0
        self._tainted = False
        self._pending: Optional[StreamItem] = None
        self._correct = 0
        self._weak_calls = 0
        self._strong_calls = 0

    def _draw_step(self) -> tuple[float, int]:
        g = 1 if self._rng.random() < self.step_correct_prob else 0
        dist = self.correct_scores if g == 1 else self.incorrect_scores
        w = float(dist.sample(self._rng, 1)[0])
        self._weak_calls += 1
        return w, g

    def next(self) -> Optional[StreamItem]:
        if self._pending is not None:
            raise ProtocolError("pending step awaits react()")
        if self._episode_index >= self.episodes:
            return None
        w, g = self._draw_step()
        self._pending = StreamItem(
            w=w,
            g_latent=g,
            problem_id=self._episode_index,
            step_index=self._step_index,
        )
        return self._pending

    def answer_strong_query(self) -> int:
        if self._pending is None:
            raise ProtocolError("no pending step to query")
        self._strong_calls += 1
        return self._pending.g_latent

    def _finalize_episode(self, correct: bool) -> None:
        self._correct += int(correct)
        self._episode_index += 1
        self._step_index = 0
        self._rejects_this_step = 0
        self._tainted = False

    def react(self, final: Action) -> None:
        if self._pending is None:
            raise ProtocolError("no pending step to react to")
        if final is Action.ACCEPT:
            if self._pending.g_latent == 0:
                self._tainted = True
            self._step_index += 1
            self._rejects_this_step = 0
            if self._step_index == self.steps:
                self._finalize_episode(not self._tainted)
        elif final is Action.REJECT:
            self._rejects_this_step += 1
            if self._rejects_this_step > self.retries:
                self._finalize_episode(False)
        else:
            raise ValueError(f"final decision must be accept or reject, got {final!r}")
        self._pending = None

    def outcome(self) -> TaskOutcome:
        if self._episode_index < self.episodes or self._pending is not None:
            raise ProtocolError("outcome requested before the stream finished")
        return TaskOutcome(
            problems_total=self.episodes,
            problems_correct=self._correct,
            strong_calls_per_problem=self._strong_calls / self.episodes,
            weak_calls_per_problem=self._weak_calls / self.episodes,
        )

    def run_weak_only(self) -> TaskOutcome:
        """Greedy baseline: per step, draw the step plus all its retries and
        keep the candidate with the highest weak score."""
        if self._weak_calls or self._episode_index:
            raise ProtocolError("baseline runs need a fresh stream")
        pool = 1 + self.retries
        for _ in range(self.episodes):
            tainted = False
            for _ in range(self.steps):
                best_w = -1.0
                best_g = 0
                for _ in range(pool):
                    w, g = self._draw_step()
                    if w > best_w:
                        best_w = w
                        best_g = g
                if best_g == 0:
                    tainted = True
            self._finalize_episode(not tainted)
        return self.outcome()

    def spec_dict(self) -> dict:
        return {
            "kind": "stepwise",
            "episodes": self.episodes,
            "steps": self.steps,
            "step_correct_prob": self.step_correct_prob,
            "correct_scores": self.correct_scores.to_dict(),
            "incorrect_scores": self.incorrect_scores.to_dict(),
            "retries": self.retries,
            "seed": self.seed,
        }


def make_stream(spec: dict, seed: Optional[int] = None) -> VerifierStream:
    """Construct a stream from its spec dict; `seed` overrides the spec's."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValueError("stream spec must be a dict with a 'kind' key")
    kind = spec["kind"]
    use_seed = spec.get("seed", 0) if seed is None else seed
    try:
        if kind == "calibrated":
            return CalibratedStream(dist_from_dict(spec["score_dist"]), use_seed)
        if kind == "miscalibrated":
            return MiscalibratedStream(
                dist_from_dict(spec["score_dist"]), spec["link"], use_seed
            )
        if kind == "drift":
            segments = [
                (dist_from_dict(seg["score_dist"]), seg["length"])
                for seg in spec["segments"]
            ]
            return DriftStream(segments, use_seed)
        if kind == "best_of_n":
            return BestOfNStream(
                problems=spec["problems"],
                budget=spec["budget"],
                difficulty=dist_from_dict(spec["difficulty"]),
                correct_scores=dist_from_dict(spec["correct_scores"]),
                incorrect_scores=dist_from_dict(spec["incorrect_scores"]),
                seed=use_seed,
            )
        if kind == "stepwise":
            return StepwiseStream(
                episodes=spec["episodes"],
                steps=spec["steps"],
                step_correct_prob=spec["step_correct_prob"],
                correct_scores=dist_from_dict(spec["correct_scores"]),
                incorrect_scores=dist_from_dict(spec["incorrect_scores"]),
                retries=spec["retries"],
                seed=use_seed,
            )
    except KeyError as exc:
        raise ValueError(f"stream spec missing key {exc}") from exc
    raise ValueError(f"unknown stream kind {kind!r}")


def run_strong_only(stream: VerifierStream) -> TaskOutcome:
    """Oracle baseline: query the strong verifier on every candidate and
    accept exactly the correct ones."""
    if not stream.reactive:
        raise ValueError("the oracle baseline needs a task stream")
    while True:
        item = stream.next()
        if item is None:
            break
        g = stream.answer_strong_query()
        stream.react(Action.ACCEPT if g == 1 else Action.REJECT)
    return stream.outcome()


def run_weak_only(stream: VerifierStream) -> TaskOutcome:
    """Greedy baseline: accept the argmax-score candidate from each pool."""
    if not isinstance(stream, (BestOfNStream, StepwiseStream)):
        raise ValueError("the greedy baseline needs a task stream")
    return stream.run_weak_only()


def sample_items(spec: dict, n: int, seed: Optional[int] = None):
    """Draw n items i.i.d. from the stream's candidate marginal.

    Non-reactive streams are consumed directly (drift yields at most its
    total length). Task streams are sampled at the candidate level: base
    rate, then label, then the matching conditional score distribution.
    Returns (scores, labels) arrays.
    """
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    kind = spec.get("kind")
    if kind in ("calibrated", "miscalibrated", "drift"):
        stream = make_stream(spec, seed=seed)
        return stream.take(n)
    if kind not in ("best_of_n", "stepwise"):
        raise ValueError(f"unknown stream kind {kind!r}")
    rng = np.random.default_rng(spec.get("seed", 0) if seed is None else seed)
    if kind == "best_of_n":
        difficulty = dist_from_dict(spec["difficulty"])
        base = difficulty.sample(rng, n)
    else:
        base = np.full(n, float(spec["step_correct_prob"]))
    g = (rng.random(n) < base).astype(np.int64)
    correct = dist_from_dict(spec["correct_scores"])
    incorrect = dist_from_dict(spec["incorrect_scores"])
    w = np.empty(n)
    n1 = int(g.sum())
    w[g == 1] = correct.sample(rng, n1)
    w[g == 0] = incorrect.sample(rng, n - n1)
    return w, g


def score_report(
    spec: dict, samples: int = 10**5, bins: int = 20, seed: Optional[int] = None
) -> dict:
    """Score diagnostics: sharpness, conditional means, calibration, Brier.

    Sharpness is the spread of |w - 0.5|; separation is the gap between the
    mean score of correct and incorrect items. The calibration table splits
    [0, 1] into equal bins and compares each bin's empirical correctness
    rate with its mean score.
    """
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    w, g = sample_items(spec, samples, seed=seed)
    n = int(w.size)
    if n == 0:
        raise ValueError("stream produced no items to diagnose")
    sharp = np.abs(w - 0.5)
    mu1 = float(w[g == 1].mean()) if (g == 1).any() else None
    mu0 = float(w[g == 0].mean()) if (g == 0).any() else None
    edges = np.linspace(0.0, 1.0, bins + 1)
    # np.digitize puts w == 1.0 past the last bin; fold it back in
    idx = np.clip(np.digitize(w, edges) - 1, 0, bins - 1)
    table = []
    for b in range(bins):
        mask = idx == b
        count = int(mask.sum())
        table.append(
            {
                "lo": float(edges[b]),
                "hi": float(edges[b + 1]),
                "count": count,
                "mean_score": float(w[mask].mean()) if count else None,
                "frac_correct": float(g[mask].mean()) if count else None,
            }
        )
    return {
        "kind": spec.get("kind"),
        "samples": n,
        "sharpness_mean": float(sharp.mean()),
        "sharpness_median": float(np.median(sharp)),
        "sharpness_std": float(sharp.std()),
        "mu_correct": mu1,
        "mu_incorrect": mu0,
        "separation": (mu1 - mu0) if (mu1 is not None and mu0 is not None) else None,
        "brier": float(np.mean((w - g) ** 2)),
        "calibration": table,
    }


# Conditional-score presets: beta families matched to the targeted
# conditional means at a fixed concentration, bases matched to the targeted
# per-problem accuracy. The spreads are synthetic defaults.
_PRESET_CONCENTRATION = 10.0
_PRESET_PARAMS = {
    "easy": {"mu_correct": 0.90, "mu_incorrect": 0.33, "base": 0.922},
    "medium": {"mu_correct": 0.86, "mu_incorrect": 0.32, "base": 0.827},
    "hard": {"mu_correct": 0.64, "mu_incorrect": 0.26, "base": 0.479},
}
PRESET_LEVELS = tuple(_PRESET_PARAMS)


def _beta_with_mean(mu: float) -> BetaDist:
    kappa = _PRESET_CONCENTRATION
    return BetaDist(kappa * mu, kappa * (1.0 - mu))


def _preset_entry(level: str) -> dict:
    if level not in _PRESET_PARAMS:
        raise ValueError(
            f"unknown preset level {level!r}; expected one of {PRESET_LEVELS}"
        )
    return _PRESET_PARAMS[level]


def preset_math_like(
    level: str, problems: int = 500, budget: int = 4, seed: int = 0
) -> dict:
    """Best-of-n spec with conditional score families matched to the
    targeted means (easy 0.90/0.33, medium 0.86/0.32, hard 0.64/0.26) and
    base accuracies (0.922, 0.827, 0.479)."""
    p = _preset_entry(level)
    return {
        "kind": "best_of_n",
        "problems": problems,
        "budget": budget,
        "difficulty": PointMass(p["base"]).to_dict(),
        "correct_scores": _beta_with_mean(p["mu_correct"]).to_dict(),
        "incorrect_scores": _beta_with_mean(p["mu_incorrect"]).to_dict(),
        "seed": seed,
    }


def preset_ambiguous(problems: int = 500, budget: int = 4, seed: int = 0) -> dict:
    """Best-of-n spec whose conditional score families nearly coincide, so
    weak scores carry almost no signal about correctness."""
    return {
        "kind": "best_of_n",
        "problems": problems,
        "budget": budget,
        "difficulty": PointMass(_PRESET_PARAMS["easy"]["base"]).to_dict(),
        "correct_scores": BetaDist(8.4, 7.6).to_dict(),
        "incorrect_scores": BetaDist(7.6, 8.4).to_dict(),
        "seed": seed,
    }


def preset_calibrated(level: str, seed: int = 0) -> dict:
    """Calibrated stream whose score marginal equals the candidate marginal
    of the same-level best-of-n preset."""
    p = _preset_entry(level)
    marginal = MixtureDist(
        p["base"],
        _beta_with_mean(p["mu_correct"]),
        _beta_with_mean(p["mu_incorrect"]),
    )
    return {"kind": "calibrated", "score_dist": marginal.to_dict(), "seed": seed}


def preset_drift(total_length: int = 10**5, seed: int = 0) -> dict:
    """Calibrated drift spec alternating a low-score and a high-score
    regime (segment means near 0.29 and 0.71) in four equal segments."""
    if total_length < 4:
        raise ValueError(f"total_length must be >= 4, got {total_length}")
    seg_len = total_length // 4
    lengths = [seg_len, seg_len, seg_len, total_length - 3 * seg_len]
    dists = [BetaDist(2.0, 5.0), BetaDist(5.0, 2.0)] * 2
    return {
        "kind": "drift",
        "segments": [
            {"score_dist": d.to_dict(), "length": n}
            for d, n in zip(dists, lengths)
        ],
        "seed": seed,
    }
