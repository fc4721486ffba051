"""
Monte Carlo of the slot-level retransmission process.

Idle slots each generate a packet with probability ``gen_prob``; the
generating slot is idle and the next slot carries the first attempt. Every
attempt draws one of six outcomes (Bob decode, Eve detect, Eve decode only if
detected) and succeeds on cases 4 and 5. The packet's secure latency grows
by one slot per attempt and resets on success.

Instead of looping slot by slot, the trace is built from the same per-slot
Bernoulli draws in vectorised form: idle runs are geometric, attempt outcomes
are drawn in bulk, and packets are laid end to end until the horizon.
Replication ``r`` of seed ``s`` always uses the Philox stream keyed by
``(s, r)``, so results do not depend on execution order.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from seclat import latency
from seclat.errors import DomainError
from seclat.fbl import LinkParams, SecurityProbabilities, esp

N_BATCHES = 20
MIN_REPLICATIONS_FOR_REP_SE = 8


def make_rng(seed: int, replication: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, replication])))


def sample_attempt(probs: SecurityProbabilities, rng: np.random.Generator) -> int:
    """Draw one attempt outcome, returned as its case number 1..6."""
    return int(sample_attempts(probs, rng, 1)[0])


def sample_attempts(probs: SecurityProbabilities, rng: np.random.Generator, size: int) -> np.ndarray:
    bob_ok = rng.random(size) >= probs.p_bob_err
    detected = rng.random(size) < probs.p_detect
    eve_ok = rng.random(size) >= probs.p_eve_err
    # eve's decode only matters once she has detected
    case = np.where(detected, np.where(eve_ok, 3, 2), 1)
    return (case + 3 * bob_ok).astype(np.int8)


def is_secure(cases: np.ndarray) -> np.ndarray:
    return (cases == 4) | (cases == 5)


@dataclass
class SimulationConfig:
    link: LinkParams
    horizon_slots: int
    seed: int = 0
    replications: int = 1
    min_expected_successes: float = 100
    probs: SecurityProbabilities | None = None  # overrides the link-derived probabilities
    workers: int = 1

    def __post_init__(self):
        if self.horizon_slots < 1 or self.replications < 1:
            raise DomainError("horizon_slots and replications must be >= 1")

    def security(self) -> SecurityProbabilities:
        return self.probs if self.probs is not None else esp(self.link)


@dataclass
class Trace:
    """Per-packet record of one replication, in slots."""

    wait_slots: np.ndarray
    attempts: np.ndarray
    start_slot: np.ndarray  # slot index of the first attempt
    end_slot: np.ndarray  # slot index of the successful attempt
    cases: np.ndarray  # outcome of every attempt of completed packets, in order
    horizon_slots: int


@dataclass
class SimulationReport:
    empirical_avg_sl: float
    empirical_mean_attempts: float
    empirical_arrival_rate: float
    packets_completed: int
    case_frequencies: list
    std_error: float
    ci95: tuple
    attempts_std_error: float = math.nan
    arrival_rate_std_error: float = math.nan
    replication_avg_sl: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    seed: int = 0

    def to_dict(self):
        from dataclasses import asdict

        d = asdict(self)
        d["ci95"] = list(self.ci95)
        return d


def simulate_trace(probs: SecurityProbabilities, gen_prob: float, horizon_slots: int,
                   rng: np.random.Generator) -> Trace:
    """One replication; packets whose success falls after the horizon are dropped."""
    if not (0.0 < gen_prob <= 1.0):
        raise DomainError("gen_prob must lie in (0, 1]")
    if probs.p_esp <= 0.0:
        raise DomainError("p_esp is zero; no packet would ever complete")
    # expected cycle length sets the chunk sizes; sizes are deterministic in the inputs
    cycle = 1.0 / gen_prob + 1.0 / probs.p_esp
    chunk = int(min(max(horizon_slots / cycle * 1.1 + 64, 64), 5_000_000))
    waits, atts, cases_all = [], [], []
    used = 0
    pending = np.empty(0, dtype=np.int8)
    while used < horizon_slots:
        w = rng.geometric(gen_prob, chunk)
        n_att = int(chunk / probs.p_esp * 1.1) + 64
        c = np.concatenate([pending, sample_attempts(probs, rng, n_att)])
        ends = np.flatnonzero(is_secure(c))
        k = min(len(ends), chunk)
        if k == 0:
            pending = c
            continue
        ends = ends[:k]
        a = np.diff(np.concatenate([[-1], ends]))
        waits.append(w[:k])
        atts.append(a)
        cases_all.append(c[: ends[-1] + 1])
        pending = c[ends[-1] + 1:]
        used += int(w[:k].sum() + a.sum())
    wait = np.concatenate(waits).astype(np.int64)
    att = np.concatenate(atts).astype(np.int64)
    end = np.cumsum(wait + att) - 1
    keep = end < horizon_slots
    n = int(keep.sum())
    cases = np.concatenate(cases_all)[: int(att[:n].sum())]
    return Trace(
        wait_slots=wait[:n],
        attempts=att[:n],
        start_slot=(end - att + 1)[:n],
        end_slot=end[:n],
        cases=cases,
        horizon_slots=horizon_slots,
    )


def time_average_sl(trace: Trace, slot: float) -> float:
    """Sum of triangle areas A^2/2 over completed packets, divided by the horizon."""
    a = trace.attempts.astype(float) * slot
    return float(np.sum(a * a) / 2.0 / (trace.horizon_slots * slot))


def slotwise_average_sl(trace: Trace, slot: float) -> float:
    """Same quantity accumulated slot by slot through SL_k = SL_{k-1} + T.

    In its k-th attempt slot a packet's SL ramps from (k-1)T to kT, so the
    slot contributes (2k - 1) T^2 / 2 of area.
    """
    total = int(trace.attempts.sum())
    if total == 0:
        return 0.0
    first = np.repeat(np.cumsum(trace.attempts) - trace.attempts, trace.attempts)
    k = np.arange(total) - first + 1
    area = np.sum((2 * k - 1).astype(float)) * slot * slot / 2.0
    return float(area / (trace.horizon_slots * slot))


def renewal_average_sl(trace: Trace, slot: float) -> float:
    """mean(A^2) / (2 mean cycle), over completed cycles only."""
    if len(trace.attempts) == 0:
        return 0.0
    a = trace.attempts.astype(float) * slot
    cyc = (trace.attempts + trace.wait_slots).astype(float) * slot
    return float(np.mean(a * a) / (2.0 * np.mean(cyc)))


def _batch_stats(trace: Trace, slot: float):
    """Per-batch avg SL and arrival rate over N_BATCHES equal time windows."""
    width = trace.horizon_slots / N_BATCHES
    idx = np.minimum((trace.end_slot / width).astype(int), N_BATCHES - 1)
    a = trace.attempts.astype(float) * slot
    area = np.bincount(idx, weights=a * a / 2.0, minlength=N_BATCHES)
    count = np.bincount(idx, minlength=N_BATCHES)
    return area / (width * slot), count / (width * slot)


def _sem(x):
    x = np.asarray(x, dtype=float)
    return float(np.std(x, ddof=1) / math.sqrt(len(x))) if len(x) > 1 else math.nan


def run(config: SimulationConfig) -> SimulationReport:
    """Run all replications and aggregate.

    The confidence interval uses across-replication spread when there are at
    least 8 replications, otherwise 20 time-batch means per replication.
    """
    return run_with_traces(config)[0]


def run_with_traces(config: SimulationConfig):
    """Like :func:`run` but also returns the per-replication traces."""
    probs = config.security()
    link = config.link
    slot = link.slot_duration
    notes = []
    expected = config.horizon_slots * slot * latency.arrival_rate(probs.p_esp, link.gen_prob, slot)
    if expected < config.min_expected_successes:
        msg = (f"only {expected:.1f} secure deliveries expected per replication "
               f"(< {config.min_expected_successes}); estimates will be noisy")
        notes.append(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)

    def one(r):
        return simulate_trace(probs, link.gen_prob, config.horizon_slots, make_rng(config.seed, r))

    reps = range(config.replications)
    if config.workers > 1:
        with ThreadPoolExecutor(config.workers) as ex:
            traces = list(ex.map(one, reps))
    else:
        traces = [one(r) for r in reps]

    tau = config.horizon_slots * slot
    per_rep = [time_average_sl(t, slot) for t in traces]
    all_att = np.concatenate([t.attempts for t in traces])
    n_packets = len(all_att)
    freq = np.zeros(6, dtype=np.int64)
    for t in traces:
        freq += np.bincount(t.cases.astype(np.int64) - 1, minlength=6)[:6]
    rates = [len(t.attempts) / tau for t in traces]

    if config.replications >= MIN_REPLICATIONS_FOR_REP_SE:
        se, rate_se = _sem(per_rep), _sem(rates)
    else:
        sl_b, rate_b = zip(*(_batch_stats(t, slot) for t in traces))
        se, rate_se = _sem(np.concatenate(sl_b)), _sem(np.concatenate(rate_b))
    mean_sl = float(np.mean(per_rep))
    report = SimulationReport(
        empirical_avg_sl=mean_sl,
        empirical_mean_attempts=float(all_att.mean()) if n_packets else math.nan,
        empirical_arrival_rate=float(np.mean(rates)),
        packets_completed=int(n_packets),
        case_frequencies=[int(v) for v in freq],
        std_error=se,
        ci95=(mean_sl - 1.96 * se, mean_sl + 1.96 * se),
        attempts_std_error=_sem(all_att),
        arrival_rate_std_error=rate_se,
        replication_avg_sl=per_rep,
        warnings=notes,
        seed=config.seed,
    )
    return report, traces
