"""
Renewal analysis of secure latency (SL) under retransmission.

Each packet waits a geometric number of slots (parameter `lam`) to be
generated, then is retransmitted every slot until an attempt is both
decoded by Bob and secure (probability `p_esp`). The SL of a packet is the
sawtooth that grows by T per failed attempt; its long-run time average is
arrival_rate * mean_area.

Times are in seconds.
"""

from __future__ import annotations

from dataclasses import dataclass

from seclat.errors import DomainError, InfiniteLatencyError
from seclat.fbl import SecurityProbabilities

# below this an ESP is indistinguishable from "never secure"; T/p^2 would overflow
ESP_ZERO = 1e-12


def _check_esp(p_esp):
    if not (p_esp <= 1.0):
        raise DomainError("p_esp must be <= 1")
    if p_esp < ESP_ZERO:
        raise InfiniteLatencyError(
            f"p_esp={p_esp:g}: no secure transmission is possible, latency is infinite"
        )


def _check_lam(lam):
    if not (0.0 < lam <= 1.0):
        raise DomainError("generation probability lam must lie in (0, 1]")


def _check_slot(slot):
    if not (slot > 0.0):
        raise DomainError("slot duration must be > 0")


def mean_attempt_time(p_esp, slot):
    """Mean SL of one packet, T / p_esp (geometric number of attempts)."""
    _check_esp(p_esp)
    _check_slot(slot)
    return slot / p_esp


def mean_wait(lam, slot):
    """Mean idle time before the next packet is generated, T / lam."""
    _check_lam(lam)
    _check_slot(slot)
    return slot / lam


def arrival_rate(p_esp, lam, slot):
    """Packets delivered per second, p lam / (T (p + lam))."""
    _check_esp(p_esp)
    _check_lam(lam)
    _check_slot(slot)
    return p_esp * lam / (slot * (p_esp + lam))


def mean_area(p_esp, slot):
    """Mean area under one SL triangle, E(A^2)/2 = T^2 (2 - p) / (2 p^2)."""
    _check_esp(p_esp)
    _check_slot(slot)
    return slot * slot * (2.0 - p_esp) / (2.0 * p_esp * p_esp)


def average_sl(p_esp, lam, slot):
    """Long-run average secure latency lam/(lam+p) * (T/p - T/2)."""
    _check_esp(p_esp)
    _check_lam(lam)
    _check_slot(slot)
    return lam / (lam + p_esp) * (slot / p_esp - slot / 2.0)


def baseline_latency(p_bob_ok, lam, slot):
    """Average latency with reliability only; same form with 1 - P_B in place of ESP."""
    return average_sl(p_bob_ok, lam, slot)


def sl_derivative_wrt_esp(p_esp, lam, slot):
    """d(average SL) / d(p_esp). Negative for every p in (0, 1], lam in (0, 1]."""
    _check_esp(p_esp)
    _check_lam(lam)
    _check_slot(slot)
    p = p_esp
    num = (lam + p) * p + (2.0 - p) * (2.0 * p + lam)
    return -lam * slot * num / (2.0 * (lam + p) ** 2 * p * p)


@dataclass(frozen=True)
class RenewalStats:
    mean_attempt_time: float
    mean_wait: float
    arrival_rate: float
    mean_area: float
    avg_sl: float
    baseline_latency: float


def renewal_stats(probs: SecurityProbabilities, lam, slot) -> RenewalStats:
    p = probs.p_esp
    return RenewalStats(
        mean_attempt_time=mean_attempt_time(p, slot),
        mean_wait=mean_wait(lam, slot),
        arrival_rate=arrival_rate(p, lam, slot),
        mean_area=mean_area(p, slot),
        avg_sl=average_sl(p, lam, slot),
        baseline_latency=baseline_latency(1.0 - probs.p_bob_err, lam, slot),
    )
