"""
Single-shot finite-blocklength probabilities.

Normal-approximation decoding error, the Pinsker bound on a warden's
detection probability, and their composition into the effective secure
probability (ESP) of one transmission attempt.

All functions accept scalars or numpy arrays. Scalars in, Python floats out.
SNRs are linear; capacity is in bits per channel use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from seclat.errors import DomainError

LN2 = math.log(2.0)


def _ret(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def _positive(name, x):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)) or np.any(x <= 0):
        raise DomainError(f"{name} must be finite and > 0")
    return x


def db_to_linear(db):
    """10^(dB/10)."""
    return _ret(np.power(10.0, np.asarray(db, dtype=float) / 10.0))


def linear_to_db(x):
    return _ret(10.0 * np.log10(_positive("snr", x)))


def q_function(x):
    """Standard Gaussian upper tail, Q(x) = 0.5 erfc(x / sqrt(2)).

    scipy's erfc is accurate to a few ulp relative, which gives far better
    than 1e-12 absolute error everywhere.
    """
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError("q_function argument must be finite")
    return _ret(0.5 * erfc(x / math.sqrt(2.0)))


def q_function_series(x, terms: int):
    """Q(x) from the Maclaurin series of the normal CDF truncated after `terms`.

    1 - Q(x) = 1/2 + (1/sqrt(2 pi)) sum_{i=0}^{n} (-1)^i x^(2i+1) / (i! 2^i (2i+1)).
    Only accurate for moderate |x| unless `terms` is large; this exists to
    reproduce the truncated stationarity equations, not for general use.
    """
    if terms < 0:
        raise DomainError("terms must be >= 0")
    x = np.asarray(x, dtype=float)
    acc = np.zeros_like(x)
    # term_i = (-1)^i x^(2i+1) / (i! 2^i), divided by (2i+1) when summed
    term = x.copy()
    for i in range(terms + 1):
        acc = acc + term / (2 * i + 1)
        term = -term * x * x / (2.0 * (i + 1))
    cdf = 0.5 + acc / math.sqrt(2.0 * math.pi)
    return _ret(1.0 - cdf)


def capacity(snr):
    """AWGN capacity log2(1 + snr) in bits per channel use."""
    return _ret(np.log1p(_positive("snr", snr)) / LN2)


def dispersion(snr):
    """Channel dispersion snr (2 + snr) / (1 + snr)^2, kept without a log2(e)^2 factor."""
    g = _positive("snr", snr)
    return _ret(g * (2.0 + g) / (1.0 + g) ** 2)


def _tail_argument(snr, payload_bits, blocklength):
    g = _positive("snr", snr)
    d = _positive("payload_bits", payload_bits)
    n = _positive("blocklength", blocklength)
    c = np.log1p(g) / LN2
    v = g * (2.0 + g) / (1.0 + g) ** 2
    return (c - d / n) * np.sqrt(n / v)


def decoding_error_prob(snr, payload_bits, blocklength):
    """Normal approximation Q((C - D/L) sqrt(L / V)) of the block error probability."""
    return q_function(_tail_argument(snr, payload_bits, blocklength))


def _divergence_term(snr):
    # ln(1+g) - g/(1+g); for tiny g both terms agree to ~g, so use the series
    g = np.asarray(snr, dtype=float)
    small = g < 1e-4
    exact = np.log1p(g) - g / (1.0 + g)
    series = g * g / 2.0 - 2.0 * g ** 3 / 3.0 + 3.0 * g ** 4 / 4.0
    return np.where(small, series, exact)


def detection_prob(snr_eve, blocklength):
    """Pinsker upper bound on the warden's detection probability.

    Returns ``(raw, clamped)`` where raw = sqrt((L/4)(ln(1+g) - g/(1+g))) may
    exceed one and clamped = min(raw, 1).
    """
    g = _positive("snr_eve", snr_eve)
    n = _positive("blocklength", blocklength)
    raw = np.sqrt(n / 4.0 * _divergence_term(g))
    return _ret(raw), _ret(np.minimum(raw, 1.0))


@dataclass(frozen=True)
class LinkParams:
    """One operating point of the link.

    `slot_duration` is in seconds, `symbol_rate` in symbols per second.
    """

    payload_bits: int
    blocklength: int
    snr_bob: float
    snr_eve: float
    slot_duration: float = 1.0
    gen_prob: float = 1.0
    symbol_rate: float = 1.0

    def __post_init__(self):
        if int(self.payload_bits) != self.payload_bits or self.payload_bits < 1:
            raise DomainError("payload_bits must be a positive integer")
        if int(self.blocklength) != self.blocklength or self.blocklength < 1:
            raise DomainError("blocklength must be a positive integer")
        for name in ("snr_bob", "snr_eve", "slot_duration", "symbol_rate"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be finite and > 0")
        if not (0.0 < self.gen_prob <= 1.0):
            raise DomainError("gen_prob must lie in (0, 1]")

    @property
    def rate(self) -> float:
        return self.payload_bits / self.blocklength

    @classmethod
    def equal_snr(cls, payload_bits, blocklength, snr, **kw):
        return cls(payload_bits, blocklength, snr, snr, **kw)


@dataclass(frozen=True)
class SecurityProbabilities:
    p_bob_err: float
    p_eve_err: float
    p_detect: float
    p_detect_raw: float
    p_esp: float
    p_esp_floor: float

    @classmethod
    def from_components(cls, p_bob_err, p_eve_err, p_detect_raw):
        """Compose ESP from the three per-attempt probabilities."""
        p_detect = min(p_detect_raw, 1.0)
        # (1 - P_d) + P_d P_E rather than 1 - P_d (1 - P_E): no cancellation when P_d = 1
        p_esp = (1.0 - p_bob_err) * ((1.0 - p_detect) + p_detect * p_eve_err)
        floor = (1.0 - p_bob_err) * p_eve_err
        return cls(p_bob_err, p_eve_err, p_detect, p_detect_raw, p_esp, floor)

    def case_probabilities(self) -> np.ndarray:
        """Probability of each of the six attempt outcomes (cases 1..6).

        Bob fails/succeeds x Eve misses/detects x (if detected) Eve fails/decodes.
        Cases 4 and 5 are the secure successes.
        """
        pb, pd, pe = self.p_bob_err, self.p_detect, self.p_eve_err
        ok = 1.0 - pb
        return np.array([
            pb * (1 - pd),
            pb * pd * pe,
            pb * pd * (1 - pe),
            ok * (1 - pd),
            ok * pd * pe,
            ok * pd * (1 - pe),
        ])


def esp(params: LinkParams) -> SecurityProbabilities:
    """Effective secure probability and its ingredients for one attempt."""
    p_b = decoding_error_prob(params.snr_bob, params.payload_bits, params.blocklength)
    p_e = decoding_error_prob(params.snr_eve, params.payload_bits, params.blocklength)
    raw, _ = detection_prob(params.snr_eve, params.blocklength)
    return SecurityProbabilities.from_components(p_b, p_e, raw)


def esp_equal_snr(snr, payload_bits, blocklength):
    """Vectorised ESP when Bob and Eve see the same SNR."""
    p = decoding_error_prob(snr, payload_bits, blocklength)
    _, pd = detection_prob(snr, blocklength)
    p, pd = np.asarray(p), np.asarray(pd)
    return _ret((1.0 - p) * ((1.0 - pd) + pd * p))


def effective_secure_rate(params: LinkParams) -> float:
    """B * (D/L) * P_ESP in bits per second."""
    return params.symbol_rate * params.rate * esp(params).p_esp
