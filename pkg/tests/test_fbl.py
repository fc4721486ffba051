import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seclat import fbl
from seclat.errors import DomainError
from seclat.fbl import LinkParams, SecurityProbabilities


def tail_by_quadrature(x):
    with mpmath.workdps(40):
        return float(mpmath.quad(lambda t: mpmath.exp(-t * t / 2), [x, mpmath.inf]) / mpmath.sqrt(2 * mpmath.pi))


# --- q_function -----------------------------------------------------------------


def test_q_zero_and_symmetry():
    assert fbl.q_function(0.0) == 0.5
    assert fbl.q_function(1.3) + fbl.q_function(-1.3) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("x", [-8, -4, -1, 0, 0.5, 1, 2, 4, 8])
def test_q_matches_quadrature(x):
    assert abs(fbl.q_function(x) - tail_by_quadrature(x)) <= 1e-12


def test_q_deep_tail():
    # quadrature oracle, frozen: Q(6.532) = 3.2449e-11
    assert fbl.q_function(6.532) == pytest.approx(tail_by_quadrature(6.532), rel=1e-10)
    assert fbl.q_function(6.532) == pytest.approx(3.2449e-11, rel=1e-3)


def test_q_rejects_nonfinite():
    with pytest.raises(DomainError):
        fbl.q_function(float("nan"))
    with pytest.raises(DomainError):
        fbl.q_function(np.array([0.0, np.inf]))


def test_q_monotone():
    x = np.linspace(-8, 8, 4001)
    assert np.all(np.diff(fbl.q_function(x)) <= 0)


def test_series_converges_to_exact():
    x = np.linspace(-2, 2, 9)
    assert np.allclose(fbl.q_function_series(x, 40), fbl.q_function(x), atol=1e-14)
    # a single term is the linearisation 1/2 - x / sqrt(2 pi)
    assert fbl.q_function_series(0.1, 0) == pytest.approx(0.5 - 0.1 / math.sqrt(2 * math.pi))


# --- capacity / dispersion ------------------------------------------------------


def test_capacity_values():
    assert fbl.capacity(1.0) == 1.0
    assert fbl.capacity(3.0) == 2.0
    assert fbl.capacity(0.3162) == pytest.approx(math.log(1.3162) / math.log(2), rel=1e-14)
    assert fbl.capacity(0.3162) == pytest.approx(0.39638, abs=1e-5)


def test_dispersion_values():
    assert fbl.dispersion(1.0) == 0.75
    assert fbl.dispersion(0.1) == pytest.approx(0.1 * 2.1 / 1.21, rel=1e-14)
    assert fbl.dispersion(1e8) == pytest.approx(1.0, abs=1e-12)
    g = np.geomspace(1e-3, 1e3, 200)
    v = fbl.dispersion(g)
    assert np.all((v > 0) & (v < 1)) and np.all(np.diff(v) > 0)


@pytest.mark.parametrize("f", [fbl.capacity, fbl.dispersion])
@pytest.mark.parametrize("bad", [0.0, -1.0])
def test_nonpositive_snr_rejected(f, bad):
    with pytest.raises(DomainError):
        f(bad)


# --- decoding error -------------------------------------------------------------


def test_decoding_error_rate_equals_capacity():
    assert fbl.decoding_error_prob(1.0, 64, 64) == 0.5


def test_decoding_error_frozen_values():
    # mpmath: t = 6.531972647..., Q(t) = 3.24545e-11
    assert fbl.decoding_error_prob(1.0, 64, 128) == pytest.approx(3.2454506079e-11, rel=1e-9)
    # mpmath: t = 0.35161668..., Q(t) = 0.3625628765219964
    assert fbl.decoding_error_prob(0.1, 64, 489) == pytest.approx(0.3625628765219964, rel=1e-12)


def test_decoding_error_monotone(rng):
    for _ in range(50):
        g = 10 ** rng.uniform(-2, 1)
        d = int(rng.integers(8, 200))
        n = np.arange(1, 2000)
        p = fbl.decoding_error_prob(g, d, n)
        # strictness is only observable away from the 0/1 rounding floors
        assert np.all(np.diff(p) <= 0)
        nz = (p > 1e-300) & (p < 1 - 1e-9)
        assert np.all(np.diff(p[nz]) < 0)
        gs = np.geomspace(1e-2, 1e1, 300)
        n0 = int(rng.integers(d, 4 * d))
        q = fbl.decoding_error_prob(gs, d, n0)
        assert np.all(np.diff(q) <= 0)
        keep = (q > 1e-300) & (q < 1 - 1e-9)
        assert np.all(np.diff(q[keep]) < 0)


# --- detection ------------------------------------------------------------------


def test_detection_values():
    raw, cl = fbl.detection_prob(1.0, 4)
    assert raw == pytest.approx(math.sqrt(math.log(2) - 0.5), rel=1e-14)
    assert raw == pytest.approx(0.4395, abs=1e-4) and cl == raw
    raw, cl = fbl.detection_prob(1.0, 64)
    assert raw == pytest.approx(1.758, abs=1e-3) and cl == 1.0


def test_detection_vanishes_at_low_snr():
    raw, _ = fbl.detection_prob(1e-9, 1000)
    assert raw < 1e-7
    # small-SNR series branch agrees with the direct formula where both are accurate
    g = 9.9e-5
    direct = math.sqrt(250 * (math.log1p(g) - g / (1 + g)))
    assert fbl.detection_prob(g, 1000)[0] == pytest.approx(direct, rel=1e-6)


def test_detection_monotone(rng):
    g = np.geomspace(1e-3, 1e2, 500)
    assert np.all(np.diff(fbl.detection_prob(g, 50)[0]) > 0)
    n = np.arange(1, 1000)
    assert np.all(np.diff(fbl.detection_prob(0.3, n)[0]) > 0)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-4, 1e4), st.integers(1, 5000))
def test_detection_clamp_idempotent(g, n):
    raw, cl = fbl.detection_prob(g, n)
    assert raw >= 0 and 0 <= cl <= 1
    assert cl == min(raw, 1.0) and min(cl, 1.0) == cl


# --- ESP ------------------------------------------------------------------------


def test_esp_rate_at_capacity():
    p = fbl.esp(LinkParams.equal_snr(64, 64, 1.0))
    assert p.p_bob_err == 0.5 and p.p_eve_err == 0.5 and p.p_detect == 1.0
    assert p.p_esp == 0.25 and p.p_esp_floor == 0.25


def test_esp_without_detection():
    p = fbl.esp(LinkParams(64, 200, 1.0, 1e-12))
    assert p.p_esp == pytest.approx(1 - p.p_bob_err, abs=1e-9)


def test_esp_frozen_example():
    p = fbl.esp(LinkParams.equal_snr(64, 489, 0.1))
    # composed from the mpmath values of P_B = P_E and P_d
    assert p.p_detect == pytest.approx(0.7335074078987550, rel=1e-12)
    assert p.p_esp == pytest.approx(0.3393939290899610, rel=1e-12)


@settings(max_examples=300, deadline=None)
@given(
    d=st.integers(1, 512), n=st.integers(1, 3000),
    gb=st.floats(1e-3, 1e3), ge=st.floats(1e-3, 1e3), equal=st.booleans(),
)
def test_esp_properties(d, n, gb, ge, equal):
    if equal:
        ge = gb
    p = fbl.esp(LinkParams(d, n, gb, ge))
    for v in (p.p_bob_err, p.p_eve_err, p.p_detect, p.p_esp, p.p_esp_floor):
        assert 0.0 <= v <= 1.0
    if gb == ge:
        # floor is x(1 - x) only when Bob and Eve share one error probability
        assert p.p_esp_floor <= 0.25 + 1e-15
    gap = (1 - p.p_bob_err) * (1 - p.p_detect) * (1 - p.p_eve_err)
    assert p.p_esp - p.p_esp_floor == pytest.approx(gap, abs=1e-15)
    assert p.p_esp >= p.p_esp_floor - 1e-15
    if p.p_detect == 1.0:
        assert p.p_esp == pytest.approx(p.p_esp_floor, abs=1e-15)


def test_case_probabilities_sum_and_success_mass():
    p = fbl.esp(LinkParams.equal_snr(64, 300, 0.2))
    c = p.case_probabilities()
    assert c.sum() == pytest.approx(1.0, abs=1e-15)
    assert c[3] + c[4] == pytest.approx(p.p_esp, abs=1e-15)


def test_table_one_monte_carlo(rng):
    p = fbl.esp(LinkParams.equal_snr(64, 489, 0.1))
    n = 10 ** 6
    bob_ok = rng.random(n) >= p.p_bob_err
    det = rng.random(n) < p.p_detect
    eve_ok = rng.random(n) >= p.p_eve_err
    success = bob_ok & ~(det & eve_ok)
    se = math.sqrt(p.p_esp * (1 - p.p_esp) / n)
    assert abs(success.mean() - p.p_esp) <= 3 * se


# --- rate / params --------------------------------------------------------------


def test_effective_secure_rate():
    assert fbl.effective_secure_rate(LinkParams.equal_snr(64, 64, 1.0)) == 0.25
    link = LinkParams.equal_snr(64, 489, 0.1, symbol_rate=120000)
    r = fbl.effective_secure_rate(link)
    assert r == pytest.approx(120000 * 64 / 489 * 0.3393939290899610, rel=1e-12)
    assert r == pytest.approx(5324, rel=2e-3)


def test_effective_rate_zero_when_esp_zero():
    # Bob can never decode: rate far above capacity
    link = LinkParams.equal_snr(64, 65, 1e-3)
    assert fbl.effective_secure_rate(link) == 0.0


def test_link_params_validation():
    with pytest.raises(DomainError):
        LinkParams(0, 10, 1.0, 1.0)
    with pytest.raises(DomainError):
        LinkParams(10, 10, -1.0, 1.0)
    with pytest.raises(DomainError):
        LinkParams(10, 10, 1.0, 1.0, gen_prob=0.0)
    with pytest.raises(DomainError):
        LinkParams(10, 10, 1.0, 1.0, slot_duration=0.0)


def test_db_conversion():
    assert fbl.db_to_linear(0) == 1.0
    assert fbl.db_to_linear(-10) == pytest.approx(0.1)
    assert fbl.linear_to_db(fbl.db_to_linear(-4.633)) == pytest.approx(-4.633)


def test_from_components_clamps():
    p = SecurityProbabilities.from_components(0.1, 0.2, 3.0)
    assert p.p_detect == 1.0 and p.p_detect_raw == 3.0


def test_clamped_esp_equals_tiny_floor():
    # P_d clamps to 1 and P_E is far below machine epsilon; ESP must still equal the floor
    p = fbl.esp(LinkParams.equal_snr(64, 900, 10 ** -0.7))
    assert p.p_detect == 1.0 and 0 < p.p_eve_err < 1e-17
    assert p.p_esp == pytest.approx(p.p_esp_floor, rel=1e-12)
    assert fbl.esp_equal_snr(10 ** -0.7, 64, 900) == pytest.approx(p.p_esp_floor, rel=1e-12)
