"""
Monte Carlo against the closed form
===================================

Simulate the slotted retransmission process and compare the time-average
secure latency with the analytic value.
"""

import numpy as np

from seclat import LinkParams, esp, latency, simulate
from seclat.simulator import SimulationConfig

T = 1 / 120e3
link = LinkParams.equal_snr(64, 243, 10 ** -0.7, slot_duration=T, gen_prob=0.3)
probs = esp(link)
analytic = latency.average_sl(probs.p_esp, link.gen_prob, T)

rep = simulate(SimulationConfig(link, horizon_slots=2_000_000, seed=7, replications=4, workers=4))
z = (rep.empirical_avg_sl - analytic) / rep.std_error
print(f"analytic   {analytic:.6e} s")
print(f"simulated  {rep.empirical_avg_sl:.6e} s  +- {rep.std_error:.1e}   z={z:+.2f}")
print(f"mean attempts {rep.empirical_mean_attempts:.4f}  vs 1/ESP = {1 / probs.p_esp:.4f}")

n = sum(rep.case_frequencies)
print("case frequencies:", np.round(np.array(rep.case_frequencies) / n, 4))
print("table products:  ", np.round(probs.case_probabilities(), 4))
