"""
Average secure latency from the renewal view
=============================================

Each packet is a cycle: a geometric idle wait, then retransmissions until one
attempt is secure. The time-average SL is rate-of-cycles times mean sawtooth area.
"""

from seclat import latency

T = 1 / 120e3  # slot length in seconds

for p in (0.1, 0.25, 0.5, 0.9, 1.0):
    lam = 0.5
    rate = latency.arrival_rate(p, lam, T)
    area = latency.mean_area(p, T)
    print(f"p={p:4}: rate*area = {rate * area:.6e}   avg_sl = {latency.average_sl(p, lam, T):.6e}")

# sensitivity to the secure probability is always negative
print("\ndSL/dp at p=0.3, lam=0.5:", latency.sl_derivative_wrt_esp(0.3, 0.5, T))

# busier sources see more of the sawtooth
for lam in (0.05, 0.2, 0.5, 1.0):
    print(f"lam={lam:4}: avg_sl={latency.average_sl(0.3, lam, T) / T:.3f} slots")

# ignoring the warden gives a smaller latency with 1-P_B in place of ESP
print("\nwith warden:", latency.average_sl(0.3, 1.0, T) / T,
      "  reliability only:", latency.baseline_latency(0.8, 1.0, T) / T)
