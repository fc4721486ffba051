"""
Per-attempt error, detection and secure probabilities
======================================================

Walk the blocklength at a fixed SNR and watch the three ingredients trade off.
"""

import numpy as np

from seclat import LinkParams, esp, db_to_linear

D = 64
snr = db_to_linear(-7.0)

print(f"{'L':>5} {'P_B':>10} {'P_d':>8} {'ESP':>8} {'floor':>8}")
for L in (70, 100, 150, 200, 243, 300, 400, 600):
    p = esp(LinkParams.equal_snr(D, L, snr))
    print(f"{L:5d} {p.p_bob_err:10.3e} {p.p_detect:8.4f} {p.p_esp:8.4f} {p.p_esp_floor:8.4f}")

# Short blocks: Bob rarely decodes. Long blocks: the warden almost surely
# notices the transmission and ESP collapses onto the floor (1-P_B)P_E.
p = esp(LinkParams.equal_snr(D, 243, snr))
print("\ncase probabilities at L=243:", np.round(p.case_probabilities(), 4))
print("secure mass (cases 4+5):", p.case_probabilities()[3:5].sum(), "=", p.p_esp)

# Bob and Eve need not see the same channel
for eve_db in (-15, -10, -7, -3):
    p = esp(LinkParams(D, 243, snr, db_to_linear(eve_db)))
    print(f"eve at {eve_db:>3} dB -> ESP {p.p_esp:.4f}")
