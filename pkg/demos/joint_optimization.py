"""
Joint SNR and blocklength
=========================

Alternate the two single-variable solvers. The ESP ridge keeps climbing
towards longer blocks, so the optimum lands on the blocklength cap.
"""

from seclat import optimizer as opt
from seclat.fbl import linear_to_db

D = 64
for l_max in (300, 500, 1000):
    r = opt.joint_optimize(D, opt.SolverConfig(l_max=l_max))
    snr, L = r.variable
    print(f"L_max={l_max:5d}: L={L}, SNR={linear_to_db(snr):.3f} dB, ESP={r.achieved_esp:.5f}, "
          f"boundary={r.at_boundary}")

r = opt.joint_optimize(D, opt.SolverConfig(l_max=500))
for start, hist in zip(r.diagnostics["starts"], r.diagnostics["histories"]):
    print("\nstart", start)
    for g, L, e in hist[:6]:
        db = "-" if g is None else f"{linear_to_db(g):.3f}"  # SNR not chosen yet
        print(f"  {db:>8} dB  L={L:4d}  ESP={e:.5f}")
