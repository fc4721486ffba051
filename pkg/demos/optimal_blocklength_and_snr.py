"""
Single-variable optima
======================

Optimal blocklength at fixed SNR and optimal SNR at fixed blocklength,
with the branch the solver took and the thresholds that decide it.
"""

from seclat import optimizer as opt
from seclat.fbl import db_to_linear, linear_to_db

D = 64
g_t = opt.gamma_threshold(D)
print(f"SNR threshold {linear_to_db(g_t):.3f} dB, blocklength threshold {opt.blocklength_threshold(D):.3f}")

print("\nbest L at fixed SNR")
for db in (-3, -5, -7, -10):
    r = opt.optimal_blocklength(db_to_linear(db), D)
    print(f"  {db:>4} dB -> L={r.variable:4d}  ESP={r.achieved_esp:.4f}  [{r.branch}]")

print("\nbest SNR at fixed L")
for L in (64, 100, 150, 200, 300):
    r = opt.optimal_snr(L, D)
    print(f"  L={L:4d} -> {linear_to_db(r.variable):7.3f} dB  ESP={r.achieved_esp:.4f}  [{r.branch}]")

# above the SNR threshold the closed form L = D / C is optimal; below it the
# stationary point must be found numerically
r = opt.optimal_blocklength(db_to_linear(-7), D)
print("\ndiagnostics at -7 dB:", {k: r.diagnostics[k] for k in ("closed_form_blocklength", "stationary_roots")})
