"""Robust stability margin beta across proportional gains, with and without unmodeled dynamics."""
from softlimb import LimbParams, static_gain_matrix, max_stable_gain
from softlimb.robustness import sweep_beta

G = static_gain_matrix(LimbParams()).matrix
kps = [0.25, 0.5, 1.0, 1.5, 2.0, 2.5]
sat = sweep_beta(kps, 1.5, G)
mixed = sweep_beta(kps, 1.5, G, with_dynamics=True)
print(f"{'kp':>5} {'beta sat':>9} {'beta mixed':>11} {'certified (sat / mixed)':>25}")
for a, b in zip(sat, mixed):
    print(f"{a.gains.kp:5.2f} {a.beta:9.4f} {b.beta:11.4f} {a.robustly_stable!s:>12} / {b.robustly_stable!s}")

for dyn in (False, True):
    res = max_stable_gain(1.5, dyn, None, G, grid=0.1, kp_max=5.0)
    print(f"with_dynamics={dyn}: largest certified kp {res.max_kp:.2f} (search bounded: {res.bounded})")
