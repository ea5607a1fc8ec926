"""Hanus conditioning on and off for a saturating 60 degree step."""
import math

from softlimb import PiGains, LimbParams, static_gain_matrix
from softlimb.robustness import conditioned_controller
from softlimb.sim import DEFAULT_LAG, build_truth_plant, integrated_abs_error, make_trajectory, peak_overshoot, run_closed_loop, settling_time

G = static_gain_matrix(LimbParams()).matrix
cc = conditioned_controller(G, PiGains(2.0, 1.5))
print("H =\n", cc.H, "\nA - H C =\n", cc.A_cond)

traj = make_trajectory("step", math.radians(60.0), duration=10.0)
print(f"{'lag':>5} {'scaling':>8} {'aw':>4} {'IAE':>8} {'overshoot':>10} {'settle':>7}")
for lag in (None, 0.1, DEFAULT_LAG, 1.0):
    plant = build_truth_plant(G, lag)
    for scaling in (True, False):
        for aw in (True, False):
            tr = run_closed_loop(cc, plant, traj, antiwindup=aw, direction_scaling=scaling)
            print(f"{str(lag):>5} {str(scaling):>8} {'on' if aw else 'off':>4} "
                  f"{integrated_abs_error(tr):8.4f} {peak_overshoot(tr):10.3f} {settling_time(tr):7.2f}")
