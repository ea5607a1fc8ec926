"""Tracking error of the waypoint hold sequence versus its total duration."""
import math

from softlimb import LimbParams, PiGains, static_gain_matrix
from softlimb.robustness import conditioned_controller
from softlimb.sim import DEFAULT_LAG, build_truth_plant, make_trajectory, run_closed_loop, tracking_errors

G = static_gain_matrix(LimbParams()).matrix
plant = build_truth_plant(G, DEFAULT_LAG)
for kp in (0.5, 2.0):
    cc = conditioned_controller(G, PiGains(kp, 1.5))
    print(f"kp = {kp}")
    for duration in (120.0, 60.0, 30.0, 15.0):
        traj = make_trajectory("hold-sequence", math.radians(30.0), duration)
        yaw, pitch = tracking_errors(run_closed_loop(cc, plant, traj))
        print(f"  {duration:5.0f} s: yaw MAE {yaw:5.2f} deg, pitch MAE {pitch:5.2f} deg")

# a mismatched plant drawn inside the uncertainty weight
cc = conditioned_controller(G, PiGains(0.5, 1.5))
trace = run_closed_loop(cc, build_truth_plant(G, None, mismatch_seed=7), make_trajectory("step", math.radians(30.0), 10.0))
print("step with mismatch seed 7, final error (deg):", [round(math.degrees(e), 4) for e in trace.reference[-1] - trace.output[-1]])
