"""Static beam gain of the default limb, its SVD, and the decoupled loop."""
import math

import numpy as np

from softlimb import LimbParams, PiGains, build_nominal_controller, static_gain_matrix, svd_2x2
from softlimb.synthesis import dc_decoupling_matrix

np.set_printoptions(precision=4, suppress=True)

p = LimbParams()
gain = static_gain_matrix(p)
G = gain.matrix
print(f"effective modulus {p.modulus / 1e6:.3f} MPa, I_x {p.inertia_x:.3e} m^4, I_y {p.inertia_y:.3e} m^4")
print("G =\n", G)

f = svd_2x2(G)
print("U =\n", f.U, "\nsigma =", f.sigma, "\nV =\n", f.V)
print("condition number", f.sigma[0] / f.sigma[1])
print("U^T G V S^-1 =\n", dc_decoupling_matrix(f, G))

# full-scale input on one diagonal pair: how far does the tip bend?
for name, u in (("u = (1, 0)", [1.0, 0.0]), ("u = (1, 1)", [1.0, 1.0]), ("u = (1, -1)", [1.0, -1.0])):
    print(f"{name}: pitch {math.degrees((G @ u)[0]):6.2f} deg, yaw {math.degrees((G @ u)[1]):6.2f} deg")

# the loop G K is the same scalar PI loop on both axes
nc = build_nominal_controller(f, PiGains(2.0, 1.5))
s = 0.7j
print("G K(0.7j) =\n", G @ nc.transfer(s))
