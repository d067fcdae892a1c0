"""
Rebuilding the flat connection along a trajectory
=================================================

Every catalog flow is a component form of one flatness condition on an
sl(2,R) connection.  Reconstruct the connection from a numerical solution
and measure all three curvature components.
"""

import numpy as np

from brstkdv.reductions import (
    SLICE_A,
    build_system,
    reconstruct_connection,
    zero_curvature_components,
)
from brstkdv.solver import (FieldState, evolve, soliton_initial,
                            spectral_derivative)

length, n, dt = 40.0, 512, 1e-3
kdv = build_system("kdv")
state = soliton_initial(0.7, 20.0, "kdv", length, n, ghost="none")
traj = evolve(state, kdv, t_end=0.4, dt=dt, record_every=10)

# On this gauge slice the even field doubles as the T-component.
us = [s.fields["u"] for s in traj.states]
h = traj.states[1].t - traj.states[0].t
worst = np.zeros(3)
for i in range(2, len(us) - 2):
    u = us[i]
    T = 0.5 * u
    # 4th-order centred stencil for the snapshot-time derivative
    T_t = 0.5 * (-us[i + 2] + 8 * us[i + 1] - 8 * us[i - 1] + us[i - 2]) / (12 * h)
    P = 0.5 * spectral_derivative(u, 1, length)
    Q = -0.5 * spectral_derivative(u, 2, length) - u * T
    res = zero_curvature_components(P, Q, np.zeros(n), np.ones(n), T, u,
                                    np.zeros(n), np.zeros(n), T_t, length)
    worst = np.maximum(worst, [np.max(np.abs(r)) for r in res])

for name, w in zip(("0", "+", "-"), worst):
    print(f"max |curvature component {name}| along the run: {w:.2e}")

# The same data assembles into a sampled connection object whose slice
# constraints are built in.
mid = traj.states[5]
lifted = FieldState(mid.t, length, n,
                    {"u": mid.fields["u"], "T": 0.5 * mid.fields["u"]})
conn = reconstruct_connection(lifted, SLICE_A)
print("\nconnection shapes:", conn.a0.shape, conn.a1.shape)
print("gauge slice pins A1^0 =", conn.a1[0][0],
      " A1^+ =", f"{conn.a1[1][0]:.5f}")
