# %% [markdown]
# Dead reckoning from wheel ticks
#
# Two encoders sit on the passive rear wheels of a towed platform. Each
# reports a cumulative count at 4096 counts per revolution. This script
# drives a simulated platform around a loop and integrates the counts back
# into a pose track.

# %%
import math

import numpy as np

from wheelodom import CommandProfile, WheelParams, circle_diameter, integrate_log, path_length, simulate

params = WheelParams(wheel_base_m=0.64, wheel_radius_m=0.164)
print("one count of travel:", params.tick_quantum_m, "m")

# %% [markdown]
# A straight 10 m run at 1 m/s. Ticks are floored from the true wheel angle,
# so the estimate can trail ground truth by at most one count per wheel.

# %%
gt, log = simulate(CommandProfile.straight(10.0, speed=1.0, sample_rate_hz=100), params)
est = integrate_log(log, params)
print("samples:", len(log))
print("ground truth end:", gt.trajectory.final)
print("odometry end:    ", est.final)
print("position error: %.2e m" % np.hypot(*(est.positions[-1] - gt.trajectory.positions[-1])))

# %% [markdown]
# A full circle of 2.63 m diameter. The diameter comes from a least-squares
# circle fit over every integrated position.

# %%
_, log = simulate(CommandProfile.circle(2.63, speed=1.0), params)
est = integrate_log(log, params)
print("fitted diameter: %.4f m" % circle_diameter(est))
print("path length: %.4f m (circumference %.4f m)" % (path_length(est), math.pi * 2.63))

# %% [markdown]
# Wrong parameters scale the straight runs and bend the circle.

# %%
wrong = WheelParams(0.7, 0.1575)
print("with L=0.7, R=0.1575: diameter %.4f m" % circle_diameter(integrate_log(log, wrong)))
