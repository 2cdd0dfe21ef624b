# %% [markdown]
# Odometry in the mapping robot's frame
#
# The robot rides on the flatbed, 1.21 m ahead of the rear axle along y and
# 0.59 m above it. Both frames share orientation, so the transform is a pure
# translation.

# %%
import numpy as np

from wheelodom import CommandProfile, WheelParams, integrate_log, simulate
from wheelodom.transform import VEHICLE_TO_UGV, RigidTransform3D, apply, compose, invert, transform_trajectory

print(VEHICLE_TO_UGV.rotation)
print("origin maps to", apply(VEHICLE_TO_UGV, (0, 0, 0)))

# %%
params = WheelParams(0.64, 0.164)
_, log = simulate(CommandProfile(((1.0, 0.2, 5.0),), 50.0), params)
track = transform_trajectory(integrate_log(log, params), VEHICLE_TO_UGV)
print(np.column_stack([track.points, track.heading])[::50])

# %% [markdown]
# General transforms compose and invert; a yaw-only rotation keeps heading.

# %%
yaw = RigidTransform3D.from_yaw(np.pi / 2)
both = compose(VEHICLE_TO_UGV, yaw)
p = np.array([1.0, 2.0, 3.0])
print(apply(both, p), apply(invert(both), apply(both, p)))
