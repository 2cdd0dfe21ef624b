# %% [markdown]
# Calibrating L and R
#
# Five runs with tape-measured ground truth: three forward, one backward and
# one circle. Straight runs fix the radius; only the circle constrains the
# wheel base. The search scores every point of a 50 x 50 grid by the mean
# relative error.

# %%
import warnings

from wheelodom import CommandProfile, ExperimentRecord, GridSpec, WheelParams, grid_search, simulate
from wheelodom.calibration import error_report, render_text

truth = WheelParams(0.64, 0.164)
runs = [("forward", 6.45), ("forward", 17.37), ("forward", 10.62), ("backward", 6.76), ("circle", 2.63)]

experiments = []
for kind, value in runs:
    if kind == "circle":
        profile = CommandProfile.circle(value, speed=1.0)
    else:
        profile = CommandProfile.straight(value if kind == "forward" else -value)
    _, log = simulate(profile, truth)
    experiments.append(ExperimentRecord(kind, value, log, name=f"{kind} {value}"))

# %%
result = grid_search(experiments, GridSpec(), workers=4)
print("grid step: L %.5f m, R %.6f m" % (result.grid.l_step, result.grid.r_step))
print("optimum:", result.best_params)

# %% [markdown]
# Side by side with a tape-measured starting guess.

# %%
measured = WheelParams(0.7, 0.1575)
print(render_text([error_report(measured, experiments), error_report(result.best_params, experiments)]))

# %% [markdown]
# Drop the circle and the wheel base is no longer identifiable.

# %%
with warnings.catch_warnings(record=True) as caught:
    warnings.simplefilter("always")
    straight_only = grid_search(experiments[:4], GridSpec(n_per_axis=20))
print(caught[0].message)
print("R still recovered:", straight_only.best_params.wheel_radius_m)
