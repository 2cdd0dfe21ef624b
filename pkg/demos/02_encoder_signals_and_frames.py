# %% [markdown]
# From A/B levels to a tick log
#
# The microcontroller decodes the quadrature channels and ships the counts
# in 21-byte frames. Here both stages are run in software: the simulator emits
# A/B levels, the decoder turns them back into counts, and a corrupted frame
# stream is recovered by the parser.

# %%
import numpy as np

from wheelodom import CommandProfile, WheelParams, decode_stream, emit_quadrature, simulate
from wheelodom.protocol import FRAME_SIZE, encode_ticklog, frames_to_ticklog, parse_stream

params = WheelParams(0.64, 0.164)
_, log = simulate(CommandProfile(((0.8, 0.5, 2.0), (-0.4, 0.0, 1.0)), 100.0), params)

# %% [markdown]
# Every count becomes one edge on one channel. Four samples per count at the
# fastest wheel keep consecutive samples at most one state apart.

# %%
left, right = emit_quadrature(log, params, oversample_factor=4)
print("quadrature samples per wheel:", len(left))
decoded = decode_stream(left, policy="fail")
print("decoded left total:", decoded.final, " logged:", log.left[-1] - log.left[0])

# %% [markdown]
# Sampling a channel too slowly can skip a state, which shows up as both
# bits changing at once. The skip policy counts those and carries on.

# %%
sparse = left.__class__(left.timestamps_us[::10], left.a[::10], left.b[::10])
lossy = decode_stream(sparse, policy="skip")
print("illegal transitions:", lossy.illegal_transitions, " total:", lossy.final)

# %% [markdown]
# Serialize to frames, flip a bit in frame 10, splice noise into the
# middle, and parse it again.

# %%
data = bytearray(encode_ticklog(log))
data[10 * FRAME_SIZE + 7] ^= 0x04
rng = np.random.default_rng(1)
data = bytes(data[:50 * FRAME_SIZE]) + rng.integers(0, 256, 33, dtype=np.uint8).tobytes() + bytes(
    data[50 * FRAME_SIZE:])
frames, diag = parse_stream(data)
print("frames sent:", len(log), " recovered:", len(frames))
print("diagnostics:", diag.as_dict())
recovered = frames_to_ticklog(frames)
print("first rows:", list(recovered.rows())[:3])
