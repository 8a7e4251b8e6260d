"""Occupation density of one path, with the weighted local time at a level.

The binned estimator satisfies the occupation identity exactly for bin
indicators; for smooth test functions the error is of order the bin width.
"""

import numpy as np

from mfvolterra import analysis, hurst, tanaka
from mfvolterra.hurst import TimeGrid
from mfvolterra.simulate import RandomSeed, sample_cholesky

h = hurst.sinusoidal(0.75, 0.15)
grid = TimeGrid.uniform(1.0, 1024)
path = sample_cholesky(grid, h, 1, RandomSeed(3), method="reduced").paths[0]

est = analysis.local_time_binned(path, grid, t_checkpoints=grid.times[::256])
print(f"{est.density.shape[1]} bins of width {est.bin_width:.4f}")
print("mass at checkpoints (should equal t):", est.density @ np.diff(est.x_bins))

bins = est.x_bins
print("occupation residual, g = cos:", analysis.occupation_identity_residual(path, grid, np.cos, bins))

level = float(np.median(path))
w = tanaka.weighted_local_time(path, grid, level, h, bins, grid.times[::128])
print(f"weighted local time at a = {level:.3f}:", np.round(w.values, 4))
k = analysis.local_time_kernel(path, grid, level, 1.0, 1e-3)
print(f"Gaussian-kernel local time at a (eps = 1e-3): {k:.4f}")
