"""Expected pair collisions (k-1)/(k+1) against a uniform-coordinate Monte Carlo."""

import numpy as np

from ringcoord.collisions import coordinate_space_size, expected_collisions, simulate_uniform_collisions

rng = np.random.default_rng(0)
print("  k      N   E[X]     Monte Carlo (+/- 1 se)")
for k in (2, 3, 5, 10, 20, 50, 100):
    mean, se = simulate_uniform_collisions(k, 20_000, rng)
    print(f"{k:3d} {coordinate_space_size(k):6d}  {expected_collisions(k):.4f}   {mean:.4f} +/- {se:.4f}")
