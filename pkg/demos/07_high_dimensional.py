"""Variable selection with more features than observations (p = n + 5).

Only the first five coefficients are non-zero, so the importance measure has
to find 5 needles among hundreds of noise features. Exact unbiasedness on the
noise features keeps their Monte-Carlo means pinned near zero, which is what
makes the separation work even though p > n.
"""

import numpy as np

from permimp import ExperimentConfig, ForestParams, run_experiment

config = ExperimentConfig(
    model="linear",
    high_dim=True,  # p = n + 5, coefficients [2, 4, 2, -3, 1, 0, ..., 0]
    n_values=[150],
    sn_values=[3.0],
    mc_replicates=8,
    seed=67,
    forest=ForestParams(m_trees=150),
    name="demo-highdim",
)

cell = run_experiment(config, threads=2).cell(150, 3.0)
mean = cell.mc_mean
print(f"p = {cell.p} features, n = 150 observations\n")
print("informative mc_means:")
for j in range(5):
    print(f"  x{j + 1}: {mean[j]:+.4f}   (oracle {cell.oracle[j]:.4f})")

noise = mean[5:]
print(f"\n{noise.size} noise features: "
      f"mean of means {noise.mean():+.5f}, largest |mean| {np.abs(noise).max():.5f}")
print(f"separation: min informative {mean[:5].min():.4f} "
      f"vs max noise {noise.max():.4f}")

ranked = np.argsort(mean)[::-1][:5] + 1
print(f"\ntop-5 features by importance: {list(ranked)} (truth: [2, 4, 1, 3, 5] "
      "in magnitude order)")
