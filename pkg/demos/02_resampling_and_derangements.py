"""The stochastic building blocks: resampling schemes and derangements.

Subsampling without replacement leaves a fixed number gamma_n = n - a_n of
out-of-bag points per tree; bootstrapping leaves a random number with mean
fraction (1 - 1/n)^n. Permutations used by the importance measure are drawn
uniformly from the fixed-point-free class.
"""

from collections import Counter

import numpy as np

from permimp import (
    SeedSpec,
    bootstrap_with_replacement,
    oob_probability,
    random_derangement,
    subsample_without_replacement,
)

seed = SeedSpec(19)

# --- subsampling: the OOB fraction is deterministic -------------------------
rec = subsample_without_replacement(n=100, a_n=67, seed=seed.child("sub"))
print(f"subsample n=100, a_n=67: in-bag {rec.in_bag.size}, oob {rec.oob.size}")
print(f"theoretical OOB tree fraction c_n = {oob_probability(100, 67):.4f}")

hits = sum(17 in subsample_without_replacement(100, 67, seed.child("sub", t)).oob
           for t in range(2000))
print(f"observation 17 was OOB in {hits}/2000 draws ({hits / 2000:.4f})")

# --- bootstrap: the OOB size is random --------------------------------------
sizes = [bootstrap_with_replacement(100, seed.child("boot", t)).oob.size
         for t in range(2000)]
print(f"\nbootstrap n=100: mean OOB fraction {np.mean(sizes) / 100:.4f}, "
      f"limit (1-1/n)^n = {oob_probability(100, scheme='with_replacement'):.4f}")
print(f"OOB sizes range over draws: {min(sizes)}..{max(sizes)}")

# --- derangements: no point may stay in place -------------------------------
print("\nthe unique derangement of 2 elements:",
      random_derangement(2, seed.child("d2")))

counts = Counter(tuple(random_derangement(4, seed.child("d4", t)))
                 for t in range(18000))
print(f"k=4 has {len(counts)} distinct derangements (theory: 9); "
      f"draw frequencies min/max: {min(counts.values())}/{max(counts.values())} "
      f"(uniform would be {18000 // 9})")
