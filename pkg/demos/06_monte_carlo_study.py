"""A desk-scale Monte-Carlo study: replicate datasets, aggregate importances.

Each replicate draws a fresh dataset, fits a forest, and computes the OOB
permutation importance; the Monte-Carlo mean estimates the importance's
expectation, which the theory says is 0 for noise features and approaches the
oracle value for informative ones. Writes results.csv / raw.csv / meta.json
into demo_output/.
"""

from pathlib import Path

from permimp import ExperimentConfig, ForestParams, run_experiment
from permimp.harness import write_result_bundle

config = ExperimentConfig(
    model="linear",
    n_values=[300],
    sn_values=[1.0, 5.0],
    mc_replicates=10,
    seed=20250810,
    forest=ForestParams(m_trees=120),
    name="demo-study",
)

result = run_experiment(config, threads=2)

print("cell means (MC = 10 replicates):\n")
print("feature   sn=1 mc_mean   sn=5 mc_mean   oracle")
low, high = result.cell(300, 1.0), result.cell(300, 5.0)
for j in range(10):
    print(f"  x{j + 1:<6d} {low.mc_mean[j]:+10.4f}   {high.mc_mean[j]:+10.4f}"
          f"   {high.oracle[j]:7.4f}")

print(f"\nSN_hat means: sn=1 -> {low.sn_mean:.3f}, sn=5 -> {high.sn_mean:.3f}")

out = Path(__file__).parent / "demo_output"
write_result_bundle([result], out)
print(f"\nwrote {out}/results.csv, raw.csv, meta.json")
print("rerunning this script reproduces the files byte-for-byte")
