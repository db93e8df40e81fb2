"""Compare template-selection criteria on the same update sequence.

The gallery is capped at p templates per user, so after each batch the
engine must pick which templates to keep:

  * kmeans   -- p templates closest to the user's dominant cluster centroid
  * mdist    -- the tightest size-p subset (min sum of pairwise distances)
  * dend     -- the most spread-out subset (max sum of pairwise distances)
  * keep_all -- no cap at all, the unbounded baseline

The interesting output is the impostor fraction: how much of the final
gallery is made of other users' samples that slipped in during updating.
Compact criteria (kmeans, mdist) squeeze impostors out; dend hoards them.

    python3 demos/02_selection_methods.py
"""

import statistics

from selfgallery import ExperimentConfig, SynthParams, ThresholdPolicy, run_experiment

config = ExperimentConfig(
    dataset=SynthParams(
        k_users=12, dim=16, sigma=1.0, separation=6.0, tail_eps=0.15,
        samples_per_user=42, seed=7,
    ),
    p=6,
    methods=("kmeans", "mdist", "dend", "keep_all"),
    n_batches=7,
    policy=ThresholdPolicy.zero_far(),
    runs=5,
    base_seed=100,
    out_dir=None,
    write_scatter=False,
)

rows, _ = run_experiment(config)
last_batch = max(r["batch"] for r in rows)

print(f"{'method':<10} {'final EER':>10} {'impostor frac':>14} {'bytes':>8}")
for method in ("kmeans", "mdist", "dend", "keep_all", "no_update"):
    finals = [r for r in rows if r["method"] == method and r["batch"] == last_batch]
    eer = statistics.fmean(r["eer"] for r in finals)
    imp = statistics.fmean(r["impostor_fraction"] for r in finals)
    size = max(r["gallery_bytes"] for r in finals)
    print(f"{method:<10} {eer:>10.4f} {imp:>14.4f} {size:>8}")

print("\n(means over 5 independent splits; no_update never touches the gallery)")
