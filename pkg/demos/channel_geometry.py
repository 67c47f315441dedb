"""How fractional order interacts with a low-density channel.

A two-cluster density separated by a horizontal low-density channel of depth
h interpolates between two geometries: at h = 1 the density is uniform and
the labels alone (corners (0.25, 0.25) and (0.75, 0.75)) determine the
decision boundary, which follows the anti-diagonal.  As h drops to 0 the
channel becomes a hard barrier and every classifier snaps to the vertical
bisector of the channel's weighted geometry.  The fractional order alpha of
the prior barely matters: the MAP sign fields for alpha in {1, 2, 3} agree
on almost every grid node, because the geometry is carried by the density
weighting inside the operator, not by the smoothness exponent.

Run:  python3 demos/channel_geometry.py            (about half a minute)
"""

from pathlib import Path

import numpy as np

from graphssl.experiments import ExperimentConfig, run

out = Path("demo_output/channel_geometry")
cfg = ExperimentConfig(
    experiment="channel",
    out_dir=out,
    params={"grid_n": 64},  # quarter-resolution for a quick look
)
result = run(cfg)

print("decision-boundary agreement (fraction of grid nodes)")
print(f"{'h':>6} {'alpha':>6} {'vs diagonal':>12} {'vs vertical':>12}")
for h, alpha, diag, vert in result["boundary"]:
    print(f"{h:6.2f} {alpha:6.1f} {diag:12.4f} {vert:12.4f}")

print("\ncross-order sign agreement, pooled over the h sweep")
pooled = {}
for h, ai, aj, agree in result["pairs"]:
    pooled.setdefault((ai, aj), []).append(agree)
for (ai, aj), vals in pooled.items():
    print(f"  alpha {ai:g} vs {aj:g}: {np.mean(vals):.4f}")

print(f"\nfull fields written to {out}/")
