"""Graph Laplacian spectra converge to a continuum operator's spectrum.

For a uniform density on the unit square, the weighted continuum operator is
(minus) the Neumann Laplacian with eigenvalues pi^2 (i^2 + j^2).  Rescaled
graph Laplacian eigenvalues on an epsilon-neighborhood graph approach these
values as n grows, and both spectra obey Weyl's law: lambda_k grows like
k^{2/d}, so a log-log fit of eigenvalue against index has slope 2/d.

Run:  python3 demos/spectra_and_weyl.py            (about ten seconds)
"""

from pathlib import Path

from graphssl.experiments import ExperimentConfig, run

out = Path("demo_output/spectra")
cfg = ExperimentConfig(
    experiment="spectra",
    out_dir=out,
    params={"n_values": [400, 1600], "n_seeds": 3},  # fewer seeds than default
)
result = run(cfg)

analytic = result["analytic"]
print(f"{'k':>3} {'analytic':>10} {'graph n=400':>12} {'graph n=1600':>13}")
for k in range(len(analytic)):
    print(f"{k + 1:3d} {analytic[k]:10.2f} "
          f"{result['graph'][400][k]:12.2f} {result['graph'][1600][k]:13.2f}")

print("\nmax relative error over modes 2..10:")
for n, e in result["max_errors"].items():
    print(f"  n = {n:5d}: {e:.3f}")

print("\nfitted Weyl exponents (expect 2/d = 1 in d=2, 2/3 in d=3):")
for setting, slope in result["weyl"].items():
    print(f"  {setting:18s} {slope:.3f}")

print(f"\nCSV output in {out}/")
