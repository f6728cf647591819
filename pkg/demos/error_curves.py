"""Trace how downstream error falls as more top-ranked features are kept.

For each k in a doubling grid, keep the k best-ranked columns and score a
1-nearest-neighbor regressor on held-out folds. A good ranker drives the
error down early; every curve ends at the same point because keeping all
columns makes the ranking irrelevant.
"""

from ufrank import FoldPlan, SynthSpec, error_curve, make_planted, make_ranker

spec = SynthSpec(m=150, n_informative=4, n_noise=28, clusters=3,
                 separation=4.0, seed=7)
d = make_planted(spec)
plan = FoldPlan.make(d.m, n_folds=10, seed=7)
print(f"dataset {d.name}: {d.m} rows, {d.n} columns, 10-fold plan\n")

curves = {}
for method in ("genie3", "urelief"):
    ranker = make_ranker(method, trees=50, neighbors=30, seed=7)
    curves[method] = error_curve(d, ranker, plan)

ks = curves["genie3"].k_values
print(f"{'k':>4} " + "".join(f"{m:>12}" for m in curves))
for i, k in enumerate(ks):
    row = "".join(f"{curves[m].mean_mse[i]:12.4f}" for m in curves)
    print(f"{k:>4} {row}")

endpoint = {m: c.mean_mse[-1] for m, c in curves.items()}
assert len(set(endpoint.values())) == 1
print(f"\nboth curves end at {endpoint['genie3']:.4f} once k = n = {ks[-1]}")
