"""Evaluate uncertainty scores as correctness predictors, then turn one into
an accept/abstain decision rule.

Synthetic setup: 200 tasks where failing tasks tend to get higher
uncertainty, with enough noise to make the thresholds interesting.
"""

import random

from codeuq.evaluation import (
    auroc,
    calibrate_abstention,
    learn_weights,
    pearson,
    spearman,
    WeightTrainingExample,
)

rng = random.Random(11)

scores, pass1, partial = [], [], []
for _ in range(200):
    ok = rng.random() < 0.55
    pass1.append(ok)
    partial.append(1.0 if ok else round(rng.random() * 0.8, 2))
    center = 0.25 if ok else 0.65
    scores.append(min(1.0, max(0.0, rng.gauss(center, 0.15))))

failures = [not p for p in pass1]
print(f"AUROC (failure prediction): {auroc(scores, failures):.3f}")
print(f"Pearson r vs partial credit: {pearson(scores, partial):+.3f}")
print(f"Spearman rho vs partial credit: {spearman(scores, partial):+.3f}")
print("  (negative correlations: more uncertainty, less partial credit)\n")

for cap in (0.05, 0.20):
    report = calibrate_abstention(scores, pass1, fpr_cap=cap, folds=5)
    print(
        f"abstention under FPR cap {cap:.0%}: tau={report.tau:.3f}  "
        f"accuracy {report.accuracy_mean:.3f} +/- {report.accuracy_std:.3f}  "
        f"held-out FPR {report.fpr_mean:.3f} +/- {report.fpr_std:.3f}"
    )

print("\n--- learning the abnormal-disagreement weights ---\n")
# tasks whose failures show up purely as one-side-abnormal disagreement
train = []
for _ in range(40):
    failed = rng.random() < 0.5
    if failed:
        abnormal_cells = rng.randint(6, 10)
        counts = (10 - abnormal_cells, 0, abnormal_cells, 0, 0)
        label = 0.0
    else:
        disagreeing = rng.randint(0, 4)
        counts = (10 - disagreeing, disagreeing, 0, 0, 0)
        label = 1.0
    train.append(
        WeightTrainingExample(
            probabilities=(0.5, 0.5),
            dominant_index=0,
            dominant_pair_counts=((), counts),
            partial_pass1=label,
        )
    )
learned = learn_weights(train)
print(f"learned (a, b, c) = {learned.as_tuple()}")
print("the one-abnormal cost a is pushed up because crashes carry the failure signal here")
