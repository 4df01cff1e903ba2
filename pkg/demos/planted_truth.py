"""
Recovering planted labels from ratings alone
============================================

A community where sixty reputable members rate honestly and forty scam
members prop each other up.  The engine never sees the labels; the
Pearson correlation between its scores and the ground truth measures
how well the structure alone separates the clusters.
"""

from liquidrank.config import EngineConfig
from liquidrank.engine import run_windows
from liquidrank.evaluate import pearson
from liquidrank.ingest import Periodic
from liquidrank.synth import planted_truth_community

records, labels = planted_truth_community(n_participants=100, seed=11)
print(f"{len(records)} ratings over {len(labels)} participants "
      f"({sum(labels.values()):.0f} reputable)")

final = None
for _, state, _ in run_windows(records, Periodic(100), 0, EngineConfig()):
    final = state

r = pearson(labels, final)
print(f"pearson vs planted labels: {r:.4f}")
print()

ranking = sorted(final.values.items(), key=lambda kv: (-kv[1], kv[0]))
print("top of the ranking        bottom of the ranking")
for (hi, hv), (lo, lv) in zip(ranking[:5], ranking[-5:]):
    print(f"  {hi} {hv:.4f} [{labels[hi]:.0f}]      {lo} {lv:.4f} [{labels[lo]:.0f}]")

# scam members sit at the bottom despite their mutual praise: their
# raters carry no reputation, so the praise carries no weight
