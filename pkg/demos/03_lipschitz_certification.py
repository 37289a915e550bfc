"""Empirical certification of the Lipschitz constants.

Every stated constant is compared in log space against the measured change
on random perturbation pairs that respect the hypotheses. The summary lists
the smallest margin per lemma; a negative margin is a violation.
"""

import numpy as np

from sar.certify import INFORMATIONAL, certify_lipschitz, summarize
from sar.forward import forward
from sar.instance import random_system, sample_x_pair, stream

recs = certify_lipschitz(200, seed=7, R=4.5)
table = summarize(recs)
print(f"{'lemma':45} {'checks':>7} {'failed':>7} {'skipped':>8} {'min margin':>11}")
for lemma in sorted(table):
    e = table[lemma]
    tag = "  (informational)" if lemma in INFORMATIONAL else ""
    print(f"{lemma:45} {e['checks']:7d} {e['failed']:7d} {e['skipped']:8d} "
          f"{e['minMargin']:11.3f}{tag}")

# The log-softmax bound with constant 1 fails: log has slope 1/f > 1 on (0, 1),
# so the change in h is always larger than the change in f.
sys = random_system(3, 2, 4.5, seed=1)
p = sample_x_pair(sys, stream(1, 0))
s0, s1 = forward(sys, p.x), forward(sys, p.y)
dh = np.linalg.norm(s0.h - s1.h, axis=1)
df = np.linalg.norm(s0.f - s1.f, axis=1)
print("per-block |dh| / |df|:", dh / df)
print("1 / min f per block  :", 1 / s0.f.min(axis=1))
