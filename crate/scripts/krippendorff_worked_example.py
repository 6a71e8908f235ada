"""Hand computation of nominal Krippendorff alpha for the classic 4-coder, 12-unit
reliability example with missing values. Writes the fixture consumed by the Rust tests."""
import json
from collections import Counter
from fractions import Fraction

N = None
data = [  # rows = coders A..D, columns = units 1..12
    [1, 2, 3, 3, 2, 1, 4, 1, 2, N, N, N],
    [1, 2, 3, 3, 2, 2, 4, 1, 2, 5, N, 3],
    [N, 3, 3, 3, 2, 3, 4, 2, 2, 5, 1, N],
    [1, 2, 3, 3, 2, 4, 4, 1, 2, 5, 1, N],
]
units = list(zip(*data))
coinc = Counter()
for u in units:
    vals = [v for v in u if v is not None]
    m = len(vals)
    if m < 2:
        continue
    for i, a in enumerate(vals):
        for j, b in enumerate(vals):
            if i != j:
                coinc[(a, b)] += Fraction(1, m - 1)
cats = sorted({a for a, _ in coinc})
n_c = {c: sum(coinc[(c, k)] for k in cats) for c in cats}
n = sum(n_c.values())
do = sum(coinc[(c, k)] for c in cats for k in cats if c != k) / n
de = sum(n_c[c] * n_c[k] for c in cats for k in cats if c != k) / (n * (n - 1))
alpha = 1 - do / de
print("n", n, "Do", do, float(do), "De", de, float(de), "alpha", float(alpha))
fixture = {
    "description": "4 coders x 12 units, nominal, missing values as null",
    "coders": [[v for v in row] for row in data],
    "pairable_values": int(n),
    "observed_disagreement": float(do),
    "expected_disagreement": float(de),
    "alpha": float(alpha),
}
with open("../data/fixtures/krippendorff_canonical.json", "w") as fh:
    json.dump(fixture, fh, indent=2)
    fh.write("\n")
