"""Brute-force per-term recount of the LSVA fixture.

For every distinct term, scans all sentences and counts those containing
it. Writes data/fixtures/lsva_expected.csv (min_count 1, bundled
stopwords applied).
"""
import csv
import math
import os

ROOT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "data")


def terms(text):
    out = []
    for w in text.split():
        t = "".join(c for c in w if c.isalnum()).lower()
        if t:
            out.append(t)
    return out


def main():
    with open(os.path.join(ROOT, "stopwords_en.txt")) as fh:
        stop = {l.strip() for l in fh if l.strip()}
    with open(os.path.join(ROOT, "fixtures", "lsva_sentences.csv"), newline="") as fh:
        rows = list(csv.DictReader(fh))
    vocab = sorted({t for r in rows for t in terms(r["text"])} - stop)
    table = []
    for term in vocab:
        hits = [r["label"] for r in rows if term in terms(r["text"])]
        pos = hits.count("positive")
        neg = hits.count("negative")
        table.append((term, len(hits), pos, neg))
    table.sort(key=lambda e: (-e[1], e[0]))
    with open(os.path.join(ROOT, "fixtures", "lsva_expected.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["term", "N_total", "N_positive", "N_negative", "salience", "valence"])
        for term, n, pos, neg in table:
            w.writerow([term, n, pos, neg, repr(math.log10(n)), repr((pos - neg) / n)])


if __name__ == "__main__":
    main()
