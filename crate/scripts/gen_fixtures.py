"""Deterministic generator for the bundled data under data/.

Produces:
  data/mini/{reviews.jsonl,pois.csv,regions.csv,covariates.csv,labeled.csv,lexicon.csv}
  data/fixtures/{lsva_sentences.csv,all_covariates.csv,rook_grid_5x5.csv}

Re-running with the same seed reproduces the files byte for byte.
"""
import csv
import json
import math
import os
import random

ROOT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "data")
MINI = os.path.join(ROOT, "mini")
FIX = os.path.join(ROOT, "fixtures")

POSITIVE = [
    "plenty of free parking", "parking was easy", "ample parking everywhere",
    "convenient parking right out front", "easy to park", "lots of open parking spaces",
    "parking is free and plentiful", "parking was a breeze", "great parking with plenty of room",
    "parking is easy and free",
]
NEGATIVE = [
    "parking is a nightmare", "parking was terrible", "tight parking spaces",
    "expensive parking and rude attendants", "difficult to park", "the parking lot is tiny and cramped",
    "parking was awful", "we had to park blocks away", "parking is horrible",
    "small parking lot that is always full",
]
NEUTRAL = [
    "parking is located behind the building", "street parking and a garage nearby",
    "parking is across the street", "we parked on level two", "valet parking is offered",
    "parking is shared with the mall", "the parking entrance is on the side street",
    "metered parking on the street",
]
UNRELATED = [
    "saw a policeman in the parking lot", "our room had a view of the parking lot",
    "met our friends in the parking lot", "kids played catch near the parking garage",
    "the bus stopped in the parking lot", "watched fireworks from the parking lot",
]
CORES = {"positive": POSITIVE, "negative": NEGATIVE, "neutral": NEUTRAL, "unrelated": UNRELATED}
PREFIX = ["", "Honestly, ", "Overall, ", "Note that ", "Also, ", "By the way, "]
SUFFIX = ["", " when we visited", " on the weekend", " during lunch", " last time", " at night"]
OTHER_SENTENCES = [
    "The food was great.", "Service was slow.", "Nice place for families.",
    "We walked to the park nearby after lunch.", "Staff were friendly and helpful.",
    "Prices are reasonable.", "The rooms were clean.", "Would come back again.",
    "Music was too loud.", "The view of the park from the patio is lovely.",
]
CATEGORIES = ["Restaurant", "RetailTrade", "Recreation", "PersonalService", "Apartment", "Hotel", "Museum"]


def sentence(rng, label):
    core = rng.choice(CORES[label])
    text = rng.choice(PREFIX) + core + rng.choice(SUFFIX)
    text = text[0].upper() + text[1:]
    return text + rng.choice([".", ".", "!"])


def write_labeled(rng):
    rows = []
    for split, per_class in (("train", 100), ("test", 25)):
        for label in ("positive", "neutral", "negative", "unrelated"):
            for _ in range(per_class):
                rows.append((sentence(rng, label), label, split))
    rng.shuffle(rows)
    with open(os.path.join(MINI, "labeled.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["text", "label", "split"])
        w.writerows(rows)


def write_lexicon():
    lex = {
        "plenty": 1.0, "free": 1.0, "easy": 1.0, "ample": 1.0, "convenient": 1.0,
        "breeze": 1.0, "great": 1.0, "plentiful": 1.0,
        "nightmare": -1.0, "terrible": -1.0, "tight": -1.0, "expensive": -1.0,
        "difficult": -1.0, "tiny": -1.0, "awful": -1.0, "horrible": -1.0, "small": -1.0,
        "rude": -1.0, "cramped": -1.0,
        "located": 0.0, "offered": 0.0, "metered": 0.0, "shared": 0.0,
    }
    with open(os.path.join(MINI, "lexicon.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["term", "valence"])
        for k in sorted(lex):
            w.writerow([k, lex[k]])


def write_mini(rng):
    cbsas = [("C1", 32.78, -96.80, True), ("C2", 43.64, -72.25, False), ("C3", 39.74, -104.99, True)]
    cbsa_effect = {"C1": -0.25, "C2": 0.25, "C3": 0.0}
    cbgs = []
    for ci, (cid, lat, lng, urban) in enumerate(cbsas):
        for g in range(4):
            gid = f"{cid}-G{g + 1}"
            glat = lat + 0.05 * (g % 2) - 0.02 * (g // 2)
            glng = lng + 0.04 * (g // 2) + 0.01 * g
            cbgs.append((gid, cid, glat, glng, urban if g < 3 else not urban))
    # covariates: 12 reviewed CBGs plus 6 without any POI
    variables = ["Population Density", "Poverty", "Walkability", "Avg. POI Score"]
    cov = {}
    for gid, cid, *_ in cbgs:
        cov[gid] = [
            round(rng.uniform(2.0, 30.0), 3),
            round(rng.uniform(4.0, 30.0), 3),
            round(rng.uniform(4.0, 19.0), 3),
            round(rng.uniform(3.8, 4.8), 3),
        ]
    for k in range(6):
        cov[f"X-G{k + 1}"] = [
            round(rng.uniform(10.0, 40.0), 3),
            round(rng.uniform(8.0, 35.0), 3),
            round(rng.uniform(3.0, 12.0), 3),
            round(rng.uniform(3.6, 4.5), 3),
        ]
    mean = [sum(v[j] for v in cov.values()) / len(cov) for j in range(4)]
    sd = [math.sqrt(sum((v[j] - mean[j]) ** 2 for v in cov.values()) / (len(cov) - 1)) for j in range(4)]
    latent = {}
    for gid, cid, *_ in cbgs:
        z = [(cov[gid][j] - mean[j]) / sd[j] for j in range(4)]
        latent[gid] = 0.1 - 0.3 * z[0] + 0.25 * z[3] + cbsa_effect[cid] + rng.gauss(0, 0.05)

    with open(os.path.join(MINI, "covariates.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cbg_id"] + variables)
        for gid in sorted(cov):
            w.writerow([gid] + cov[gid])

    pois = []
    for gi, (gid, cid, glat, glng, urban) in enumerate(cbgs):
        for p in range(5):
            pid = f"P{gi * 5 + p + 1:03d}"
            cat = CATEGORIES[(gi + p) % len(CATEGORIES)]
            pois.append((pid, f"Place {pid}", cat, round(glat + rng.uniform(-0.01, 0.01), 6),
                         round(glng + rng.uniform(-0.01, 0.01), 6), round(rng.uniform(3.5, 4.9), 1), gid, cid, urban))
    with open(os.path.join(MINI, "pois.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["poi_id", "name", "category", "lat", "lng", "avg_score"])
        for pid, name, cat, lat, lng, score, *_ in pois:
            w.writerow([pid, name, cat, lat, lng, score])
    with open(os.path.join(MINI, "regions.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["poi_id", "cbg_id", "cbsa_id", "is_urban"])
        for pid, _, _, _, _, _, gid, cid, urban in pois:
            w.writerow([pid, gid, cid, "true" if urban else "false"])

    with open(os.path.join(MINI, "reviews.jsonl"), "w") as fh:
        rid = 0
        for i in range(500):
            poi = pois[i % len(pois)]
            gid = poi[6]
            p_pos = 1.0 / (1.0 + math.exp(-2.5 * latent[gid]))
            parts = rng.sample(OTHER_SENTENCES, rng.randint(0, 2))
            n_parking = 1 if rng.random() < 0.85 else 2
            for _ in range(n_parking):
                u = rng.random()
                if u < 0.07:
                    label = "unrelated"
                elif u < 0.17:
                    label = "neutral"
                else:
                    label = "positive" if rng.random() < p_pos else "negative"
                parts.insert(rng.randint(0, len(parts)), sentence(rng, label))
            rid += 1
            rec = {
                "review_id": f"R{rid:04d}",
                "poi_id": poi[0],
                "text": " ".join(parts),
                "rating": rng.randint(1, 5) if rng.random() < 0.9 else None,
                "timestamp": f"2021-{rng.randint(1, 12):02d}-{rng.randint(1, 28):02d}T12:00:00Z",
            }
            fh.write(json.dumps(rec) + "\n")


def write_lsva_fixture(rng):
    rows = []
    labels = ["positive"] * 70 + ["negative"] * 70 + ["neutral"] * 35 + ["unrelated"] * 25
    rng.shuffle(labels)
    for label in labels:
        rows.append((sentence(rng, label), label))
    with open(os.path.join(FIX, "lsva_sentences.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["text", "label"])
        w.writerows(rows)


def write_all_covariates(rng):
    names = [
        "Population Density", "Employment Density", "Poverty", "Rural Population",
        "Urban Population", "Median Income", "Highly-Educated", "Democrat", "Zero Car",
        "One Car", ">=2 Cars", "Male", "Age 18-44", "Age 45-64", "Age over 65", "White",
        "Asian", "African American", "Hispanic", "Others", "POI Density", "Road Density",
        "Parking POI Density", "Walkability", "Transit Frequency", "Avg. POI Score",
    ]
    with open(os.path.join(FIX, "all_covariates.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cbg_id"] + names)
        for r in range(5):
            w.writerow([f"G{r + 1}"] + [round(rng.uniform(0.5, 60.0), 3) for _ in names])


def write_rook_grid():
    with open(os.path.join(FIX, "rook_grid_5x5.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["region_a", "region_b"])
        for r in range(5):
            for c in range(5):
                if c + 1 < 5:
                    w.writerow([f"r{r}c{c}", f"r{r}c{c + 1}"])
                if r + 1 < 5:
                    w.writerow([f"r{r}c{c}", f"r{r + 1}c{c}"])


def main():
    os.makedirs(MINI, exist_ok=True)
    os.makedirs(FIX, exist_ok=True)
    rng = random.Random(20240611)
    write_labeled(rng)
    write_lexicon()
    write_mini(rng)
    write_lsva_fixture(rng)
    write_all_covariates(rng)
    write_rook_grid()


if __name__ == "__main__":
    main()
