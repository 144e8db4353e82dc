"""Writes the bundled 20-game season and the log-scores it should produce.

Standard library only; the vSKF recursion below is written from the update
formulas directly and shares nothing with the Rust code.

    python3 golden_season.py ../data
"""
import csv
import datetime
import math
import random
import sys

LN10 = math.log(10.0)
TEAMS = ["Otters", "Herons", "Lynx", "Badgers"]

ENGINES = [
    # label, v0, eps, eta
    ("vskf_bt_table", 0.01, 3e-5, 0.08),
    ("vskf_bt_wide", 1.0, 0.004, 0.0),
]


def logistic(z):
    return 1.0 / (1.0 + 10.0 ** (-z))


def make_season(seed=7):
    rng = random.Random(seed)
    start = datetime.date(2014, 10, 8)
    strength = {t: rng.gauss(0.0, 0.3) for t in TEAMS}
    rows = []
    day = 0
    while len(rows) < 20:
        day += rng.choice([1, 1, 2, 3])
        pairs = TEAMS[:]
        rng.shuffle(pairs)
        for k in range(0, 4, 2):
            if len(rows) == 20:
                break
            home, away = pairs[k], pairs[k + 1]
            p = logistic(strength[home] - strength[away] + 0.08)
            hs = rng.randint(1, 4)
            if rng.random() < p:
                a = rng.randint(0, hs - 1)
            else:
                a = hs + rng.randint(1, 2)
            rows.append((start + datetime.timedelta(days=day), home, away, hs, a))
    # one row out of date order, to exercise the stable sort
    rows[3], rows[5] = rows[5], rows[3]
    return rows


def games(rows):
    index = {}
    for _, h, a, _, _ in rows:
        for t in (h, a):
            index.setdefault(t, len(index))
    ordered = sorted(rows, key=lambda r: r[0])
    first = ordered[0][0]
    return index, [((d - first).days, index[h], index[a], 1 if hs > as_ else 0) for d, h, a, hs, as_ in ordered]


def vskf_scores(gs, m, v0, eps, eta):
    mu = [0.0] * m
    v = [v0] * m
    prev = None
    out = []
    for tau, h, a, y in gs:
        e = 0.0 if prev is None else (tau - prev) * eps
        vb = [vi + e for vi in v]
        z = mu[h] - mu[a] + eta
        p = logistic(z) if y == 1 else logistic(-z)
        out.append(-math.log(p))
        g = LN10 * (y - logistic(z))
        hh = LN10 ** 2 * logistic(z) * logistic(-z)
        den = 1.0 + hh * (vb[h] + vb[a])
        mu[h] += vb[h] * g / den
        mu[a] -= vb[a] * g / den
        v = vb[:]
        v[h] = vb[h] * (1.0 - vb[h] * hh / den)
        v[a] = vb[a] * (1.0 - vb[a] * hh / den)
        prev = tau
    return out


def main(out_dir):
    rows = make_season()
    with open(f"{out_dir}/golden_season.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["date", "home", "away", "home_score", "away_score"])
        for d, h, a, hs, as_ in rows:
            w.writerow([d.isoformat(), h, a, hs, as_])
    index, gs = games(rows)
    with open(f"{out_dir}/golden_scores.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["engine", "t", "logscore"])
        for label, v0, eps, eta in ENGINES:
            for t, s in enumerate(vskf_scores(gs, len(index), v0, eps, eta), start=1):
                w.writerow([label, t, repr(s)])
            sc = vskf_scores(gs, len(index), v0, eps, eta)
            init = sc[: min(4 * len(index), len(sc))]
            final = sc[len(sc) // 2:]
            print(label, repr(sum(init) / len(init)), repr(sum(final) / len(final)))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else ".")
