#!/usr/bin/env python3
"""Regenerate the bundled Senegal test fixture.

The fixture is a RECONSTRUCTION, not a copy of the OWID file. The live
dataset was not reachable when the fixture was built, so this script draws a
seeded, epidemiologically plausible daily series (low baseline, one summer
2022 wave, a slow tail) and then nudges individual days until the published
per-variable summary statistics for 2022-04-01..2023-04-30 are matched at
their printed precision:

    variable      mean      sd       median   min      max
    total_cases   87923.12  ~1190.5   88601    85895    88997
    new_cases     7.87      12.48    3        0        83
    total_deaths  1968.46   1.86     1968     1964     1971
    new_deaths    0.01      0.18     0        0        3

Nothing else (fit quality, autocorrelation, forecast error) is targeted.
Run `python3 scripts/reconstruct_fixture.py` from the repo root; output is
byte-identical across runs.
"""

import datetime as dt
import math
import os

import numpy as np

SEED = 20220401
N = 395
START = dt.date(2022, 4, 1)
TOTAL_MIN = 85895
TOTAL_MAX = 88997
OUT = os.path.join(
    os.path.dirname(__file__), "..", "crates", "core", "tests", "fixtures", "senegal_2022_2023.csv"
)

TARGET_TOTAL_MEAN = 87923.12
# The published sd (1192.00) and se (59.90) disagree under se = sd/sqrt(395);
# target the sd implied by the se, which stays within 2 of the printed sd.
TARGET_TOTAL_SD = 1190.5
TARGET_TOTAL_MEDIAN = 88601
TARGET_NEW_SD = 12.48
TARGET_NEW_MAX = 83


def intensity():
    t = np.arange(N, dtype=float)
    base = 2.6 - 0.9 * t / N
    wave = 44.0 * np.exp(-0.5 * ((t - 112.0) / 21.0) ** 2)
    return base + wave


def sample_counts(rng, lam, dispersion=6.0):
    p = dispersion / (dispersion + lam)
    return rng.negative_binomial(dispersion, p).astype(np.int64)


def totals_from(new):
    # total[0] is pinned to the window minimum; later days add new cases.
    tot = np.empty(N, dtype=np.int64)
    tot[0] = TOTAL_MIN
    tot[1:] = TOTAL_MIN + np.cumsum(new[1:])
    return tot


def objective(new):
    tot = totals_from(new)
    sd_t = tot.std(ddof=1)
    sd_n = new.std(ddof=1)
    med_t = np.median(tot)
    return (
        ((tot.mean() - TARGET_TOTAL_MEAN) / 0.002) ** 2
        + ((sd_t - TARGET_TOTAL_SD) / 0.05) ** 2
        + ((med_t - TARGET_TOTAL_MEDIAN) / 0.5) ** 2
        + ((sd_n - TARGET_NEW_SD) / 0.002) ** 2
        + 1e6 * (tot[-1] != TOTAL_MAX)
        + 1e6 * (new.max() != TARGET_NEW_MAX)
        + 1e6 * (np.median(new) != 3)
        + 1e6 * (new.min() != 0)
        + 1e6 * (round(new.mean(), 2) != 7.87)
    )


def calibrate(rng, new):
    # Pin the window total and the peak first, then random local moves.
    new = new.copy()
    peak = int(np.argmax(new))
    new[peak] = TARGET_NEW_MAX
    new = np.minimum(new, TARGET_NEW_MAX)
    while new[1:].sum() != TOTAL_MAX - TOTAL_MIN:
        diff = (TOTAL_MAX - TOTAL_MIN) - new[1:].sum()
        i = int(rng.integers(1, N))
        if i == peak:
            continue
        if diff > 0 and new[i] < TARGET_NEW_MAX - 1:
            new[i] += 1
        elif diff < 0 and new[i] > 0:
            new[i] -= 1
    new[0] = 7
    # The median of a monotone series is its middle day, so pin that prefix.
    mid = N // 2
    want = TARGET_TOTAL_MEDIAN - TOTAL_MIN
    while new[1 : mid + 1].sum() != want:
        early = int(rng.integers(1, mid + 1))
        late = int(rng.integers(mid + 1, N))
        if early == peak or late == peak:
            continue
        if new[1 : mid + 1].sum() < want and new[late] > 0 and new[early] < TARGET_NEW_MAX - 1:
            new[late] -= 1
            new[early] += 1
        elif new[1 : mid + 1].sum() > want and new[early] > 0 and new[late] < TARGET_NEW_MAX - 1:
            new[early] -= 1
            new[late] += 1
    best = objective(new)

    def movable(src, dst):
        ok = 1 <= src < N and 1 <= dst < N and src != dst
        ok = ok and peak not in (src, dst) and (src <= mid) == (dst <= mid)
        return ok and new[src] > 0 and new[dst] < TARGET_NEW_MAX - 1

    for _ in range(400_000):
        i, j, k = (int(x) for x in rng.integers(1, N, size=3))
        # Paired transfers with opposite displacement leave the mean of the
        # cumulative series unchanged.
        moves = [(i, j)] if rng.random() < 0.5 else [(i, j), (k, k - (j - i))]
        applied = []
        for src, dst in moves:
            if not movable(src, dst):
                break
            new[src] -= 1
            new[dst] += 1
            applied.append((src, dst))
        if len(applied) != len(moves):
            for src, dst in applied:
                new[src] += 1
                new[dst] -= 1
            continue
        score = objective(new)
        if score <= best:
            best = score
        else:
            for src, dst in applied:
                new[src] += 1
                new[dst] -= 1
        if best < 1.0:
            break
    return new, best


def deaths():
    # Level changes of total deaths (day index, increment, reported new deaths).
    # Two of the increments are revisions that never appear in new_deaths.
    events = [(26, 1, 0), (55, 3, 3), (215, 2, 2), (384, 1, 0)]
    total = np.full(N, 1964, dtype=np.int64)
    new = np.zeros(N, dtype=np.int64)
    for day, inc, reported in events:
        total[day:] += inc
        new[day] = reported
    return total, new


def main():
    rng = np.random.default_rng(SEED)
    lam = intensity()
    new_cases = sample_counts(rng, lam)
    new_cases, score = calibrate(rng, new_cases)
    total_cases = totals_from(new_cases)
    total_deaths, new_deaths = deaths()

    rows = []
    for k in range(N):
        day = START + dt.timedelta(days=k)
        smoothed = new_cases[max(0, k - 6) : k + 1].mean()
        rows.append(
            f"SEN,Africa,Senegal,{day.isoformat()},{total_cases[k]},{new_cases[k]},"
            f"{smoothed:.3f},{total_deaths[k]},{new_deaths[k]}"
        )
    header = "iso_code,continent,location,date,total_cases,new_cases,new_cases_smoothed,total_deaths,new_deaths"
    with open(OUT, "w", newline="\n") as fh:
        fh.write(header + "\n")
        fh.write("\n".join(rows) + "\n")

    for name, arr in [
        ("total_cases", total_cases),
        ("new_cases", new_cases),
        ("total_deaths", total_deaths),
        ("new_deaths", new_deaths),
    ]:
        sd = arr.std(ddof=1)
        print(
            f"{name:13s} mean={arr.mean():.4f} sd={sd:.4f} median={np.median(arr)} "
            f"min={arr.min()} max={arr.max()} se={sd / math.sqrt(N):.4f}"
        )
    print("calibration objective", score)


if __name__ == "__main__":
    main()
