"""Regenerates the synthetic monthly CSV fixtures under tests/data."""
import csv
import math
import pathlib
import random

OUT = pathlib.Path(__file__).resolve().parent.parent / "tests" / "data"


def months(start_year, start_month, count):
    y, m = start_year, start_month
    for _ in range(count):
        yield f"{y:04d}-{m:02d}"
        m += 1
        if m > 12:
            y, m = y + 1, 1


def write(name, start, values):
    with open(OUT / name, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["date", "value"])
        for d, v in zip(months(*start, len(values)), values):
            w.writerow([d, f"{v:.6f}"])


def main():
    rng = random.Random(20230101)
    n_index = 239
    level, idx = 100.0, []
    for t in range(n_index):
        monthly = 0.45 + 0.25 * math.sin(2 * math.pi * t / 70.0) + 0.12 * rng.gauss(0, 1)
        level *= 1 + monthly / 100.0
        idx.append(level)
    write("cpi_index.csv", (2002, 1), idx)
    infl = [100.0 * (idx[t] - idx[t - 12]) / idx[t - 12] for t in range(12, n_index)]
    write("cpi_inflation.csv", (2003, 1), infl)

    epu, x = [], math.log(140.0)
    for t in range(227):
        x = 0.9 * x + 0.1 * math.log(140.0) + 0.12 * rng.gauss(0, 1)
        epu.append(math.exp(x) * (1.0 + 0.6 * (t > 205)))
    write("epu.csv", (2003, 1), epu)

    gprc, g = [], 0.3
    for t in range(227):
        g = 0.85 * g + 0.15 * 0.3 + 0.04 * rng.gauss(0, 1)
        gprc.append(max(g, 0.02))
    write("gprc.csv", (2003, 1), gprc)

    write("short_series.csv", (2019, 1), [3.0 + 0.1 * t + 0.3 * rng.gauss(0, 1) for t in range(30)])


if __name__ == "__main__":
    main()
