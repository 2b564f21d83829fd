"""Synthetic data in the Kaggle SF-crime CSV schemas.

Generated incidents carry real category and district names and a weak,
learnable dependence of category on hour, district and location, so the
whole pipeline can be exercised without the Kaggle files.

    python -m sfcrime.synthetic train.csv test.csv --rows 5000 --seed 1
"""

import argparse
import csv
from datetime import datetime, timedelta

import numpy as np

from .ingest import WEEKDAYS

CATEGORIES = (
    "ARSON", "ASSAULT", "BAD CHECKS", "BRIBERY", "BURGLARY", "DISORDERLY CONDUCT",
    "DRIVING UNDER THE INFLUENCE", "DRUG/NARCOTIC", "DRUNKENNESS", "EMBEZZLEMENT", "EXTORTION",
    "FAMILY OFFENSES", "FORGERY/COUNTERFEITING", "FRAUD", "GAMBLING", "KIDNAPPING",
    "LARCENY/THEFT", "LIQUOR LAWS", "LOITERING", "MISSING PERSON", "NON-CRIMINAL",
    "OTHER OFFENSES", "PORNOGRAPHY/OBSCENE MAT", "PROSTITUTION", "RECOVERED VEHICLE", "ROBBERY",
    "RUNAWAY", "SECONDARY CODES", "SEX OFFENSES FORCIBLE", "SEX OFFENSES NON FORCIBLE",
    "STOLEN PROPERTY", "SUICIDE", "SUSPICIOUS OCC", "TREA", "TRESPASS", "VANDALISM",
    "VEHICLE THEFT", "WARRANTS", "WEAPON LAWS",
)
DISTRICTS = ("BAYVIEW", "CENTRAL", "INGLESIDE", "MISSION", "NORTHERN", "PARK", "RICHMOND",
             "SOUTHERN", "TARAVAL", "TENDERLOIN")
STREETS = ("BRYANT ST", "MARKET ST", "MISSION ST", "OAK ST", "LAGUNA ST", "FELL ST",
           "MASONIC AV", "THOMAS AV", "TURK ST", "ELLIS ST", "JONES ST", "GEARY BL")
_CENTERS = {d: (-122.50 + 0.017 * i, 37.71 + 0.01 * ((3 * i) % 10)) for i, d in enumerate(DISTRICTS)}


def _incidents(n, rng):
    cat_weight = rng.pareto(1.2, len(CATEGORIES)) + 0.01
    cat_weight /= cat_weight.sum()
    # Every category appears at least 3 times so stratified splits work.
    cats = np.concatenate([np.repeat(np.arange(len(CATEGORIES)), 3),
                           rng.choice(len(CATEGORIES), size=max(0, n - 3 * len(CATEGORIES)), p=cat_weight)])
    rng.shuffle(cats)
    cats = cats[:n]
    peak_hour = rng.integers(0, 24, len(CATEGORIES))
    home = rng.integers(0, len(DISTRICTS), len(CATEGORIES))
    start = datetime(2003, 1, 6)
    for c in cats:
        hour = int((peak_hour[c] + rng.normal(0, 4)) % 24)
        d = home[c] if rng.random() < 0.4 else rng.integers(0, len(DISTRICTS))
        district = DISTRICTS[d]
        ts = start + timedelta(days=int(rng.integers(0, 4500)), hours=hour,
                               minutes=int(rng.integers(0, 60)))
        lon, lat = _CENTERS[district]
        lon += rng.normal(0, 0.01)
        lat += rng.normal(0, 0.01)
        street = STREETS[(c + rng.integers(0, 4)) % len(STREETS)]
        if rng.random() < 0.7:
            address = f"{100 * int(rng.integers(0, 30))} Block of {street}"
        else:
            address = f"{street} / {STREETS[rng.integers(0, len(STREETS))]}"
        if rng.random() < 0.002:
            lat = 90.0  # the known placeholder-coordinate artifact
        yield CATEGORIES[c], district, ts, address, round(lon, 9), round(lat, 9)


def write_train(path, n=1000, seed=0):
    rng = np.random.default_rng(seed)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["Dates", "Category", "Descript", "DayOfWeek", "PdDistrict", "Resolution",
                    "Address", "X", "Y"])
        for cat, district, ts, address, lon, lat in _incidents(n, rng):
            w.writerow([ts.strftime("%Y-%m-%d %H:%M:%S"), cat, f"{cat.lower()}, reported",
                        WEEKDAYS[ts.weekday()], district, "NONE", address, lon, lat])


def write_test(path, n=500, seed=1):
    rng = np.random.default_rng(seed)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["Id", "Dates", "DayOfWeek", "PdDistrict", "Address", "X", "Y"])
        for i, (_, district, ts, address, lon, lat) in enumerate(_incidents(n, rng)):
            w.writerow([i, ts.strftime("%Y-%m-%d %H:%M:%S"), WEEKDAYS[ts.weekday()], district,
                        address, lon, lat])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("train")
    ap.add_argument("test", nargs="?")
    ap.add_argument("--rows", type=int, default=5000)
    ap.add_argument("--test-rows", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    write_train(args.train, args.rows, args.seed)
    if args.test:
        write_test(args.test, args.test_rows, args.seed + 1)


if __name__ == "__main__":
    main()
