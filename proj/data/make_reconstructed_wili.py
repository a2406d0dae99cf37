#!/usr/bin/env python3
"""Regenerates wili_national_reconstructed.csv.

The bundled dataset is a shape-faithful reconstruction of the public CDC
national wILI series for the 1997/98-2018/19 seasons, built from each
season's published peak height and peak timing. It exists so the test suite
and the examples run offline; it is NOT the official FluView export. For
exact reproduction of published numbers, download the national wILI CSV from
FluView and pass it via --data instead.

Each season is an asymmetric bell over epi weeks 40..17 anchored at the
season's peak, with a small week-52 reporting bump and deterministic
low-amplitude texture noise.
"""

import math
import random

# season start year -> (peak wILI %, peak epi week, rise width, fall width)
SEASONS = {
    1997: (3.4, 52, 5.0, 6.0),
    1998: (4.3, 1, 5.5, 6.5),
    1999: (5.2, 52, 4.5, 6.0),
    2000: (3.2, 5, 7.0, 5.5),
    2001: (3.4, 8, 7.5, 5.0),
    2002: (3.1, 7, 7.5, 5.5),
    2003: (7.6, 51, 3.5, 5.0),
    2004: (5.4, 6, 6.5, 5.0),
    2005: (3.4, 10, 8.0, 4.5),
    2006: (3.5, 7, 7.5, 5.0),
    2007: (6.0, 6, 6.0, 4.5),
    2008: (3.6, 7, 7.0, 5.0),
    2009: (7.7, 42, 2.5, 7.0),
    2010: (4.5, 5, 6.5, 5.5),
    2011: (2.4, 11, 8.5, 4.5),
    2012: (6.1, 52, 4.5, 6.5),
    2013: (4.6, 52, 5.0, 6.0),
    2014: (6.0, 52, 4.5, 6.0),
    2015: (3.6, 10, 8.0, 4.5),
    2016: (5.1, 7, 6.5, 5.5),
    2017: (7.5, 5, 5.5, 4.5),
    2018: (5.0, 7, 7.0, 6.0),
}

BASELINE_START = 1.2   # typical wILI at week 40
BASELINE_END = 1.6     # typical wILI at week 17
HOLIDAY_BUMP = 0.10    # relative week-52 reporting bump
NOISE_SD = 0.06


def epi_week(index: int) -> int:
    return 40 + index if index <= 12 else index - 12


def season_curve(start_year: int, rng: random.Random) -> list[float]:
    peak, peak_week, rise, fall = SEASONS[start_year]
    peak_index = peak_week - 40 if peak_week >= 40 else peak_week + 12
    values = []
    for i in range(30):
        baseline = BASELINE_START + (BASELINE_END - BASELINE_START) * i / 29.0
        d = (i - peak_index) / (rise if i < peak_index else fall)
        v = baseline + (peak - baseline) * math.exp(-0.5 * d * d)
        if epi_week(i) == 52:
            v *= 1.0 + HOLIDAY_BUMP
        v += rng.gauss(0.0, NOISE_SD)
        values.append(max(0.3, round(v, 2)))
    return values


def main() -> None:
    rng = random.Random(19972019)
    with open("wili_national_reconstructed.csv", "w", encoding="ascii") as out:
        out.write("region,year,week,wili\n")
        for start_year in sorted(SEASONS):
            for i, value in enumerate(season_curve(start_year, rng)):
                week = epi_week(i)
                year = start_year if week >= 40 else start_year + 1
                out.write(f"national,{year},{week},{value}\n")


if __name__ == "__main__":
    main()
