"""Regenerate the bundled stand-in sleep dataset.

The original survey CSV is not redistributable here, so the repository ships a
deterministic stand-in with the same schema, the same row count, and the same
headline joint patterns (occupation/gender mix, disorder and BMI margins,
stress/sleep/heart-rate dependence). Rows are laid out in homogeneous blocks,
mirroring the heavy template repetition of the original file. Ages cycle and
step counts get small bumps inside each block so that no two rows collide
after the id column is dropped.

Run from the repository root:

    python scripts/rebuild_stand_in_dataset.py [--out data/sleep_health_and_lifestyle.csv]
"""

from __future__ import annotations

import argparse
import collections
import csv
from dataclasses import dataclass, field
from pathlib import Path

HEADER = [
    "Person ID",
    "Gender",
    "Age",
    "Occupation",
    "Sleep Duration",
    "Quality of Sleep",
    "Physical Activity Level",
    "Stress Level",
    "BMI Category",
    "Blood Pressure",
    "Heart Rate",
    "Daily Steps",
    "Sleep Disorder",
]


@dataclass
class Block:
    """One homogeneous run of rows; list-valued fields vary per row."""

    occupation: str
    count: int
    gender: str | list[str]
    age_lo: int
    age_hi: int
    duration: float | list[float]
    quality: int | list[int]
    activity: int
    stress: int
    bmi: str | list[str]
    bp: str
    heart_rate: int
    steps: int
    disorder: str
    extra: dict = field(default_factory=dict)

    def pick(self, value, i):
        if isinstance(value, list):
            if len(value) != self.count:
                raise ValueError(
                    f"{self.occupation}: per-row list has {len(value)} entries for {self.count} rows"
                )
            return value[i]
        return value

    def rows(self):
        span = self.age_hi - self.age_lo + 1
        for i in range(self.count):
            age = self.age_lo + (i % span)
            steps = self.steps + 25 * (i // span)
            yield [
                self.pick(self.gender, i),
                age,
                self.occupation,
                f"{self.pick(self.duration, i):.1f}",
                self.pick(self.quality, i),
                self.activity,
                self.stress,
                self.pick(self.bmi, i),
                self.bp,
                self.heart_rate,
                steps,
                self.disorder,
            ]


M, F = "Male", "Female"
NONE, APNEA, INSOMNIA = "None", "Sleep Apnea", "Insomnia"
NORM, NW, OW, OB = "Normal", "Normal Weight", "Overweight", "Obese"

BLOCKS = [
    # Doctors: a large short-sleep high-stress core, a calmer long-sleep wing.
    Block("Doctor", 28, M, 29, 33, 6.0, 5, 35, 8, NORM, "122/80", 74, 4400, NONE),
    Block("Doctor", 6, M, 30, 32, 5.9, 5, 40, 8, OW, "124/82", 76, 4600, INSOMNIA),
    Block("Doctor", 8, M, 34, 38, 6.4, 5, 55, 6, NORM, "125/80", 74, 5600, NONE),
    Block("Doctor", 15, M, 36, 43, 7.4, 8, 65, 4, NORM, "118/76", 68, 7200, NONE),
    Block("Doctor", 3, F, 36, 38, 7.4, 8, 65, 4, NORM, "118/76", 68, 7200, NONE),
    Block("Doctor", 6, M, 44, 49, 7.1, 7, 50, 5, [OW, OW, OW, OW, OB, OB], "135/88", 78, 6000, APNEA),
    Block("Doctor", 5, F, 35, 39, 7.6, 8, 60, 3, NW, "115/75", 67, 7500, NONE),
    # Nurses: young high-stress apnea block, older settled apnea block, small
    # insomnia wing with flat (unrefreshing) sleep despite normal hours.
    Block("Nurse", 12, F, 29, 32, 6.1, 5, 90, 8, OW, "132/87", 75, 10000, APNEA),
    Block("Nurse", 34, F, 50, 57, 8.1, [9] * 32 + [5] * 2, 75, 3, OW, "140/95", 68, 7000, APNEA),
    Block("Nurse", 4, F, 45, 48, 7.8, 5, 40, 3, OW, "138/92", 68, 4600, APNEA),
    Block("Nurse", 5, M, 48, 52, 7.6, 8, 65, 4, OW, "135/90", 70, 6500, APNEA),
    Block("Nurse", 9, F, 36, 40, 7.1, 7, 55, 5,
          [NORM] * 8 + [NW], "125/82", 72, 6000, NONE),
    Block("Nurse", 8, F, 31, 34, 7.0, [5, 5, 5, 5, 5, 5, 5, 6], 40, 7,
          [NORM, NORM, NORM, NORM, NW, NW, NW, NW], "128/85", 76, 4300, INSOMNIA),
    Block("Nurse", 1, F, 27, 27, 6.5, 7, 42, 6, NW, "120/80", 77, 4800, NONE),
    # Engineers: long restful sleep at low activity for the big female block,
    # which keeps activity from tracking sleep quality on its own.
    Block("Engineer", 24, F, 30, 36, 8.3, 9, 30, 3, NORM, "125/80", 65, 4000, NONE),
    Block("Engineer", 17, M, 38, 44, 7.8, 8, 45, 4, NORM, "118/76", 68, 6500, NONE),
    Block("Engineer", 3, F, 38, 40, 7.8, 8, 45, 4, NORM, "118/76", 68, 6500, NONE),
    Block("Engineer", 6, M, 28, 31, 6.6, 6, 75, 5, NORM, "120/80", 75, 8500, NONE),
    Block("Engineer", 3, M, 45, 48, 7.3, 6, 50, 5, OW, "132/87", 70, 5500, INSOMNIA),
    Block("Engineer", 3, F, 33, 35, 6.5, 5, 35, 7, OW, "131/86", 75, 4100, INSOMNIA),
    Block("Engineer", 4, [M, M, F, F], 50, 53, 7.2, 7, 70, 4, [OW, OW, OB, NW], "139/91", 66, 6800, APNEA),
    Block("Engineer", 3, M, 27, 29, 7.5, 8, 60, 3, NW, "117/76", 69, 7000, NONE),
    # Lawyers.
    Block("Lawyer", 20, M, 41, 48, 7.2, 8, 55, 4, NORM, "125/82", 70, 6800, NONE),
    Block("Lawyer", 2, F, 39, 40, 7.2, 8, 55, 4, NORM, "125/82", 70, 6800, NONE),
    Block("Lawyer", 10, F, 33, 37, 7.4, 8, 60, 4, NORM, "121/79", 69, 7100, NONE),
    Block("Lawyer", 8, M, 46, 51, 7.0, 7, 42, 5, OW, "133/88", 74, 4600, NONE),
    Block("Lawyer", 4, [M, M, F, F], 52, 55, 7.3, 7, 50, 5, [NORM, NORM, OW, OW], "138/92", 74, 5600, APNEA),
    Block("Lawyer", 3, [M, M, F], 47, 49, [7.1, 7.1, 6.6], [7, 7, 5], 45, 6, NW, "129/84", 70, 5300, INSOMNIA),
    # Teachers: insomnia-heavy, mostly female.
    Block("Teacher", 15, F, 40, 45, 6.3, 6, 45, 5, OW, "130/86", 75, 5200, INSOMNIA),
    Block("Teacher", 3, M, 41, 43, 6.4, 7, 42, 6, OW, "131/86", 74, 4700, INSOMNIA),
    Block("Teacher", 5, F, 47, 51, 7.2, 7, 60, 4, OW, "136/90", 71, 6200, APNEA),
    Block("Teacher", 12, F, 30, 35, 6.8, 7, 55, 4,
          [NORM] * 10 + [NW] * 2, "119/77", 70, 6400, NONE),
    Block("Teacher", 5, M, 28, 30, 6.9, 7, 65, 5, [OW, OW, OB, OB, NW], "126/83", 74, 5800, NONE),
    # Accountants: steady sleepers plus a small strained insomnia wing.
    Block("Accountant", 17, F, 33, 38, 7.2, 8, 58, 4, NORM, "121/78", 68, 6900, NONE),
    Block("Accountant", 12, M, 38, 43, 7.1, 8, 55, 4, NORM, "120/78", 69, 6700, NONE),
    Block("Accountant", 3, M, 44, 46, 7.1, 7, 50, 5, OW, "128/85", 71, 5400, INSOMNIA),
    Block("Accountant", 4, F, 39, 42, 7.0, 5, 42, 6, [NORM, NORM, NORM, OW], "127/84", 72, 4500, INSOMNIA),
    Block("Accountant", 1, F, 43, 43, 7.1, 5, 40, 5, NORM, "123/80", 70, 4550, NONE),
    # Salespersons: the insomnia core with elevated heart rate.
    Block("Salesperson", 22, M, 32, 38, 6.4, 5, 30, 7, OW, "130/85", 82, 3800, INSOMNIA),
    Block("Salesperson", 2, F, 34, 35, 6.5, 5, 32, 7, OW, "130/85", 82, 3900, INSOMNIA),
    Block("Salesperson", 2, M, 39, 40, 6.3, 4, 30, 8, OB, "140/90", 83, 3500, INSOMNIA),
    Block("Salesperson", 2, M, 43, 44, 6.9, 6, 40, 6, OW, "135/89", 80, 4500, APNEA),
    Block("Salesperson", 4, [M, M, F, F], 29, 31, 6.8, 6, 45, 6, OW, "128/84", 78, 5100, NONE),
    # Small occupations.
    Block("Software Engineer", 1, M, 27, 27, 6.1, 7, 42, 6, OW, "126/83", 77, 4200, NONE),
    Block("Software Engineer", 1, M, 28, 28, 5.9, 4, 30, 8, OB, "140/90", 83, 3300, INSOMNIA),
    Block("Software Engineer", 1, M, 33, 33, 6.8, 7, 60, 5, NORM, "122/80", 74, 6000, NONE),
    Block("Software Engineer", 1, F, 36, 36, 7.0, 5, 42, 5, OW, "127/83", 73, 4400, NONE),
    Block("Scientist", 1, M, 31, 31, 6.0, 5, 41, 7, OW, "132/87", 82, 4100, INSOMNIA),
    Block("Scientist", 1, F, 32, 32, 6.2, 5, 38, 7, OW, "132/87", 82, 4000, INSOMNIA),
    Block("Scientist", 1, M, 45, 45, 6.9, 6, 50, 6, OW, "134/88", 79, 5300, NONE),
    Block("Scientist", 1, F, 44, 44, 7.0, 5, 42, 6, OW, "133/88", 78, 4350, NONE),
    Block("Sales Representative", 1, M, 28, 28, 5.9, 4, 30, 8, OB, "140/90", 83, 3000, APNEA),
    Block("Sales Representative", 1, M, 29, 29, 5.8, 4, 30, 8, OB, "140/90", 83, 3100, APNEA),
    Block("Manager", 1, F, 38, 38, 6.9, 7, 55, 5, NORM, "125/82", 75, 5500, NONE),
]

EXPECTED_OCCUPATIONS = {
    "Nurse": 73,
    "Doctor": 71,
    "Engineer": 63,
    "Lawyer": 47,
    "Teacher": 40,
    "Accountant": 37,
    "Salesperson": 32,
    "Software Engineer": 4,
    "Scientist": 4,
    "Sales Representative": 2,
    "Manager": 1,
}
EXPECTED_GENDER = {"Male": 189, "Female": 185}
EXPECTED_DISORDER = {"None": 219, "Sleep Apnea": 78, "Insomnia": 77}
EXPECTED_BMI = {"Normal": 195, "Overweight": 148, "Normal Weight": 21, "Obese": 10}
TOTAL = 374


def build_rows():
    rows = []
    for block in BLOCKS:
        rows.extend(block.rows())
    if len(rows) != TOTAL:
        raise AssertionError(f"expected {TOTAL} rows, built {len(rows)}")
    seen = set()
    for row in rows:
        key = tuple(row)
        if key in seen:
            raise AssertionError(f"duplicate row (ignoring id): {row}")
        seen.add(key)
    checks = [
        (2, EXPECTED_OCCUPATIONS),
        (0, EXPECTED_GENDER),
        (11, EXPECTED_DISORDER),
        (7, EXPECTED_BMI),
    ]
    for idx, expected in checks:
        got = collections.Counter(row[idx] for row in rows)
        if dict(got) != expected:
            raise AssertionError(f"column {HEADER[idx + 1]}: {dict(got)} != {expected}")
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "--out",
        default="data/sleep_health_and_lifestyle.csv",
        help="destination CSV path",
    )
    args = parser.parse_args()
    rows = build_rows()
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(HEADER)
        for pid, row in enumerate(rows, start=1):
            writer.writerow([pid] + row)
    print(f"wrote {out} ({len(rows)} rows)")


if __name__ == "__main__":
    main()
