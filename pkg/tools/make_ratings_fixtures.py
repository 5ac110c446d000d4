"""Generate the synthetic ratings CSV fixtures under tests/data.

Three fixtures:
- ratings_study.csv: 560 rows (20 questions x 4 systems x 7 raters, one
  expert + six independents) whose expert correctness counts match the
  published per-system distribution.
- ratings_dimensions.csv: 60 fully-correct expert records per system
  with integer scores summing to the published dimension means exactly.
- ratings_agreement.csv: 20 expert records engineered to known
  confusion counts per dimension (causal: TP=10 FP=1 FN=1 TN=8;
  teleological: perfect agreement; compositional: nothing expected or
  observed, so precision/recall are undefined).
"""

from __future__ import annotations

import csv
import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, "..", "tests", "data")

COLUMNS = ["questionId", "system", "raterId", "raterType",
           "causal", "teleological", "compositional", "correctness",
           "expCausal", "expTeleological", "expCompositional"]

SYSTEMS = ["Ivy+TMK-Structured", "Ivy+TMK-Basic", "RAG-GPT",
           "Standard GPT"]

# correctness counts (n0, n1, n2) over N=20 expert-rated responses
CORRECTNESS_COUNTS = {
    "Ivy+TMK-Structured": (4, 3, 13),
    "Ivy+TMK-Basic": (2, 5, 13),
    "RAG-GPT": (7, 6, 7),
    "Standard GPT": (9, 8, 3),
}

# per-dimension score sums over 60 fully-correct records; sums / 60
# reproduce the published dimension means at 3-decimal precision
DIMENSION_SUMS = {
    "Ivy+TMK-Structured": (96, 80, 90),   # 1.60, 1.333, 1.50
    "Ivy+TMK-Basic": (90, 70, 78),        # 1.50, 1.167, 1.30
    "RAG-GPT": (84, 65, 42),              # 1.40, 1.083, 0.70
    "Standard GPT": (42, 55, 36),         # 0.70, 0.917, 0.60
}


def scores_with_sum(total: int, n: int = 60):
    """n scores in {0,1,2} summing exactly to total."""
    twos = max(0, total - n)
    ones = total - 2 * twos
    zeros = n - twos - ones
    assert zeros >= 0 and 2 * twos + ones == total
    return [2] * twos + [1] * ones + [0] * zeros


def write(filename: str, rows) -> None:
    os.makedirs(DATA, exist_ok=True)
    path = os.path.join(DATA, filename)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(COLUMNS)
        writer.writerows(rows)
    print(f"wrote {path} ({len(rows)} rows)")


def study_rows():
    rng = random.Random(7)
    rows = []
    for system in SYSTEMS:
        n0, n1, n2 = CORRECTNESS_COUNTS[system]
        correctness = [0] * n0 + [1] * n1 + [2] * n2
        for qi in range(20):
            qid = f"q{qi + 1:02d}"
            corr = correctness[qi]
            exp = ["True", "True" if qi % 2 == 0 else "False",
                   "True" if qi % 3 == 0 else "False"]
            scores = [rng.randint(0, 2) for _ in range(3)]
            rows.append([qid, system, "e1", "expert", *scores, corr,
                         *exp])
            for ri in range(6):
                scores = [rng.randint(0, 2) for _ in range(3)]
                rows.append([qid, system, f"i{ri + 1}", "independent",
                             *scores, "", "", "", ""])
    return rows


def dimension_rows():
    rows = []
    for system in SYSTEMS:
        columns = [scores_with_sum(s) for s in DIMENSION_SUMS[system]]
        for qi in range(60):
            rows.append([f"d{qi + 1:02d}", system, "e1", "expert",
                         columns[0][qi], columns[1][qi], columns[2][qi],
                         2, "True", "True", "True"])
    return rows


def agreement_rows():
    # causal cells in question order: 10 TP, 1 FP, 1 FN, 8 TN
    causal = [("True", 2)] * 10 + [("False", 1)] + [("True", 0)] \
        + [("False", 0)] * 8
    rows = []
    for qi, (exp_causal, causal_score) in enumerate(causal):
        rows.append([f"a{qi + 1:02d}", "SysA", "e1", "expert",
                     causal_score, 1, 0, 2,
                     exp_causal, "True", "False"])
    return rows


if __name__ == "__main__":
    write("ratings_study.csv", study_rows())
    write("ratings_dimensions.csv", dimension_rows())
    write("ratings_agreement.csv", agreement_rows())
