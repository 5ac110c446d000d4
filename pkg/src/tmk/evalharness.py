"""Rubric-rating ingestion and study metrics.

Reads the ratings CSV (one row per question x system x rater), computes
correctness distributions, dimension means over fully correct responses,
and affordance-aware agreement metrics, and renders report tables.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

DIMENSIONS = ("causal", "teleological", "compositional")

CSV_COLUMNS = ["questionId", "system", "raterId", "raterType",
               "causal", "teleological", "compositional", "correctness",
               "expCausal", "expTeleological", "expCompositional"]

UNDEFINED = None  # zero-denominator metrics report as undefined, not 0


class EvalError(Exception):
    pass


@dataclass(frozen=True)
class RatingRecord:
    questionId: str
    system: str
    raterId: str
    raterType: str  # "expert" | "independent"
    causal: int
    teleological: int
    compositional: int
    correctness: Optional[int] = None
    expected: Optional[Dict[str, bool]] = None

    def score(self, dimension: str) -> int:
        return getattr(self, dimension)


def _parse_score(value: str, column: str, line: int) -> int:
    try:
        score = int(value)
    except (TypeError, ValueError):
        raise EvalError(f"line {line}: {column} must be an integer, "
                        f"got {value!r}") from None
    if score not in (0, 1, 2):
        raise EvalError(f"line {line}: {column} must be in 0..2, "
                        f"got {score}")
    return score


def _parse_flag(value: str, column: str, line: int) -> bool:
    norm = value.strip().lower()
    if norm in ("true", "1", "yes"):
        return True
    if norm in ("false", "0", "no"):
        return False
    raise EvalError(f"line {line}: {column} must be a boolean flag, "
                    f"got {value!r}")


def load_ratings(source) -> List[RatingRecord]:
    """Parse the ratings CSV; `source` is a path or an open text stream.

    Expert rows must carry correctness and the three expected flags;
    independent rows must leave all four blank.
    """
    if isinstance(source, (str, bytes)):
        with open(source, "r", encoding="utf-8", newline="") as fh:
            return load_ratings(fh)
    reader = csv.DictReader(source)
    if reader.fieldnames != CSV_COLUMNS:
        raise EvalError(f"bad header: expected {','.join(CSV_COLUMNS)}, "
                        f"got {reader.fieldnames}")
    records: List[RatingRecord] = []
    for row in reader:
        line = reader.line_num
        if any(row.get(c) is None for c in CSV_COLUMNS):
            raise EvalError(f"line {line}: short row")
        rater_type = row["raterType"].strip()
        if rater_type not in ("expert", "independent"):
            raise EvalError(f"line {line}: raterType must be expert or "
                            f"independent, got {rater_type!r}")
        optional = {c: row[c].strip() for c in
                    ("correctness", "expCausal", "expTeleological",
                     "expCompositional")}
        correctness: Optional[int] = None
        expected: Optional[Dict[str, bool]] = None
        if rater_type == "expert":
            for column, value in optional.items():
                if not value:
                    raise EvalError(f"line {line}: expert row missing "
                                    f"{column}")
            correctness = _parse_score(optional["correctness"],
                                       "correctness", line)
            expected = {
                "causal": _parse_flag(optional["expCausal"],
                                      "expCausal", line),
                "teleological": _parse_flag(optional["expTeleological"],
                                            "expTeleological", line),
                "compositional": _parse_flag(optional["expCompositional"],
                                             "expCompositional", line),
            }
        else:
            for column, value in optional.items():
                if value:
                    raise EvalError(f"line {line}: independent row must "
                                    f"leave {column} blank")
        records.append(RatingRecord(
            questionId=row["questionId"].strip(),
            system=row["system"].strip(),
            raterId=row["raterId"].strip(),
            raterType=rater_type,
            causal=_parse_score(row["causal"], "causal", line),
            teleological=_parse_score(row["teleological"],
                                      "teleological", line),
            compositional=_parse_score(row["compositional"],
                                       "compositional", line),
            correctness=correctness,
            expected=expected,
        ))
    return records


def _experts(records: Sequence[RatingRecord],
             system: str) -> List[RatingRecord]:
    return [r for r in records
            if r.system == system and r.raterType == "expert"]


def correctness_stats(records: Sequence[RatingRecord],
                      system: str) -> Dict[str, Any]:
    """Correctness distribution over expert records of one system.

    mean = 0*p0 + 1*p1 + 2*p2, the footnote formula.
    """
    experts = _experts(records, system)
    if not experts:
        raise EvalError(f"no expert records for system {system!r}")
    counts = {0: 0, 1: 0, 2: 0}
    for r in experts:
        counts[r.correctness] += 1
    n = len(experts)
    p0, p1, p2 = counts[0] / n, counts[1] / n, counts[2] / n
    return {"p0": p0, "p1": p1, "p2": p2,
            "mean": 0 * p0 + 1 * p1 + 2 * p2,
            "counts": counts, "n": n}


def dimension_means(records: Sequence[RatingRecord], system: str,
                    correctness_equals: int = 2
                    ) -> Dict[str, Optional[float]]:
    """Mean dimension scores over expert records with the given
    correctness; empty filter yields undefined, not zero."""
    kept = [r for r in _experts(records, system)
            if r.correctness == correctness_equals]
    if not kept:
        return {dim: UNDEFINED for dim in DIMENSIONS}
    return {dim: sum(r.score(dim) for r in kept) / len(kept)
            for dim in DIMENSIONS}


def _safe_div(num: float, den: float) -> Optional[float]:
    return num / den if den else UNDEFINED


def _metrics_from_counts(tp: int, fp: int, fn: int,
                         tn: int) -> Dict[str, Any]:
    precision = _safe_div(tp, tp + fp)
    recall = _safe_div(tp, tp + fn)
    f1 = UNDEFINED
    if precision is not None and recall is not None \
            and precision + recall > 0:
        f1 = 2 * precision * recall / (precision + recall)
    accuracy = _safe_div(tp + tn, tp + fp + fn + tn)
    return {"tp": tp, "fp": fp, "fn": fn, "tn": tn,
            "precision": precision, "recall": recall,
            "f1": f1, "accuracy": accuracy}


def agreement_metrics(records: Sequence[RatingRecord], system: str,
                      presence_threshold: int = 1,
                      per_response: bool = False
                      ) -> Dict[str, Dict[str, Any]]:
    """Per-dimension confusion of observed presence against the expert
    expectation flags.

    Observed-present means rating >= presence_threshold.  Default
    aggregation counts every question x rater pair; `per_response`
    instead collapses each question's ratings to their mean before
    thresholding, counting one cell per response.
    """
    rows = [r for r in records if r.system == system]
    if not rows:
        raise EvalError(f"no records for system {system!r}")
    expected_by_question: Dict[str, Dict[str, bool]] = {}
    for r in rows:
        if r.expected is None:
            continue
        prior = expected_by_question.get(r.questionId)
        if prior is not None and prior != r.expected:
            raise EvalError(f"conflicting expected flags for question "
                            f"{r.questionId!r}")
        expected_by_question[r.questionId] = r.expected
    missing = {r.questionId for r in rows} - set(expected_by_question)
    if missing:
        raise EvalError(f"no expected flags for questions "
                        f"{sorted(missing)}")

    out: Dict[str, Dict[str, Any]] = {}
    for dim in DIMENSIONS:
        tp = fp = fn = tn = 0
        if per_response:
            by_question: Dict[str, List[int]] = {}
            for r in rows:
                by_question.setdefault(r.questionId, []).append(
                    r.score(dim))
            cells = [(sum(scores) / len(scores) >= presence_threshold,
                      expected_by_question[qid][dim])
                     for qid, scores in by_question.items()]
        else:
            cells = [(r.score(dim) >= presence_threshold,
                      expected_by_question[r.questionId][dim])
                     for r in rows]
        for observed, expected in cells:
            if expected and observed:
                tp += 1
            elif not expected and observed:
                fp += 1
            elif expected and not observed:
                fn += 1
            else:
                tn += 1
        out[dim] = _metrics_from_counts(tp, fp, fn, tn)
    return out


# --- Report assembly and rendering -----------------------------------------

@dataclass
class EvalReport:
    perSystem: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    agreement: Dict[str, Dict[str, Dict[str, Any]]] = \
        field(default_factory=dict)
    presenceThreshold: int = 1
    perResponse: bool = False

    def to_json(self) -> Dict[str, Any]:
        return {"schemaVersion": 1,
                "presenceThreshold": self.presenceThreshold,
                "perResponse": self.perResponse,
                "perSystem": self.perSystem,
                "agreement": self.agreement}

    @classmethod
    def from_json(cls, raw: Dict[str, Any]) -> "EvalReport":
        report = cls(presenceThreshold=raw.get("presenceThreshold", 1),
                     perResponse=raw.get("perResponse", False))
        report.perSystem = raw.get("perSystem", {})
        report.agreement = raw.get("agreement", {})
        return report


def compute_report(records: Sequence[RatingRecord],
                   presence_threshold: int = 1,
                   per_response: bool = False) -> EvalReport:
    systems: List[str] = []
    for r in records:
        if r.system not in systems:
            systems.append(r.system)
    report = EvalReport(presenceThreshold=presence_threshold,
                        perResponse=per_response)
    for system in systems:
        stats = correctness_stats(records, system)
        means = dimension_means(records, system)
        report.perSystem[system] = {
            "p0": stats["p0"], "p1": stats["p1"], "p2": stats["p2"],
            "counts": {str(k): v for k, v in stats["counts"].items()},
            "n": stats["n"],
            "meanCorrectness": stats["mean"],
            "nCorrect": stats["counts"][2],
            "dimensionMeans": means,
        }
        report.agreement[system] = agreement_metrics(
            records, system, presence_threshold, per_response)
    return report


def _fmt_mean(value: Optional[float]) -> str:
    if value is None:
        return "undefined"
    text = f"{value:.3f}"
    return text[:-1] if text.endswith("0") else text


def _fmt_metric(value: Optional[float]) -> str:
    return "undefined" if value is None else f"{value:.3f}"


def render_report(report: EvalReport, format: str = "markdown") -> bytes:
    if format == "json":
        return json.dumps(report.to_json(), indent=2).encode("utf-8")
    if format == "csv":
        return _render_csv(report)
    if format == "markdown":
        return _render_markdown(report)
    raise EvalError(f"unknown report format {format!r}")


def _render_markdown(report: EvalReport) -> bytes:
    lines = [
        "| System | Incorrect (0) | Partial (1) | Correct (2) | Mean | "
        "n_correct | Causal | Teleological | Compositional |",
        "|---|---|---|---|---|---|---|---|---|",
    ]
    for system, row in report.perSystem.items():
        dist = [f"{row[p]:.2f} ({row['counts'][c]})"
                for p, c in (("p0", "0"), ("p1", "1"), ("p2", "2"))]
        dims = row["dimensionMeans"]
        lines.append(
            f"| {system} | {dist[0]} | {dist[1]} | {dist[2]} | "
            f"{row['meanCorrectness']:.2f} | {row['nCorrect']} | "
            f"{_fmt_mean(dims['causal'])} | "
            f"{_fmt_mean(dims['teleological'])} | "
            f"{_fmt_mean(dims['compositional'])} |")
    lines.append("")
    lines.append(f"Agreement (observed-present = rating >= "
                 f"{report.presenceThreshold}, "
                 f"{'per response' if report.perResponse else 'per rating'})")
    lines.append("")
    lines.append("| System | Dimension | Precision | Recall | F1 | "
                 "Accuracy |")
    lines.append("|---|---|---|---|---|---|")
    for system, dims in report.agreement.items():
        for dim, m in dims.items():
            lines.append(
                f"| {system} | {dim} | {_fmt_metric(m['precision'])} | "
                f"{_fmt_metric(m['recall'])} | {_fmt_metric(m['f1'])} | "
                f"{_fmt_metric(m['accuracy'])} |")
    return ("\n".join(lines) + "\n").encode("utf-8")


def _render_csv(report: EvalReport) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["system", "p0", "p1", "p2", "meanCorrectness",
                     "nCorrect", "causalMean", "teleologicalMean",
                     "compositionalMean"])
    for system, row in report.perSystem.items():
        dims = row["dimensionMeans"]
        writer.writerow([system, row["p0"], row["p1"], row["p2"],
                         row["meanCorrectness"], row["nCorrect"],
                         dims["causal"], dims["teleological"],
                         dims["compositional"]])
    writer.writerow([])
    writer.writerow(["system", "dimension", "tp", "fp", "fn", "tn",
                     "precision", "recall", "f1", "accuracy"])
    for system, dims in report.agreement.items():
        for dim, m in dims.items():
            writer.writerow([system, dim, m["tp"], m["fp"], m["fn"],
                             m["tn"], m["precision"], m["recall"],
                             m["f1"], m["accuracy"]])
    return buf.getvalue().encode("utf-8")
