import io
import math
import random
from pathlib import Path

import pytest

from tmk.evalharness import (
    CSV_COLUMNS, DIMENSIONS, EvalError, EvalReport, agreement_metrics,
    compute_report, correctness_stats, dimension_means, load_ratings,
    render_report,
)

DATA = Path(__file__).parent / "data"

STUDY = load_ratings(str(DATA / "ratings_study.csv"))
DIMS = load_ratings(str(DATA / "ratings_dimensions.csv"))
AGREE = load_ratings(str(DATA / "ratings_agreement.csv"))

SYSTEMS = ["Ivy+TMK-Structured", "Ivy+TMK-Basic", "RAG-GPT",
           "Standard GPT"]


def brute_force_confusion(records, system, dim, threshold=1):
    """Independent recount of the confusion cells, per rating."""
    expected = {r.questionId: r.expected[dim] for r in records
                if r.system == system and r.expected is not None}
    tp = fp = fn = tn = 0
    for r in records:
        if r.system != system:
            continue
        observed = r.score(dim) >= threshold
        exp = expected[r.questionId]
        tp += exp and observed
        fp += (not exp) and observed
        fn += exp and not observed
        tn += (not exp) and not observed
    return {"tp": tp, "fp": fp, "fn": fn, "tn": tn}


class TestLoading:
    def test_study_fixture_shape(self):
        assert len(STUDY) == 560
        experts = [r for r in STUDY if r.raterType == "expert"]
        assert len(experts) == 80
        assert all(r.correctness is not None and r.expected is not None
                   for r in experts)
        independents = [r for r in STUDY if r.raterType == "independent"]
        assert all(r.correctness is None and r.expected is None
                   for r in independents)

    def test_bad_header_rejected(self):
        with pytest.raises(EvalError, match="bad header"):
            load_ratings(io.StringIO("a,b,c\n1,2,3\n"))

    def test_out_of_range_score_reports_line(self):
        text = ",".join(CSV_COLUMNS) + "\n" \
            "q1,S,e1,expert,3,0,0,2,True,True,True\n"
        with pytest.raises(EvalError, match="line 2.*causal.*0\\.\\.2"):
            load_ratings(io.StringIO(text))

    def test_expert_missing_correctness(self):
        text = ",".join(CSV_COLUMNS) + "\n" \
            "q1,S,e1,expert,1,0,0,,True,True,True\n"
        with pytest.raises(EvalError, match="expert row missing"):
            load_ratings(io.StringIO(text))

    def test_independent_with_correctness(self):
        text = ",".join(CSV_COLUMNS) + "\n" \
            "q1,S,i1,independent,1,0,0,2,,,\n"
        with pytest.raises(EvalError, match="leave correctness blank"):
            load_ratings(io.StringIO(text))

    def test_bad_rater_type(self):
        text = ",".join(CSV_COLUMNS) + "\n" \
            "q1,S,x1,grader,1,0,0,,,,\n"
        with pytest.raises(EvalError, match="raterType"):
            load_ratings(io.StringIO(text))


class TestCorrectness:
    @pytest.mark.parametrize("system,mean,n_correct,counts", [
        ("Ivy+TMK-Structured", 1.45, 13, (4, 3, 13)),
        ("Ivy+TMK-Basic", 1.55, 13, (2, 5, 13)),
        ("RAG-GPT", 1.00, 7, (7, 6, 7)),
        ("Standard GPT", 0.70, 3, (9, 8, 3)),
    ])
    def test_study_table(self, system, mean, n_correct, counts):
        stats = correctness_stats(STUDY, system)
        assert stats["n"] == 20
        assert (stats["counts"][0], stats["counts"][1],
                stats["counts"][2]) == counts
        assert math.isclose(stats["mean"], mean, abs_tol=1e-12)
        assert stats["counts"][2] == n_correct

    def test_mean_from_counts_equals_mean_from_proportions(self):
        for system in SYSTEMS:
            stats = correctness_stats(STUDY, system)
            from_counts = (stats["counts"][1]
                           + 2 * stats["counts"][2]) / stats["n"]
            assert math.isclose(stats["mean"], from_counts,
                                abs_tol=1e-9)

    def test_unknown_system(self):
        with pytest.raises(EvalError, match="no expert records"):
            correctness_stats(STUDY, "NoSuchSystem")

    def test_permutation_invariance(self):
        shuffled = list(STUDY)
        random.Random(7).shuffle(shuffled)
        for system in SYSTEMS:
            assert correctness_stats(shuffled, system) == \
                correctness_stats(STUDY, system)
            assert dimension_means(shuffled, system) == \
                dimension_means(STUDY, system)


class TestDimensionMeans:
    @pytest.mark.parametrize("system,causal,teleological,compositional", [
        ("Ivy+TMK-Structured", 1.6, 4 / 3, 1.5),
        ("Ivy+TMK-Basic", 1.5, 7 / 6, 1.3),
        ("RAG-GPT", 1.4, 65 / 60, 0.7),
        ("Standard GPT", 0.7, 55 / 60, 0.6),
    ])
    def test_fixture_means(self, system, causal, teleological,
                           compositional):
        means = dimension_means(DIMS, system)
        assert math.isclose(means["causal"], causal, abs_tol=1e-12)
        assert math.isclose(means["teleological"], teleological,
                            abs_tol=1e-12)
        assert math.isclose(means["compositional"], compositional,
                            abs_tol=1e-12)

    def test_empty_filter_is_undefined(self):
        # no expert record in the study fixture has correctness == 2 for
        # an impossible filter value; use correctness_equals=0 on the
        # dimensions fixture, which only holds fully correct records
        means = dimension_means(DIMS, "RAG-GPT", correctness_equals=0)
        assert means == {dim: None for dim in DIMENSIONS}

    def test_only_fully_correct_records_count(self):
        # recompute by brute force over the raw records
        for system in SYSTEMS:
            kept = [r for r in DIMS if r.system == system
                    and r.raterType == "expert" and r.correctness == 2]
            assert len(kept) == 60
            means = dimension_means(DIMS, system)
            for dim in DIMENSIONS:
                expected = sum(r.score(dim) for r in kept) / len(kept)
                assert math.isclose(means[dim], expected, abs_tol=1e-12)


class TestAgreement:
    def test_causal_confusion_and_metrics(self):
        metrics = agreement_metrics(AGREE, "SysA")["causal"]
        assert (metrics["tp"], metrics["fp"], metrics["fn"],
                metrics["tn"]) == (10, 1, 1, 8)
        assert math.isclose(metrics["precision"], 10 / 11, abs_tol=1e-12)
        assert math.isclose(metrics["recall"], 10 / 11, abs_tol=1e-12)
        assert math.isclose(metrics["f1"], 10 / 11, abs_tol=1e-12)
        assert math.isclose(metrics["accuracy"], 0.90, abs_tol=1e-12)

    def test_teleological_perfect(self):
        metrics = agreement_metrics(AGREE, "SysA")["teleological"]
        assert metrics["fp"] == metrics["fn"] == metrics["tn"] == 0
        assert metrics["precision"] == metrics["recall"] == \
            metrics["f1"] == metrics["accuracy"] == 1.0

    def test_compositional_all_negative_is_undefined(self):
        metrics = agreement_metrics(AGREE, "SysA")["compositional"]
        assert metrics["tp"] == metrics["fp"] == metrics["fn"] == 0
        assert metrics["precision"] is None
        assert metrics["recall"] is None
        assert metrics["f1"] is None
        assert metrics["accuracy"] == 1.0

    def test_brute_force_recount_matches(self):
        for records, system in [(AGREE, "SysA")] + \
                [(STUDY, s) for s in SYSTEMS]:
            metrics = agreement_metrics(records, system)
            for dim in DIMENSIONS:
                expected = brute_force_confusion(records, system, dim)
                got = {k: metrics[dim][k] for k in expected}
                assert got == expected, (system, dim)

    def test_threshold_two_changes_observation(self):
        loose = agreement_metrics(AGREE, "SysA")
        strict = agreement_metrics(AGREE, "SysA", presence_threshold=2)
        for dim in DIMENSIONS:
            expected = brute_force_confusion(AGREE, "SysA", dim,
                                             threshold=2)
            got = {k: strict[dim][k] for k in expected}
            assert got == expected
        # teleological ratings of 1 stop counting as present
        assert strict["teleological"]["tp"] < \
            loose["teleological"]["tp"]

    def test_per_response_collapses_raters(self):
        per_response = agreement_metrics(STUDY, "RAG-GPT",
                                         per_response=True)
        for dim in DIMENSIONS:
            cells = per_response[dim]
            assert cells["tp"] + cells["fp"] + cells["fn"] + \
                cells["tn"] == 20  # one cell per question

    def test_missing_expected_flags_rejected(self):
        rows = [r for r in AGREE if r.raterType != "expert"
                or r.questionId != "a01"]
        rows.append(type(AGREE[0])(
            questionId="a01", system="SysA", raterId="i9",
            raterType="independent", causal=1, teleological=1,
            compositional=0))
        with pytest.raises(EvalError, match="no expected flags"):
            agreement_metrics(rows, "SysA")


class TestReport:
    def test_markdown_mirrors_study_table(self):
        report = compute_report(STUDY)
        text = render_report(report, "markdown").decode("utf-8")
        assert "| Ivy+TMK-Structured | 0.20 (4) | 0.15 (3) | " \
            "0.65 (13) | 1.45 | 13 |" in text
        assert "| Standard GPT | 0.45 (9) | 0.40 (8) | 0.15 (3) | " \
            "0.70 | 3 |" in text

    def test_markdown_dimension_formatting(self):
        report = compute_report(DIMS)
        text = render_report(report, "markdown").decode("utf-8")
        assert "1.60 | 1.333 | 1.50" in text   # structured row
        assert "0.70 | 0.917 | 0.60" in text   # standard-gpt row

    def test_markdown_undefined_marker(self):
        report = compute_report(AGREE)
        text = render_report(report, "markdown").decode("utf-8")
        assert "| SysA | compositional | undefined | undefined | " \
            "undefined | 1.000 |" in text

    def test_json_round_trip(self):
        report = compute_report(STUDY)
        clone = EvalReport.from_json(report.to_json())
        assert clone.to_json() == report.to_json()

    def test_csv_render_parses(self):
        import csv as csv_module
        text = render_report(compute_report(AGREE), "csv").decode("utf-8")
        rows = list(csv_module.reader(io.StringIO(text)))
        assert rows[0][0] == "system"
        assert any(row[:2] == ["SysA", "causal"] for row in rows)

    def test_unknown_format(self):
        with pytest.raises(EvalError, match="unknown report format"):
            render_report(compute_report(AGREE), "pdf")
