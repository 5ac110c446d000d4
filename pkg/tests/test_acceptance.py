"""Acceptance gate: one criterion per test.

Each test's docstring first line is its criterion; conftest.py prints a
`[PASS]`/`[FAIL]` line per criterion in the terminal summary.
"""

import itertools
import json
import re
import socket
import time
from pathlib import Path

from tmk import gpp
from tmk.evalharness import (
    DIMENSIONS, agreement_metrics, compute_report, correctness_stats,
    dimension_means, load_ratings,
)
from tmk.executor import execute_mechanism, operation_sequence
from tmk.guards import (
    PredicateRegistry, atoms_of, check_branch_logic,
    eval_under_assignment, parse_guard, pretty,
)
from tmk.model import extract_top_level_names, serialize_documents
from tmk.pipeline import PipelineConfig, answer
from tmk.retrieval import build_index, search
from tmk.skills import SKILLS, gpp_operations, gpp_predicates, \
    load_fixture

DATA = Path(__file__).parent / "data"


def fixture_guard_corpus():
    """Every distinct condition string across the bundled skill models,
    plus the contract expressions from their given/makes clauses."""
    texts = []
    for skill in SKILLS:
        model = load_fixture(skill)
        for mech in model.mechanisms:
            for t in mech.transitions:
                if t.dataConditionText not in texts:
                    texts.append(t.dataConditionText)
        for task in model.tasks:
            for clause in (task.givenText, task.makesText):
                if clause is not None and clause not in texts:
                    texts.append(clause)
    return texts


class TestAcceptance:
    def test_guard_dsl_corpus(self):
        """guard-dsl-corpus: fixture conditions parse, pretty-print, and
        round-trip in under 1 s"""
        started = time.perf_counter()
        corpus = fixture_guard_corpus()
        assert len(corpus) >= 10
        for text in ["safe(S0) && safe(S1)",
                     "NOT safe(S2) || NOT safe(S3)", "!tmpOK",
                     "okOut = okIn"]:
            assert text in corpus, text
        # sub-expression of a compound fixture condition, exercised
        # standalone as well
        assert any("specificModel.includes(example) != true" in t
                   for t in corpus)
        corpus.append("specificModel.includes(example) != true")
        for text in corpus:
            expr = parse_guard(text)
            assert pretty(expr) == text
            assert pretty(parse_guard(pretty(expr))) == text
        assert time.perf_counter() - started < 1.0

    def test_branch_logic(self):
        """branch-logic: complementary guard pairs are exhaustive and
        disjoint per truth-table oracle, under 1 s"""
        started = time.perf_counter()
        cases = []
        for skill, mech_name, state in [
                ("gpp", "ReturnGuardMechanism", "RG_S0"),
                ("gpp", "ReturnGuardMechanism", "RG_S1"),
                ("gpp", "ReturnGuardMechanism", "RG_S2"),
                ("analogical_reasoning", "MapStructuresMechanism",
                 "MS_Check")]:
            mech = load_fixture(skill).mechanism(mech_name)
            cases.append([parse_guard(t.dataConditionText)
                          for t in mech.outgoing(state)])
        for guard_list in cases:
            result = check_branch_logic(guard_list)
            assert result.exhaustive and result.disjoint
            # independent truth-table recount
            atoms = []
            for g in guard_list:
                for a in atoms_of(g):
                    if a not in atoms:
                        atoms.append(a)
            for values in itertools.product([False, True],
                                            repeat=len(atoms)):
                assignment = dict(zip(atoms, values))
                hits = sum(eval_under_assignment(g, assignment)
                           for g in guard_list)
                assert hits == 1
        assert time.perf_counter() - started < 1.0

    def test_return_guard_trace(self):
        """return-guard-trace: success path RG_S0..RG_S3; forced-unsafe
        injection diverts to RG_Fail"""
        model = load_fixture("gpp")
        start = gpp.make_config((1, 1), (1, 1), "left")
        trace = execute_mechanism(model, "ReturnGuardMechanism",
                                  ["b", "g", start],
                                  gpp_operations(), gpp_predicates())
        assert trace.outcome == "Success"
        assert trace.state_sequence == ["RG_S0", "RG_S1", "RG_S2",
                                        "RG_S3"]
        snapshots = [gpp.apply_operation("EmbarkGuard", start)]
        snapshots.append(gpp.apply_operation("Cross", snapshots[0]))
        snapshots.append(gpp.apply_operation("DisembarkGuard",
                                             snapshots[1]))
        for bad in snapshots:
            predicates = PredicateRegistry()
            predicates.register_predicate(
                "safe",
                lambda c, bad=bad: False if c == bad else gpp.safe(c))
            injected = execute_mechanism(
                model, "ReturnGuardMechanism", ["b", "g", start],
                gpp_operations(), predicates)
            assert injected.outcome == "Failure"
            assert injected.terminalState == "RG_Fail"

    def test_gpp_end_to_end(self):
        """gpp-end-to-end: 11-crossing oracle plan; the executed
        mechanism plan is legal, safe, and length-optimal, under 5 s"""
        started = time.perf_counter()
        initial = gpp.canonical_initial()
        oracle = gpp.gpp_oracle_solve(initial)
        assert oracle is not None and len(oracle) == 11
        model = load_fixture("gpp")
        trace = execute_mechanism(model, "GPPsolution", [initial],
                                  gpp_operations(), gpp_predicates())
        assert trace.outcome == "Success"
        ops = operation_sequence(model, trace)
        plan = gpp.plan_from_operations(initial, ops)
        assert gpp.verify_plan(initial, plan)
        states = [initial]
        for move in plan:
            states.append(gpp.apply_move(states[-1], move))
        assert all(gpp.safe(s) for s in states)
        assert len(plan) == len(oracle)
        assert time.perf_counter() - started < 5.0

    def test_pipeline_fidelity(self):
        """pipeline-fidelity: structured answers carry the top
        mechanism's states, guard atoms, and success goal; deterministic
        over 10 runs"""
        runs = [
            ("version_spaces",
             "Under what condition should version spaces generalize "
             "the specific model?", 3),
            ("analogical_reasoning",
             "What are the requirements for the 'mapping' operation?",
             None),
        ]
        for skill, question, expect_k in runs:
            model = load_fixture(skill)
            result = answer(question, model)
            assert result.route == "tmk"
            if expect_k is not None:
                assert result.verbosity == expect_k
            mech_doc = next(d for d, _ in result.retrieved
                            if d.source == "Mechanism")
            mech = model.mechanism(mech_doc.entryName)
            text = result.answerText
            path, seen = [mech.startState], set()
            while path[-1] not in (mech.successState,
                                   mech.failureState) \
                    and path[-1] not in seen:
                seen.add(path[-1])
                nxt = next(t for t in mech.outgoing(path[-1])
                           if t.targetState != mech.failureState)
                path.append(nxt.targetState)
            for state in path:
                assert state in text, state
                for t in mech.outgoing(state):
                    for atom in atoms_of(
                            parse_guard(t.dataConditionText)):
                        assert atom in text, atom
            success_goal = mech.state(mech.successState) \
                .invocation.goalReference
            assert success_goal in text
            known = {n.name for n in extract_top_level_names(model)}
            for m in model.mechanisms:
                known.update(s.name for s in m.states)
            for token in re.findall(
                    r"\b[A-Z][A-Za-z]*_[A-Za-z0-9]+\b", text):
                assert token in known, token
            outputs = {json.dumps(answer(question, model).to_json())
                       for _ in range(10)}
            assert len(outputs) == 1

    def test_scope_routing(self):
        """scope-routing: off-topic questions fall back, in-scope
        questions stay structured, under both strategies"""
        off_topic = [
            "What is the weather forecast for tomorrow?",
            "Who won the football championship last year?",
            "Can you recommend a good pizza restaurant nearby?",
            "When does the library close on Sundays?",
            "How tall is the Eiffel Tower in meters?",
        ]
        in_scope = {
            "gpp": "How do we safely return the guard across the "
                   "river?",
            "version_spaces": "Under what condition should version "
                              "spaces generalize the specific model?",
            "analogical_reasoning": "What are the requirements for the "
                                    "'mapping' operation?",
        }
        for strategy in ("similarityThreshold", "providerJudgment"):
            config = PipelineConfig(scopeStrategy=strategy)
            for skill in SKILLS:
                model = load_fixture(skill)
                for question in off_topic:
                    result = answer(question, model, config=config)
                    assert result.route == "ragFallback", \
                        (strategy, skill, question)
                result = answer(in_scope[skill], model, config=config)
                assert result.route == "tmk", (strategy, skill)

    def test_eval_arithmetic(self):
        """eval-arithmetic: published correctness and dimension means
        reproduced exactly; agreement metrics match a brute-force
        recount"""
        study = load_ratings(str(DATA / "ratings_study.csv"))
        published = [("Ivy+TMK-Structured", 1.45, 13),
                     ("Ivy+TMK-Basic", 1.55, 13),
                     ("RAG-GPT", 1.00, 7),
                     ("Standard GPT", 0.70, 3)]
        for system, mean, n_correct in published:
            stats = correctness_stats(study, system)
            assert abs(stats["mean"] - mean) < 1e-12
            assert stats["counts"][2] == n_correct
        dims = load_ratings(str(DATA / "ratings_dimensions.csv"))
        expected_dims = [
            ("Ivy+TMK-Structured", (1.6, 4 / 3, 1.5)),
            ("Ivy+TMK-Basic", (1.5, 7 / 6, 1.3)),
            ("RAG-GPT", (1.4, 65 / 60, 0.7)),
            ("Standard GPT", (0.7, 55 / 60, 0.6)),
        ]
        for system, (causal, teleological, compositional) in \
                expected_dims:
            means = dimension_means(dims, system)
            assert abs(means["causal"] - causal) < 1e-12
            assert abs(means["teleological"] - teleological) < 1e-12
            assert abs(means["compositional"] - compositional) < 1e-12
        agree = load_ratings(str(DATA / "ratings_agreement.csv"))
        metrics = agreement_metrics(agree, "SysA")
        for dim in DIMENSIONS:
            expected = {r.questionId: r.expected[dim] for r in agree
                        if r.expected is not None}
            tp = fp = fn = tn = 0
            for r in agree:
                observed = r.score(dim) >= 1
                if expected[r.questionId] and observed:
                    tp += 1
                elif observed:
                    fp += 1
                elif expected[r.questionId]:
                    fn += 1
                else:
                    tn += 1
            got = metrics[dim]
            assert (got["tp"], got["fp"], got["fn"], got["tn"]) == \
                (tp, fp, fn, tn)
            if tp + fp:
                assert abs(got["precision"] - tp / (tp + fp)) < 1e-12
            else:
                assert got["precision"] is None
        causal = metrics["causal"]
        assert (causal["tp"], causal["fp"], causal["fn"],
                causal["tn"]) == (10, 1, 1, 8)
        assert abs(causal["f1"] - 10 / 11) < 1e-12
        assert abs(causal["accuracy"] - 0.90) < 1e-12

    def test_retrieval_substitute(self):
        """retrieval-substitute: the generalization question ranks the
        GeneralizeSpecific family in its top 3; self-retrieval holds
        everywhere"""
        model = load_fixture("version_spaces")
        index = build_index(serialize_documents(model))
        hits = search(index, "Under what condition should version "
                      "spaces generalize the specific model?", 3)
        assert any(d.entryName.startswith("GeneralizeSpecific")
                   for d, _ in hits)
        for skill in SKILLS:
            docs = serialize_documents(load_fixture(skill))
            idx = build_index(docs)
            for doc in docs:
                top, score = search(idx, doc.text, 1)[0]
                assert (top.source, top.entryName) == \
                    (doc.source, doc.entryName)
                assert abs(score - 1.0) < 1e-9

    def test_offline_stub_only(self):
        """offline-stub-only: the full flow runs with sockets disabled
        and the stub provider"""
        real_socket = socket.socket

        def deny(*args, **kwargs):
            raise AssertionError("network access attempted")

        socket.socket = deny
        try:
            model = load_fixture("gpp")
            result = answer("How do we safely return the guard across "
                            "the river?", model)
            assert result.route == "tmk"
            trace = execute_mechanism(
                model, "GPPsolution", [gpp.canonical_initial()],
                gpp_operations(), gpp_predicates())
            assert trace.outcome == "Success"
            report = compute_report(
                load_ratings(str(DATA / "ratings_study.csv")))
            assert report.perSystem
        finally:
            socket.socket = real_socket
