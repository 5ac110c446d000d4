#!/usr/bin/env python3
"""Regenerate src/tmk/fixtures/gpp.json.

The GPPsolution mechanism encodes the classic 11-crossing plan as a
chain of primitive operations; writing ~50 states by hand would be
error-prone, so the file is generated.
"""

import json
import os

# whole crossings (guards, prisoners), alternating toLeft/toRight,
# starting from the right bank
PLAN = [(0, 2), (0, 1), (0, 2), (0, 1), (2, 0), (1, 1),
        (2, 0), (0, 1), (0, 2), (0, 1), (0, 2)]


def gpp_solution_mechanism():
    ops = []
    for g, p in PLAN:
        ops.extend(["EmbarkGuard"] * g + ["EmbarkPrisoner"] * p
                   + ["Cross"] + ["DisembarkGuard"] * g
                   + ["DisembarkPrisoner"] * p)
    states = []
    for i, op in enumerate(ops):
        states.append({
            "name": f"GS_S{i}",
            "goalInvocation": {"goalReference": op, "type": "operation",
                               "actualArguments": ["cfg"]},
        })
    n = len(ops)
    states.append({
        "name": f"GS_S{n}",
        "goalInvocation": {"goalReference": "SafeConfig", "type": "goal",
                           "actualArguments": ["cfg", "finalConfig"]},
    })
    states.append({
        "name": "GS_Fail",
        "goalInvocation": {"goalReference": "FailureGoal", "type": "goal",
                           "actualArguments": []},
    })
    transitions = []
    for i in range(n):
        transitions.append({
            "sourceState": f"GS_S{i}", "targetState": f"GS_S{i + 1}",
            "dataCondition": f"safe(S{i}) && safe(S{i + 1})"})
        transitions.append({
            "sourceState": f"GS_S{i}", "targetState": "GS_Fail",
            "dataCondition": f"NOT safe(S{i}) || NOT safe(S{i + 1})"})
    return {
        "name": "GPPsolution",
        "description": "Complete plan moving all guards and prisoners "
                       "safely to the left bank.",
        "inputParameters": ["cfg: configuration"],
        "outputParameters": ["finalConfig: configuration"],
        "organizer": {
            "startState": "GS_S0",
            "successState": f"GS_S{n}",
            "failureState": "GS_Fail",
            "states": states,
            "transitions": transitions,
        },
    }


def return_guard_mechanism():
    return {
        "name": "ReturnGuardMechanism",
        "description": "Safely return a guard across the river.",
        "inputParameters": ["b: boat", "g: guard", "c: configuration"],
        "outputParameters": ["newConfig: configuration"],
        "organizer": {
            "startState": "RG_S0",
            "successState": "RG_S3",
            "failureState": "RG_Fail",
            "states": [
                {"name": "RG_S0",
                 "goalInvocation": {"goalReference": "EmbarkGuard",
                                    "type": "operation",
                                    "actualArguments": ["b", "g", "c"]}},
                {"name": "RG_S1",
                 "goalInvocation": {"goalReference": "Cross",
                                    "type": "operation",
                                    "actualArguments": ["b"]}},
                {"name": "RG_S2",
                 "goalInvocation": {"goalReference": "DisembarkGuard",
                                    "type": "operation",
                                    "actualArguments": ["b", "g"]}},
                {"name": "RG_S3",
                 "goalInvocation": {"goalReference": "SafeConfig",
                                    "type": "goal",
                                    "actualArguments": ["c", "newConfig"]}},
                {"name": "RG_Fail",
                 "goalInvocation": {"goalReference": "FailureGoal",
                                    "type": "goal",
                                    "actualArguments": []}},
            ],
            "transitions": [
                {"sourceState": "RG_S0", "targetState": "RG_S1",
                 "dataCondition": "safe(S0) && safe(S1)"},
                {"sourceState": "RG_S0", "targetState": "RG_Fail",
                 "dataCondition": "NOT safe(S0) || NOT safe(S1)"},
                {"sourceState": "RG_S1", "targetState": "RG_S2",
                 "dataCondition": "safe(S1) && safe(S2)"},
                {"sourceState": "RG_S1", "targetState": "RG_Fail",
                 "dataCondition": "NOT safe(S1) || NOT safe(S2)"},
                {"sourceState": "RG_S2", "targetState": "RG_S3",
                 "dataCondition": "safe(S2) && safe(S3)"},
                {"sourceState": "RG_S2", "targetState": "RG_Fail",
                 "dataCondition": "NOT safe(S2) || NOT safe(S3)"},
            ],
        },
    }


MODEL = {
    "skillName": "Guards and Prisoners",
    "Task": [
        {
            "name": "TransportPassengersAcrossRiver",
            "description": "Safely move guards and prisoners across the "
                           "river.",
            "inputParameters": ["initialConfiguration: configuration"],
            "outputParameters": ["finalConfiguration: configuration"],
            "given": "safe(initialConfiguration)",
            "makes": "safe(finalConfiguration)",
            "means": [{
                "mechanismReference": "GPPsolution",
                "actualArguments": ["initialConfiguration",
                                    "finalConfiguration"],
            }],
        },
        {
            "name": "ReturnGuard",
            "description": "Safely return a guard to the opposite bank "
                           "without violating safety constraints.",
            "inputParameters": ["b: boat", "g: guard", "c: configuration"],
            "outputParameters": ["newConfig: configuration"],
            "given": "safe(c)",
            "makes": "safe(newConfig)",
            "means": [{
                "mechanismReference": "ReturnGuardMechanism",
                "actualArguments": ["b", "g", "c", "newConfig"],
            }],
        },
        {
            "name": "SafeConfig",
            "description": "Confirm the configuration satisfies the "
                           "guard-to-prisoner safety constraint.",
            "inputParameters": ["cfg: configuration"],
            "outputParameters": ["cfgOut: configuration"],
            "given": "safe(cfg)",
            "makes": "cfgOut = cfg",
            "means": [],
        },
        {
            "name": "FailureGoal",
            "description": "Terminal goal reached when a safety predicate "
                           "is violated.",
            "inputParameters": [],
            "outputParameters": [],
            "means": [],
        },
    ],
    "Mechanism": [return_guard_mechanism(), gpp_solution_mechanism()],
    "Knowledge": [
        {
            "Concepts": [
                {"name": "passenger", "properties": []},
                {"name": "guard", "superConcept": "passenger",
                 "properties": []},
                {"name": "prisoner", "superConcept": "passenger",
                 "properties": []},
                {"name": "boat",
                 "properties": [{"name": "capacity", "type": "integer"}]},
                {"name": "pair",
                 "properties": [{"name": "guardCount", "type": "integer"},
                                {"name": "prisonerCount",
                                 "type": "integer"}]},
                {"name": "configuration",
                 "properties": [{"name": "leftBank", "type": "pair"},
                                {"name": "rightBank", "type": "pair"},
                                {"name": "boatSide", "type": "string"},
                                {"name": "boatLoad", "type": "pair"},
                                {"name": "capacity", "type": "integer"}]},
            ],
        },
        {
            "Instances": [
                {"concept": "configuration", "name": "initialConfiguration",
                 "values": {
                     "leftBank": {"guardCount": 0, "prisonerCount": 0},
                     "rightBank": {"guardCount": 3, "prisonerCount": 3},
                     "boatSide": "right",
                 }},
            ],
        },
        {
            "Relations": [
                {"name": "carries", "domain": "boat", "range": "passenger"},
            ],
        },
    ],
}


def main():
    here = os.path.dirname(os.path.abspath(__file__))
    out = os.path.join(here, "..", "src", "tmk", "fixtures", "gpp.json")
    with open(out, "w") as fh:
        json.dump(MODEL, fh, indent=2)
        fh.write("\n")
    print(f"wrote {os.path.normpath(out)}")


if __name__ == "__main__":
    main()
