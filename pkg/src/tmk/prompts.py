"""Versioned prompt templates for the four pipeline stages.

Each prompt carries a sentinel header in its system instruction and a
machine-readable JSON payload at the end of the user content, so the
deterministic stub provider can recognize the stage and re-derive its
inputs; a remote model simply reads the same text.
"""

from __future__ import annotations

import json
from typing import Any, Dict, List, Optional, Sequence, Tuple

PROMPT_VERSION = 1

STAGE1_SCOPE = "STAGE1_SCOPE"
STAGE2_VERBOSITY = "STAGE2_VERBOSITY"
STAGE3_INITIAL = "STAGE3_INITIAL"
STAGE3_IMPROVE = "STAGE3_IMPROVE"
STAGE4_PRUNE = "STAGE4_PRUNE"
RAG_ANSWER = "RAG_ANSWER"

_PAYLOAD_MARKER = "PAYLOAD:"


def _with_payload(instructions: str, payload: Dict[str, Any]) -> str:
    return (f"{instructions}\n\n{_PAYLOAD_MARKER}\n"
            f"{json.dumps(payload, ensure_ascii=False)}")


def extract_payload(user_content: str) -> Optional[Dict[str, Any]]:
    marker = user_content.rfind(_PAYLOAD_MARKER)
    if marker < 0:
        return None
    try:
        return json.loads(user_content[marker + len(_PAYLOAD_MARKER):])
    except json.JSONDecodeError:
        return None


def scope_prompt(question: str, names: Sequence) -> Tuple[str, str]:
    system = (f"[{STAGE1_SCOPE} v{PROMPT_VERSION}] You decide whether a "
              f"learner question is about the named components of a skill "
              f"model. Reply with exactly 'yes' or 'no'.")
    user = _with_payload(
        "Is the question below related to any of the listed component "
        "names?",
        {"question": question,
         "names": [{"name": n.name, "component": n.component}
                   for n in names]})
    return system, user


def verbosity_prompt(question: str) -> Tuple[str, str]:
    system = (f"[{STAGE2_VERBOSITY} v{PROMPT_VERSION}] Estimate how "
              f"detailed the answer should be on a 1-4 scale. Reply with "
              f"a single integer.")
    user = _with_payload("How verbose should the answer to this question "
                         "be?", {"question": question})
    return system, user


_SYNTHESIS_OBLIGATIONS = (
    "Your answer must (i) check and narrate the relevant safety/guard "
    "predicates before each transition, (ii) connect each step to the "
    "subgoal and parent goal it serves, and (iii) name the invoked "
    "operation or subgoal at each state.")


def initial_prompt(question: str, doc) -> Tuple[str, str]:
    system = (f"[{STAGE3_INITIAL} v{PROMPT_VERSION}] Answer the learner's "
              f"question using only the skill-model entry provided. "
              f"{_SYNTHESIS_OBLIGATIONS}")
    user = _with_payload(
        "Answer the question from the document.",
        {"question": question,
         "document": {"source": doc.source, "entryName": doc.entryName,
                      "text": doc.text}})
    return system, user


def improve_prompt(question: str, doc, prior: str) -> Tuple[str, str]:
    system = (f"[{STAGE3_IMPROVE} v{PROMPT_VERSION}] Improve the draft "
              f"answer using the additional skill-model entry. Keep "
              f"everything already correct. {_SYNTHESIS_OBLIGATIONS}")
    user = _with_payload(
        "Refine the draft with the new document.",
        {"question": question, "priorDraft": prior,
         "document": {"source": doc.source, "entryName": doc.entryName,
                      "text": doc.text}})
    return system, user


def prune_prompt(question: str, draft: str,
                 protect: Sequence[str]) -> Tuple[str, str]:
    system = (f"[{STAGE4_PRUNE} v{PROMPT_VERSION}] Compress the draft: "
              f"remove repetition, keep only information pertinent to the "
              f"question, and never drop a state, goal, or guard mention.")
    user = _with_payload(
        "Prune the draft.",
        {"question": question, "draft": draft,
         "protect": list(protect)})
    return system, user


def rag_prompt(question: str,
               chunks: Sequence[Tuple[str, str, float]]) -> Tuple[str, str]:
    system = (f"[{RAG_ANSWER} v{PROMPT_VERSION}] Answer the question from "
              f"the retrieved course material.")
    user = _with_payload(
        "Answer from the context chunks.",
        {"question": question,
         "chunks": [{"id": cid, "text": text, "score": round(score, 4)}
                    for cid, text, score in chunks]})
    return system, user


def stage_of(system_instruction: str) -> Optional[str]:
    for stage in (STAGE1_SCOPE, STAGE2_VERBOSITY, STAGE3_INITIAL,
                  STAGE3_IMPROVE, STAGE4_PRUNE, RAG_ANSWER):
        if system_instruction.startswith(f"[{stage} "):
            return stage
    return None
