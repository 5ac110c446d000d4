"""Constrained answer generation over a skill model.

Four stages: scope check, verbosity estimate, iterative draft synthesis
over the retrieved model entries, and a coherence prune.  Out-of-scope
questions fall back to plain retrieval-augmented generation over an
optional course corpus.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

from . import prompts
from .model import TmkDocument, TmkModel, extract_top_level_names, \
    serialize_documents
from .retrieval import EmbeddingProvider, ScopeDecision, VectorIndex, \
    build_index, camel_words, classify_scope, cosine, DEFAULT_TAU, \
    estimate_verbosity, format_score, is_procedural_question, local_provider, \
    search

OUT_OF_SCOPE_TEXT = ("Cannot answer: this question is outside the scope "
                     "of the loaded skill model.")

PRUNE_SENTENCE_CAP = 12
MECHANISM_BONUS = 0.05
MAX_REPLY_CHARS = 8000


class PipelineError(Exception):
    pass


# --- Generation providers ---------------------------------------------------

class StubProvider:
    """Deterministic generation provider.

    Every stage prompt is answered by a fixed rule over the prompt's
    payload, so pipeline behavior is reproducible byte for byte without
    a hosted model.
    """

    name = "stub"

    def complete(self, system: str, user: str) -> str:
        stage = prompts.stage_of(system)
        payload = prompts.extract_payload(user)
        if stage is None or payload is None:
            return "[stub:unhandled]"
        if stage == prompts.STAGE1_SCOPE:
            return self._scope(payload)
        if stage == prompts.STAGE2_VERBOSITY:
            from .retrieval import verbosity_table
            return str(verbosity_table(payload["question"]))
        if stage == prompts.STAGE3_INITIAL:
            return "\n".join(narrate_document(payload["document"]))
        if stage == prompts.STAGE3_IMPROVE:
            return self._improve(payload)
        if stage == prompts.STAGE4_PRUNE:
            return self._prune(payload)
        if stage == prompts.RAG_ANSWER:
            return self._rag(payload)
        return "[stub:unhandled]"

    def _scope(self, payload: Dict[str, Any]) -> str:
        question = payload["question"].lower()
        for entry in payload["names"]:
            for word in camel_words(entry["name"]):
                if len(word) >= 4 and re.search(
                        rf"\b{re.escape(word)}", question):
                    return "yes"
        return "no"

    def _improve(self, payload: Dict[str, Any]) -> str:
        prior = payload["priorDraft"]
        have = {line.strip() for line in prior.splitlines()}
        extra = [s for s in narrate_document(payload["document"])
                 if s not in have]
        if not extra:
            return prior
        return prior + "\n" + "\n".join(extra)

    def _prune(self, payload: Dict[str, Any]) -> str:
        draft = payload["draft"]
        lines: List[str] = []
        for line in draft.splitlines():
            line = line.strip()
            if line and line not in lines:
                lines.append(line)
        if len(lines) <= PRUNE_SENTENCE_CAP:
            return "\n".join(lines)
        # protected tokens present in the draft must survive the cut
        present = [t for t in payload["protect"] if t in draft]
        keep = set()
        for token in present:
            if any(token in lines[i] for i in keep):
                continue
            for i, line in enumerate(lines):
                if token in line:
                    keep.add(i)
                    break
        for i in range(len(lines)):
            if len(keep) >= PRUNE_SENTENCE_CAP:
                break
            keep.add(i)
        return "\n".join(lines[i] for i in sorted(keep))

    def _rag(self, payload: Dict[str, Any]) -> str:
        chunks = payload["chunks"]
        if not chunks:
            return OUT_OF_SCOPE_TEXT
        sentences = re.split(r"(?<=[.!?])\s+", chunks[0]["text"].strip())
        return " ".join(sentences[:3]).strip()


class HttpChatProvider:
    """Remote chat provider: POST {"system", "user"} -> {"text"}."""

    name = "http-chat"

    def __init__(self, endpoint: str, timeout: float = 30.0):
        self.endpoint = endpoint
        self.timeout = timeout
        self.warnings: List[str] = []

    def complete(self, system: str, user: str) -> str:
        import httpx
        attempts = 0
        while True:
            attempts += 1
            try:
                resp = httpx.post(self.endpoint,
                                  json={"system": system, "user": user},
                                  timeout=self.timeout)
                resp.raise_for_status()
                text = resp.json()["text"]
                break
            except httpx.TimeoutException:
                if attempts > 1:
                    raise PipelineError(
                        f"generation provider timed out twice at "
                        f"{self.endpoint}")
            except Exception as exc:
                raise PipelineError(
                    f"generation provider failed: {exc}") from exc
        if len(text) > MAX_REPLY_CHARS:
            self.warnings.append(
                f"provider reply truncated from {len(text)} to "
                f"{MAX_REPLY_CHARS} characters")
            text = text[:MAX_REPLY_CHARS]
        return text


# --- Document narration (shared by the stub and by tests) -------------------

def narrate_document(doc: Dict[str, Any]) -> List[str]:
    """Render a retrieved model entry as declarative sentences.

    Mechanism entries narrate the success path state by state, quoting
    every outgoing guard verbatim; other entries get a short factual
    summary.  Only names that occur in the entry are ever mentioned.
    """
    try:
        entry = json.loads(doc["text"])
    except (json.JSONDecodeError, TypeError):
        return [doc["text"]]
    source = doc.get("source", "")
    if source == "Mechanism" or "organizer" in entry:
        return _narrate_mechanism(entry)
    if source == "Task" or "means" in entry:
        return _narrate_task(entry)
    return _narrate_knowledge(entry)


def _sig(ref: str, args: Sequence[str]) -> str:
    return f"{ref}({', '.join(args)})"


def _inv_phrase(inv: Dict[str, Any]) -> str:
    call = _sig(inv.get("goalReference", "?"),
                inv.get("actualArguments", []))
    if inv.get("type") == "goal":
        return f"the subgoal {call} is pursued"
    return f"the operation {call} runs"


def _narrate_mechanism(entry: Dict[str, Any]) -> List[str]:
    name = entry.get("name", "?")
    org = entry.get("organizer", {})
    states = {s["name"]: s for s in org.get("states", [])}
    start = org.get("startState", "")
    success = org.get("successState", "")
    failure = org.get("failureState", "")
    outgoing: Dict[str, List[Dict[str, Any]]] = {}
    for t in org.get("transitions", []):
        outgoing.setdefault(t["sourceState"], []).append(t)

    out: List[str] = []
    desc = entry.get("description", "").rstrip(". ")
    if desc:
        out.append(f"{name}: {desc}.")
    out.append(f"{name} starts at {start} and succeeds on reaching "
               f"{success}; {failure} is its failure state.")

    cur = start
    visited = set()
    while cur in states and cur not in (success, failure) \
            and cur not in visited:
        visited.add(cur)
        outs = outgoing.get(cur, [])
        chosen = next((t for t in outs if t["targetState"] != failure),
                      outs[0] if outs else None)
        inv = states[cur].get("goalInvocation", {})
        if chosen is None:
            out.append(f"In {cur}, {_inv_phrase(inv)}.")
            break
        for t in outs:
            cond = t.get("dataCondition", "true")
            target = t["targetState"]
            if t is chosen:
                out.append(f"In {cur}, {_inv_phrase(inv)}; if {cond}, "
                           f"control proceeds to {target}.")
            elif target == failure:
                out.append(f"If {cond}, {cur} diverts to the failure "
                           f"state {target}.")
            else:
                out.append(f"If instead {cond}, control moves from {cur} "
                           f"to {target}.")
        cur = chosen["targetState"]
    if cur == success and cur in states:
        inv = states[cur].get("goalInvocation", {})
        call = _sig(inv.get("goalReference", "?"),
                    inv.get("actualArguments", []))
        what = "achieving the goal" if inv.get("type") == "goal" \
            else "running"
        out.append(f"Reaching {success} completes {name}, {what} {call}.")
    return out


def _narrate_task(entry: Dict[str, Any]) -> List[str]:
    name = entry.get("name", "?")
    out: List[str] = []
    desc = entry.get("description", "").rstrip(". ")
    if desc:
        out.append(f"{name}: {desc}.")
    inputs = entry.get("inputParameters", [])
    outputs = entry.get("outputParameters", [])
    if inputs or outputs:
        out.append(f"{name} takes [{'; '.join(inputs)}] and produces "
                   f"[{'; '.join(outputs)}].")
    if entry.get("given"):
        out.append(f"It requires {entry['given']} to hold beforehand.")
    if entry.get("makes"):
        out.append(f"On success it establishes {entry['makes']}.")
    for m in entry.get("means", []):
        out.append(f"It is realized by the mechanism "
                   f"{_sig(m.get('mechanismReference', '?'), m.get('actualArguments', []))}.")
    return out


def _narrate_knowledge(entry: Dict[str, Any]) -> List[str]:
    if "domain" in entry and "range" in entry:
        return [f"The relation {entry.get('name', '?')} relates "
                f"{entry['domain']} to {entry['range']}."]
    if "values" in entry:
        vals = ", ".join(f"{k}={json.dumps(v)}"
                         for k, v in entry["values"].items())
        return [f"{entry.get('name', '?')} is an instance of "
                f"{entry.get('concept', '?')} with {vals}."]
    props = ", ".join(f"{p.get('name', '?')} ({p.get('type', '?')})"
                      for p in entry.get("properties", []))
    base = f"The concept {entry.get('name', '?')}"
    if entry.get("superConcept"):
        base += f", a kind of {entry['superConcept']},"
    if props:
        return [f"{base} has properties {props}."]
    return [f"{base} has no declared properties."]


# --- RAG fallback corpus ----------------------------------------------------

CHUNK_SIZE = 1200
CHUNK_OVERLAP = 200


def chunk_text(text: str, size: int = CHUNK_SIZE,
               overlap: int = CHUNK_OVERLAP) -> List[str]:
    if size <= overlap:
        raise PipelineError("chunk size must exceed overlap")
    chunks: List[str] = []
    start = 0
    while start < len(text):
        chunks.append(text[start:start + size])
        if start + size >= len(text):
            break
        start += size - overlap
    return chunks


@dataclass
class RagChunk:
    chunkId: str
    text: str
    vector: List[float]


@dataclass
class RagCorpus:
    chunks: List[RagChunk] = field(default_factory=list)

    @classmethod
    def from_texts(cls, texts: Sequence[Tuple[str, str]],
                   embedder: Optional[EmbeddingProvider] = None
                   ) -> "RagCorpus":
        embedder = embedder or local_provider()
        corpus = cls()
        for source_id, text in texts:
            for i, chunk in enumerate(chunk_text(text)):
                corpus.chunks.append(RagChunk(f"{source_id}#{i}", chunk,
                                              embedder.embed(chunk)))
        return corpus

    @classmethod
    def from_files(cls, paths: Sequence[str],
                   embedder: Optional[EmbeddingProvider] = None
                   ) -> "RagCorpus":
        texts = []
        for path in paths:
            with open(path, "r", encoding="utf-8") as fh:
                texts.append((path, fh.read()))
        return cls.from_texts(texts, embedder)

    def search(self, query: str, n: int,
               embedder: Optional[EmbeddingProvider] = None
               ) -> List[Tuple[RagChunk, float]]:
        embedder = embedder or local_provider()
        qvec = embedder.embed(query)
        scored = [(-cosine(qvec, c.vector), i, c)
                  for i, c in enumerate(self.chunks)]
        scored.sort(key=lambda t: (t[0], t[1]))
        return [(c, -neg) for neg, _, c in scored[:max(1, n)]]


# --- Pipeline orchestration -------------------------------------------------

@dataclass
class PipelineConfig:
    scopeStrategy: str = "similarityThreshold"
    tau: float = DEFAULT_TAU
    providerVerbosity: bool = False
    mechanismBonus: float = MECHANISM_BONUS
    ragChunks: int = 4


@dataclass
class DraftRecord:
    stage: str
    documentName: Optional[str]
    text: str

    def to_json(self) -> Dict[str, Any]:
        return {"stage": self.stage, "documentName": self.documentName,
                "text": self.text}


@dataclass
class PipelineAnswer:
    question: str
    route: str  # "tmk" | "ragFallback"
    answerText: str
    scope: ScopeDecision
    verbosity: Optional[int] = None
    retrieved: List[Tuple[TmkDocument, float]] = field(default_factory=list)
    ragHits: List[Tuple[str, float]] = field(default_factory=list)
    drafts: List[DraftRecord] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    def to_json(self) -> Dict[str, Any]:
        return {
            "schemaVersion": 1,
            "question": self.question,
            "route": self.route,
            "answerText": self.answerText,
            "scope": self.scope.to_json(),
            "verbosity": self.verbosity,
            "retrieved": [{"source": d.source, "entryName": d.entryName,
                           "score": format_score(s)}
                          for d, s in self.retrieved],
            "ragHits": [{"chunkId": cid, "score": format_score(s)}
                        for cid, s in self.ragHits],
            "drafts": [d.to_json() for d in self.drafts],
            "warnings": self.warnings,
        }


def protected_tokens(docs: Sequence[TmkDocument]) -> List[str]:
    """Names and guard texts that the prune stage must not drop: state
    names, invocation targets, transition guards, and entry names."""
    tokens: List[str] = []

    def add(token: str) -> None:
        if token and token not in tokens:
            tokens.append(token)

    for doc in docs:
        add(doc.entryName)
        try:
            entry = json.loads(doc.text)
        except json.JSONDecodeError:
            continue
        org = entry.get("organizer")
        if org:
            for s in org.get("states", []):
                add(s.get("name", ""))
                add(s.get("goalInvocation", {}).get("goalReference", ""))
            for t in org.get("transitions", []):
                add(t.get("dataCondition", ""))
        for m in entry.get("means", []):
            add(m.get("mechanismReference", ""))
    return tokens


def draft_synthesis(question: str, docs: Sequence[TmkDocument],
                    provider) -> List[DraftRecord]:
    """Stage 3: initial draft from the top document, then one improvement
    pass per remaining document in rank order."""
    if not docs:
        raise PipelineError("draft synthesis needs at least one document")
    system, user = prompts.initial_prompt(question, docs[0])
    draft = provider.complete(system, user)
    records = [DraftRecord("initial", docs[0].entryName, draft)]
    for doc in docs[1:]:
        system, user = prompts.improve_prompt(question, doc, draft)
        draft = provider.complete(system, user)
        records.append(DraftRecord("improve", doc.entryName, draft))
    return records


def coherence_prune(question: str, draft: str, protect: Sequence[str],
                    provider) -> str:
    system, user = prompts.prune_prompt(question, draft, protect)
    return provider.complete(system, user)


def rag_fallback(question: str, corpus: RagCorpus, provider,
                 n: int = 4,
                 embedder: Optional[EmbeddingProvider] = None
                 ) -> Tuple[str, List[Tuple[str, float]]]:
    hits = corpus.search(question, n, embedder)
    system, user = prompts.rag_prompt(
        question, [(c.chunkId, c.text, s) for c, s in hits])
    return provider.complete(system, user), \
        [(c.chunkId, s) for c, s in hits]


def answer(question: str, model: Optional[TmkModel] = None,
           provider=None,
           index: Optional[VectorIndex] = None,
           corpus: Optional[RagCorpus] = None,
           embedder: Optional[EmbeddingProvider] = None,
           config: Optional[PipelineConfig] = None) -> PipelineAnswer:
    """Run the full answer pipeline for one question."""
    provider = provider if provider is not None else StubProvider()
    config = config or PipelineConfig()
    warnings: List[str] = []

    if model is not None:
        names = extract_top_level_names(model)
        scope = classify_scope(question, names,
                               strategy=config.scopeStrategy,
                               tau=config.tau, provider=embedder,
                               llm=provider)
    else:
        scope = ScopeDecision(False, config.scopeStrategy, [])
        warnings.append("no model loaded; treating question as out of "
                        "scope")

    if scope.inScope and model is not None:
        k = estimate_verbosity(
            question, llm=provider if config.providerVerbosity else None,
            warnings=warnings)
        if index is None:
            index = build_index(serialize_documents(model), embedder)
        bonus = config.mechanismBonus \
            if is_procedural_question(question) else 0.0
        hits = search(index, question, k, embedder, mechanism_bonus=bonus)
        docs = [d for d, _ in hits]
        drafts = draft_synthesis(question, docs, provider)
        final = coherence_prune(question, drafts[-1].text,
                                protected_tokens(docs), provider)
        drafts.append(DraftRecord("prune", None, final))
        return PipelineAnswer(question, "tmk", final, scope, k, hits,
                              [], drafts, warnings)

    if corpus is not None and corpus.chunks:
        text, rag_hits = rag_fallback(question, corpus, provider,
                                      config.ragChunks, embedder)
        return PipelineAnswer(question, "ragFallback", text, scope,
                              None, [], rag_hits, [], warnings)
    warnings.append("out of scope and no fallback corpus configured")
    return PipelineAnswer(question, "ragFallback", OUT_OF_SCOPE_TEXT,
                          scope, None, [], [], [], warnings)
