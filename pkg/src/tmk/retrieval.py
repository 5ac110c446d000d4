"""Embedding, similarity search, scope classification, and verbosity
estimation (stages 1-2 of the answer pipeline)."""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from .model import TmkDocument, TopLevelName

EMBED_DIM = 256

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


class RetrievalError(Exception):
    pass


def _fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


def embed_local(text: str) -> List[float]:
    """Hashed character-trigram term-frequency embedding, L2-normalized.

    Deterministic substitute for a hosted embedding service; empty or
    whitespace-only text maps to the zero vector.
    """
    lowered = text.lower()
    stripped = lowered.strip()
    vec = [0.0] * EMBED_DIM
    if not stripped:
        return vec
    if len(stripped) < 3:
        grams = [stripped]
    else:
        grams = [lowered[i:i + 3] for i in range(len(lowered) - 2)]
    for gram in grams:
        vec[_fnv1a64(gram.encode("utf-8")) % EMBED_DIM] += 1.0
    norm = math.sqrt(sum(v * v for v in vec))
    if norm > 0.0:
        vec = [v / norm for v in vec]
    return vec


def cosine(a: Sequence[float], b: Sequence[float]) -> float:
    # vectors are unit-length or zero; zero vectors compare as 0.0
    return sum(x * y for x, y in zip(a, b))


@dataclass
class EmbeddingProvider:
    name: str
    dimension: int
    embed: Callable[[str], List[float]]


def local_provider() -> EmbeddingProvider:
    return EmbeddingProvider("local-trigram", EMBED_DIM, embed_local)


def http_provider(endpoint: str, dimension: int, timeout: float = 10.0,
                  retries: int = 1) -> EmbeddingProvider:
    """Remote protocol: POST {"texts": [...]} -> {"vectors": [[...]]}."""
    import httpx

    def embed(text: str) -> List[float]:
        last: Optional[Exception] = None
        for _ in range(retries + 1):
            try:
                resp = httpx.post(endpoint, json={"texts": [text]},
                                  timeout=timeout)
                resp.raise_for_status()
                return resp.json()["vectors"][0]
            except Exception as exc:  # surfaced to the caller with identity
                last = exc
        raise RetrievalError(f"embedding provider failed for "
                             f"{text[:60]!r}: {last}")

    return EmbeddingProvider("http", dimension, embed)


@dataclass
class VectorIndex:
    dimension: int
    provider: str
    entries: List[TmkDocument] = field(default_factory=list)

    def to_json(self) -> Dict[str, Any]:
        return {"dimension": self.dimension,
                "provider": self.provider,
                "entries": [{"source": d.source, "entryName": d.entryName,
                             "text": d.text, "vector": d.vector}
                            for d in self.entries]}

    @classmethod
    def from_json(cls, raw: Dict[str, Any]) -> "VectorIndex":
        idx = cls(raw["dimension"], raw.get("provider", "local-trigram"))
        for e in raw["entries"]:
            idx.entries.append(TmkDocument(e["source"], e["entryName"],
                                           e["text"], e["vector"]))
        return idx


def build_index(docs: Sequence[TmkDocument],
                provider: Optional[EmbeddingProvider] = None) -> VectorIndex:
    """Embed every document once; insertion order is the tie-break order."""
    if not docs:
        raise RetrievalError("empty-index: no documents to index")
    provider = provider or local_provider()
    seen = set()
    index = VectorIndex(provider.dimension, provider.name)
    for doc in docs:
        key = (doc.source, doc.entryName)
        if key in seen:
            raise RetrievalError(
                f"duplicate-document: {doc.source}/{doc.entryName}")
        seen.add(key)
        vector = doc.vector if doc.vector is not None \
            else provider.embed(doc.text)
        index.entries.append(TmkDocument(doc.source, doc.entryName,
                                         doc.text, vector))
    return index


def search(index: VectorIndex, query: str, k: int,
           provider: Optional[EmbeddingProvider] = None,
           mechanism_bonus: float = 0.0
           ) -> List[Tuple[TmkDocument, float]]:
    """Top-k documents by cosine, descending; ties keep insertion order.

    `mechanism_bonus` is an additive prior applied to Mechanism-source
    documents (used to favor procedural entries for how/why questions).
    """
    provider = provider or local_provider()
    qvec = provider.embed(query)
    k = max(1, min(k, len(index.entries)))
    scored = []
    for pos, doc in enumerate(index.entries):
        score = cosine(qvec, doc.vector)
        if mechanism_bonus and doc.source == "Mechanism":
            score += mechanism_bonus
        scored.append((-score, pos, doc))
    scored.sort(key=lambda t: (t[0], t[1]))
    return [(doc, -neg) for neg, _, doc in scored[:k]]


def format_score(score: float) -> str:
    return f"{score:.4f}"


# --- Scope classification ---------------------------------------------------

@dataclass
class ScopeDecision:
    inScope: bool
    strategy: str  # "similarityThreshold" | "providerJudgment"
    evidence: List[Dict[str, Any]] = field(default_factory=list)
    verdictText: Optional[str] = None

    def to_json(self) -> Dict[str, Any]:
        return {"inScope": self.inScope, "strategy": self.strategy,
                "evidence": self.evidence, "verdictText": self.verdictText}


# calibrated on the three bundled skills: every in-scope study question
# scores >= 0.335, every authored off-topic question <= 0.274
DEFAULT_TAU = 0.30


def name_text(name: TopLevelName) -> str:
    """Embedding text for a top-level name: the identifier, its camel-case
    word split, and the component tag."""
    words = camel_words(name.name)
    return f"{name.name} {' '.join(words)} ({name.component})"


def camel_words(identifier: str) -> List[str]:
    parts = re.findall(r"[A-Z]+(?=[A-Z][a-z])|[A-Z]?[a-z]+|[A-Z]+|\d+",
                       identifier.replace("_", " "))
    return [p.lower() for p in parts if p]


def classify_scope(question: str, names: Sequence[TopLevelName],
                   strategy: str = "similarityThreshold",
                   tau: float = DEFAULT_TAU,
                   provider: Optional[EmbeddingProvider] = None,
                   llm=None) -> ScopeDecision:
    """Decide whether a question falls inside the skill model's scope."""
    if strategy == "similarityThreshold":
        provider = provider or local_provider()
        qvec = provider.embed(question)
        scores = [(cosine(qvec, provider.embed(name_text(n))), n)
                  for n in names]
        scores.sort(key=lambda t: -t[0])
        evidence = [{"name": n.name, "component": n.component,
                     "score": round(s, 4)} for s, n in scores[:5]]
        in_scope = bool(scores) and scores[0][0] >= tau
        return ScopeDecision(in_scope, strategy, evidence)
    if strategy == "providerJudgment":
        if llm is None:
            raise RetrievalError("providerJudgment strategy needs an "
                                 "llm provider")
        from .prompts import scope_prompt
        system, user = scope_prompt(question, names)
        verdict = llm.complete(system, user).strip().lower()
        if verdict not in ("yes", "no"):
            raise RetrievalError(
                f"verdict-ambiguous: provider said {verdict!r}")
        return ScopeDecision(verdict == "yes", strategy,
                             [{"name": n.name, "component": n.component}
                              for n in names[:5]],
                             verdictText=verdict)
    raise RetrievalError(f"unknown scope strategy {strategy!r}")


# --- Verbosity ---------------------------------------------------------------

_DETAIL_RE = re.compile(
    r"\bcompare\b|\bwalk[- ]?(me )?through\b|\bexplain in detail\b|"
    r"\bstep[- ]by[- ]step\b", re.IGNORECASE)
_HOW_WHY_RE = re.compile(
    r"^(how|why)\b|^under what (condition|circumstance)", re.IGNORECASE)
_WHAT_RE = re.compile(r"^(what|which|list)\b", re.IGNORECASE)
_PROCEDURAL_RE = re.compile(
    r"\boperations?\b|\bmechanisms?\b|\brequirements?\b|\bprocedures?\b|"
    r"\bsteps?\b", re.IGNORECASE)


def verbosity_table(question: str) -> int:
    """Deterministic verbosity estimate in 1..4 from question phrasing."""
    q = question.strip()
    if not q:
        return 1
    tokens = q.split()
    if _DETAIL_RE.search(q) or len(tokens) > 25:
        return 4
    if _HOW_WHY_RE.match(q):
        return 3
    if _WHAT_RE.match(q):
        return 2
    return 1


def is_procedural_question(question: str) -> bool:
    """True for how/why phrasing or questions naming an operation,
    mechanism, or requirement; those prioritize Mechanism entries
    during retrieval."""
    q = question.strip()
    return bool(_HOW_WHY_RE.match(q)) or bool(_PROCEDURAL_RE.search(q))


def estimate_verbosity(question: str, llm=None,
                       warnings: Optional[List[str]] = None) -> int:
    """Verbosity score k in 1..4; provider judgment when an llm is given,
    with the decision table as the fallback."""
    if llm is not None:
        from .prompts import verbosity_prompt
        system, user = verbosity_prompt(question)
        reply = llm.complete(system, user).strip()
        try:
            return min(4, max(1, int(reply)))
        except ValueError:
            if warnings is not None:
                warnings.append(
                    f"verbosity provider returned non-integer {reply!r}; "
                    f"using decision table")
    return verbosity_table(question)


def save_index(index: VectorIndex, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(index.to_json(), fh)


def load_index(path: str) -> VectorIndex:
    with open(path, "r", encoding="utf-8") as fh:
        return VectorIndex.from_json(json.load(fh))
