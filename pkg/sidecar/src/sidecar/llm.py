"""LLM backends and output handling for keyword metadata generation.

The model receives one prompt per document (instruction, abstract, keyword
list) and must yield a contextual definition per keyword. Backends:

- ``template``      deterministic, model-free; for tests and offline runs
- ``http:<url>``    POST {"prompt": ...} to a completion endpoint returning
                    {"text": ...}
- anything else     treated as a local transformers text-generation model id

Free-text output is parsed leniently (``keyword ::: definition`` lines,
with a ``keyword: definition`` fallback) and validated strictly; a parse
that misses keywords is retried once with a stricter format instruction.
"""

from __future__ import annotations

import re

import requests

INSTRUCTION = (
    "Given the scientific abstract and the keywords that have been extracted "
    "for the document, provide a concise meta data/prior information for "
    "every keyword in context of the document. Incorporate any extra "
    "knowledge that can help classify the document to relevant topics."
)

FORMAT_HINT = (
    "Write one line per keyword, formatted exactly as:\n"
    "keyword ::: definition"
)

STRICT_FORMAT_HINT = (
    "Your previous answer could not be parsed. Respond with exactly one line "
    "per keyword, no prose before or after, each line formatted as:\n"
    "keyword ::: definition\n"
    "Use the keywords verbatim, in the given order."
)

_WORD_RE = re.compile(r"[a-z0-9]+(?:[-'][a-z0-9]+)*")


class LLMError(Exception):
    """Raised when the model call itself fails."""


class IncompleteMetadata(Exception):
    """Raised when parsed output does not cover every requested keyword."""

    def __init__(self, missing):
        self.missing = list(missing)
        super().__init__(f"no metadata parsed for keywords: {self.missing}")


def build_prompt(abstract: str, keywords, strict: bool = False) -> str:
    lines = [INSTRUCTION, "", f"Abstract: {abstract}", "",
             "Keywords: " + "; ".join(keywords), "",
             STRICT_FORMAT_HINT if strict else FORMAT_HINT]
    return "\n".join(lines)


def parse_metadata(raw: str, keywords) -> dict:
    """Extract keyword -> definition from free text; unmatched keywords are
    simply absent (the caller decides whether to retry or fail)."""
    wanted = {k.strip().lower(): k for k in keywords}
    found: dict[str, str] = {}
    for line in raw.splitlines():
        line = line.strip().strip("-*").strip()
        if not line:
            continue
        if ":::" in line:
            head, _, tail = line.partition(":::")
        elif ":" in line:
            head, _, tail = line.partition(":")
        else:
            continue
        key = head.strip().strip("\"'").lower()
        # Tolerate list numbering ("1. keyword") from chatty models.
        key = re.sub(r"^\d+[.)]\s*", "", key)
        text = tail.strip()
        if key in wanted and text and wanted[key] not in found:
            found[wanted[key]] = text
    return found


class TemplateLLM:
    """Deterministic stand-in model.

    Builds the same prompt a real model would receive (so the request path is
    identical), then answers from the abstract itself: the definition of each
    keyword lists the most frequent co-occurring content words.
    """

    name = "template-llm-v1"

    def complete(self, prompt: str) -> str:
        abstract = ""
        keywords: list[str] = []
        for line in prompt.splitlines():
            if line.startswith("Abstract: "):
                abstract = line[len("Abstract: "):]
            elif line.startswith("Keywords: "):
                keywords = [k.strip() for k in line[len("Keywords: "):].split(";") if k.strip()]
        tokens = _WORD_RE.findall(abstract.lower())
        counts: dict[str, int] = {}
        order: dict[str, int] = {}
        for pos, tok in enumerate(tokens):
            counts[tok] = counts.get(tok, 0) + 1
            order.setdefault(tok, pos)
        lines = []
        for kw in keywords:
            own = set(_WORD_RE.findall(kw.lower()))
            context = sorted(
                (t for t in counts if t not in own and len(t) > 3),
                key=lambda t: (-counts[t], order[t]),
            )[:5]
            definition = (f"in this document, {kw} appears alongside "
                          f"{', '.join(context)}" if context
                          else f"a salient phrase of this document: {kw}")
            lines.append(f"{kw} ::: {definition}")
        return "\n".join(lines)


class HttpLLM:
    """Generic completion endpoint: POST {"prompt"} -> {"text"}."""

    def __init__(self, url: str, timeout: float = 120.0):
        self.url = url
        self.timeout = timeout
        self.name = f"http:{url}"

    def complete(self, prompt: str) -> str:
        try:
            resp = requests.post(self.url, json={"prompt": prompt}, timeout=self.timeout)
        except requests.RequestException as exc:
            raise LLMError(f"LLM endpoint unreachable: {exc}") from exc
        if resp.status_code != 200:
            raise LLMError(f"LLM endpoint returned {resp.status_code}")
        try:
            return resp.json()["text"]
        except (ValueError, KeyError) as exc:
            raise LLMError("LLM endpoint response missing 'text'") from exc


class TransformersLLM:
    """Local instruction-tuned model via the transformers pipeline."""

    def __init__(self, model_id: str, max_new_tokens: int = 512, seed: int | None = None):
        try:
            from transformers import pipeline, set_seed
        except ImportError as exc:
            raise LLMError("transformers is not installed; install the 'models' extra") from exc
        if seed is not None:
            set_seed(seed)
        try:
            self._pipe = pipeline("text-generation", model=model_id)
        except Exception as exc:
            raise LLMError(f"cannot load LLM {model_id!r}: {exc}") from exc
        self.name = model_id
        self.max_new_tokens = max_new_tokens

    def complete(self, prompt: str) -> str:
        out = self._pipe(prompt, max_new_tokens=self.max_new_tokens,
                         return_full_text=False)
        return out[0]["generated_text"]


def make_llm(spec: str, seed: int | None = None):
    if spec == "template":
        return TemplateLLM()
    if spec.startswith("http:") or spec.startswith("https:"):
        return HttpLLM(spec)
    return TransformersLLM(spec, seed=seed)


def generate_metadata(llm, abstract: str, keywords) -> dict:
    """Prompt, parse, and validate; one stricter retry before giving up."""
    keywords = list(keywords)
    found = parse_metadata(llm.complete(build_prompt(abstract, keywords)), keywords)
    missing = [k for k in keywords if k not in found]
    if missing:
        retry = parse_metadata(llm.complete(build_prompt(abstract, keywords, strict=True)),
                               keywords)
        found.update({k: v for k, v in retry.items() if k not in found})
        missing = [k for k in keywords if k not in found]
    if missing:
        raise IncompleteMetadata(missing)
    return found
