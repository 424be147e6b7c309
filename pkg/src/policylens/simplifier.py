"""Summarization pipeline: extract a regex from a policy, ask a provider to
simplify it, and keep the simplification only if it verifies.

A run compiles the policy to its request set, projects one dimension,
extracts the exact regex, samples accepted strings, asks the provider for a
simplified regex (several independent attempts), scores every parseable
candidate by model-counted Jaccard similarity against the exact language,
and chooses the best candidate if it clears the threshold; otherwise it
falls back to the exact extracted regex.  An empty policy short-circuits to
the ``∅`` summary without any provider call.

The same tail (projection onward) also summarizes the two difference sets of
a policy pair, which characterizes what one policy allows that the other
does not.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction

from .automata import DEFAULT_STATE_CAP, Dfa, from_regex
from .errors import PolicyLensError, ProviderError, RegexSyntaxError
from .policy import PolicyDocument
from .providers import SAMPLES_BEGIN, SAMPLES_END, LlmProvider
from .regex import EMPTY_TOKEN, RegexAst, parse_regex, print_regex
from .requestsets import (
    DEFAULT_CUBE_CAP,
    RequestSet,
    compile_policy,
    is_empty_set,
    project,
    set_difference,
)
from .sampler import SamplerConfig, sample_n


@dataclass(frozen=True)
class SimplifierConfig:
    samples: int = 1000
    bound: int = 100
    threshold: float = 0.8
    attempts: int = 3
    projection: str = "resource"
    seed: int = 0
    include_extracted_in_prompt: bool = False
    fallback: bool = True
    max_sample_length: int = 100
    state_cap: int = DEFAULT_STATE_CAP
    cube_cap: int = DEFAULT_CUBE_CAP

    def __post_init__(self) -> None:
        if not 0 <= self.threshold <= 1:
            raise ValueError("threshold must be in [0, 1]")
        if self.attempts < 1:
            raise ValueError("attempts must be at least 1")
        if self.samples < 1:
            raise ValueError("samples must be at least 1")
        if self.bound < 0:
            raise ValueError("bound must be non-negative")


@dataclass
class LlmCandidate:
    """One provider attempt: raw response, extracted regex, parse/score state."""

    attempt: int
    response: str | None
    regex_text: str | None
    error: str | None = None
    similarity: Fraction | None = None
    ast: RegexAst | None = None

    def to_dict(self) -> dict:
        return {
            "attempt": self.attempt,
            "response": self.response,
            "regex": self.regex_text,
            "error": self.error,
            "similarity": None if self.similarity is None else fraction_str(self.similarity),
        }


@dataclass
class SummarizationReport:
    projection: str
    empty_language: bool
    extracted_regex: str
    samples: list[str]
    candidates: list[LlmCandidate]
    chosen: str
    chosen_source: str  # "candidate" | "extracted" | "empty"
    fallback: bool
    similarity: Fraction | None
    model_counts: tuple[int, int] | None  # (intersection, union) behind the similarity
    config: dict
    timings: dict[str, float] = field(default_factory=dict)

    def to_dict(self, include_volatile: bool = True) -> dict:
        out = {
            "projection": self.projection,
            "empty_language": self.empty_language,
            "extracted_regex": self.extracted_regex,
            "samples": self.samples,
            "candidates": [c.to_dict() for c in self.candidates],
            "chosen": self.chosen,
            "chosen_source": self.chosen_source,
            "fallback": self.fallback,
            "similarity": None if self.similarity is None else fraction_str(self.similarity),
            "model_counts": None
            if self.model_counts is None
            else {"intersection": str(self.model_counts[0]), "union": str(self.model_counts[1])},
            "config": self.config,
        }
        if include_volatile:
            out["timings"] = {k: round(v, 6) for k, v in self.timings.items()}
        return out


def fraction_str(j: Fraction) -> str:
    if j.denominator == 1:
        return f"{j.numerator}.0"
    return repr(j.numerator / j.denominator)


def quantify_similarity(r1: RegexAst, r2: RegexAst, bound: int) -> Fraction:
    """Jaccard similarity of the two languages restricted to length <= bound."""
    j, _ = _similarity_counts(from_regex(r1), from_regex(r2), bound)
    return j


def _similarity_counts(d1: Dfa, d2: Dfa, bound: int) -> tuple[Fraction, tuple[int, int]]:
    inter = d1.intersect(d2).count_models(bound)
    union = d1.union(d2).count_models(bound)
    if union == 0:
        # Both languages empty within the bound: equal, so similarity 1.
        return Fraction(1), (0, 0)
    return Fraction(inter, union), (inter, union)


PROMPT_DIALECT = (
    "Use only this regex dialect: literal characters; escapes like \\. \\* \\\\; "
    "character classes [abc], [a-z], [^...]; the any-character dot .; grouping (...); "
    "alternation |; quantifiers * + ? {m} {m,n}. No lookaround, no backreferences, "
    "no lazy quantifiers, no anchors. The regex must match entire strings."
)


def build_prompt(
    samples: list[str] | set[str],
    extracted_text: str | None = None,
) -> str:
    """Prompt asking for one generalizing regex over the given sample strings."""
    lines = [
        "Below are example strings. Every one of them belongs to one regular language.",
        "Write a single short regular expression for that language: it must match",
        "every example and capture the pattern they share.",
        PROMPT_DIALECT,
    ]
    if extracted_text is not None:
        lines.append("An exact but verbose regular expression for the language is: " + extracted_text)
    lines.append(SAMPLES_BEGIN)
    lines.extend(sorted(samples))
    lines.append(SAMPLES_END)
    lines.append("Answer with exactly one line containing only the regular expression.")
    return "\n".join(lines)


def _candidate_line(response: str) -> str | None:
    """First line of a completion that plausibly is the regex itself."""
    for raw in response.splitlines():
        line = raw.strip()
        if not line or line.startswith("```"):
            continue
        line = line.strip("`").strip()
        if not line:
            continue
        if line.endswith(":"):  # prose lead-in such as "Here is the regex:"
            continue
        return line
    return None


def generate_regex_from_llm(
    extracted: RegexAst,
    samples: list[str] | set[str],
    provider: LlmProvider,
    include_extracted: bool = False,
    attempt: int = 1,
) -> LlmCandidate:
    """One provider attempt.  Transport failures raise ProviderError; a
    response that does not parse is recorded on the candidate, not raised."""
    prompt = build_prompt(samples, print_regex(extracted) if include_extracted else None)
    response = provider.complete(prompt)
    line = _candidate_line(response)
    if line is None:
        return LlmCandidate(attempt, response, None, error="no regex line in response")
    try:
        ast = parse_regex(line)
    except (RegexSyntaxError, PolicyLensError) as e:
        return LlmCandidate(attempt, response, line, error=f"unparseable: {e}")
    return LlmCandidate(attempt, response, line, ast=ast)


def _config_echo(cfg: SimplifierConfig, provider: LlmProvider) -> dict:
    return {
        "samples": cfg.samples,
        "bound": cfg.bound,
        "threshold": cfg.threshold,
        "attempts": cfg.attempts,
        "projection": cfg.projection,
        "seed": cfg.seed,
        "include_extracted_in_prompt": cfg.include_extracted_in_prompt,
        "provider": provider.name,
    }


def _empty_report(cfg: SimplifierConfig, provider: LlmProvider, timings: dict[str, float]) -> SummarizationReport:
    return SummarizationReport(
        projection=cfg.projection,
        empty_language=True,
        extracted_regex=EMPTY_TOKEN,
        samples=[],
        candidates=[],
        chosen=EMPTY_TOKEN,
        chosen_source="empty",
        fallback=False,
        similarity=None,
        model_counts=None,
        config=_config_echo(cfg, provider),
        timings=timings,
    )


def summarize_set(
    request_set: RequestSet, cfg: SimplifierConfig, provider: LlmProvider
) -> SummarizationReport:
    """The pipeline tail: projection, extraction, sampling, provider attempts,
    similarity scoring, and the threshold decision."""
    timings: dict[str, float] = {}
    t_start = time.perf_counter()
    if is_empty_set(request_set):
        timings["total"] = time.perf_counter() - t_start
        return _empty_report(cfg, provider, timings)

    t0 = time.perf_counter()
    dfa = project(request_set, cfg.projection, cfg.state_cap)
    timings["project"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    extracted = dfa.extract_regex()
    extracted_text = print_regex(extracted)
    timings["extract"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    sampler_cfg = SamplerConfig(seed=cfg.seed, max_length=cfg.max_sample_length)
    samples = sorted(sample_n(extracted, cfg.samples, sampler_cfg))
    timings["sample"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    candidates: list[LlmCandidate] = []
    for attempt in range(1, cfg.attempts + 1):
        try:
            cand = generate_regex_from_llm(
                extracted, samples, provider, cfg.include_extracted_in_prompt, attempt
            )
        except ProviderError as e:
            cand = LlmCandidate(attempt, None, None, error=f"provider: {e}")
        candidates.append(cand)
    timings["llm"] = time.perf_counter() - t0

    if not cfg.fallback and all(
        c.response is None and c.error is not None for c in candidates
    ):
        raise ProviderError("all provider attempts failed and fallback is disabled")

    t0 = time.perf_counter()
    counts_by_attempt: dict[int, tuple[int, int]] = {}
    for cand in candidates:
        if cand.ast is not None:
            cand.similarity, counts_by_attempt[cand.attempt] = _similarity_counts(
                dfa, from_regex(cand.ast, cfg.state_cap), cfg.bound
            )
    timings["similarity"] = time.perf_counter() - t0

    scored = [c for c in candidates if c.similarity is not None]
    best = (
        max(scored, key=lambda c: (c.similarity, -len(c.regex_text), -c.attempt))
        if scored
        else None
    )
    # Exact-decimal threshold: Fraction("0.8") is 4/5, unlike the float 0.8.
    if best is not None and best.similarity >= Fraction(str(cfg.threshold)):
        chosen, source, fallback = best.regex_text, "candidate", False
        similarity, counts = best.similarity, counts_by_attempt[best.attempt]
    else:
        # Chosen output is the exact extracted regex; scores stay per-candidate.
        chosen, source, fallback = extracted_text, "extracted", True
        similarity, counts = None, None

    timings["total"] = time.perf_counter() - t_start
    return SummarizationReport(
        projection=cfg.projection,
        empty_language=False,
        extracted_regex=extracted_text,
        samples=samples,
        candidates=candidates,
        chosen=chosen,
        chosen_source=source,
        fallback=fallback,
        similarity=similarity,
        model_counts=counts,
        config=_config_echo(cfg, provider),
        timings=timings,
    )


def generate_summarization(
    doc: PolicyDocument, cfg: SimplifierConfig, provider: LlmProvider
) -> SummarizationReport:
    """Summarize the requests a policy allows, projected to one dimension."""
    t0 = time.perf_counter()
    request_set = compile_policy(doc, cfg.cube_cap, cfg.state_cap)
    compile_time = time.perf_counter() - t0
    report = summarize_set(request_set, cfg, provider)
    report.timings["compile"] = compile_time
    report.timings["total"] += compile_time
    return report


def summarize_difference(
    p1: PolicyDocument, p2: PolicyDocument, cfg: SimplifierConfig, provider: LlmProvider
) -> tuple[SummarizationReport, SummarizationReport]:
    """Summaries of what p1 allows beyond p2 and what p2 allows beyond p1."""
    t0 = time.perf_counter()
    s1 = compile_policy(p1, cfg.cube_cap, cfg.state_cap)
    s2 = compile_policy(p2, cfg.cube_cap, cfg.state_cap)
    f1 = set_difference(s1, s2, cfg.cube_cap, cfg.state_cap)
    f2 = set_difference(s2, s1, cfg.cube_cap, cfg.state_cap)
    compile_time = time.perf_counter() - t0
    first = summarize_set(f1, cfg, provider)
    second = summarize_set(f2, cfg, provider)
    for report in (first, second):
        report.timings["compile"] = compile_time
        report.timings["total"] += compile_time
    return first, second
