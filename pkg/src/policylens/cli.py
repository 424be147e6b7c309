"""Command-line front end.

Commands: ``summarize`` (regex summary of one policy), ``compare``
(permissiveness verdict for a pair), ``diff`` (summaries of both
differences), ``count`` (bounded model count of one dimension), ``requests``
(sample allowed/denied requests).

Exit codes: 0 success; 1 input/syntax/schema problems; 2 automaton or cube
blowup; 3 provider failure with fallback disabled; 4 partial output because
a requested sample side is empty.

The full report goes to ``--out`` (or standard output) as json or text; a
one-line human summary always goes to standard output.  ``--no-timestamp``
drops the volatile fields (timestamp and timings) so identical runs are
byte-identical.
"""

from __future__ import annotations

import json
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import NoReturn

import click

from .errors import (
    CubeBlowup,
    InsufficientLanguage,
    PolicyLensError,
    ProviderError,
    StateBlowup,
)
from .policy import PolicyDocument, parse_policy
from .providers import LlmProvider, load_provider
from .requestsets import (
    compare_policies,
    compile_policy,
    contains,
    project,
    sample_from_set,
    set_difference,
    universe_set,
)
from .simplifier import (
    SimplifierConfig,
    SummarizationReport,
    fraction_str,
    generate_summarization,
    summarize_difference,
)

EXIT_INPUT = 1
EXIT_BLOWUP = 2
EXIT_PROVIDER = 3
EXIT_PARTIAL = 4

DEFAULT_SEED = 0


def _fail(message: str, code: int) -> NoReturn:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_policy(path: str) -> PolicyDocument:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        _fail(str(e), EXIT_INPUT)
    return parse_policy(text)


def _load_provider_config(path: str | None) -> dict | None:
    if path is None:
        return None
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        _fail(str(e), EXIT_INPUT)
    except json.JSONDecodeError as e:
        _fail(f"invalid provider config: {e}", EXIT_INPUT)
    if not isinstance(data, dict):
        _fail("provider config must be a JSON object", EXIT_INPUT)
    return data


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _text_render(value: object, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines: list[str] = []
    if isinstance(value, dict):
        for k, v in value.items():
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                lines.extend(_text_render(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {_scalar(v)}")
    elif isinstance(value, list):
        for v in value:
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}-")
                lines.extend(_text_render(v, indent + 1))
            else:
                lines.append(f"{pad}- {_scalar(v)}")
    else:
        lines.append(f"{pad}{_scalar(value)}")
    return lines


def _scalar(v: object) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (dict, list)):  # empty containers
        return "{}" if isinstance(v, dict) else "[]"
    return str(v)


def _emit(report: dict, fmt: str, out: str | None, summary: str) -> None:
    click.echo(summary)
    if fmt == "json":
        body = json.dumps(report, indent=2, ensure_ascii=False)
    else:
        body = "\n".join(_text_render(report))
    if out:
        try:
            Path(out).write_text(body + "\n", encoding="utf-8")
        except OSError as e:
            _fail(str(e), EXIT_INPUT)
    else:
        click.echo(body)


def _run_guarded(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (StateBlowup, CubeBlowup) as e:
        _fail(str(e), EXIT_BLOWUP)
    except ProviderError as e:
        _fail(str(e), EXIT_PROVIDER)
    except InsufficientLanguage as e:
        _fail(str(e), EXIT_PARTIAL)
    except PolicyLensError as e:
        _fail(str(e), EXIT_INPUT)


def _summary_line(report: SummarizationReport) -> str:
    if report.empty_language:
        return "summary: ∅ (policy allows nothing)"
    if report.fallback:
        return f"summary (exact, fallback): {report.chosen}"
    return f"summary (candidate, J={fraction_str(report.similarity)}): {report.chosen}"


_common = [
    click.option("--samples", "-n", default=1000, show_default=True, help="Sample draws per run."),
    click.option("--bound", "-b", default=100, show_default=True, help="Model-counting length bound."),
    click.option("--threshold", "-t", default=0.8, show_default=True, help="Similarity acceptance threshold."),
    click.option("--attempts", default=3, show_default=True, help="Independent provider attempts."),
    click.option("--seed", default=DEFAULT_SEED, show_default=True, help="Random seed."),
    click.option("--dim", default="resource", show_default=True, help="Dimension to summarize."),
    click.option("--provider", default="mock", show_default=True, type=click.Choice(["mock", "http"])),
    click.option("--provider-config", default=None, help="JSON file with provider settings."),
    click.option("--out", default=None, help="Write the full report to this file."),
    click.option("--format", "fmt", default="json", show_default=True, type=click.Choice(["json", "text"])),
    click.option("--include-extracted-regex-in-prompt", is_flag=True, default=False),
    click.option("--no-fallback", is_flag=True, default=False, help="Fail instead of falling back when every provider attempt errors."),
    click.option("--no-timestamp", is_flag=True, default=False, help="Omit volatile fields (timestamp, timings)."),
]


def _with_options(options):
    def wrap(fn):
        for opt in reversed(options):
            fn = opt(fn)
        return fn

    return wrap


def _make_config(samples, bound, threshold, attempts, seed, dim, include_extracted, no_fallback) -> SimplifierConfig:
    try:
        return SimplifierConfig(
            samples=samples,
            bound=bound,
            threshold=threshold,
            attempts=attempts,
            projection=dim,
            seed=seed,
            include_extracted_in_prompt=include_extracted,
            fallback=not no_fallback,
        )
    except ValueError as e:
        _fail(str(e), EXIT_INPUT)


def _make_provider(kind: str, config_path: str | None) -> LlmProvider:
    try:
        return load_provider(kind, _load_provider_config(config_path))
    except ProviderError as e:
        _fail(str(e), EXIT_INPUT)


@click.group()
@click.version_option(package_name="policylens")
def main() -> None:
    """Policy analysis: compile access policies to automata, summarize them as
    regexes, verify the summaries, and compare policies."""


@main.command()
@click.argument("policy_path")
@_with_options(_common)
def summarize(policy_path, samples, bound, threshold, attempts, seed, dim, provider,
              provider_config, out, fmt, include_extracted_regex_in_prompt, no_fallback, no_timestamp):
    """Produce a verified regex summary of the requests POLICY_PATH allows."""
    doc = _run_guarded(_load_policy, policy_path)
    cfg = _make_config(samples, bound, threshold, attempts, seed, dim,
                       include_extracted_regex_in_prompt, no_fallback)
    prov = _make_provider(provider, provider_config)
    report = _run_guarded(generate_summarization, doc, cfg, prov)
    payload: dict = {"command": "summarize", "policy": policy_path}
    payload.update(report.to_dict(include_volatile=not no_timestamp))
    if not no_timestamp:
        payload["timestamp"] = _timestamp()
    _emit(payload, fmt, out, _summary_line(report))


@main.command()
@click.argument("policy1")
@click.argument("policy2")
@click.option("--witnesses", default=3, show_default=True, help="Witness requests per side.")
@click.option("--seed", default=DEFAULT_SEED, show_default=True)
@click.option("--out", default=None)
@click.option("--format", "fmt", default="json", show_default=True, type=click.Choice(["json", "text"]))
@click.option("--no-timestamp", is_flag=True, default=False)
def compare(policy1, policy2, witnesses, seed, out, fmt, no_timestamp):
    """Classify the permissiveness relation between two policies."""
    d1 = _run_guarded(_load_policy, policy1)
    d2 = _run_guarded(_load_policy, policy2)
    verdict = _run_guarded(compare_policies, d1, d2, witnesses, seed)
    payload = {
        "command": "compare",
        "policy1": policy1,
        "policy2": policy2,
        "verdict": verdict.kind.value,
        "witnesses_first_only": list(verdict.witnesses_first),
        "witnesses_second_only": list(verdict.witnesses_second),
    }
    if not no_timestamp:
        payload["timestamp"] = _timestamp()
    _emit(payload, fmt, out, f"verdict: {verdict.kind.value}")


@main.command()
@click.argument("policy1")
@click.argument("policy2")
@_with_options(_common)
def diff(policy1, policy2, samples, bound, threshold, attempts, seed, dim, provider,
         provider_config, out, fmt, include_extracted_regex_in_prompt, no_fallback, no_timestamp):
    """Summarize what each policy allows that the other does not."""
    d1 = _run_guarded(_load_policy, policy1)
    d2 = _run_guarded(_load_policy, policy2)
    cfg = _make_config(samples, bound, threshold, attempts, seed, dim,
                       include_extracted_regex_in_prompt, no_fallback)
    prov = _make_provider(provider, provider_config)
    first, second = _run_guarded(summarize_difference, d1, d2, cfg, prov)
    include_volatile = not no_timestamp
    payload = {
        "command": "diff",
        "policy1": policy1,
        "policy2": policy2,
        "first_only": first.to_dict(include_volatile=include_volatile),
        "second_only": second.to_dict(include_volatile=include_volatile),
    }
    if not no_timestamp:
        payload["timestamp"] = _timestamp()
    summary = f"first allows extra: {first.chosen} | second allows extra: {second.chosen}"
    _emit(payload, fmt, out, summary)


@main.command()
@click.argument("policy_path")
@click.option("--dim", default="resource", show_default=True)
@click.option("--bound", "-b", default=100, show_default=True)
@click.option("--out", default=None)
@click.option("--format", "fmt", default="json", show_default=True, type=click.Choice(["json", "text"]))
@click.option("--no-timestamp", is_flag=True, default=False)
def count(policy_path, dim, bound, out, fmt, no_timestamp):
    """Count the strings (length <= bound) one dimension of the policy allows."""
    doc = _run_guarded(_load_policy, policy_path)

    def run() -> int:
        if bound < 0:
            raise PolicyLensError("bound must be non-negative")
        return project(compile_policy(doc), dim).count_models(bound)

    value = _run_guarded(run)
    payload = {
        "command": "count",
        "policy": policy_path,
        "dimension": dim,
        "bound": bound,
        "count": str(value),
    }
    if not no_timestamp:
        payload["timestamp"] = _timestamp()
    _emit(payload, fmt, out, str(value))


@main.command()
@click.argument("policy_path")
@click.option("-k", "count_per_side", default=1, show_default=True, help="Requests per side.")
@click.option("--seed", default=DEFAULT_SEED, show_default=True)
@click.option("--out", default=None)
@click.option("--format", "fmt", default="json", show_default=True, type=click.Choice(["json", "text"]))
@click.option("--no-timestamp", is_flag=True, default=False)
def requests(policy_path, count_per_side, seed, out, fmt, no_timestamp):
    """Emit verified allowed and denied sample requests for a policy."""
    if count_per_side < 0:
        _fail("-k must be non-negative", EXIT_INPUT)
    doc = _run_guarded(_load_policy, policy_path)

    def build_sides():
        allowed_set = compile_policy(doc)
        denied_set = set_difference(universe_set(allowed_set.schema), allowed_set)
        return allowed_set, denied_set

    allowed_set, denied_set = _run_guarded(build_sides)
    partial = False
    sides: dict[str, list] = {}
    for label, side in (("allowed", allowed_set), ("denied", denied_set)):
        if count_per_side == 0:
            sides[label] = []
            continue
        try:
            reqs = sample_from_set(side, count_per_side, seed)
        except InsufficientLanguage:
            click.echo(f"warning: no {label} requests exist; emitting partial output", err=True)
            sides[label] = []
            partial = True
            continue
        for r in reqs:
            if contains(allowed_set, r) != (label == "allowed"):
                raise RuntimeError(f"sampled request {r!r} failed {label} verification")
        sides[label] = reqs
    payload = {
        "command": "requests",
        "policy": policy_path,
        "k": count_per_side,
        "allowed": sides["allowed"],
        "denied": sides["denied"],
    }
    if not no_timestamp:
        payload["timestamp"] = _timestamp()
    _emit(payload, fmt, out, f"allowed: {len(sides['allowed'])}, denied: {len(sides['denied'])}")
    if partial:
        sys.exit(EXIT_PARTIAL)
