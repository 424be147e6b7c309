"""Random generation of strings accepted by a regex.

The draw is structure-biased, not uniform over the language: nested unions
are collapsed into one child list and a child is picked uniformly; a star
keeps looping while a uniform draw stays above a threshold that starts at
``threshold`` and is multiplied by ``growth`` per iteration; a character
class picks a member uniformly.  Union children with empty language are
excluded before the pick, so every draw is a member of the language.

A star also stops once the accumulated output reaches ``max_length``, which
keeps samples inside the model-counting window; output is never truncated
mid-expansion, so strings may exceed the limit by one body expansion.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .alphabet import chars_of
from .errors import EmptyLanguage
from .regex import CharClass, Concat, EPSILON, RegexAst, Star, Union, union_children


@dataclass(frozen=True)
class SamplerConfig:
    threshold: float = 0.10
    growth: float = 1.01
    seed: int = 0
    max_length: int = 100

    def __post_init__(self) -> None:
        if not 0 < self.threshold <= 1:
            raise ValueError("threshold must be in (0, 1]")
        if self.growth <= 1:
            raise ValueError("growth must be greater than 1")
        if self.max_length < 1:
            raise ValueError("max_length must be at least 1")


def sample(r: RegexAst, cfg: SamplerConfig, rng: random.Random) -> str:
    """One accepted string of ``r``.  Raises EmptyLanguage if L(r) is empty."""
    if r.lang_empty:
        raise EmptyLanguage("cannot sample from the empty language")
    out: list[str] = []
    length = 0
    # Work stack: ("v", node) expands a node; ("s", body, thresh) is a star
    # continuation deciding whether to run one more body expansion.
    stack: list[tuple] = [("v", r)]
    while stack:
        item = stack.pop()
        if item[0] == "v":
            node = item[1]
            if node is EPSILON:
                continue
            if isinstance(node, CharClass):
                out.append(rng.choice(chars_of(node.mask)))
                length += 1
            elif isinstance(node, Concat):
                stack.append(("v", node.right))
                stack.append(("v", node.left))
            elif isinstance(node, Union):
                children = [c for c in union_children(node) if not c.lang_empty]
                stack.append(("v", rng.choice(children)))
            elif isinstance(node, Star):
                stack.append(("s", node.inner, cfg.threshold))
            else:
                raise EmptyLanguage("cannot sample from the empty language")
        else:
            _, body, thresh = item
            if length >= cfg.max_length:
                continue
            if rng.random() >= thresh:
                stack.append(("s", body, thresh * cfg.growth))
                stack.append(("v", body))
    return "".join(out)


def sample_n(r: RegexAst, n: int, cfg: SamplerConfig) -> set[str]:
    """Distinct strings from ``n`` draws, deterministic for a given seed."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = random.Random(cfg.seed)
    return {sample(r, cfg, rng) for _ in range(n)}
