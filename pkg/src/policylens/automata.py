"""Deterministic finite automata over the 95-symbol printable-ASCII alphabet.

Every :class:`Dfa` is *total* (each state has an outgoing transition for every
alphabet symbol, grouped into disjoint character-class masks) and *canonical*
(trimmed, minimized, states renumbered breadth-first from the start state with
edges ordered by lowest class member).  Canonical form makes structural
equality coincide with language equality and makes emptiness a check of the
accepting set.  State 0 is always the start state.

Construction paths: :func:`from_regex` and :func:`from_pattern` run a Thompson
build followed by subset construction; the set operations run pairwise product
constructions.  Both raise :class:`~policylens.errors.StateBlowup` past
``state_cap``.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Callable, Iterable

from .alphabet import FULL_MASK, char_bit
from .errors import StateBlowup
from .regex import (
    EMPTY,
    EPSILON,
    CharClass,
    Concat,
    Epsilon,
    Empty,
    RegexAst,
    Star,
    Union,
    alt,
    char_class,
    print_regex,
    seq,
    star,
    wildcard,
)

DEFAULT_STATE_CAP = 100_000

_Row = tuple[tuple[int, int], ...]  # ((mask, target), ...) partitioning the alphabet


def _low_bit(mask: int) -> int:
    return mask & -mask


class Dfa:
    """Canonical total DFA.  Build via :func:`from_regex`, :func:`from_pattern`,
    :meth:`from_parts`, or the set operations; the raw constructor assumes the
    arguments are already canonical."""

    __slots__ = ("transitions", "accepting")

    def __init__(self, transitions: tuple[_Row, ...], accepting: frozenset[int]) -> None:
        self.transitions = transitions
        self.accepting = accepting

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dfa):
            return NotImplemented
        return self.transitions == other.transitions and self.accepting == other.accepting

    def __hash__(self) -> int:
        return hash((self.transitions, self.accepting))

    def __repr__(self) -> str:  # pragma: no cover - debug aid
        return f"<Dfa states={len(self.transitions)} accepting={sorted(self.accepting)}>"

    @property
    def state_count(self) -> int:
        return len(self.transitions)

    @classmethod
    def from_parts(
        cls,
        transitions: Iterable[Iterable[tuple[int, int]]],
        start: int,
        accepting: Iterable[int],
    ) -> "Dfa":
        """Canonicalize a raw transition table.  Each row's masks must be
        disjoint and cover the whole alphabet."""
        rows = [list(row) for row in transitions]
        n = len(rows)
        if not 0 <= start < n:
            raise ValueError(f"start state {start} out of range")
        for s, row in enumerate(rows):
            seen = 0
            for mask, target in row:
                if mask <= 0 or mask & ~FULL_MASK:
                    raise ValueError(f"state {s}: mask outside the alphabet")
                if mask & seen:
                    raise ValueError(f"state {s}: overlapping transition masks")
                if not 0 <= target < n:
                    raise ValueError(f"state {s}: target {target} out of range")
                seen |= mask
            if seen != FULL_MASK:
                raise ValueError(f"state {s}: transitions do not cover the alphabet")
        return _canonicalize(rows, start, set(accepting))

    # -- language predicates ------------------------------------------------

    def is_empty(self) -> bool:
        """Canonical form guarantees: empty language iff nothing accepts."""
        return not self.accepting

    def accepts(self, text: str) -> bool:
        state = 0
        for ch in text:
            bit = char_bit(ch)
            for mask, target in self.transitions[state]:
                if mask & bit:
                    state = target
                    break
        return state in self.accepting

    def equivalent(self, other: "Dfa") -> bool:
        return self.difference(other).is_empty() and other.difference(self).is_empty()

    # -- boolean algebra ------------------------------------------------------

    def complement(self) -> "Dfa":
        rows = [list(row) for row in self.transitions]
        accepting = set(range(len(rows))) - self.accepting
        return _canonicalize(rows, 0, accepting)

    def union(self, other: "Dfa", state_cap: int = DEFAULT_STATE_CAP) -> "Dfa":
        return _product(self, other, lambda a, b: a or b, state_cap)

    def intersect(self, other: "Dfa", state_cap: int = DEFAULT_STATE_CAP) -> "Dfa":
        return _product(self, other, lambda a, b: a and b, state_cap)

    def difference(self, other: "Dfa", state_cap: int = DEFAULT_STATE_CAP) -> "Dfa":
        return _product(self, other, lambda a, b: a and not b, state_cap)

    # -- analyses -------------------------------------------------------------

    def count_models(self, bound: int) -> int:
        """Exact number of accepted strings of length 0 through ``bound``."""
        if bound < 0:
            raise ValueError("bound must be non-negative")
        n = len(self.transitions)
        vec = [0] * n
        vec[0] = 1
        total = 1 if 0 in self.accepting else 0
        for _ in range(bound):
            nxt = [0] * n
            for s, c in enumerate(vec):
                if c:
                    for mask, t in self.transitions[s]:
                        nxt[t] += c * mask.bit_count()
            vec = nxt
            for s in self.accepting:
                total += vec[s]
        return total

    def extract_regex(self) -> RegexAst:
        """Equivalent regex by state elimination.

        Dead states are dropped up front; interior states are eliminated in
        order of smallest in-degree times out-degree (ties broken by lowest
        state id), which keeps intermediate labels small and the output
        deterministic.
        """
        if not self.accepting:
            return EMPTY
        n = len(self.transitions)
        rev: list[list[int]] = [[] for _ in range(n)]
        for s, row in enumerate(self.transitions):
            for _, t in row:
                rev[t].append(s)
        live = set(self.accepting)
        stack = list(self.accepting)
        while stack:
            s = stack.pop()
            for p in rev[s]:
                if p not in live:
                    live.add(p)
                    stack.append(p)

        init, final = n, n + 1
        out: dict[int, dict[int, RegexAst]] = defaultdict(dict)
        inc: dict[int, set[int]] = defaultdict(set)

        def add(i: int, j: int, r: RegexAst) -> None:
            out[i][j] = alt(out[i].get(j, EMPTY), r)
            inc[j].add(i)

        add(init, 0, EPSILON)
        for s in self.accepting:
            add(s, final, EPSILON)
        for s, row in enumerate(self.transitions):
            if s not in live:
                continue
            for mask, t in row:
                if t in live:
                    add(s, t, char_class(mask))

        remaining = sorted(live)
        while remaining:
            q = min(
                remaining,
                key=lambda s: (
                    sum(1 for i in inc[s] if i != s) * sum(1 for j in out[s] if j != s),
                    s,
                ),
            )
            remaining.remove(q)
            loop = star(out[q].pop(q, EMPTY))
            inc[q].discard(q)
            preds = sorted(inc[q])
            succs = sorted((j, r) for j, r in out[q].items())
            for i in preds:
                r_iq = out[i].pop(q)
                for j, r_qj in succs:
                    add(i, j, seq(r_iq, seq(loop, r_qj)))
            for j, _ in succs:
                inc[j].discard(q)
            del out[q]
            del inc[q]
        return out[init].get(final, EMPTY)

    def to_dot(self, name: str = "dfa") -> str:
        """GraphViz rendering with character-class edge labels."""
        lines = [
            f"digraph {name} {{",
            "  rankdir=LR;",
            "  __start [shape=point];",
            "  __start -> s0;",
        ]
        for s in range(len(self.transitions)):
            shape = "doublecircle" if s in self.accepting else "circle"
            lines.append(f"  s{s} [shape={shape}];")
        for s, row in enumerate(self.transitions):
            for mask, t in row:
                label = print_regex(char_class(mask)).replace("\\", "\\\\").replace('"', '\\"')
                lines.append(f'  s{s} -> s{t} [label="{label}"];')
        lines.append("}")
        return "\n".join(lines)


def _refine(masks: Iterable[int]) -> list[int]:
    """Coarsest partition of the alphabet splitting every given mask."""
    parts = [FULL_MASK]
    for m in set(masks):
        nxt = []
        for p in parts:
            inside = p & m
            outside = p & ~m
            if inside and outside:
                nxt.append(inside)
                nxt.append(outside)
            else:
                nxt.append(p)
        parts = nxt
    parts.sort(key=_low_bit)
    return parts


_EMPTY_DFA = Dfa((((FULL_MASK, 0),),), frozenset())
_UNIVERSE_DFA = Dfa((((FULL_MASK, 0),),), frozenset({0}))


def empty_dfa() -> Dfa:
    return _EMPTY_DFA


def universe_dfa() -> Dfa:
    return _UNIVERSE_DFA


def _canonicalize(trans: list[list[tuple[int, int]]], start: int, accepting: set[int]) -> Dfa:
    n = len(trans)
    reach = [False] * n
    reach[start] = True
    stack = [start]
    while stack:
        s = stack.pop()
        for _, t in trans[s]:
            if not reach[t]:
                reach[t] = True
                stack.append(t)
    states = [s for s in range(n) if reach[s]]
    if not any(s in accepting for s in states):
        return _EMPTY_DFA

    idx = {s: i for i, s in enumerate(states)}
    m = len(states)
    rtrans = [[(mask, idx[t]) for mask, t in trans[s]] for s in states]
    racc = {idx[s] for s in states if s in accepting}

    # Moore refinement: states are merged iff they agree on acceptance and on
    # the block of every successor.
    block = [1 if i in racc else 0 for i in range(m)]
    nblocks = len(set(block))
    while True:
        sig_ids: dict[tuple, int] = {}
        nxt = [0] * m
        for i in range(m):
            merged: dict[int, int] = {}
            for mask, t in rtrans[i]:
                b = block[t]
                merged[b] = merged.get(b, 0) | mask
            sig = (block[i], tuple(sorted(merged.items())))
            nxt[i] = sig_ids.setdefault(sig, len(sig_ids))
        block = nxt
        if len(sig_ids) == nblocks:
            break
        nblocks = len(sig_ids)

    qtrans: dict[int, dict[int, int]] = {}
    for i in range(m):
        b = block[i]
        if b in qtrans:
            continue
        merged = {}
        for mask, t in rtrans[i]:
            tb = block[t]
            merged[tb] = merged.get(tb, 0) | mask
        qtrans[b] = merged

    order = {block[idx[start]]: 0}
    bfs = [block[idx[start]]]
    qi = 0
    while qi < len(bfs):
        b = bfs[qi]
        qi += 1
        for tb, _ in sorted(qtrans[b].items(), key=lambda kv: _low_bit(kv[1])):
            if tb not in order:
                order[tb] = len(order)
                bfs.append(tb)
    rows = tuple(
        tuple(sorted(((mask, order[tb]) for tb, mask in qtrans[b].items()), key=lambda e: _low_bit(e[0])))
        for b in bfs
    )
    final_acc = frozenset(order[block[i]] for i in racc)
    return Dfa(rows, final_acc)


def _product(a: Dfa, b: Dfa, keep: Callable[[bool, bool], bool], state_cap: int) -> Dfa:
    index: dict[tuple[int, int], int] = {(0, 0): 0}
    queue: list[tuple[int, int]] = [(0, 0)]
    rows: list[list[tuple[int, int]]] = []
    accepting: set[int] = set()
    qi = 0
    while qi < len(queue):
        pa, pb = queue[qi]
        if keep(pa in a.accepting, pb in b.accepting):
            accepting.add(qi)
        qi += 1
        masks = [mask for mask, _ in a.transitions[pa]]
        masks += [mask for mask, _ in b.transitions[pb]]
        row = []
        for part in _refine(masks):
            ta = next(t for mask, t in a.transitions[pa] if mask & part)
            tb = next(t for mask, t in b.transitions[pb] if mask & part)
            key = (ta, tb)
            if key not in index:
                if len(index) >= state_cap:
                    raise StateBlowup(
                        f"product construction exceeded the state cap of {state_cap}"
                    )
                index[key] = len(index)
                queue.append(key)
            row.append((part, index[key]))
        rows.append(row)
    return _canonicalize(rows, 0, accepting)


# -- regex / pattern compilation ---------------------------------------------


def _thompson(r: RegexAst) -> tuple[list[list[int]], list[list[tuple[int, int]]], int, int]:
    """Thompson NFA build, iterative so deep trees cannot overflow the stack.

    Returns (epsilon edges, symbol edges, start, accept)."""
    eps: list[list[int]] = []
    sym: list[list[tuple[int, int]]] = []

    def new_state() -> int:
        eps.append([])
        sym.append([])
        return len(eps) - 1

    frags: list[tuple[int, int]] = []
    work: list[tuple[RegexAst, int]] = [(r, 0)]
    while work:
        node, phase = work.pop()
        if phase == 0:
            if isinstance(node, Empty):
                frags.append((new_state(), new_state()))
            elif isinstance(node, Epsilon):
                s = new_state()
                frags.append((s, s))
            elif isinstance(node, CharClass):
                s, a = new_state(), new_state()
                sym[s].append((node.mask, a))
                frags.append((s, a))
            elif isinstance(node, Star):
                work.append((node, 1))
                work.append((node.inner, 0))
            else:  # Union / Concat
                work.append((node, 1))
                work.append((node.right, 0))  # type: ignore[union-attr]
                work.append((node.left, 0))  # type: ignore[union-attr]
        elif isinstance(node, Star):
            ins, ina = frags.pop()
            q = new_state()
            eps[q].append(ins)
            eps[ina].append(q)
            frags.append((q, q))
        elif isinstance(node, Concat):
            rs, ra = frags.pop()
            ls, la = frags.pop()
            eps[la].append(rs)
            frags.append((ls, ra))
        else:  # Union
            rs, ra = frags.pop()
            ls, la = frags.pop()
            s, a = new_state(), new_state()
            eps[s] += (ls, rs)
            eps[la].append(a)
            eps[ra].append(a)
            frags.append((s, a))
    start, accept = frags.pop()
    return eps, sym, start, accept


def from_regex(r: RegexAst, state_cap: int = DEFAULT_STATE_CAP) -> Dfa:
    """Compile a regex AST to its canonical DFA."""
    eps, sym, start, accept = _thompson(r)

    def closure(states: Iterable[int]) -> frozenset[int]:
        seen = set(states)
        stack = list(seen)
        while stack:
            s = stack.pop()
            for t in eps[s]:
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
        return frozenset(seen)

    start_set = closure([start])
    index: dict[frozenset[int], int] = {start_set: 0}
    queue = [start_set]
    rows: list[list[tuple[int, int]]] = []
    accepting: set[int] = set()
    qi = 0
    while qi < len(queue):
        cur = queue[qi]
        if accept in cur:
            accepting.add(qi)
        qi += 1
        masks = [mask for s in cur for mask, _ in sym[s]]
        row = []
        for part in _refine(masks):
            # refinement guarantees part is inside or outside each edge mask
            targets = closure([t for s in cur for mask, t in sym[s] if mask & part])
            if targets not in index:
                if len(index) >= state_cap:
                    raise StateBlowup(
                        f"subset construction exceeded the state cap of {state_cap}"
                    )
                index[targets] = len(index)
                queue.append(targets)
            row.append((part, index[targets]))
        rows.append(row)
    return _canonicalize(rows, 0, accepting)


def from_pattern(pattern: object, state_cap: int = DEFAULT_STATE_CAP) -> Dfa:
    """Compile a wildcard pattern (``*`` any run, ``?`` any one symbol)."""
    text = getattr(pattern, "text", pattern)
    if not isinstance(text, str):
        raise TypeError(f"expected a pattern string, got {type(text).__name__}")
    return from_regex(wildcard(text), state_cap)
