"""Request sets: the semantics of a policy as a set of request tuples.

A request is a tuple of strings over the dimensions (principal, action,
resource, then any condition keys, lexicographic).  A :class:`RequestSet` is
a union of *cubes*, each cube a per-dimension product of DFA languages.
Unions of cubes are closed under union, intersection and difference (the
difference of two cubes distributes into at most one cube per dimension), so
policy compilation and the permissiveness comparison stay exact.

Deny-overrides semantics: a policy's set is (union of allow-statement cubes)
minus (union of deny-statement cubes).

A condition key a request does not supply is evaluated as the empty string.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping

from .automata import DEFAULT_STATE_CAP, Dfa, empty_dfa, from_pattern, universe_dfa
from .errors import CubeBlowup, InsufficientLanguage, SchemaError
from .policy import Effect, PatternClause, PolicyDocument
from .sampler import SamplerConfig, sample
from .regex import RegexAst

DEFAULT_CUBE_CAP = 10_000

BASE_DIMENSIONS = ("principal", "action", "resource")


@dataclass(frozen=True)
class DimensionSchema:
    """Dimension names: the three fixed roles, then condition keys sorted."""

    condition_keys: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        keys = tuple(sorted(set(self.condition_keys)))
        for k in keys:
            if k in BASE_DIMENSIONS:
                raise SchemaError(f"condition key {k!r} collides with a fixed dimension name")
        object.__setattr__(self, "condition_keys", keys)

    @property
    def dimensions(self) -> tuple[str, ...]:
        return BASE_DIMENSIONS + self.condition_keys

    def index(self, dim: str) -> int:
        try:
            return self.dimensions.index(dim)
        except ValueError:
            raise SchemaError(f"unknown dimension {dim!r}") from None

    def merge(self, other: "DimensionSchema") -> "DimensionSchema":
        return DimensionSchema(self.condition_keys + other.condition_keys)


@dataclass(frozen=True)
class RequestCube:
    """One per-dimension product of languages; empty iff any component is."""

    dfas: tuple[Dfa, ...]

    def is_empty(self) -> bool:
        return any(d.is_empty() for d in self.dfas)


@dataclass(frozen=True)
class RequestSet:
    schema: DimensionSchema
    cubes: tuple[RequestCube, ...]

    def __post_init__(self) -> None:
        kept: list[RequestCube] = []
        seen: set[RequestCube] = set()
        for cube in self.cubes:
            if len(cube.dfas) != len(self.schema.dimensions):
                raise SchemaError("cube arity does not match the schema")
            if cube.is_empty() or cube in seen:
                continue
            kept.append(cube)
            seen.add(cube)
        object.__setattr__(self, "cubes", tuple(kept))


def is_empty_set(x: RequestSet) -> bool:
    return not x.cubes


def universe_set(schema: DimensionSchema) -> RequestSet:
    cube = RequestCube(tuple(universe_dfa() for _ in schema.dimensions))
    return RequestSet(schema, (cube,))


def empty_set(schema: DimensionSchema) -> RequestSet:
    return RequestSet(schema, ())


def _pad(x: RequestSet, schema: DimensionSchema) -> RequestSet:
    """Reshape cubes onto a superset schema; new dimensions are unconstrained."""
    if x.schema == schema:
        return x
    univ = universe_dfa()
    own = {d: i for i, d in enumerate(x.schema.dimensions)}
    cubes = []
    for cube in x.cubes:
        cubes.append(
            RequestCube(tuple(cube.dfas[own[d]] if d in own else univ for d in schema.dimensions))
        )
    return RequestSet(schema, tuple(cubes))


def _aligned(x: RequestSet, y: RequestSet) -> tuple[RequestSet, RequestSet, DimensionSchema]:
    schema = x.schema.merge(y.schema)
    return _pad(x, schema), _pad(y, schema), schema


def set_union(x: RequestSet, y: RequestSet, cube_cap: int = DEFAULT_CUBE_CAP) -> RequestSet:
    x, y, schema = _aligned(x, y)
    out = RequestSet(schema, x.cubes + y.cubes)
    _check_cubes(len(out.cubes), cube_cap)
    return out


def set_intersect(
    x: RequestSet,
    y: RequestSet,
    cube_cap: int = DEFAULT_CUBE_CAP,
    state_cap: int = DEFAULT_STATE_CAP,
) -> RequestSet:
    x, y, schema = _aligned(x, y)
    cubes = []
    for a in x.cubes:
        for b in y.cubes:
            cube = RequestCube(
                tuple(da.intersect(db, state_cap) for da, db in zip(a.dfas, b.dfas))
            )
            if not cube.is_empty():
                cubes.append(cube)
                _check_cubes(len(cubes), cube_cap)
    return RequestSet(schema, tuple(cubes))


def _cube_difference(a: RequestCube, b: RequestCube, state_cap: int) -> list[RequestCube]:
    """Distribute (A₁×…×A_k) \\ (B₁×…×B_k) into per-dimension cubes.

    Term i keeps intersections on dimensions before i, the difference on
    dimension i, and a's own components after i.  Once a prefix intersection
    is empty every later term is empty too."""
    out: list[RequestCube] = []
    prefix: list[Dfa] = []
    k = len(a.dfas)
    for i in range(k):
        diff = a.dfas[i].difference(b.dfas[i], state_cap)
        if not diff.is_empty():
            cube = RequestCube(tuple(prefix) + (diff,) + a.dfas[i + 1 :])
            if not cube.is_empty():
                out.append(cube)
        if i + 1 < k:
            inter = a.dfas[i].intersect(b.dfas[i], state_cap)
            if inter.is_empty():
                break
            prefix.append(inter)
    return out


def set_difference(
    x: RequestSet,
    y: RequestSet,
    cube_cap: int = DEFAULT_CUBE_CAP,
    state_cap: int = DEFAULT_STATE_CAP,
) -> RequestSet:
    x, y, schema = _aligned(x, y)
    cubes = list(x.cubes)
    for b in y.cubes:
        nxt: list[RequestCube] = []
        for a in cubes:
            nxt.extend(_cube_difference(a, b, state_cap))
            _check_cubes(len(nxt), cube_cap)
        cubes = nxt
        if not cubes:
            break
    return RequestSet(schema, tuple(cubes))


def _check_cubes(count: int, cube_cap: int) -> None:
    if count > cube_cap:
        raise CubeBlowup(f"request-set operation exceeded the cube cap of {cube_cap}")


# -- policy compilation -------------------------------------------------------


def _clause_dfa(clause: PatternClause, state_cap: int) -> Dfa:
    d = empty_dfa()
    for p in clause.patterns:
        d = d.union(from_pattern(p), state_cap)
    return d.complement() if clause.negated else d


def policy_schema(doc: PolicyDocument) -> DimensionSchema:
    keys = {c.key for s in doc.statements for c in s.conditions}
    return DimensionSchema(tuple(keys))


def compile_policy(
    doc: PolicyDocument,
    cube_cap: int = DEFAULT_CUBE_CAP,
    state_cap: int = DEFAULT_STATE_CAP,
) -> RequestSet:
    """Allowed-request set of a policy: union of allow cubes minus union of deny cubes.

    Each statement becomes one cube.  Patterns in a clause disjoin; a Not*
    clause complements the disjunction.  Condition values disjoin within one
    condition, conditions conjoin per key, and StringNot* complements the
    value language.  Condition keys a statement does not constrain stay
    unconstrained in its cube."""
    schema = policy_schema(doc)
    univ = universe_dfa()
    allow: list[RequestCube] = []
    deny: list[RequestCube] = []
    for stmt in doc.statements:
        per_key: dict[str, Dfa] = {k: univ for k in schema.condition_keys}
        for cond in stmt.conditions:
            values = empty_dfa()
            for v in cond.values:
                values = values.union(from_pattern(v), state_cap)
            if cond.operator.negated:
                values = values.complement()
            per_key[cond.key] = per_key[cond.key].intersect(values, state_cap)
        cube = RequestCube(
            (
                _clause_dfa(stmt.principal, state_cap),
                _clause_dfa(stmt.action, state_cap),
                _clause_dfa(stmt.resource, state_cap),
            )
            + tuple(per_key[k] for k in schema.condition_keys)
        )
        (allow if stmt.effect == Effect.ALLOW else deny).append(cube)
    allowed = RequestSet(schema, tuple(allow))
    if not deny:
        return allowed
    return set_difference(allowed, RequestSet(schema, tuple(deny)), cube_cap, state_cap)


# -- queries ------------------------------------------------------------------


def project(x: RequestSet, dim: str, state_cap: int = DEFAULT_STATE_CAP) -> Dfa:
    """Language of one dimension across all (non-empty) cubes."""
    i = x.schema.index(dim)
    d = empty_dfa()
    for cube in x.cubes:
        d = d.union(cube.dfas[i], state_cap)
    return d


def contains(x: RequestSet, request: Mapping[str, str]) -> bool:
    """Membership of a request; dimensions the request omits read as ""."""
    values = [request.get(dim, "") for dim in x.schema.dimensions]
    return any(
        all(d.accepts(v) for d, v in zip(cube.dfas, values)) for cube in x.cubes
    )


def decide_request(doc: PolicyDocument, request: Mapping[str, str]) -> Effect:
    return Effect.ALLOW if contains(compile_policy(doc), request) else Effect.DENY


# -- sampling and comparison --------------------------------------------------


@lru_cache(maxsize=1024)
def _regex_of(dfa: Dfa) -> RegexAst:
    return dfa.extract_regex()


def sample_from_set(x: RequestSet, k: int, seed: int = 0) -> list[dict[str, str]]:
    """Up to ``k`` distinct member requests, deterministic for a given seed.

    Raises InsufficientLanguage when ``k > 0`` and the set is empty.  Small
    languages may yield fewer than ``k`` distinct requests."""
    if k == 0:
        return []
    if is_empty_set(x):
        raise InsufficientLanguage("cannot sample requests from an empty set")
    cfg = SamplerConfig(seed=seed)
    rng = random.Random(seed)
    out: list[dict[str, str]] = []
    seen: set[tuple[str, ...]] = set()
    for draw in range(5 * k + 10):
        cube = x.cubes[draw % len(x.cubes)]
        values = tuple(sample(_regex_of(d), cfg, rng) for d in cube.dfas)
        if values not in seen:
            seen.add(values)
            out.append(dict(zip(x.schema.dimensions, values)))
            if len(out) == k:
                break
    return out


def sample_requests(
    doc: PolicyDocument, k: int, seed: int = 0
) -> tuple[list[dict[str, str]], list[dict[str, str]]]:
    """k allowed and k denied requests, every one re-verified by decide_request."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if k == 0:
        return [], []
    allowed_set = compile_policy(doc)
    denied_set = set_difference(universe_set(allowed_set.schema), allowed_set)
    allowed = sample_from_set(allowed_set, k, seed)
    denied = sample_from_set(denied_set, k, seed)
    for req in allowed:
        if decide_request(doc, req) != Effect.ALLOW:
            raise RuntimeError(f"sampled request {req!r} failed allow verification")
    for req in denied:
        if decide_request(doc, req) != Effect.DENY:
            raise RuntimeError(f"sampled request {req!r} failed deny verification")
    return allowed, denied


class Permissiveness(enum.Enum):
    EQUIVALENT = "Equivalent"
    FIRST_MORE_PERMISSIVE = "FirstMorePermissive"
    SECOND_MORE_PERMISSIVE = "SecondMorePermissive"
    INCOMPARABLE = "Incomparable"


@dataclass(frozen=True)
class PermissivenessVerdict:
    kind: Permissiveness
    witnesses_first: tuple[dict[str, str], ...]  # allowed by policy 1 only
    witnesses_second: tuple[dict[str, str], ...]  # allowed by policy 2 only


def compare_policies(
    p1: PolicyDocument,
    p2: PolicyDocument,
    witness_count: int = 3,
    seed: int = 0,
) -> PermissivenessVerdict:
    """Four-way permissiveness classification with sampled witnesses."""
    s1 = compile_policy(p1)
    s2 = compile_policy(p2)
    f1 = set_difference(s1, s2)
    f2 = set_difference(s2, s1)
    if is_empty_set(f1) and is_empty_set(f2):
        kind = Permissiveness.EQUIVALENT
    elif is_empty_set(f2):
        kind = Permissiveness.FIRST_MORE_PERMISSIVE
    elif is_empty_set(f1):
        kind = Permissiveness.SECOND_MORE_PERMISSIVE
    else:
        kind = Permissiveness.INCOMPARABLE
    w1 = () if is_empty_set(f1) else tuple(sample_from_set(f1, witness_count, seed))
    w2 = () if is_empty_set(f2) else tuple(sample_from_set(f2, witness_count, seed))
    return PermissivenessVerdict(kind, w1, w2)
