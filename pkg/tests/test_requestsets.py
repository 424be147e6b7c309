from __future__ import annotations

import itertools

import pytest

from policylens.automata import Dfa, from_regex
from policylens.errors import CubeBlowup, InsufficientLanguage, SchemaError
from policylens.policy import Effect, parse_policy
from policylens.regex import parse_regex
from policylens.requestsets import (
    DimensionSchema,
    Permissiveness,
    RequestCube,
    RequestSet,
    compare_policies,
    compile_policy,
    contains,
    decide_request,
    empty_set,
    is_empty_set,
    project,
    sample_from_set,
    sample_requests,
    set_difference,
    set_intersect,
    set_union,
    universe_set,
)

from conftest import MUSIC_REGEX, corpus_paths
from oracles import ref_decide

SCHEMA = DimensionSchema()


def d(regex: str) -> Dfa:
    return from_regex(parse_regex(regex))


def rs(*cubes: tuple[Dfa, ...]) -> RequestSet:
    return RequestSet(SCHEMA, tuple(RequestCube(c) for c in cubes))


def test_compile_deny_all_is_empty(deny_all_doc):
    assert is_empty_set(compile_policy(deny_all_doc))


def test_compile_music_resource_projection(music_doc):
    got = project(compile_policy(music_doc), "resource")
    assert got == d(MUSIC_REGEX)


def test_compile_music_other_projections(music_doc):
    allowed = compile_policy(music_doc)
    assert project(allowed, "principal").equivalent(d(".*"))
    assert project(allowed, "action") == d("s3:GetObject")


def test_compile_allow_only_single_cube():
    doc = parse_policy(
        '{"Statement": [{"Effect": "Allow", "Principal": "p*", "Action": "a", "Resource": "r?"}]}'
    )
    allowed = compile_policy(doc)
    assert len(allowed.cubes) == 1
    assert project(allowed, "principal") == d("p.*")
    assert project(allowed, "resource") == d("r.")


def test_compile_contradictory_conditions_empty():
    doc = parse_policy(
        '{"Statement": [{"Effect": "Allow", "Principal": "*", "Action": "*", "Resource": "*",'
        ' "Condition": {"StringEquals": {"env": "staging"}, "StringNotEquals": {"env": "staging"}}}]}'
    )
    assert is_empty_set(compile_policy(doc))


def test_set_operation_laws(music_doc):
    x = compile_policy(music_doc)
    none = empty_set(SCHEMA)
    assert is_empty_set(set_difference(x, x))
    assert set_difference(x, none).cubes == x.cubes
    assert set_union(x, none).cubes == x.cubes
    assert is_empty_set(set_intersect(x, none))
    # intersecting with the universe changes nothing observable
    both = set_intersect(x, universe_set(SCHEMA))
    assert is_empty_set(set_difference(both, x)) and is_empty_set(set_difference(x, both))


def test_cube_difference_distribution_shape():
    # (a* x U x U) \ (U x b* x U) leaves the single cube a* x not(b*) x U
    a = rs((d("a*"), d(".*"), d(".*")))
    b = rs((d(".*"), d("b*"), d(".*")))
    diff = set_difference(a, b)
    assert len(diff.cubes) == 1
    assert diff.cubes[0].dfas[0] == d("a*")
    assert diff.cubes[0].dfas[1] == d("b*").complement()
    assert contains(diff, {"principal": "aa", "action": "a", "resource": "zz"})
    assert not contains(diff, {"principal": "aa", "action": "bb", "resource": "zz"})
    assert not contains(diff, {"principal": "c", "action": "a", "resource": ""})


def test_cube_operations_match_brute_force():
    x = rs((d("a*"), d("[ab]*"), d("(ab)*")), (d("b[ab]*"), d("a*b"), d("[ab]*")))
    y = rs((d("[ab]*a"), d("b*"), d("[ab]*")), (d("a*"), d("a*"), d("a*")))
    universe = ["".join(t) for n in range(3) for t in itertools.product("ab", repeat=n)]

    def member(s: RequestSet, tup: tuple[str, str, str]) -> bool:
        return contains(s, dict(zip(("principal", "action", "resource"), tup)))

    for tup in itertools.product(universe, repeat=3):
        in_x, in_y = member(x, tup), member(y, tup)
        assert member(set_union(x, y), tup) == (in_x or in_y)
        assert member(set_intersect(x, y), tup) == (in_x and in_y)
        assert member(set_difference(x, y), tup) == (in_x and not in_y)


def test_union_equality_laws():
    x = rs((d("a*"), d(".*"), d(".*")))
    y = rs((d(".*"), d("b*"), d(".*")))
    z = rs((d("c"), d("c"), d("c")))

    def same(p: RequestSet, q: RequestSet) -> bool:
        return is_empty_set(set_difference(p, q)) and is_empty_set(set_difference(q, p))

    assert same(set_union(x, y), set_union(y, x))
    assert same(set_union(set_union(x, y), z), set_union(x, set_union(y, z)))


def test_empty_and_universe():
    assert is_empty_set(empty_set(SCHEMA))
    assert not is_empty_set(universe_set(SCHEMA))
    assert contains(universe_set(SCHEMA), {})
    assert not contains(empty_set(SCHEMA), {})
    # a cube with any empty component is dropped at construction
    assert rs((d("a"), d("∅"), d(".*"))).cubes == ()


def test_duplicate_cubes_deduplicated():
    cube = (d("a"), d("b"), d("c"))
    assert len(rs(cube, cube).cubes) == 1


def test_cube_arity_checked():
    with pytest.raises(SchemaError):
        RequestSet(SCHEMA, (RequestCube((d("a"),)),))


def test_project_cases():
    assert project(empty_set(SCHEMA), "resource").is_empty()
    x = rs((d("a"), d("b"), d("c")), (d("a"), d("b"), d("e")))
    assert project(x, "resource") == d("c|e")
    with pytest.raises(SchemaError):
        project(x, "nonsense")


def test_schema_guards():
    with pytest.raises(SchemaError):
        DimensionSchema(("action",))
    merged = DimensionSchema(("k2", "k1")).merge(DimensionSchema(("k1", "k3")))
    assert merged.dimensions == ("principal", "action", "resource", "k1", "k2", "k3")


def test_mixed_schema_alignment():
    gated = parse_policy(
        '{"Statement": [{"Effect": "Allow", "Principal": "*", "Action": "*", "Resource": "*",'
        ' "Condition": {"StringEquals": {"env": "prod"}}}]}'
    )
    plain = parse_policy(
        '{"Statement": [{"Effect": "Allow", "Principal": "*", "Action": "*", "Resource": "*"}]}'
    )
    extra = set_difference(compile_policy(plain), compile_policy(gated))
    assert extra.schema.condition_keys == ("env",)
    assert not contains(extra, {"env": "prod"})
    assert contains(extra, {"env": "dev"})
    assert contains(extra, {})


def test_decide_request_music(music_doc):
    req = {"principal": "alice", "action": "s3:GetObject", "resource": "mp3s/A1/song.mp3"}
    assert decide_request(music_doc, req) == Effect.ALLOW
    assert decide_request(music_doc, {**req, "resource": "secret.txt"}) == Effect.DENY
    assert decide_request(music_doc, {**req, "action": "s3:PutObject"}) == Effect.DENY
    assert decide_request(music_doc, {**req, "resource": "lyrics/A1/song.txt"}) == Effect.ALLOW


def test_decide_request_deny_wins():
    doc = parse_policy(
        '{"Statement": ['
        '{"Effect": "Allow", "Principal": "*", "Action": "*", "Resource": "*"},'
        '{"Effect": "Deny", "Principal": "*", "Action": "write", "Resource": "*"}]}'
    )
    assert decide_request(doc, {"action": "read"}) == Effect.ALLOW
    assert decide_request(doc, {"action": "write"}) == Effect.DENY


def test_decide_request_absent_condition_key():
    doc = parse_policy(
        '{"Statement": [{"Effect": "Allow", "Principal": "*", "Action": "*", "Resource": "*",'
        ' "Condition": {"StringNotEquals": {"env": "prod"}}}]}'
    )
    # an unsupplied key evaluates as the empty string, which is not "prod"
    assert decide_request(doc, {}) == Effect.ALLOW
    assert decide_request(doc, {"env": "prod"}) == Effect.DENY
    assert decide_request(doc, {"env": ""}) == Effect.ALLOW


def test_decide_matches_reference_on_corpus():
    probes = [
        {},
        {"principal": "alice", "action": "s3:GetObject", "resource": "mp3s/A1/a.mp3"},
        {"principal": "p", "action": "s3:DeleteObject", "resource": "logs/x"},
        {"principal": "root", "action": "web:Get", "resource": "site/index.html",
         "aws:Referer": "https://example.com/home"},
        {"principal": "ci", "action": "s3:PutObject", "resource": "builds/1", "env": "prod"},
        {"principal": "ci", "action": "s3:PutObject", "resource": "builds/1", "env": "dev"},
    ]
    for path in corpus_paths():
        doc = parse_policy(path.read_text())
        for req in probes:
            got = decide_request(doc, req) == Effect.ALLOW
            assert got == ref_decide(doc, req), (path.name, req)


def test_compare_equivalent(music_doc):
    verdict = compare_policies(music_doc, music_doc)
    assert verdict.kind == Permissiveness.EQUIVALENT
    assert verdict.witnesses_first == () and verdict.witnesses_second == ()


def test_compare_one_sided(music_doc, deny_all_doc):
    verdict = compare_policies(deny_all_doc, music_doc)
    assert verdict.kind == Permissiveness.SECOND_MORE_PERMISSIVE
    assert verdict.witnesses_first == ()
    assert 0 < len(verdict.witnesses_second) <= 3
    for req in verdict.witnesses_second:
        assert decide_request(music_doc, req) == Effect.ALLOW
        assert decide_request(deny_all_doc, req) == Effect.DENY
    flipped = compare_policies(music_doc, deny_all_doc)
    assert flipped.kind == Permissiveness.FIRST_MORE_PERMISSIVE


def test_compare_incomparable():
    p1 = parse_policy('{"Statement": [{"Effect": "Allow", "Principal": "*", "Action": "*", "Resource": "a/*"}]}')
    p2 = parse_policy('{"Statement": [{"Effect": "Allow", "Principal": "*", "Action": "*", "Resource": "b/*"}]}')
    verdict = compare_policies(p1, p2, witness_count=2)
    assert verdict.kind == Permissiveness.INCOMPARABLE
    assert verdict.witnesses_first and verdict.witnesses_second
    for req in verdict.witnesses_first:
        assert decide_request(p1, req) == Effect.ALLOW
        assert decide_request(p2, req) == Effect.DENY
    for req in verdict.witnesses_second:
        assert decide_request(p2, req) == Effect.ALLOW
        assert decide_request(p1, req) == Effect.DENY


def test_sample_requests_verified(music_doc):
    allowed, denied = sample_requests(music_doc, 3, seed=5)
    assert len(allowed) == 3 and len(denied) == 3
    for req in allowed:
        assert decide_request(music_doc, req) == Effect.ALLOW
    for req in denied:
        assert decide_request(music_doc, req) == Effect.DENY


def test_sample_requests_edge_cases(music_doc, deny_all_doc):
    assert sample_requests(music_doc, 0) == ([], [])
    with pytest.raises(InsufficientLanguage):
        sample_requests(deny_all_doc, 1)
    allow_all = parse_policy('{"Statement": [{"Effect": "Allow", "Principal": "*", "Action": "*", "Resource": "*"}]}')
    with pytest.raises(InsufficientLanguage):
        sample_requests(allow_all, 1)  # the denied side is empty
    with pytest.raises(ValueError):
        sample_requests(music_doc, -1)


def test_sample_from_set_small_language():
    singles = rs((d("a"), d("b"), d("c|d")))
    got = sample_from_set(singles, 10, seed=1)
    assert sorted(tuple(r.values()) for r in got) == [("a", "b", "c"), ("a", "b", "d")]
    assert sample_from_set(singles, 0) == []
    with pytest.raises(InsufficientLanguage):
        sample_from_set(empty_set(SCHEMA), 1)


def test_sample_from_set_deterministic(music_doc):
    x = compile_policy(music_doc)
    assert sample_from_set(x, 4, seed=9) == sample_from_set(x, 4, seed=9)


def test_cube_cap_enforced():
    x = rs((d("a"), d("a"), d("a")))
    with pytest.raises(CubeBlowup):
        set_union(x, rs((d("b"), d("b"), d("b"))), cube_cap=1)
    with pytest.raises(CubeBlowup):
        set_difference(rs((d("[ab]"), d("[ab]"), d("[ab]"))), x, cube_cap=1)
