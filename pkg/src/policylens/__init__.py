"""Compile access-control policies into automata and summarize them as regexes."""

from .alphabet import ALPHABET, ALPHABET_SIZE, FULL_MASK
from .automata import (
    DEFAULT_STATE_CAP,
    Dfa,
    empty_dfa,
    from_pattern,
    from_regex,
    universe_dfa,
)
from .errors import (
    AlphabetError,
    CubeBlowup,
    EmptyLanguage,
    InsufficientLanguage,
    PolicyLensError,
    PolicySyntaxError,
    ProviderError,
    RegexSyntaxError,
    SchemaError,
    StateBlowup,
    UnsupportedConstruct,
)
from .policy import (
    Condition,
    ConditionOperator,
    Effect,
    PatternClause,
    PolicyDocument,
    PolicyWarning,
    Statement,
    WildcardPattern,
    parse_policy,
    print_policy,
    validate_policy,
)
from .providers import HttpProvider, LlmProvider, MockProvider, load_provider
from .regex import EMPTY, EMPTY_TOKEN, EPSILON, RegexAst, parse_regex, print_regex, wildcard
from .requestsets import (
    DEFAULT_CUBE_CAP,
    DimensionSchema,
    Permissiveness,
    PermissivenessVerdict,
    RequestCube,
    RequestSet,
    compare_policies,
    compile_policy,
    contains,
    decide_request,
    is_empty_set,
    project,
    sample_requests,
    set_difference,
    set_intersect,
    set_union,
)
from .sampler import SamplerConfig, sample, sample_n
from .simplifier import (
    LlmCandidate,
    SimplifierConfig,
    SummarizationReport,
    generate_regex_from_llm,
    generate_summarization,
    quantify_similarity,
    summarize_difference,
)

__version__ = "0.1.0"

__all__ = [
    "ALPHABET",
    "ALPHABET_SIZE",
    "FULL_MASK",
    "DEFAULT_STATE_CAP",
    "DEFAULT_CUBE_CAP",
    "Dfa",
    "empty_dfa",
    "universe_dfa",
    "from_pattern",
    "from_regex",
    "AlphabetError",
    "CubeBlowup",
    "EmptyLanguage",
    "InsufficientLanguage",
    "PolicyLensError",
    "PolicySyntaxError",
    "ProviderError",
    "RegexSyntaxError",
    "SchemaError",
    "StateBlowup",
    "UnsupportedConstruct",
    "Condition",
    "ConditionOperator",
    "Effect",
    "PatternClause",
    "PolicyDocument",
    "PolicyWarning",
    "Statement",
    "WildcardPattern",
    "parse_policy",
    "print_policy",
    "validate_policy",
    "HttpProvider",
    "LlmProvider",
    "MockProvider",
    "load_provider",
    "EMPTY",
    "EMPTY_TOKEN",
    "EPSILON",
    "RegexAst",
    "parse_regex",
    "print_regex",
    "wildcard",
    "DimensionSchema",
    "Permissiveness",
    "PermissivenessVerdict",
    "RequestCube",
    "RequestSet",
    "compare_policies",
    "compile_policy",
    "contains",
    "decide_request",
    "is_empty_set",
    "project",
    "sample_requests",
    "set_difference",
    "set_intersect",
    "set_union",
    "SamplerConfig",
    "sample",
    "sample_n",
    "LlmCandidate",
    "SimplifierConfig",
    "SummarizationReport",
    "generate_regex_from_llm",
    "generate_summarization",
    "quantify_similarity",
    "summarize_difference",
]
