"""A context-sensitive knowledge base with a qualitative decision-model
formulator.

The package stores categorical, uncertain and contextual knowledge about a
domain, answers queries about it with justification traces, and turns a
case description into a signed acyclic decision model that can be
evaluated qualitatively.
"""

from .errors import (
    CaseLoadError,
    CycleError,
    CyclicModelError,
    Diagnostic,
    EmptyContextError,
    EngineError,
    KbLoadError,
    LoadError,
    ModelError,
    NoDecisionNodeError,
    NoValueNodeError,
    QpnParseError,
    UnknownConceptError,
    UnknownPropertyError,
)
from .interactions import (
    InfluenceSign,
    InteractionAssertion,
    InteractionKind,
    Precedence,
    classify_kind,
    visible_interactions,
)
from .kb import (
    UNIVERSAL,
    CategoricalAssertion,
    CategorizerKind,
    Concept,
    Context,
    KnowledgeBase,
    TraceEntry,
    ako_children,
    ako_closure,
    applicable_property,
    categorizer_closure,
    context_visible,
    derive_concept,
    normalize_id,
    property_values,
)
from .kbfile import parse_kb, serialize_kb
from .planner import (
    CATEGORY_ROOTS,
    DEFAULT_CRITERION,
    BackgroundTable,
    CaseDescription,
    DomainContext,
    ProblemFormulation,
    characterize_background,
    establish_context,
    formulate_problem,
    parse_case,
)
from .qpn import (
    EvalSign,
    EvaluationReport,
    NodeKind,
    Qpn,
    QpnEdge,
    QpnNode,
    build_qpn,
    construct_model,
    enumerate_paths,
    evaluate_model,
    excluded_associations,
    export_dot,
    net_influence,
    parse_qpn,
    reduce_node,
    serialize_qpn,
    sign_product,
    sign_sum,
    topological_order,
)
from .queries import QueryAnswer, interaction_neighbors, interacts, is_related, related_concepts

__version__ = "0.1.0"
