"""Case parsing, background characterization, context establishment, and
problem formulation."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import dmkit
from dmkit import data
from dmkit.errors import CaseLoadError, EmptyContextError, EngineError, UnknownConceptError
from dmkit.kb import UNIVERSAL, CategorizerKind
from dmkit.kbfile import parse_kb
from dmkit.planner import (
    CATEGORY_ROOTS,
    CaseDescription,
    characterize_background,
    establish_context,
    formulate_problem,
    parse_case,
)
from dmkit.queries import is_related

TABLE_CONCEPTS = frozenset(
    {
        "old-age",
        "cardiomyopathy",
        "fainting",
        "arrhythmia",
        "embolism",
        "pulmonary-embolism",
        "systemic-embolism",
        "anticoagulant-therapy",
        "bleeding",
        "long-term-morbidity",
        "short-term-morbidity",
        "mortality",
        "quality-adjusted-life-expectancy",
    }
)


# ---------------------------------------------------------------------------
# Case files
# ---------------------------------------------------------------------------


def test_parse_case_fixture(kb, case):
    assert case.inputs == (
        "80-year-old",
        "female",
        "fainting",
        "arrhythmia",
        "cardiomyopathy",
        "anticoagulant-therapy",
        "embolism",
        "bleeding",
    )
    assert case.conditions == ("old-age",)
    assert case.criterion == "quality-adjusted-life-expectancy"


def test_parse_case_collects_problems(kb):
    text = "\n".join(
        [
            "input nosuch",
            "goose arrhythmia",
            "criterion mortality",
            "criterion embolism",
        ]
    )
    with pytest.raises(CaseLoadError) as info:
        parse_case(text, kb)
    messages = [d.message for d in info.value.diagnostics]
    assert any("unknown concept" in m for m in messages)
    assert any("unrecognized" in m for m in messages)
    assert any("at most one criterion" in m for m in messages)
    assert any("at least one input" in m for m in messages)


def test_parse_case_requires_declared_default_criterion():
    kb = parse_kb("concept a\n")
    with pytest.raises(CaseLoadError) as info:
        parse_case("input a\n", kb)
    assert "default criterion" in str(info.value)


# ---------------------------------------------------------------------------
# Background characterization
# ---------------------------------------------------------------------------


def test_background_table_fixture(pipeline):
    table = pipeline.table
    assert table.categories == {
        "general-history": ["80-year-old", "female"],
        "sign-or-symptom": ["fainting", "arrhythmia"],
        "laboratory-finding": [],
        "disease": ["cardiomyopathy"],
        "alternative": ["anticoagulant-therapy"],
        "complication": ["embolism", "bleeding"],
    }
    assert table.unclassified == []
    assert table.warnings == []


def test_background_root_input_is_unclassified(kb):
    table = characterize_background(kb, CaseDescription(("disease",)))
    assert table.unclassified == ["disease"]
    assert table.warnings


def test_background_multiple_categories_warn():
    text = "\n".join(
        ["concept " + root for root in CATEGORY_ROOTS]
        + [
            "concept qale",
            "concept oddity",
            "ako oddity disease",
            "ako oddity complication",
        ]
    )
    kb = parse_kb(text)
    table = characterize_background(kb, CaseDescription(("oddity",), criterion="qale"))
    assert table.categories["disease"] == ["oddity"]
    assert table.categories["complication"] == ["oddity"]
    assert any("several categories" in w for w in table.warnings)


def test_background_duplicate_inputs_collapse(kb):
    table = characterize_background(
        kb, CaseDescription(("cardiomyopathy", "cardiomyopathy"))
    )
    assert table.categories["disease"] == ["cardiomyopathy"]


def test_background_requires_reserved_roots():
    kb = parse_kb("concept a\n")
    with pytest.raises(EngineError) as info:
        characterize_background(kb, CaseDescription(("a",)))
    assert "category roots" in str(info.value)


# ---------------------------------------------------------------------------
# Context establishment
# ---------------------------------------------------------------------------


def test_establish_context_fixture(pipeline):
    ctx = pipeline.ctx
    assert ctx.suspected_diseases == frozenset({"cardiomyopathy"})
    assert ctx.conditions == frozenset({"old-age"})
    assert ctx.as_context.name == "cardiomyopathy+old-age"


def test_establish_context_without_conditions(kb, case):
    table = characterize_background(kb, case)
    ctx = establish_context(kb, table, ())
    assert ctx.as_context.name == "cardiomyopathy"


def test_establish_context_empty_is_an_error(kb):
    table = characterize_background(kb, CaseDescription(("female",)))
    with pytest.raises(EmptyContextError):
        establish_context(kb, table, ())


def test_establish_context_checks_condition_ids(kb, case):
    table = characterize_background(kb, case)
    with pytest.raises(UnknownConceptError):
        establish_context(kb, table, ("nosuch",))


# ---------------------------------------------------------------------------
# Problem formulation
# ---------------------------------------------------------------------------


def test_formulation_concepts_fixture(pipeline):
    assert pipeline.formulation.concepts == TABLE_CONCEPTS
    assert pipeline.formulation.warnings == ()


def test_formulation_roles_fixture(pipeline):
    assert pipeline.formulation.roles == {
        "anticoagulant-therapy": "alternative",
        "arrhythmia": "finding",
        "bleeding": "outcome",
        "cardiomyopathy": "disease",
        "embolism": "outcome",
        "fainting": "finding",
        "long-term-morbidity": "outcome",
        "mortality": "outcome",
        "old-age": "condition",
        "pulmonary-embolism": "outcome",
        "quality-adjusted-life-expectancy": "criterion",
        "short-term-morbidity": "outcome",
        "systemic-embolism": "outcome",
    }


def test_formulation_excludes_unlinked_history(pipeline):
    # The two history inputs without interactions stay out of the problem.
    assert "80-year-old" not in pipeline.formulation.concepts
    assert "female" not in pipeline.formulation.concepts


def test_formulation_selected_endpoints_inside(pipeline):
    concepts = pipeline.formulation.concepts
    for assertion in pipeline.formulation.selected:
        assert assertion.source in concepts
        assert assertion.target in concepts


def test_formulation_depth_one(kb, case):
    table = characterize_background(kb, case)
    ctx = establish_context(kb, table, case.conditions)
    shallow = formulate_problem(kb, ctx, table, case.criterion, depth_bound=1)
    assert shallow.concepts == frozenset(
        {
            "anticoagulant-therapy",
            "arrhythmia",
            "bleeding",
            "cardiomyopathy",
            "embolism",
            "fainting",
            "old-age",
            "pulmonary-embolism",
            "systemic-embolism",
            "quality-adjusted-life-expectancy",
        }
    )
    assert shallow.concepts < TABLE_CONCEPTS
    assert any(w.startswith("DisconnectedCriterion") for w in shallow.warnings)


def test_formulation_threshold_prunes_everything(kb, case):
    table = characterize_background(kb, case)
    ctx = establish_context(kb, table, case.conditions)
    bare = formulate_problem(kb, ctx, table, case.criterion, significance_threshold=1.0)
    assert bare.concepts == frozenset(
        {
            "anticoagulant-therapy",
            "arrhythmia",
            "cardiomyopathy",
            "fainting",
            "old-age",
            "quality-adjusted-life-expectancy",
        }
    )
    assert bare.selected == ()
    assert any(w.startswith("DisconnectedCriterion") for w in bare.warnings)


@settings(max_examples=30, deadline=None)
@given(
    st.integers(min_value=1, max_value=5),
    st.sampled_from([0.0, 0.3, 0.55, 0.65, 0.75, 0.85, 1.0]),
)
def test_formulation_monotone_in_depth_and_threshold(depth, tau):
    kb = dmkit.parse_kb(data.kb_text())
    case = dmkit.parse_case(data.case_text(), kb)
    table = characterize_background(kb, case)
    ctx = establish_context(kb, table, case.conditions)
    narrow = formulate_problem(kb, ctx, table, case.criterion, depth, tau)
    deeper = formulate_problem(kb, ctx, table, case.criterion, depth + 1, tau)
    assert narrow.concepts <= deeper.concepts
    if tau < 1.0:
        stricter = formulate_problem(kb, ctx, table, case.criterion, depth, min(tau + 0.2, 1.0))
        assert stricter.concepts <= narrow.concepts


def test_formulation_role_soundness(pipeline):
    for cid, role in pipeline.formulation.roles.items():
        if role in ("disease", "alternative"):
            assert is_related(pipeline.kb, UNIVERSAL, cid, role, CategorizerKind.AKO).verdict


def test_formulation_reachability(pipeline):
    formulation = pipeline.formulation
    seeds = {"cardiomyopathy", "anticoagulant-therapy", "fainting", "arrhythmia", "old-age"}
    endpoint_of_selected = set()
    for assertion in formulation.selected:
        endpoint_of_selected.update((assertion.source, assertion.target))
    outcome_parents = {
        cid for cid, role in formulation.roles.items() if role == "outcome"
    }
    children_of_outcomes = set()
    for cid in outcome_parents:
        children_of_outcomes.update(
            dmkit.ako_children(pipeline.kb, cid, pipeline.ctx.as_context)
        )
    for cid in formulation.concepts - seeds:
        assert (
            cid == formulation.criterion
            or cid in endpoint_of_selected
            or cid in children_of_outcomes
        )


def test_formulation_deterministic(kb, case):
    table = characterize_background(kb, case)
    ctx = establish_context(kb, table, case.conditions)
    first = formulate_problem(kb, ctx, table, case.criterion)
    second = formulate_problem(kb, ctx, table, case.criterion)
    assert first == second
