"""Shared fixtures: the bundled cardiomyopathy knowledge base and the
pipeline stages built from it. Everything is function-scoped because
deriving concepts mutates a knowledge base in place."""

from __future__ import annotations

from dataclasses import dataclass

import pytest

import dmkit
from dmkit import data
from dmkit.planner import BackgroundTable, CaseDescription, DomainContext, ProblemFormulation
from dmkit.qpn import Qpn


@pytest.fixture()
def kb() -> dmkit.KnowledgeBase:
    return dmkit.parse_kb(data.kb_text())


@pytest.fixture()
def case(kb: dmkit.KnowledgeBase) -> CaseDescription:
    return dmkit.parse_case(data.case_text(), kb)


@dataclass
class Pipeline:
    kb: dmkit.KnowledgeBase
    case: CaseDescription
    table: BackgroundTable
    ctx: DomainContext
    formulation: ProblemFormulation
    model: Qpn


@pytest.fixture()
def pipeline(kb: dmkit.KnowledgeBase, case: CaseDescription) -> Pipeline:
    table = dmkit.characterize_background(kb, case)
    ctx = dmkit.establish_context(kb, table, case.conditions)
    formulation = dmkit.formulate_problem(kb, ctx, table, case.criterion)
    model = dmkit.construct_model(kb, formulation, ctx)
    return Pipeline(kb, case, table, ctx, formulation, model)
