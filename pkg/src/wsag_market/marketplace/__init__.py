"""Passive repository, microflow interpreter and the consumer pipeline."""

from .cinemas import DOMAIN_ID, cinemas_domain, domain_offer_template, make_domain_offer
from .engine import ExecutionEngine
from .pipeline import (
    PHASES,
    PipelineResult,
    SelectionCallback,
    book,
    build_domain_agreement,
    run_pipeline,
    search_and_book,
    strategy_selector,
)
from .repository import Domain, OperationDef, Registration, Repository, Step
from .store import AgreementStore

__all__ = [
    "DOMAIN_ID",
    "PHASES",
    "AgreementStore",
    "Domain",
    "ExecutionEngine",
    "OperationDef",
    "PipelineResult",
    "Registration",
    "Repository",
    "SelectionCallback",
    "Step",
    "book",
    "build_domain_agreement",
    "cinemas_domain",
    "domain_offer_template",
    "make_domain_offer",
    "run_pipeline",
    "search_and_book",
    "strategy_selector",
]
