"""The cinemas domain: schemas, microflows and the transforms they use."""

from __future__ import annotations

from decimal import Decimal
from typing import Any, Mapping

from ..contract import (
    AgreementContext,
    AgreementDocument,
    Boolean,
    CreationConstraint,
    FreeString,
    Level,
    Range,
    Stage,
    TermDefinition,
    TermKind,
    TermValue,
    fill_template,
)
from .repository import Domain, OperationDef, Step

__all__ = [
    "DOMAIN_ID",
    "PROPERTY_SCHEMA",
    "INPUT_SCHEMA",
    "OUTPUT_SCHEMA",
    "cinemas_domain",
    "instance_operations",
    "domain_offer_template",
    "make_domain_offer",
    "TRANSFORMS",
]

DOMAIN_ID = "cinemas"
SP, IN, OUT = TermKind.SERVICE_PROPERTY, TermKind.INPUT, TermKind.OUTPUT

PROPERTY_SCHEMA = (
    TermDefinition("address", SP, "", FreeString(), True),
    TermDefinition("seats", SP, "seats", Range(0, 100_000), True),
    TermDefinition("smoking", SP, "", Boolean(), True),
    TermDefinition("food_corner", SP, "", Boolean(), True),
)

INPUT_SCHEMA = (
    TermDefinition("movie_title", IN, "", FreeString(), True),
    TermDefinition("price", IN, "EUR", Range(Decimal("0"), Decimal("100")), True),
    TermDefinition("seat_count", IN, "seats", Range(1, 10), True),
    TermDefinition("show_id", IN, "", FreeString(), False),
)

OUTPUT_SCHEMA = (
    TermDefinition("tickets", OUT, "seats", Range(1, 10), False),
    TermDefinition("charged", OUT, "EUR", Range(Decimal("0"), Decimal("1000")), False),
)


def instance_operations(provider_id: str) -> list[OperationDef]:
    """The two microflows every cinema provider gets at registration."""
    return [
        OperationDef(
            "search_show", "instance", DOMAIN_ID, provider_id,
            input_contract=INPUT_SCHEMA[:1],
            body=(Step("invoke", "search", ("movie_title",), into="result"),),
            returns="result",
        ),
        OperationDef(
            "execute", "instance", DOMAIN_ID, provider_id,
            input_contract=INPUT_SCHEMA,
            output_contract=OUTPUT_SCHEMA,
            body=(Step("invoke", "execute", ("agreement", "usage_inputs"), into="result"),),
            returns="result",
        ),
    ]


SEARCH = OperationDef(
    "Search", "class", DOMAIN_ID,
    input_contract=INPUT_SCHEMA[:1],
    body=(
        Step("transform", "movie_title_of", ("domain_offer",), into="movie_title"),
        Step("fan_out", "search_show", into="shows"),
    ),
    returns="shows",
)

# either a service agreement or a show reference is valid input
BOOK = OperationDef(
    "Book", "class", DOMAIN_ID,
    input_contract=INPUT_SCHEMA,
    output_contract=OUTPUT_SCHEMA,
    body=(
        Step("callback", "negotiate", into="agreement", when="not:agreement"),
        Step("callback", "authorize", into="targets"),
        Step("transform", "usage_inputs", ("agreement",), into="usage_inputs"),
        Step("fan_out", "execute", ("targets",), into="executions"),
        Step("transform", "only", ("executions",), into="results"),
    ),
    returns="results",
)

SEARCH_AND_BOOK = OperationDef(
    "SearchAndBook", "class", DOMAIN_ID,
    input_contract=INPUT_SCHEMA,
    output_contract=OUTPUT_SCHEMA,
    body=(
        Step("fetch", "Search", into="shows"),
        Step("callback", "negotiate_shows", into="agreement"),
        Step("fetch", "Book", into="results"),
    ),
    returns="results",
)


def cinemas_domain() -> Domain:
    return Domain(
        DOMAIN_ID,
        PROPERTY_SCHEMA,
        INPUT_SCHEMA,
        OUTPUT_SCHEMA,
        (SEARCH, BOOK, SEARCH_AND_BOOK),
        instance_operations,
        TRANSFORMS,
    )


def domain_offer_template(consumer_id: str = "consumer", *, domain: Domain | None = None) -> AgreementDocument:
    """Class-level template the consumer fills in to state a request."""
    d = domain or cinemas_domain()
    terms = d.input_schema + d.output_schema
    constraints = tuple(
        CreationConstraint(t.id, t.domain, t.required)
        for t in d.input_schema
        if isinstance(t.domain, Range)
    )
    ctx = AgreementContext(consumer_id, "", d.domain_id)
    return AgreementDocument(Stage.TEMPLATE, Level.DOMAIN, ctx, terms, constraints)


def make_domain_offer(bindings: Mapping[str, TermValue], consumer_id: str = "consumer") -> AgreementDocument:
    return fill_template(domain_offer_template(consumer_id), bindings)


def _movie_title_of(domain_offer: AgreementDocument) -> str:
    return domain_offer.bindings["movie_title"]


def _usage_inputs(agreement: AgreementDocument) -> dict[str, TermValue]:
    return {
        t.id: agreement.bindings[t.id]
        for t in agreement.terms
        if t.kind is TermKind.INPUT and t.id in agreement.bindings
    }


def _only(results: Mapping[str, Any]) -> Any:
    if len(results) != 1:
        raise ValueError(f"expected exactly one execution, got {len(results)}")
    return next(iter(results.values()))


TRANSFORMS = {
    "movie_title_of": _movie_title_of,
    "usage_inputs": _usage_inputs,
    "only": _only,
}
