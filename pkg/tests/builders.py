"""Small factories shared by the test modules."""

from __future__ import annotations

import random
from decimal import Decimal

from wsag_market.contract import (
    AgreementContext,
    AgreementDocument,
    Boolean,
    CreationConstraint,
    Enumeration,
    FreeString,
    Level,
    ProviderProperties,
    Range,
    Stage,
    TermDefinition,
    TermKind,
    dec,
    generate_service_template,
)
from wsag_market.marketplace.cinemas import DOMAIN_ID, INPUT_SCHEMA, OUTPUT_SCHEMA, PROPERTY_SCHEMA
from wsag_market.sim.providers import CinemaProvider, ProviderModel, Show

D = Decimal


def cinema_props(pid="A", **overrides):
    props = {"address": f"{pid} road", "seats": 200, "smoking": False, "food_corner": True}
    props.update(overrides)
    return props


def cinema_template(pid="A", price=(D(5), D(12)), bundle=(1, 10), **props):
    record = ProviderProperties(
        pid, DOMAIN_ID, cinema_props(pid, **props),
        term_ranges={"price": Range(*price), "seat_count": Range(*bundle)},
    )
    return generate_service_template(record, INPUT_SCHEMA, OUTPUT_SCHEMA, property_schema=PROPERTY_SCHEMA)


def cinema_model(pid="A", reserve="8", list_price="12", protocol="CNIP", seats=40, title="Metropolis", **kw):
    show = Show(f"{pid}-1", title, 10, seats, D(list_price))
    return ProviderModel(pid, cinema_props(pid), [show], D(reserve), protocol=protocol, **kw)


def cinema_provider(*args, **kw) -> CinemaProvider:
    return CinemaProvider(cinema_model(*args, **kw))


def offer_bindings(price="12", seats=2, title="Metropolis"):
    return {"movie_title": title, "price": D(price), "seat_count": seats}


# ---------------------------------------------------------------- random documents


def random_domain(rng: random.Random):
    """A value domain and a sampler of values inside any subset of it."""
    kind = rng.choice(["int", "dec", "enum", "str", "bool"])
    if kind == "int":
        lo = rng.randint(-50, 50)
        return Range(lo, lo + rng.randint(0, 40))
    if kind == "dec":
        lo = dec(D(rng.randint(-5000, 5000)) / 100)
        return Range(lo, dec(lo + D(rng.randint(0, 4000)) / 100))
    if kind == "enum":
        pool = ["red", "green", "blue", "gold", "grey", 1, 2, 3]
        return Enumeration(tuple(rng.sample(pool, rng.randint(1, 5))))
    if kind == "str":
        return FreeString()
    return Boolean()


def random_subdomain(rng: random.Random, domain):
    if isinstance(domain, Range):
        if domain.integral:
            a, b = sorted(rng.randint(domain.lo, domain.hi) for _ in range(2))
            return Range(a, b)
        span = int((domain.hi - domain.lo) * 100)
        a, b = sorted(rng.randint(0, span) for _ in range(2))
        return Range(dec(domain.lo + D(a) / 100), dec(domain.lo + D(b) / 100))
    if isinstance(domain, Enumeration):
        return Enumeration(tuple(rng.sample(list(domain.members), rng.randint(1, len(domain.members)))))
    if isinstance(domain, Boolean):
        return rng.choice([Boolean(), Enumeration((True,)), Enumeration((False,))])
    return domain


def sample_value(rng: random.Random, domain):
    if isinstance(domain, Range):
        if domain.integral:
            return rng.randint(domain.lo, domain.hi)
        span = int((domain.hi - domain.lo) * 10000)
        return dec(domain.lo + D(rng.randint(0, span)) / 10000)
    if isinstance(domain, Enumeration):
        return rng.choice(domain.members)
    if isinstance(domain, Boolean):
        return rng.choice([True, False])
    return rng.choice(["", "x", "Metropolis", "ünï"])


def random_template(rng: random.Random, provider_id="P", n_terms=None):
    """A service template with random terms, constraints and guarantees."""
    terms, constraints = [], []
    for i in range(n_terms if n_terms is not None else rng.randint(0, 8)):
        domain = random_domain(rng)
        kind = rng.choice([TermKind.SERVICE_PROPERTY, TermKind.INPUT, TermKind.OUTPUT])
        required = kind is not TermKind.OUTPUT and rng.random() < 0.5
        terms.append(TermDefinition(f"t{i}", kind, rng.choice(["", "EUR", "seats"]), domain, required))
        if kind is not TermKind.OUTPUT and rng.random() < 0.6:
            constraints.append(CreationConstraint(f"t{i}", random_subdomain(rng, domain), rng.random() < 0.5))
    ctx = AgreementContext("", provider_id, "d", 10_000)
    return AgreementDocument(Stage.TEMPLATE, Level.SERVICE, ctx, tuple(terms), tuple(constraints))


def admissible_bindings(rng: random.Random, template: AgreementDocument):
    """Bind every required or mandatory term and a random share of the rest."""
    out = {}
    for t in template.terms:
        if t.kind is TermKind.OUTPUT:
            continue
        c = template.constraint(t.id)
        must = t.required or (c is not None and c.mandatory)
        if must or rng.random() < 0.5:
            out[t.id] = sample_value(rng, c.allowed if c is not None else t.domain)
    return out
