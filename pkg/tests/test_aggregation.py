from dataclasses import replace
from decimal import Decimal

import pytest

from builders import cinema_template
from wsag_market.aggregation import PrefixRule, aggregate_templates, filter_templates, project_bindings, service_offer
from wsag_market.contract import (
    AgreementContext,
    AgreementDocument,
    Level,
    Range,
    Stage,
    TermDefinition,
    TermKind,
    dumps,
    fill_template,
    validate_offer,
)
from wsag_market.errors import ConflictingDuplicate, DomainMismatch, StageError
from wsag_market.marketplace.cinemas import domain_offer_template, make_domain_offer

D = Decimal


def _offer(**b):
    base = {"movie_title": "M", "price": D(8), "seat_count": 2}
    base.update(b)
    return make_domain_offer({k: v for k, v in base.items() if v is not None})


def test_prefix_rule():
    assert PrefixRule("A").apply("price") == "A.price"
    assert PrefixRule("A", "/").apply("price") == "A/price"


def test_identical_movie_title_is_merged():
    agg = aggregate_templates([cinema_template("A"), cinema_template("B")])
    assert [t.id for t in agg.terms].count("movie_title") == 1
    assert not any(t.id.endswith(".movie_title") for t in agg.terms)


def test_singleton_is_the_input_with_level_flipped():
    t = cinema_template("A")
    agg = aggregate_templates([t])
    assert agg.level is Level.DOMAIN
    assert agg.terms == t.terms
    assert agg.constraints == t.constraints
    assert agg.guarantees == t.guarantees
    assert agg.provider_id == ""


def test_differing_price_ranges_keep_both_constraints_scoped():
    a = cinema_template("A", price=(D(5), D(12)))
    b = cinema_template("B", price=(D(6), D(10)))
    agg = aggregate_templates([a, b])
    assert [t.id for t in agg.terms].count("price") == 1
    cons = {c.term_id: c.allowed for c in agg.constraints}
    assert cons["A.price"] == Range(D(5), D(12))
    assert cons["B.price"] == Range(D(6), D(10))
    assert "price" not in cons
    # oracle: each original constraint survives under exactly one rewritten id
    for t in (a, b):
        for c in t.constraints:
            hits = [ref for ref in (c.term_id, f"{t.provider_id}.{c.term_id}") if cons.get(ref) == c.allowed]
            assert len(hits) == 1


def test_differing_properties_are_prefixed():
    agg = aggregate_templates([cinema_template("A", smoking=False), cinema_template("B", smoking=True)])
    ids = {t.id for t in agg.terms}
    assert {"A.smoking", "B.smoking"} <= ids and "smoking" not in ids
    assert {"A.address", "B.address"} <= ids


def test_output_order_is_canonical():
    # documents keep their lists sorted by id, so the output is byte-stable
    a, b = cinema_template("A"), cinema_template("B", smoking=True)
    agg = aggregate_templates([b, a])
    ids = [t.id for t in agg.terms]
    assert ids == sorted(ids)
    assert dumps(agg) == dumps(aggregate_templates([b, a]))


def test_conflicting_units_fail():
    ctx = AgreementContext("", "A", "d")
    a = AgreementDocument(Stage.TEMPLATE, Level.SERVICE, ctx, (TermDefinition("x", TermKind.INPUT, "EUR", Range(0, 5)),))
    b = replace(a, context=replace(ctx, provider_id="B"), terms=(TermDefinition("x", TermKind.INPUT, "USD", Range(0, 5)),))
    with pytest.raises(ConflictingDuplicate):
        aggregate_templates([a, b])


def test_conflicting_input_domains_fail():
    ctx = AgreementContext("", "A", "d")
    a = AgreementDocument(Stage.TEMPLATE, Level.SERVICE, ctx, (TermDefinition("x", TermKind.INPUT, "", Range(0, 5)),))
    b = replace(a, context=replace(ctx, provider_id="B"), terms=(TermDefinition("x", TermKind.INPUT, "", Range(0, 6)),))
    with pytest.raises(ConflictingDuplicate):
        aggregate_templates([a, b])


def test_inputs_must_share_a_domain_and_stage():
    a = cinema_template("A")
    other = replace(a, context=replace(a.context, provider_id="B", domain_id="hotels"))
    with pytest.raises(DomainMismatch):
        aggregate_templates([a, other])
    offer = fill_template(a, {"movie_title": "M", "price": D(8), "seat_count": 2})
    with pytest.raises(StageError):
        aggregate_templates([offer])


def test_domain_offer_is_admissible_against_the_aggregate():
    agg = aggregate_templates([cinema_template("A", price=(D(5), D(12))), cinema_template("B", price=(D(9), D(10)))])
    assert validate_offer(agg, _offer(price=D(8))).ok
    # neither provider admits 13
    assert not validate_offer(agg, _offer(price=D(13))).ok


def test_filter_keeps_only_matching_ranges():
    a = cinema_template("A", price=(D(5), D(12)))
    b = cinema_template("B", price=(D(9), D(10)))
    assert filter_templates([a, b], _offer(price=D(8))) == [a]


def test_filter_with_no_bindings_keeps_everything():
    ts = [cinema_template("A"), cinema_template("B", price=(D(9), D(10)))]
    empty = fill_template(domain_offer_template(), {"movie_title": "M", "price": D(8), "seat_count": 1})
    empty = replace(empty, bindings={})
    assert filter_templates(ts, empty) == ts


def test_filter_multi_term_matches_brute_force():
    ts = [
        cinema_template("A", price=(D(5), D(12)), bundle=(1, 4)),
        cinema_template("B", price=(D(5), D(12)), bundle=(3, 6)),
        cinema_template("C", price=(D(9), D(12)), bundle=(1, 10)),
    ]
    offer = _offer(price=D(8), seat_count=3)
    oracle = [
        t for t in ts
        if all(t.constraint(k) is None or t.constraint(k).allowed.contains(v) for k, v in offer.bindings.items())
    ]
    assert filter_templates(ts, offer) == oracle == ts[:2]


def test_filter_is_monotone():
    ts = [cinema_template("A", bundle=(1, 2)), cinema_template("B")]
    fewer = replace(_offer(), bindings={"price": D(8)})
    assert set(map(id, filter_templates(ts, _offer(seat_count=5)))) <= set(map(id, filter_templates(ts, fewer)))


def test_filter_needs_a_domain_offer():
    t = cinema_template("A")
    with pytest.raises(StageError):
        filter_templates([t], fill_template(t, {"movie_title": "M", "price": D(8), "seat_count": 2}))


def test_scoped_binding_overrides_plain_one():
    t = cinema_template("A")
    got = project_bindings({"price": D(8), "A.price": D(9), "B.price": D(7), "nope": 1}, t)
    assert got == {"price": D(9)}


def test_service_offer_supplements_the_template():
    t = cinema_template("A")
    so = service_offer(t, _offer(), {"show_id": "A-1"})
    assert so.stage is Stage.OFFER and so.level is Level.SERVICE
    assert so.bindings["show_id"] == "A-1"
    assert so.context.consumer_id == "consumer"
