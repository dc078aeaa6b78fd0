"""
Contracts and aggregation
=========================

Two cinemas describe themselves, the marketplace turns that into service
templates, and a consumer's request is checked against the combined
domain template.

Run with ``python docs/examples/01_contracts_and_aggregation.py``.
"""

from decimal import Decimal

from wsag_market.aggregation import aggregate_templates, filter_templates
from wsag_market.contract import ProviderProperties, Range, dumps, fill_template, generate_service_template, validate_offer
from wsag_market.marketplace.cinemas import DOMAIN_ID, INPUT_SCHEMA, OUTPUT_SCHEMA, PROPERTY_SCHEMA, make_domain_offer

D = Decimal


def cinema(pid, address, lo, hi, smoking=False):
    record = ProviderProperties(
        pid, DOMAIN_ID,
        {"address": address, "seats": 200, "smoking": smoking, "food_corner": True},
        term_ranges={"price": Range(D(lo), D(hi))},
    )
    return generate_service_template(record, INPUT_SCHEMA, OUTPUT_SCHEMA, property_schema=PROPERTY_SCHEMA)


odeon = cinema("Odeon", "Main street 1", "8", "12")
roxy = cinema("Roxy", "Harbour 4", "10", "14", smoking=True)

print("Odeon's price constraint:", odeon.constraint("price").allowed)

# %%
# An offer is a template with every required input bound. Values outside
# the creation constraints are refused at fill time.

offer = fill_template(odeon, {"movie_title": "Metropolis", "price": D("9.5"), "seat_count": 2})
print("valid:", validate_offer(odeon, offer).ok)
print(dumps(offer)[:160], "...")

# %%
# Aggregation. Terms both cinemas describe identically are merged, the
# rest are kept apart under a provider prefix.

domain_template = aggregate_templates([odeon, roxy])
for t in domain_template.terms:
    print(f"  {t.id:<20} {t.kind.value}")

# %%
# Filtering drops the cinemas whose constraints cannot hold the request.

request = make_domain_offer({"movie_title": "Metropolis", "price": D(9), "seat_count": 2})
kept = filter_templates([odeon, roxy], request)
print("admit a 9.00 ticket:", [t.provider_id for t in kept])
