"""
Bilateral bargaining
====================

One cinema, two ways of talking to it. Under the contract net protocol
the consumer gets a single yes or no. Under alternating offers it can
keep conceding inside the counter templates the cinema sends back.
"""

from decimal import Decimal
from fractions import Fraction

from wsag_market.contract import fill_template
from wsag_market.protocol import Limits, Transcript, run_alternating_offers, run_cnip
from wsag_market.sim import CinemaProvider, ProviderModel, Show
from wsag_market.strategy import LinearScore, ScoringModel, ScoringStrategy, ThresholdSchedule, TimeDependentTactic

D = Decimal
PROPS = {"address": "Main street 1", "seats": 200, "smoking": False, "food_corner": True}


def cinema(protocol):
    show = Show("O-1", "Metropolis", 20, 40, D(12))
    return CinemaProvider(ProviderModel("Odeon", dict(PROPS), [show], D(8), protocol=protocol))


def request(price):
    return {"movie_title": "Metropolis", "price": D(price), "seat_count": 2}


def show(transcript):
    for r in transcript:
        print(f"  t={r.tick:<3} round {r.round}  {r.sender:<9} {r.msg_type or r.event}")


# take it or leave it, below the reserve of 8
odeon = cinema("CNIP")
tr = Transcript()
state = run_cnip(fill_template(odeon.template, request("6")), odeon, Limits(), transcript=tr, session_id="cnip")
print("CNIP at 6.00 ->", state.outcome.value)
show(tr)

# %%
# The consumer now starts at 5.00 and concedes one euro per round. The
# scoring model prefers cheap tickets, and the threshold of 1 means it
# never accepts a counter template on its own; the cinema accepts once
# the price reaches its reserve.

model = ScoringModel(
    {"price": LinearScore(D(5), D(25), increasing=False)}, {"price": 1},
    ignore={"movie_title", "seat_count", "show_id"},
)
consumer = ScoringStrategy(
    model,
    [TimeDependentTactic("price", D(5), D(25), 20)],
    threshold=ThresholdSchedule(Fraction(1)),
    deadline_round=20,
)

odeon = cinema("AlternatingOffers")
tr = Transcript()
state = run_alternating_offers(
    fill_template(odeon.template, request("5")), odeon, consumer, Limits(deadline_round=20),
    transcript=tr, session_id="ao",
)
print(f"\nalternating offers -> {state.outcome.value} in round {state.round}"
      f" at {state.agreement.bindings['price']}")
show(tr)
