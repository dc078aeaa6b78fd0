"""The ten acceptance criteria, one test each.

The terminal summary prints one PASS/FAIL line per criterion.
"""

from __future__ import annotations

import dataclasses
import itertools
import random
import time
from decimal import Decimal
from fractions import Fraction

import pytest

from builders import admissible_bindings, cinema_provider, cinema_template, offer_bindings, random_template
from wsag_market.aggregation import aggregate_templates
from wsag_market.contract import (
    ProviderProperties,
    Range,
    Stage,
    fill_template,
    generate_service_template,
    make_agreement,
    validate_offer,
)
from wsag_market.errors import IllegalTransition, InvalidMessage, MarketError
from wsag_market.marketplace.cinemas import DOMAIN_ID, INPUT_SCHEMA, OUTPUT_SCHEMA, PROPERTY_SCHEMA
from wsag_market.protocol import (
    ALTERNATING_OFFERS,
    CNIP,
    ITERATED_CNIP,
    Limits,
    MsgType,
    NegotiationMessage,
    Outcome,
    ProviderReply,
    Transcript,
    alphabet,
    expire,
    open_session,
    reachable_states,
    run_alternating_offers,
    run_cnip,
    step,
)
from wsag_market.sim import bundled_scenarios, load_scenario, oracle_best_outcome, run_scenario
from wsag_market.sim.cli import main as cli_main
from wsag_market.strategy import (
    LinearScore,
    ScoringModel,
    ScoringStrategy,
    TableScore,
    ThresholdSchedule,
    TimeDependentTactic,
)

D = Decimal
SEEDS = range(100)


# ---------------------------------------------------------------- 1


@pytest.mark.acceptance(1)
def test_contract_round_trip():
    rng = random.Random(1)
    t0 = time.perf_counter()
    failures = 0
    for i in range(500):
        tmpl = random_template(rng, provider_id=f"P{i}")
        offer = fill_template(tmpl, admissible_bindings(rng, tmpl))
        if not validate_offer(tmpl, offer).ok:
            failures += 1
    elapsed = time.perf_counter() - t0
    assert failures == 0
    assert elapsed < 5.0, f"{elapsed:.2f}s"


# ---------------------------------------------------------------- 2


def _random_service_template(rng, pid):
    props = {
        "address": rng.choice(["Ring 1", "Ring 2"]),
        "seats": rng.choice([100, 200]),
        "smoking": rng.random() < 0.5,
        "food_corner": True,
    }
    # properties outside the schema keep an empty unit
    for extra in ("parking", "imax"):
        if rng.random() < 0.4:
            props[extra] = rng.random() < 0.5
    lo = rng.randint(0, 10)
    ranges = {}
    if rng.random() < 0.8:
        ranges["price"] = Range(D(lo), D(lo + rng.randint(0, 20)))
    if rng.random() < 0.5:
        ranges["seat_count"] = Range(1, rng.randint(1, 10))
    record = ProviderProperties(pid, DOMAIN_ID, props, term_ranges=ranges)
    return generate_service_template(record, INPUT_SCHEMA, OUTPUT_SCHEMA, property_schema=PROPERTY_SCHEMA)


def _aggregate_ok(templates) -> bool:
    agg = aggregate_templates(templates)
    ids = [t.id for t in agg.terms]
    if len(ids) != len(set(ids)):
        return False
    by_id = {t.id: t for t in agg.terms}
    for tmpl in templates:
        pid = tmpl.provider_id
        for term in tmpl.terms:
            merged = by_id.get(term.id)
            as_merged = merged is not None and dataclasses.replace(merged, required=term.required) == term
            as_prefixed = f"{pid}.{term.id}" in by_id
            if as_merged + as_prefixed != 1:
                return False
        # every constraint survives under exactly one reference
        cons = {c.term_id: c for c in agg.constraints}
        for c in tmpl.constraints:
            hits = [ref for ref in (c.term_id, f"{pid}.{c.term_id}") if cons.get(ref) is not None and cons[ref].allowed == c.allowed]
            if len(hits) != 1:
                return False
    # every output id comes from some input term
    origins = {t.id for tm in templates for t in tm.terms} | {f"{tm.provider_id}.{t.id}" for tm in templates for t in tm.terms}
    return set(ids) <= origins and len(ids) <= sum(len(t.terms) for t in templates)


@pytest.mark.acceptance(2)
def test_aggregation_completeness_and_injectivity():
    rng = random.Random(2)
    bad = []
    for case in range(1000):
        n = rng.randint(2, 10)
        templates = [_random_service_template(rng, f"p{j}") for j in range(n)]
        if not _aggregate_ok(templates):
            bad.append(case)
        # the same template under two provider ids collapses completely
        twin = dataclasses.replace(templates[0], context=dataclasses.replace(templates[0].context, provider_id="twin"))
        agg = aggregate_templates([templates[0], twin])
        if [t.id for t in agg.terms] != [t.id for t in templates[0].terms]:
            bad.append(case)
    assert bad == []


# ---------------------------------------------------------------- 3


class _PolicyProvider:
    """A CNIP provider with a random, seed-fixed answer policy."""

    protocol = "CNIP"

    def __init__(self, rng: random.Random, template):
        self.provider_id = template.provider_id
        self.template = template
        self.policy = rng.choice(["reserve", "accept", "reject", "silent", "counter"])
        self.reserve = D(rng.randint(10, 24)) / 2

    def get_template(self, round=0):
        return self.template

    def handle_offer(self, offer, round):
        if self.policy == "silent":
            return None
        if self.policy == "counter":
            return ProviderReply.counter(self.template)
        if self.policy == "accept" or (self.policy == "reserve" and offer.bindings["price"] >= self.reserve):
            return ProviderReply.accept(make_agreement(offer, f"{self.provider_id}-1"))
        return ProviderReply.reject("below reserve")

    def cancel(self, agreement):
        pass

    def execute(self, agreement, inputs):
        return {}


@pytest.mark.acceptance(3)
def test_cnip_purity():
    problems = []
    for seed in range(1000):
        rng = random.Random(seed)
        tmpl = cinema_template("P")
        offer = fill_template(tmpl, offer_bindings(price=D(rng.randint(10, 24)) / 2))
        tr = Transcript()
        state = run_cnip(offer, _PolicyProvider(rng, tmpl), Limits(deadline_ticks=rng.randint(1, 5)), transcript=tr)
        records = list(tr)
        consumer = [r for r in records if r.sender == "consumer"]
        provider = [r for r in records if r.sender == "provider"]
        if (
            any(r.msg_type == MsgType.COUNTEROFFER.value for r in records)
            or not state.terminal
            # an exchange is one consumer message and at most one answer
            or len(consumer) > 2
            or len(provider) > 1
        ):
            problems.append(seed)
    assert problems == []


# ---------------------------------------------------------------- 4


class _Recorder:
    """Wraps a consumer strategy and keeps every counter template with the counteroffer made to it."""

    def __init__(self, inner):
        self.inner = inner
        self.pairs = []

    def decide(self, round, history):
        decision = self.inner.decide(round, history)
        # accepting the provider's position is also sent as a counteroffer
        if decision.action in ("accept", "counter") and decision.bindings is not None:
            self.pairs.append((history.last_template, dict(decision.bindings)))
        return decision

    def __getattr__(self, name):
        return getattr(self.inner, name)


def _admissible(template, bindings) -> bool:
    try:
        offer = dataclasses.replace(template, stage=Stage.OFFER, bindings=bindings)
    except MarketError:
        return False
    return validate_offer(template, offer).ok


def _price_strategy(start, reserve, deadline, beta=1, threshold=1, grid=None):
    model = ScoringModel({"price": LinearScore(D(5), D(14), False)}, {"price": 1}, frozenset({"movie_title", "seat_count"}))
    tactic = TimeDependentTactic("price", D(start), D(reserve), deadline, D(beta), grid)
    return ScoringStrategy(model, [tactic], threshold=ThresholdSchedule(threshold), deadline_round=deadline)


def test_ao_fixed_policy_example():
    # concede 1.00 per round from 5.00 against a provider whose reserve is 8.00
    provider = cinema_provider("P", reserve="8", list_price="12", protocol="AlternatingOffers")
    strategy = _price_strategy(5, 25, 20)
    offer = fill_template(provider.template, offer_bindings(price="5"))
    state = run_alternating_offers(offer, provider, strategy, Limits(deadline_round=20))
    assert state.outcome is Outcome.AGREED
    assert state.round == 4
    assert state.agreement.bindings["price"] == D("8.0000")


@pytest.mark.acceptance(4)
def test_alternating_offers_admissibility_and_termination():
    test_ao_fixed_policy_example()
    problems = []
    for seed in range(1000):
        rng = random.Random(seed)
        list_price = rng.randint(10, 16)
        reserve = D(rng.randint(10, 2 * list_price)) / 2
        inner = cinema_provider(
            "P", reserve=reserve, list_price=list_price, protocol="AlternatingOffers",
            concession=D(rng.choice([0, 1, 2, 3])) / 2,
        )
        strategy = _Recorder(_price_strategy(
            D(rng.randint(10, 20)) / 2, D(rng.randint(16, 32)) / 2, rng.randint(1, 20),
            beta=rng.choice(["0.5", "1", "2"]), threshold=Fraction(rng.randint(0, 10), 10),
            grid=rng.choice([None, D("0.5")]),
        ))
        offer = fill_template(inner.template, offer_bindings(price=D(rng.randint(10, 20)) / 2))
        limits = Limits(deadline_round=20, deadline_ticks=rng.choice([10, 100]))
        tr = Transcript()
        state = run_alternating_offers(offer, inner, strategy, limits, transcript=tr)
        admissible = all(_admissible(t, b) for t, b in strategy.pairs)
        # every counteroffer the consumer computed went on the wire
        counters = sum(r.msg_type == MsgType.COUNTEROFFER.value for r in tr)
        if not (admissible and state.terminal and state.round <= 20 and counters == len(strategy.pairs)):
            problems.append(seed)
    assert problems == []


# ---------------------------------------------------------------- 5


@pytest.mark.acceptance(5)
def test_reverse_auction_monotonicity():
    sc = load_scenario("cinema-3p-icnip")
    min_reserve = min(D(p.raw["reserve_price"]) for p in sc.providers)
    problems = []
    for seed in SEEDS:
        r = run_scenario(sc, seed=seed)
        prices = r.per_iteration_best
        ok = (
            r.confirmed
            and None not in prices
            and all(a >= b for a, b in zip(prices, prices[1:]))
            and r.final_price <= min_reserve + D("0.5")
            and r.iterations >= 2
        )
        if not ok:
            problems.append((seed, r.status, prices, r.final_price))
    assert problems == []


# ---------------------------------------------------------------- 6


@pytest.mark.acceptance(6)
def test_oracle_dominance():
    problems = []
    for name in bundled_scenarios():
        sc = load_scenario(name)
        for seed in SEEDS:
            r = run_scenario(sc, seed=seed)
            best = oracle_best_outcome(sc, D("0.5"), seed=seed).best_utility
            if r.utility is not None and r.utility > best:
                problems.append((name, seed, r.utility, best))
            if name == "cinema-1p-cnip" and r.utility != best:
                problems.append((name, seed, r.utility, best))
    assert problems == []


# ---------------------------------------------------------------- 7


@pytest.mark.acceptance(7)
def test_multilateral_bookkeeping(tmp_path):
    runs = 0
    problems = []
    for name in bundled_scenarios():
        sc = dataclasses.replace(load_scenario(name), class_operation="SearchAndBook")
        for seed in range(20):
            out = tmp_path / f"{name}-{seed}"
            r = run_scenario(sc, seed=seed, out_dir=out)
            if not r.confirmed:
                continue
            runs += 1
            k = r.provisional
            cancels = [rec for rec in r.transcript if rec.event == "cancel"]
            stored = r.pipeline and len(list((out / "store").glob("*/*.json")))
            if len(cancels) != k - 1 or stored != 1 or len(r.pipeline.domain_agreement.bindings) == 0:
                problems.append((name, seed, k, len(cancels), stored))
    assert runs > 0
    assert problems == []


# ---------------------------------------------------------------- 8


@pytest.mark.acceptance(8)
def test_determinism_and_replay(tmp_path, capsys):
    problems = []
    for name in bundled_scenarios():
        sc = load_scenario(name)
        for seed in range(10):
            a = run_scenario(sc, seed=seed, deterministic=True).transcript.dumps()
            b = run_scenario(sc, seed=seed, deterministic=True).transcript.dumps()
            c = run_scenario(sc, seed=seed, deterministic=False).transcript.dumps()
            if not (a == b == c):
                problems.append((name, seed))
        out = tmp_path / name
        assert cli_main(["run", name, "--seed", "3", "--deterministic", "--out", str(out)]) == 0
        if cli_main(["replay", str(out / "transcript.jsonl")]) != 0:
            problems.append((name, "replay"))
    capsys.readouterr()
    assert problems == []


# ---------------------------------------------------------------- 9


def _random_model(rng):
    fns, weights = {}, {}
    for i in range(rng.randint(1, 4)):
        if rng.random() < 0.6:
            lo = rng.randint(0, 20)
            fns[f"t{i}"] = LinearScore(D(lo), D(lo + rng.randint(1, 20)), rng.random() < 0.5)
        else:
            fns[f"t{i}"] = TableScore(tuple((m, Fraction(rng.randint(0, 10), 10)) for m in ("a", "b", "c")))
        weights[f"t{i}"] = Fraction(rng.randint(1, 20), rng.randint(1, 5))
    return fns, weights


def _random_offer(rng, fns):
    out = {}
    for k, f in fns.items():
        out[k] = rng.choice("abcd") if isinstance(f, TableScore) else D(rng.randint(-50, 500)) / 10
    return out


@pytest.mark.acceptance(9)
def test_strategy_invariants():
    rng = random.Random(9)
    for _ in range(200):
        fns, weights = _random_model(rng)
        model = ScoringModel(fns, weights)
        factor = Fraction(rng.randint(1, 1000), rng.randint(1, 1000))
        scaled = ScoringModel(fns, {k: w * factor for k, w in weights.items()})
        offers = [_random_offer(rng, fns) for _ in range(12)]
        scores = [model.score(o) for o in offers]
        assert all(0 <= s <= 1 for s in scores)
        best = max(range(len(offers)), key=lambda i: scores[i])
        assert max(range(len(offers)), key=lambda i: scaled.score(offers[i])) == best
        assert model.rescaled(factor).weights == model.weights

    for beta in ("0.5", "1", "2"):
        for _ in range(50):
            start, reserve = D(rng.randint(0, 400)) / 4, D(rng.randint(0, 400)) / 4
            deadline = rng.randint(1, 30)
            tactic = TimeDependentTactic("price", start, reserve, deadline, D(beta))
            assert tactic.value(0) == start
            assert tactic.value(deadline) == reserve
            lo, hi = tactic.bounds
            assert all(lo <= tactic.value(t) <= hi for t in range(deadline + 1))


# ---------------------------------------------------------------- 10


def _closure(spec) -> set[str]:
    """Warshall transitive closure over the transition relation."""
    states = sorted(spec.states)
    reach = {(a, b): a == b for a in states for b in states}
    for t in spec.transitions:
        reach[(t.source, t.target)] = True
    for k, i, j in itertools.product(states, repeat=3):
        if reach[(i, k)] and reach[(k, j)]:
            reach[(i, j)] = True
    return {s for s in states if reach[(spec.initial, s)]}


def _engine_reachable(spec) -> set[str]:
    """Drive the engine with every message it knows until no new state appears."""
    tmpl = cinema_template("P")
    offer = fill_template(tmpl, offer_bindings())
    start = open_session(spec, "s", deadline_round=3, deadline_tick=10_000)
    seen_states = {start}
    frontier = [start]
    while frontier:
        state = frontier.pop()
        successors = []
        for mt, prim, snd in alphabet(spec):
            payload = None
            if mt in (MsgType.OFFER, MsgType.COUNTEROFFER):
                payload = offer
            elif mt is MsgType.ACCEPTED and prim.value == "Accept":
                payload = make_agreement(state.last_offer or offer, "a-1", provider_id="P")
            try:
                msg = NegotiationMessage(mt, prim, snd, "s", state.round, 1, payload)
                successors.append(step(state, msg)[0])
            except (IllegalTransition, InvalidMessage):
                continue
        if any(t.is_timeout and t.source == state.phase for t in spec.transitions):
            successors.append(expire(state, 10_001)[0])
        for nxt in successors:
            key = dataclasses.replace(nxt, last_offer=None, agreement=None)
            if key not in seen_states and nxt.round <= 6:
                seen_states.add(key)
                if not nxt.terminal:
                    frontier.append(nxt)
    return {s.phase for s in seen_states}


@pytest.mark.acceptance(10)
def test_state_machine_equivalence():
    t0 = time.perf_counter()
    for spec in (CNIP, ALTERNATING_OFFERS, ITERATED_CNIP):
        assert len(spec.states) <= 6
        brute = _closure(spec)
        assert _engine_reachable(spec) == brute, spec.name
        assert reachable_states(spec) == brute, spec.name
    assert time.perf_counter() - t0 < 1.0
