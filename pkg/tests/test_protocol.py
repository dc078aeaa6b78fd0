"""Engine, specs, transcript and the two bilateral protocols."""

from dataclasses import replace
from decimal import Decimal

import pytest

from builders import cinema_provider, cinema_template, offer_bindings
from wsag_market.contract import fill_template, make_agreement
from wsag_market.errors import (
    IllegalTransition,
    InvalidMessage,
    InvalidProtocolSpec,
    MarketError,
    SessionClosed,
    StageError,
)
from wsag_market.protocol import (
    ALTERNATING_OFFERS,
    CNIP,
    ITERATED_CNIP,
    Clock,
    Decision,
    Limits,
    MsgType,
    NegotiationMessage,
    Outcome,
    Primitive,
    ProtocolSpec,
    ProviderReply,
    Sender,
    Transcript,
    TranscriptRecord,
    Transition,
    open_session,
    run_alternating_offers,
    run_bilateral,
    run_cnip,
    step,
    template_position,
)

D = Decimal
C, P = Sender.CONSUMER, Sender.PROVIDER


def _offer(price="8"):
    return fill_template(cinema_template("P"), offer_bindings(price=price))


def _msg(state, mt, prim, sender, payload=None, tick=1):
    return NegotiationMessage(mt, prim, sender, state.session_id, state.round, tick, payload)


# ---------------------------------------------------------------- messages


def test_vocabulary_is_exactly_eight_by_eight():
    assert [m.value for m in MsgType] == [
        "Offer", "Counteroffer", "Rejected", "Accepted", "Expired", "SinglePartySigned", "Signed", "Unsigned",
    ]
    assert [p.value for p in Primitive] == [
        "CallForProposal", "Propose", "Accept", "Terminate", "Reject", "Acknowledge", "Modify", "Withdraw",
    ]


def test_offer_messages_need_an_offer_payload():
    with pytest.raises(InvalidMessage):
        NegotiationMessage(MsgType.OFFER, Primitive.PROPOSE, C, "s", 0, 1)
    with pytest.raises(InvalidMessage):
        NegotiationMessage(MsgType.OFFER, Primitive.PROPOSE, C, "s", 0, 1, cinema_template())


def test_accept_needs_an_agreement_payload():
    with pytest.raises(InvalidMessage):
        NegotiationMessage(MsgType.ACCEPTED, Primitive.ACCEPT, P, "s", 0, 1, _offer())


def test_unknown_primitive_is_refused():
    with pytest.raises(ValueError):
        NegotiationMessage(MsgType.OFFER, "Haggle", C, "s", 0, 1, _offer())


# ---------------------------------------------------------------- specs


def test_spec_validation():
    with pytest.raises(InvalidProtocolSpec):
        ProtocolSpec("bad", frozenset({"A"}), "B", frozenset(), ())
    with pytest.raises(InvalidProtocolSpec):
        ProtocolSpec(
            "bad", frozenset({"A", "B"}), "A", frozenset({"B"}),
            (Transition("A", Primitive.PROPOSE, C, "B"),),
        )
    with pytest.raises(InvalidProtocolSpec):
        ProtocolSpec(
            "bad", frozenset({"A", "B"}), "A", frozenset({"A"}),
            (Transition("A", Primitive.PROPOSE, C, "B", outcome=Outcome.AGREED),),
        )


@pytest.mark.parametrize("spec", [CNIP, ALTERNATING_OFFERS, ITERATED_CNIP])
def test_specs_are_small(spec):
    assert len(spec.states) <= 6


def test_cnip_has_no_counteroffer_edge():
    types = {mt for t in CNIP.transitions for mt in t.msg_types}
    assert MsgType.COUNTEROFFER not in types


# ---------------------------------------------------------------- engine


def test_cnip_happy_path_by_hand():
    s = open_session(CNIP, "s", deadline_round=5, deadline_tick=100)
    offer = _offer()
    s, out = step(s, _msg(s, MsgType.OFFER, Primitive.PROPOSE, C, offer))
    assert s.phase == "AwaitingDecision" and s.round == 1 and out == []
    agr = make_agreement(offer, "P-1")
    s, out = step(s, _msg(s, MsgType.ACCEPTED, Primitive.ACCEPT, P, agr, tick=2))
    assert s.phase == "Agreed" and s.outcome is Outcome.AGREED and s.agreement == agr
    assert [(m.msg_type, m.primitive, m.sender) for m in out] == [(MsgType.ACCEPTED, Primitive.ACKNOWLEDGE, C)]
    assert s.signature == "Signed"


def test_terminal_sessions_stay_put():
    s = open_session(CNIP, "s", deadline_round=5, deadline_tick=100)
    s, _ = step(s, _msg(s, MsgType.OFFER, Primitive.PROPOSE, C, _offer()))
    s, _ = step(s, _msg(s, MsgType.REJECTED, Primitive.REJECT, P))
    assert s.outcome is Outcome.REJECTED
    with pytest.raises(SessionClosed):
        step(s, _msg(s, MsgType.OFFER, Primitive.PROPOSE, C, _offer()))


def test_wrong_sender_is_illegal():
    s = open_session(CNIP, "s", deadline_round=5, deadline_tick=100)
    with pytest.raises(IllegalTransition):
        step(s, _msg(s, MsgType.OFFER, Primitive.PROPOSE, P, _offer()))


def test_counteroffer_is_illegal_in_cnip():
    s = open_session(CNIP, "s", deadline_round=5, deadline_tick=100)
    s, _ = step(s, _msg(s, MsgType.OFFER, Primitive.PROPOSE, C, _offer()))
    with pytest.raises(IllegalTransition):
        step(s, _msg(s, MsgType.REJECTED, Primitive.MODIFY, P, cinema_template()))


def test_only_the_offer_on_the_table_can_be_accepted():
    s = open_session(CNIP, "s", deadline_round=5, deadline_tick=100)
    s, _ = step(s, _msg(s, MsgType.OFFER, Primitive.PROPOSE, C, _offer("8")))
    other = make_agreement(_offer("9"), "P-1")
    with pytest.raises(InvalidMessage):
        step(s, _msg(s, MsgType.ACCEPTED, Primitive.ACCEPT, P, other))


def test_late_message_expires_the_session():
    s = open_session(CNIP, "s", deadline_round=5, deadline_tick=3)
    s, _ = step(s, _msg(s, MsgType.OFFER, Primitive.PROPOSE, C, _offer()))
    s, out = step(s, _msg(s, MsgType.REJECTED, Primitive.REJECT, P, tick=4))
    assert s.phase == "Expired" and s.outcome is Outcome.EXPIRED
    assert out[0].msg_type is MsgType.EXPIRED


def test_message_for_another_session():
    s = open_session(CNIP, "s", deadline_round=5, deadline_tick=100)
    with pytest.raises(InvalidMessage):
        step(s, NegotiationMessage(MsgType.OFFER, Primitive.PROPOSE, C, "t", 0, 1, _offer()))


def test_ao_counter_at_deadline_expires():
    s = open_session(ALTERNATING_OFFERS, "s", deadline_round=1, deadline_tick=100)
    s, _ = step(s, _msg(s, MsgType.OFFER, Primitive.PROPOSE, C, _offer()))
    s, _ = step(s, _msg(s, MsgType.REJECTED, Primitive.MODIFY, P, cinema_template()))
    assert s.phase == "Expired"


# ---------------------------------------------------------------- transcript


def test_records_serialize_in_fixed_key_order():
    rec = TranscriptRecord(3, "s", 1, "consumer", "Offer", "Propose", "ab")
    assert rec.to_json() == (
        '{"tick":3,"session_id":"s","round":1,"sender":"consumer","msg_type":"Offer",'
        '"primitive":"Propose","payload_digest":"ab"}'
    )
    assert TranscriptRecord.from_json(rec.to_json()) == rec


def test_transcript_write_read(tmp_path):
    tr = Transcript()
    run_cnip(_offer(), cinema_provider("P"), transcript=tr)
    path = tr.write(tmp_path / "t.jsonl")
    back = Transcript.read(path)
    assert back.dumps() == tr.dumps()
    assert back.clock.now == tr.clock.now


def test_fork_and_join_keep_buffer_order():
    tr = Transcript(Clock(10))
    a, b = tr.fork(), tr.fork()
    b.event("x", session_id="b")
    a.event("y", session_id="a")
    a.event("z", session_id="a")
    tr.join(a, b)
    assert [r.session_id for r in tr] == ["a", "a", "b"]
    assert [r.tick for r in tr] == [11, 12, 11]
    assert tr.clock.now == 12


# ---------------------------------------------------------------- CNIP runner


def test_cnip_accept():
    tr = Transcript()
    s = run_cnip(_offer("12"), cinema_provider("P", reserve="8"), transcript=tr)
    assert s.outcome is Outcome.AGREED
    assert [(r.sender, r.msg_type, r.primitive) for r in tr] == [
        ("consumer", "Offer", "Propose"),
        ("provider", "Accepted", "Accept"),
        ("consumer", "Accepted", "Acknowledge"),
    ]


def test_cnip_reject_below_reserve():
    s = run_cnip(_offer("7"), cinema_provider("P", reserve="8"))
    assert s.outcome is Outcome.REJECTED


def test_cnip_treats_a_counter_reply_as_reject():
    class Counters:
        provider_id, protocol = "P", "CNIP"

        def handle_offer(self, offer, round):
            return ProviderReply.counter(cinema_template())

    tr = Transcript()
    s = run_cnip(_offer(), Counters(), transcript=tr)
    assert s.outcome is Outcome.REJECTED
    assert "Counteroffer" not in tr.dumps()


def test_cnip_silence_expires():
    class Silent:
        provider_id, protocol = "P", "CNIP"

        def handle_offer(self, offer, round):
            return None

    tr = Transcript()
    s = run_cnip(_offer(), Silent(), Limits(deadline_ticks=5), transcript=tr)
    assert s.outcome is Outcome.EXPIRED
    assert list(tr)[-1].tick == 6


def test_bilateral_needs_a_service_offer():
    with pytest.raises(StageError):
        run_cnip(cinema_template(), cinema_provider("P"))


# ---------------------------------------------------------------- alternating offers


class _Scripted:
    """Consumer strategy replaying a fixed list of prices."""

    def __init__(self, prices):
        self.prices = list(prices)

    def decide(self, round, history):
        if not self.prices:
            return Decision.quit()
        b = dict(history.own[-1])
        b["price"] = D(self.prices.pop(0))
        return Decision.counter(b)


def test_template_position_takes_the_far_bound():
    t = cinema_provider("P")._with_price(D(6), D(11))
    assert template_position(t, {"price": D(6)}) == {"price": D("11.0000")}
    assert template_position(t, {"price": D(11)}) == {"price": D("6.0000")}


def test_ao_reaches_agreement_after_concessions():
    provider = cinema_provider("P", reserve="8", protocol="AlternatingOffers")
    tr = Transcript()
    s = run_alternating_offers(_offer("5"), provider, _Scripted(["6", "7", "8"]), Limits(deadline_round=20), transcript=tr)
    assert s.outcome is Outcome.AGREED and s.round == 4
    assert s.agreement.bindings["price"] == D(8)
    assert sum(r.msg_type == "Counteroffer" for r in tr) == 3


def test_ao_consumer_withdraws():
    provider = cinema_provider("P", reserve="8", protocol="AlternatingOffers")
    s = run_alternating_offers(_offer("5"), provider, _Scripted([]), Limits(deadline_round=20))
    assert s.outcome is Outcome.WITHDRAWN


def test_ao_inadmissible_counteroffer_terminates():
    provider = cinema_provider("P", reserve="8", protocol="AlternatingOffers")
    # 4 lies below the counter template's lower bound of 5
    s = run_alternating_offers(_offer("5"), provider, _Scripted(["4"]), Limits(deadline_round=20))
    assert s.outcome is Outcome.REJECTED
    assert "ConstraintViolation" in s.violation


def test_ao_deadline_round():
    provider = cinema_provider("P", reserve="8", protocol="AlternatingOffers")
    s = run_alternating_offers(_offer("5"), provider, _Scripted(["5"] * 10), Limits(deadline_round=3))
    assert s.outcome is Outcome.EXPIRED and s.round <= 3


def test_run_bilateral_dispatches_on_protocol():
    tr = Transcript()
    s = run_bilateral(_offer("12"), cinema_provider("P"), _Scripted([]), Limits(), transcript=tr, session_id="x")
    assert s.protocol == "CNIP" and s.session_id == "x"
    weird = cinema_provider("Q")
    weird.protocol = "Dutch"
    with pytest.raises(MarketError):
        run_bilateral(_offer(), weird, _Scripted([]), Limits(), transcript=tr, session_id="y")


def test_limits_must_be_positive():
    with pytest.raises(ValueError):
        Limits(deadline_round=0)
    assert replace(Limits(), iteration_limit=3).iteration_limit == 3
