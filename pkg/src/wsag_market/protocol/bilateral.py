"""One-to-one negotiation: Contract Net and Alternating Offers."""

from __future__ import annotations

from dataclasses import replace
from typing import Mapping

from ..contract import AgreementDocument, Level, Range, Stage, TermValue, fill_template
from ..errors import ConstraintViolation, MarketError, MissingBinding, StageError, UnknownTerm
from .engine import SessionState, expire, open_session, step
from .messages import MsgType, NegotiationMessage, Primitive, Sender
from .ports import Limits, OfferHistory, ProviderPort, ProviderReply, ReplyKind, StrategyPort
from .specs import ALTERNATING_OFFERS, CNIP
from .transcript import Transcript

__all__ = ["run_cnip", "run_alternating_offers", "run_bilateral", "template_position"]

C, P = Sender.CONSUMER, Sender.PROVIDER


class _Session:
    """Glue between the engine, the clock and the transcript."""

    def __init__(self, state: SessionState, transcript: Transcript, peer: str) -> None:
        self.state = state
        self.transcript = transcript
        self.peer = peer

    def send(
        self,
        msg_type: MsgType,
        primitive: Primitive,
        sender: Sender,
        payload: AgreementDocument | None = None,
    ) -> SessionState:
        msg = NegotiationMessage(
            msg_type, primitive, sender, self.state.session_id, self.state.round,
            self.transcript.clock.tick(), payload,
        )
        self.transcript.message(msg, peer=self.peer)
        self.state, emitted = step(self.state, msg)
        for m in emitted:
            self.transcript.message(m, peer=self.peer)
        return self.state

    def timeout(self) -> SessionState:
        # the expiry notice is stamped on the first tick past the deadline
        self.transcript.clock.advance_to(self.state.deadline_tick)
        self.state, emitted = expire(self.state, self.transcript.clock.now)
        for m in emitted:
            self.transcript.message(m, peer=self.peer)
        return self.state


def _open(spec, provider: ProviderPort, limits: Limits, transcript: Transcript | None, session_id: str | None):
    transcript = transcript if transcript is not None else Transcript()
    sid = session_id or f"{spec.name}/{provider.provider_id}"
    state = open_session(
        spec, sid,
        deadline_round=limits.deadline_round,
        deadline_tick=transcript.clock.now + limits.deadline_ticks,
    )
    return _Session(state, transcript, provider.provider_id)


def _check_offer(offer: AgreementDocument) -> None:
    if offer.stage is not Stage.OFFER or offer.level is not Level.SERVICE:
        raise StageError("bilateral negotiation starts from a service-level Offer")


def _reply_message(session: _Session, reply: ProviderReply | None, *, allow_counter: bool) -> SessionState:
    if reply is None:
        return session.timeout()
    if reply.kind is ReplyKind.ACCEPT:
        return session.send(MsgType.ACCEPTED, Primitive.ACCEPT, P, reply.document)
    if reply.kind is ReplyKind.COUNTER and allow_counter:
        return session.send(MsgType.REJECTED, Primitive.MODIFY, P, reply.document)
    return session.send(MsgType.REJECTED, Primitive.REJECT, P)


def run_cnip(
    offer: AgreementDocument,
    provider: ProviderPort,
    limits: Limits = Limits(),
    *,
    transcript: Transcript | None = None,
    session_id: str | None = None,
) -> SessionState:
    """Take it or leave it: one offer, one answer, no counteroffers.

    A provider answering with a counter template is treated as rejecting.
    """
    _check_offer(offer)
    s = _open(CNIP, provider, limits, transcript, session_id)
    s.send(MsgType.OFFER, Primitive.PROPOSE, C, offer)
    if s.state.terminal:
        return s.state
    return _reply_message(s, provider.handle_offer(offer, s.state.round), allow_counter=False)


def template_position(
    template: AgreementDocument, own_last: Mapping[str, TermValue]
) -> dict[str, TermValue]:
    """Where a counter template puts the opponent, term by term.

    For a range constraint this is the bound farthest from our last value.
    """
    pos: dict[str, TermValue] = {}
    for c in template.constraints:
        if not isinstance(c.allowed, Range) or c.term_id not in own_last:
            continue
        mine = own_last[c.term_id]
        lo, hi = c.allowed.lo, c.allowed.hi
        pos[c.term_id] = hi if abs(hi - mine) >= abs(mine - lo) else lo
    return pos


def run_alternating_offers(
    initial_offer: AgreementDocument,
    provider: ProviderPort,
    consumer_strategy: StrategyPort,
    limits: Limits = Limits(),
    *,
    transcript: Transcript | None = None,
    session_id: str | None = None,
    history: OfferHistory | None = None,
) -> SessionState:
    """Bargain with counteroffers constrained by the provider's counter templates."""
    _check_offer(initial_offer)
    s = _open(ALTERNATING_OFFERS, provider, limits, transcript, session_id)
    history = history if history is not None else OfferHistory()
    history.own.append(dict(initial_offer.bindings))

    offer = initial_offer
    s.send(MsgType.OFFER, Primitive.PROPOSE, C, offer)
    while not s.state.terminal:
        reply = provider.handle_offer(offer, s.state.round)
        _reply_message(s, reply, allow_counter=True)
        if s.state.terminal:
            break
        counter_template = reply.document
        history.templates.append(counter_template)
        history.opponent.append(template_position(counter_template, history.own[-1]))

        decision = consumer_strategy.decide(s.state.round, history)
        if decision.action == "quit" or decision.bindings is None:
            s.send(MsgType.REJECTED, Primitive.WITHDRAW, C)
            break
        try:
            offer = fill_template(counter_template, decision.bindings, consumer_id=offer.context.consumer_id)
        except (ConstraintViolation, MissingBinding, UnknownTerm) as exc:
            s.send(MsgType.REJECTED, Primitive.TERMINATE, C)
            s.state = replace(s.state, violation=f"{type(exc).__name__}: {exc}")
            break
        history.own.append(dict(offer.bindings))
        s.send(MsgType.COUNTEROFFER, Primitive.PROPOSE, C, offer)
    return s.state


def run_bilateral(
    offer: AgreementDocument,
    provider: ProviderPort,
    strategy: StrategyPort,
    limits: Limits,
    *,
    transcript: Transcript,
    session_id: str,
) -> SessionState:
    """Run whichever bilateral protocol the provider speaks."""
    if provider.protocol == ALTERNATING_OFFERS.name:
        return run_alternating_offers(offer, provider, strategy, limits, transcript=transcript, session_id=session_id)
    if provider.protocol == CNIP.name:
        return run_cnip(offer, provider, limits, transcript=transcript, session_id=session_id)
    raise MarketError(f"unknown bilateral protocol {provider.protocol!r}")
