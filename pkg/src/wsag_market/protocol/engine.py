"""The state-machine engine that drives one negotiation session."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

from ..contract import AgreementDocument, Stage
from ..errors import DeadlineExceeded, IllegalTransition, InvalidMessage, SessionClosed
from .messages import MsgType, NegotiationMessage, Primitive, Sender
from .specs import SPECS, Outcome, ProtocolSpec, Transition

__all__ = ["SessionState", "GUARDS", "open_session", "step", "expire"]


@dataclass(frozen=True)
class SessionState:
    session_id: str
    protocol: str
    phase: str
    round: int
    deadline_round: int
    deadline_tick: int
    last_offer: AgreementDocument | None = None
    outcome: Outcome = Outcome.PENDING
    agreement: AgreementDocument | None = None
    # signing is bookkeeping only
    signature: str = "Unsigned"
    violation: str = ""

    @property
    def spec(self) -> ProtocolSpec:
        return SPECS[self.protocol]

    @property
    def terminal(self) -> bool:
        return self.phase in self.spec.terminal


GUARDS: dict[str, Callable[[SessionState, NegotiationMessage], bool]] = {
    "before_deadline": lambda s, m: s.round < s.deadline_round,
    "at_deadline": lambda s, m: s.round >= s.deadline_round,
}


def open_session(
    spec: ProtocolSpec, session_id: str, *, deadline_round: int, deadline_tick: int
) -> SessionState:
    return SessionState(
        session_id=session_id,
        protocol=spec.name,
        phase=spec.initial,
        round=spec.initial_round,
        deadline_round=deadline_round,
        deadline_tick=deadline_tick,
    )


def _take(
    state: SessionState, t: Transition, tick: int, payload: AgreementDocument | None
) -> tuple[SessionState, list[NegotiationMessage]]:
    new = replace(
        state,
        phase=t.target,
        round=state.round + (1 if t.advance_round else 0),
        outcome=t.outcome,
    )
    if payload is not None and payload.stage is Stage.OFFER:
        new = replace(new, last_offer=payload)
    if t.outcome is Outcome.AGREED:
        new = replace(new, agreement=payload if payload is not None else state.agreement, signature="Signed")
    out_payload = new.agreement if t.outcome is Outcome.AGREED else None
    emitted = [
        NegotiationMessage(mt, prim, snd, state.session_id, new.round, tick + i + 1, out_payload)
        for i, (mt, prim, snd) in enumerate(t.emits)
    ]
    return new, emitted


def expire(state: SessionState, tick: int) -> tuple[SessionState, list[NegotiationMessage]]:
    """Advance the clock past the deadline without any message arriving."""
    if state.terminal:
        raise SessionClosed(state.session_id)
    for t in state.spec.outgoing(state.phase):
        if t.is_timeout:
            return _take(state, t, tick, None)
    raise DeadlineExceeded(f"{state.protocol} has no timeout in phase {state.phase}")


def _check_payload(state: SessionState, msg: NegotiationMessage) -> None:
    if msg.primitive is Primitive.ACCEPT and msg.payload is not None and msg.payload.stage is Stage.AGREEMENT:
        # only the offer currently on the table can be accepted
        if state.last_offer is None or dict(msg.payload.bindings) != dict(state.last_offer.bindings):
            raise InvalidMessage("agreement does not match the current offer")


def step(state: SessionState, msg: NegotiationMessage) -> tuple[SessionState, list[NegotiationMessage]]:
    """Apply one incoming message to a session.

    Returns the successor state and the messages the engine emits in
    response. A message stamped after the session deadline expires the
    session instead of being applied.
    """
    if state.terminal:
        raise SessionClosed(state.session_id)
    if msg.session_id != state.session_id:
        raise InvalidMessage(f"message for {msg.session_id} sent to {state.session_id}")
    if msg.tick > state.deadline_tick:
        return expire(state, msg.tick)
    for t in state.spec.outgoing(state.phase):
        if t.is_timeout or t.trigger != msg.primitive or t.sender != msg.sender:
            continue
        if t.msg_types and msg.msg_type not in t.msg_types:
            continue
        if t.guard is not None and not GUARDS[t.guard](state, msg):
            continue
        _check_payload(state, msg)
        return _take(state, t, msg.tick, msg.payload)
    raise IllegalTransition(state.phase, msg.primitive.value, msg.sender.value)


def alphabet(spec: ProtocolSpec) -> list[tuple[MsgType, Primitive, Sender]]:
    """Every (type, primitive, sender) triple some transition of ``spec`` accepts."""
    out = []
    for t in spec.transitions:
        if t.is_timeout:
            continue
        for mt in sorted(t.msg_types, key=lambda m: m.value):
            key = (mt, t.trigger, t.sender)
            if key not in out:
                out.append(key)
    return out
