"""Protocol definitions as data.

A :class:`ProtocolSpec` lists the states and the transitions of one
negotiation protocol. The engine in :mod:`.engine` interprets it; nothing
here executes anything. Three protocols ship with the package: the
Contract Net Interaction Protocol (take it or leave it), Alternating
Offers, and the coordinator of the Iterated Contract Net.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from ..errors import InvalidProtocolSpec
from .messages import MsgType, Primitive, Sender

__all__ = [
    "Outcome",
    "TIMEOUT",
    "Transition",
    "ProtocolSpec",
    "CNIP",
    "ALTERNATING_OFFERS",
    "ITERATED_CNIP",
    "SPECS",
    "reachable_states",
]

TIMEOUT = "timeout"


class Outcome(str, Enum):
    PENDING = "pending"
    AGREED = "agreed"
    REJECTED = "rejected"
    EXPIRED = "expired"
    WITHDRAWN = "withdrawn"


@dataclass(frozen=True)
class Transition:
    source: str
    # a primitive, or TIMEOUT for the clock running past the deadline
    trigger: Primitive | str
    sender: Sender | None
    target: str
    msg_types: frozenset[MsgType] = frozenset()
    guard: str | None = None
    advance_round: bool = False
    outcome: Outcome = Outcome.PENDING
    # (msg_type, primitive, sender) the engine emits when taking the edge
    emits: tuple[tuple[MsgType, Primitive, Sender], ...] = ()

    @property
    def is_timeout(self) -> bool:
        return self.trigger == TIMEOUT


@dataclass(frozen=True)
class ProtocolSpec:
    name: str
    states: frozenset[str]
    initial: str
    terminal: frozenset[str]
    transitions: tuple[Transition, ...]
    initial_round: int = 0
    description: dict[str, str] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if self.initial not in self.states:
            raise InvalidProtocolSpec(f"{self.name}: initial state {self.initial} unknown")
        if not self.terminal <= self.states:
            raise InvalidProtocolSpec(f"{self.name}: unknown terminal states")
        for t in self.transitions:
            if t.source not in self.states or t.target not in self.states:
                raise InvalidProtocolSpec(f"{self.name}: {t.source}->{t.target} uses an unknown state")
            if t.source in self.terminal:
                raise InvalidProtocolSpec(f"{self.name}: terminal state {t.source} has an outgoing edge")
            if (t.target in self.terminal) != (t.outcome is not Outcome.PENDING):
                raise InvalidProtocolSpec(f"{self.name}: {t.source}->{t.target} outcome mismatch")

    def outgoing(self, state: str) -> list[Transition]:
        return [t for t in self.transitions if t.source == state]


def reachable_states(spec: ProtocolSpec, max_depth: int | None = None) -> set[str]:
    """Breadth-first exploration of the transition graph, ignoring guards."""
    seen = {spec.initial}
    queue = deque([(spec.initial, 0)])
    while queue:
        state, depth = queue.popleft()
        if max_depth is not None and depth >= max_depth:
            continue
        for t in spec.outgoing(state):
            if t.target not in seen:
                seen.add(t.target)
                queue.append((t.target, depth + 1))
    return seen


C, P = Sender.CONSUMER, Sender.PROVIDER
_ACK = ((MsgType.ACCEPTED, Primitive.ACKNOWLEDGE, C),)
_EXPIRE = ((MsgType.EXPIRED, Primitive.TERMINATE, C),)


def _timeouts(*states: str) -> tuple[Transition, ...]:
    return tuple(
        Transition(s, TIMEOUT, None, "Expired", outcome=Outcome.EXPIRED, emits=_EXPIRE) for s in states
    )


CNIP = ProtocolSpec(
    name="CNIP",
    states=frozenset({"Init", "AwaitingDecision", "Agreed", "Rejected", "Expired"}),
    initial="Init",
    terminal=frozenset({"Agreed", "Rejected", "Expired"}),
    transitions=(
        Transition("Init", Primitive.PROPOSE, C, "AwaitingDecision", frozenset({MsgType.OFFER}), advance_round=True),
        Transition(
            "AwaitingDecision", Primitive.ACCEPT, P, "Agreed", frozenset({MsgType.ACCEPTED}),
            outcome=Outcome.AGREED, emits=_ACK,
        ),
        Transition(
            "AwaitingDecision", Primitive.REJECT, P, "Rejected", frozenset({MsgType.REJECTED}),
            outcome=Outcome.REJECTED,
        ),
    )
    + _timeouts("Init", "AwaitingDecision"),
)

ALTERNATING_OFFERS = ProtocolSpec(
    name="AlternatingOffers",
    states=frozenset({"Init", "ConsumerTurn", "ProviderTurn", "Agreed", "Rejected", "Expired"}),
    initial="Init",
    terminal=frozenset({"Agreed", "Rejected", "Expired"}),
    transitions=(
        Transition("Init", Primitive.PROPOSE, C, "ProviderTurn", frozenset({MsgType.OFFER}), advance_round=True),
        Transition(
            "ProviderTurn", Primitive.ACCEPT, P, "Agreed", frozenset({MsgType.ACCEPTED}),
            outcome=Outcome.AGREED, emits=_ACK,
        ),
        Transition(
            "ProviderTurn", Primitive.REJECT, P, "Rejected", frozenset({MsgType.REJECTED}),
            outcome=Outcome.REJECTED,
        ),
        # reject with a counter template
        Transition(
            "ProviderTurn", Primitive.MODIFY, P, "ConsumerTurn", frozenset({MsgType.REJECTED}),
            guard="before_deadline",
        ),
        Transition(
            "ProviderTurn", Primitive.MODIFY, P, "Expired", frozenset({MsgType.REJECTED}),
            guard="at_deadline", outcome=Outcome.EXPIRED, emits=_EXPIRE,
        ),
        Transition(
            "ConsumerTurn", Primitive.PROPOSE, C, "ProviderTurn", frozenset({MsgType.COUNTEROFFER}),
            advance_round=True,
        ),
        Transition(
            "ConsumerTurn", Primitive.WITHDRAW, C, "Rejected", frozenset({MsgType.REJECTED}),
            outcome=Outcome.WITHDRAWN,
        ),
        # consumer aborts after producing an inadmissible counteroffer
        Transition(
            "ConsumerTurn", Primitive.TERMINATE, C, "Rejected", frozenset({MsgType.REJECTED}),
            outcome=Outcome.REJECTED,
        ),
    )
    + _timeouts("Init", "ProviderTurn", "ConsumerTurn"),
)

ITERATED_CNIP = ProtocolSpec(
    name="IteratedCNIP",
    states=frozenset({"Dispatch", "CheckAgreements", "CounterTemplates", "Confirmed", "Quit", "Exhausted"}),
    initial="Dispatch",
    terminal=frozenset({"Confirmed", "Quit", "Exhausted"}),
    initial_round=1,
    transitions=(
        # iteration barrier: at least one provisional agreement
        Transition("Dispatch", Primitive.ACKNOWLEDGE, P, "CheckAgreements", frozenset({MsgType.ACCEPTED})),
        # iteration barrier: nothing agreed, nobody left
        Transition(
            "Dispatch", Primitive.REJECT, P, "Exhausted", frozenset({MsgType.REJECTED}),
            outcome=Outcome.REJECTED,
        ),
        Transition(
            "CheckAgreements", Primitive.ACCEPT, C, "Confirmed", frozenset({MsgType.SIGNED}),
            outcome=Outcome.AGREED,
        ),
        Transition(
            "CheckAgreements", Primitive.TERMINATE, C, "Quit", frozenset({MsgType.REJECTED}),
            outcome=Outcome.WITHDRAWN,
        ),
        # request counter templates
        Transition(
            "CheckAgreements", Primitive.CALL_FOR_PROPOSAL, C, "CounterTemplates",
            frozenset({MsgType.REJECTED}), guard="before_deadline",
        ),
        Transition(
            "CheckAgreements", Primitive.CALL_FOR_PROPOSAL, C, "Quit",
            frozenset({MsgType.REJECTED}), guard="at_deadline", outcome=Outcome.EXPIRED,
        ),
        # filtered templates turned into counteroffers
        Transition(
            "CounterTemplates", Primitive.MODIFY, C, "Dispatch", frozenset({MsgType.UNSIGNED}),
            advance_round=True,
        ),
        # no provider left worth countering
        Transition("CounterTemplates", Primitive.ACKNOWLEDGE, C, "CheckAgreements", frozenset({MsgType.UNSIGNED})),
    ),
)

SPECS = {s.name: s for s in (CNIP, ALTERNATING_OFFERS, ITERATED_CNIP)}
