"""Negotiation message vocabulary (message types, primitives, senders)."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from ..contract import AgreementDocument, Stage
from ..errors import InvalidMessage

__all__ = ["MsgType", "Primitive", "Sender", "NegotiationMessage"]


class MsgType(str, Enum):
    OFFER = "Offer"
    COUNTEROFFER = "Counteroffer"
    REJECTED = "Rejected"
    ACCEPTED = "Accepted"
    EXPIRED = "Expired"
    SINGLE_PARTY_SIGNED = "SinglePartySigned"
    SIGNED = "Signed"
    UNSIGNED = "Unsigned"


class Primitive(str, Enum):
    CALL_FOR_PROPOSAL = "CallForProposal"
    PROPOSE = "Propose"
    ACCEPT = "Accept"
    TERMINATE = "Terminate"
    REJECT = "Reject"
    ACKNOWLEDGE = "Acknowledge"
    MODIFY = "Modify"
    WITHDRAW = "Withdraw"


class Sender(str, Enum):
    CONSUMER = "consumer"
    PROVIDER = "provider"


@dataclass(frozen=True)
class NegotiationMessage:
    msg_type: MsgType
    primitive: Primitive
    sender: Sender
    session_id: str
    round: int
    tick: int
    payload: AgreementDocument | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "msg_type", MsgType(self.msg_type))
        object.__setattr__(self, "primitive", Primitive(self.primitive))
        object.__setattr__(self, "sender", Sender(self.sender))
        if self.round < 0:
            raise InvalidMessage("negative round")
        if self.msg_type in (MsgType.OFFER, MsgType.COUNTEROFFER):
            if self.payload is None or self.payload.stage is not Stage.OFFER:
                raise InvalidMessage(f"{self.msg_type.value} must carry an Offer")
        if self.msg_type is MsgType.ACCEPTED and self.primitive is Primitive.ACCEPT:
            if self.payload is None or self.payload.stage is not Stage.AGREEMENT:
                raise InvalidMessage("Accepted/Accept must carry an Agreement")
