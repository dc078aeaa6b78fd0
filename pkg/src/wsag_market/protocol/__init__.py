"""Negotiation protocols as explicit state machines."""

from .bilateral import run_alternating_offers, run_bilateral, run_cnip, template_position
from .engine import SessionState, alphabet, expire, open_session, step
from .messages import MsgType, NegotiationMessage, Primitive, Sender
from .multilateral import MultilateralOutcome, cancel_agreement, run_iterated_cnip
from .ports import Decision, Limits, OfferHistory, ProviderPort, ProviderReply, ReplyKind, StrategyPort
from .specs import ALTERNATING_OFFERS, CNIP, ITERATED_CNIP, SPECS, Outcome, ProtocolSpec, Transition, reachable_states
from .transcript import Clock, Transcript, TranscriptRecord

__all__ = [
    "ALTERNATING_OFFERS",
    "CNIP",
    "ITERATED_CNIP",
    "SPECS",
    "Clock",
    "Decision",
    "Limits",
    "MsgType",
    "MultilateralOutcome",
    "NegotiationMessage",
    "OfferHistory",
    "Outcome",
    "Primitive",
    "ProtocolSpec",
    "ProviderPort",
    "ProviderReply",
    "ReplyKind",
    "Sender",
    "SessionState",
    "StrategyPort",
    "Transcript",
    "TranscriptRecord",
    "Transition",
    "alphabet",
    "cancel_agreement",
    "expire",
    "open_session",
    "reachable_states",
    "run_alternating_offers",
    "run_bilateral",
    "run_cnip",
    "run_iterated_cnip",
    "step",
    "template_position",
]
