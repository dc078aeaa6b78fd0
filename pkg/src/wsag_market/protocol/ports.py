"""Interfaces the protocol runners talk to.

Providers and consumer strategies are plugged in through two structural
protocols, :class:`ProviderPort` and :class:`StrategyPort`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping, Protocol, Sequence, runtime_checkable

from ..contract import AgreementDocument, TermValue

__all__ = [
    "ReplyKind",
    "ProviderReply",
    "ProviderPort",
    "Decision",
    "OfferHistory",
    "StrategyPort",
    "Limits",
]


class ReplyKind(str, Enum):
    ACCEPT = "accept"
    REJECT = "reject"
    COUNTER = "counter_template"


@dataclass(frozen=True)
class ProviderReply:
    kind: ReplyKind
    document: AgreementDocument | None = None
    reason: str = ""

    @classmethod
    def accept(cls, agreement: AgreementDocument) -> "ProviderReply":
        return cls(ReplyKind.ACCEPT, agreement)

    @classmethod
    def reject(cls, reason: str = "") -> "ProviderReply":
        return cls(ReplyKind.REJECT, None, reason)

    @classmethod
    def counter(cls, template: AgreementDocument) -> "ProviderReply":
        return cls(ReplyKind.COUNTER, template)


@runtime_checkable
class ProviderPort(Protocol):
    provider_id: str
    # "CNIP" or "AlternatingOffers"
    protocol: str

    def get_template(self, round: int = 0) -> AgreementDocument:
        """Current template; ``round > 0`` asks for a counter template."""

    def handle_offer(self, offer: AgreementDocument, round: int) -> ProviderReply | None:
        """``None`` means the provider stays silent."""

    def cancel(self, agreement: AgreementDocument) -> None: ...

    def execute(self, agreement: AgreementDocument, inputs: Mapping[str, Any]) -> dict[str, TermValue]: ...


@dataclass(frozen=True)
class Decision:
    action: str  # accept | counter | quit | confirm
    bindings: Mapping[str, TermValue] | None = None
    ids: tuple[str, ...] = ()

    @classmethod
    def accept(cls, bindings: Mapping[str, TermValue] | None = None) -> "Decision":
        return cls("accept", bindings)

    @classmethod
    def counter(cls, bindings: Mapping[str, TermValue] | None = None) -> "Decision":
        return cls("counter", bindings)

    @classmethod
    def quit(cls) -> "Decision":
        return cls("quit")

    @classmethod
    def confirm(cls, ids: Sequence[str]) -> "Decision":
        return cls("confirm", None, tuple(ids))


@dataclass
class OfferHistory:
    """What one party has seen during a session."""

    own: list[Mapping[str, TermValue]] = field(default_factory=list)
    opponent: list[Mapping[str, TermValue]] = field(default_factory=list)
    templates: list[AgreementDocument] = field(default_factory=list)

    def own_values(self, term_id: str) -> list[TermValue]:
        return [b[term_id] for b in self.own if term_id in b]

    def opponent_values(self, term_id: str) -> list[TermValue]:
        return [b[term_id] for b in self.opponent if term_id in b]

    @property
    def last_template(self) -> AgreementDocument | None:
        return self.templates[-1] if self.templates else None


@runtime_checkable
class StrategyPort(Protocol):
    def decide(self, round: int, history: OfferHistory) -> Decision:
        """React to a counter template: accept, counter or quit."""

    def check_agreements(self, agreements: Sequence[AgreementDocument], round: int) -> Decision:
        """confirm(ids), counter or quit over provisional agreements."""

    def filter_and_counter(
        self,
        templates: Mapping[str, AgreementDocument],
        round: int,
        previous: Mapping[str, AgreementDocument] | None = None,
    ) -> dict[str, dict[str, TermValue]]:
        """Counteroffer bindings for the providers kept in the next iteration."""


@dataclass(frozen=True)
class Limits:
    deadline_round: int = 10
    # ticks a bilateral session may last, counted from its first message
    deadline_ticks: int = 100
    iteration_limit: int = 10

    def __post_init__(self) -> None:
        if self.deadline_round < 1 or self.deadline_ticks < 1 or self.iteration_limit < 1:
            raise ValueError("limits must be positive")
