"""Exception hierarchy shared by every layer of the package."""

from __future__ import annotations


class MarketError(Exception):
    """Base class for all errors raised by :mod:`wsag_market`."""


class TermError(MarketError):
    """An error tied to one term id."""

    def __init__(self, term_id: str, detail: str = "") -> None:
        self.term_id = term_id
        self.detail = detail
        msg = term_id if not detail else f"{term_id}: {detail}"
        super().__init__(msg)


# contract model
class MissingProperty(TermError):
    pass


class InvalidRange(MarketError):
    pass


class ConstraintViolation(TermError):
    pass


class MissingBinding(TermError):
    pass


class UnknownTerm(TermError):
    pass


class DomainMismatch(MarketError):
    pass


class MissingObservation(TermError):
    pass


class InvalidDocument(MarketError):
    """A document breaks one of its structural invariants."""


class StageError(MarketError):
    """An operation received a document at the wrong stage."""


# aggregation
class ConflictingDuplicate(TermError):
    pass


# protocol engine
class IllegalTransition(MarketError):
    def __init__(self, phase: str, primitive: str, sender: str = "") -> None:
        self.phase = phase
        self.primitive = primitive
        self.sender = sender
        super().__init__(f"{primitive} from {sender or '?'} not allowed in phase {phase}")


class SessionClosed(MarketError):
    pass


class DeadlineExceeded(MarketError):
    pass


class InvalidMessage(MarketError):
    pass


class InvalidProtocolSpec(MarketError):
    pass


# strategy
class UnscoredTerm(TermError):
    pass


class EmptyPermissibleRange(TermError):
    pass


# marketplace
class DuplicateProviderId(MarketError):
    pass


class UnknownOperation(MarketError):
    pass


class UnknownDomain(MarketError):
    pass


class NoTemplatesSurviveFilter(MarketError):
    pass


class SelectionEmpty(MarketError):
    pass


class NegotiationFailed(MarketError):
    pass


class ExecutionRejected(MarketError):
    pass


class NoShowsFound(MarketError):
    pass


class BookingRejected(ExecutionRejected):
    pass


# simulation harness
class ScenarioInvalid(MarketError):
    def __init__(self, diagnostics: dict[str, str]) -> None:
        self.diagnostics = dict(diagnostics)
        lines = "; ".join(f"{k}: {v}" for k, v in sorted(self.diagnostics.items()))
        super().__init__(f"invalid scenario ({lines})")


class GridTooCoarse(MarketError):
    pass


class NativeFailure(MarketError):
    pass
