"""One-to-many negotiation: the Iterated Contract Net coordinator.

Each iteration runs every remaining provider's own bilateral protocol,
joins the sessions at a barrier and hands the provisional agreements to
the consumer strategy. The strategy confirms some, quits, or asks for
counter templates and answers them with counteroffers for the next
iteration. Providers dropped in one iteration never come back.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping

from ..contract import AgreementDocument, fill_template
from ..errors import MarketError
from .bilateral import run_bilateral
from .engine import SessionState, open_session, step
from .messages import MsgType, NegotiationMessage, Primitive, Sender
from .ports import Decision, Limits, ProviderPort, StrategyPort
from .specs import ITERATED_CNIP, Outcome
from .transcript import Transcript

__all__ = ["MultilateralOutcome", "run_iterated_cnip", "cancel_agreement"]

COORDINATOR = "coordinator"


@dataclass
class MultilateralOutcome:
    status: str  # confirmed | quit | exhausted | iteration_limit
    agreements: list[AgreementDocument]
    iterations: int
    transcript: Transcript
    # provisional agreements collected in each iteration, in registration order
    per_iteration: list[list[AgreementDocument]] = field(default_factory=list)
    cancellations: list[AgreementDocument] = field(default_factory=list)
    provisional_at_close: list[AgreementDocument] = field(default_factory=list)
    sessions: list[SessionState] = field(default_factory=list)
    coordinator: SessionState | None = None


def cancel_agreement(provider: ProviderPort, agreement: AgreementDocument, transcript: Transcript, session_id: str) -> None:
    provider.cancel(agreement)
    transcript.event(
        "cancel",
        session_id=session_id,
        payload=agreement,
        peer=provider.provider_id,
        msg_type=MsgType.UNSIGNED.value,
        primitive=Primitive.WITHDRAW.value,
    )


class _Coordinator:
    def __init__(self, prefix: str, limits: Limits, transcript: Transcript) -> None:
        self.sid = f"{prefix}/{COORDINATOR}"
        self.transcript = transcript
        self.state = open_session(
            ITERATED_CNIP, self.sid, deadline_round=limits.iteration_limit, deadline_tick=2**62
        )

    def send(self, msg_type: MsgType, primitive: Primitive, sender: Sender) -> SessionState:
        msg = NegotiationMessage(
            msg_type, primitive, sender, self.sid, self.state.round, self.transcript.clock.tick()
        )
        self.transcript.message(msg)
        self.state, emitted = step(self.state, msg)
        for m in emitted:
            self.transcript.message(m)
        return self.state


def _dispatch(
    offers: Mapping[str, AgreementDocument],
    providers: Mapping[str, ProviderPort],
    strategy: StrategyPort,
    limits: Limits,
    transcript: Transcript,
    prefix: str,
    iteration: int,
    deterministic: bool,
) -> dict[str, SessionState]:
    order = [pid for pid in providers if pid in offers]
    buffers = {pid: transcript.fork() for pid in order}

    def run(pid: str) -> SessionState:
        return run_bilateral(
            offers[pid], providers[pid], strategy, limits,
            transcript=buffers[pid], session_id=f"{prefix}/{pid}/{iteration}",
        )

    if deterministic or len(order) < 2:
        results = [run(pid) for pid in order]
    else:
        with ThreadPoolExecutor(max_workers=len(order)) as pool:
            results = list(pool.map(run, order))
    # the barrier: merge in registration order whatever the dispatch order was
    transcript.join(*(buffers[pid] for pid in order))
    return dict(zip(order, results))


def run_iterated_cnip(
    service_offers: Mapping[str, AgreementDocument],
    providers: Mapping[str, ProviderPort],
    consumer_strategy: StrategyPort,
    limits: Limits = Limits(),
    *,
    transcript: Transcript | None = None,
    deterministic: bool = True,
    prefix: str = "icnip",
) -> MultilateralOutcome:
    """Negotiate with competing providers until confirm, quit or the iteration limit.

    ``providers`` fixes registration order; ``service_offers`` holds the
    first-iteration offer for each participating provider.
    """
    if not providers:
        raise MarketError("no providers to negotiate with")
    transcript = transcript if transcript is not None else Transcript()
    coord = _Coordinator(prefix, limits, transcript)
    out = MultilateralOutcome("quit", [], 0, transcript, coordinator=coord.state)

    current = {pid: service_offers[pid] for pid in providers if pid in service_offers}
    pool: dict[str, AgreementDocument] = {}

    def close(decision: Decision) -> None:
        keep = set(decision.ids) if decision.action == "confirm" else set()
        ordered = [pool[pid] for pid in providers if pid in pool]
        out.provisional_at_close = ordered
        for agr in ordered:
            if agr.context.agreement_id in keep:
                out.agreements.append(agr)
            else:
                cancel_agreement(providers[agr.provider_id], agr, transcript, coord.sid)
                out.cancellations.append(agr)

    while True:
        out.iterations = coord.state.round
        sessions = _dispatch(
            current, providers, consumer_strategy, limits, transcript, prefix, coord.state.round, deterministic
        )
        out.sessions.extend(sessions.values())
        fresh = {pid: s.agreement for pid, s in sessions.items() if s.outcome is Outcome.AGREED}
        out.per_iteration.append(list(fresh.values()))
        # a newer agreement from the same provider supersedes the older one
        pool.update(fresh)

        if not pool:
            coord.send(MsgType.REJECTED, Primitive.REJECT, Sender.PROVIDER)
            out.status = "exhausted"
            break
        coord.send(MsgType.ACCEPTED, Primitive.ACKNOWLEDGE, Sender.PROVIDER)

        ordered = [pool[pid] for pid in providers if pid in pool]
        decision = consumer_strategy.check_agreements(ordered, coord.state.round)
        if decision.action == "counter":
            coord.send(MsgType.REJECTED, Primitive.CALL_FOR_PROPOSAL, Sender.CONSUMER)
            if coord.state.terminal:
                out.status = "iteration_limit"
                close(Decision.quit())
                break
            kept = [pid for pid in current if sessions.get(pid) and sessions[pid].outcome is Outcome.AGREED]
            templates = {}
            for pid in kept:
                templates[pid] = providers[pid].get_template(coord.state.round)
                transcript.event(
                    "counter_template", session_id=coord.sid, round=coord.state.round,
                    payload=templates[pid], peer=pid, primitive=Primitive.CALL_FOR_PROPOSAL.value,
                )
            counters = consumer_strategy.filter_and_counter(templates, coord.state.round, previous=current)
            counters = {pid: counters[pid] for pid in providers if pid in counters and pid in templates}
            if counters:
                current = {
                    pid: fill_template(templates[pid], b, consumer_id=current[pid].context.consumer_id)
                    for pid, b in counters.items()
                }
                coord.send(MsgType.UNSIGNED, Primitive.MODIFY, Sender.CONSUMER)
                continue
            # nobody worth countering: decide on what is on the table
            coord.send(MsgType.UNSIGNED, Primitive.ACKNOWLEDGE, Sender.CONSUMER)
            decision = consumer_strategy.check_agreements(ordered, limits.iteration_limit)
            if decision.action == "counter":
                decision = Decision.quit()

        if decision.action == "confirm" and decision.ids:
            coord.send(MsgType.SIGNED, Primitive.ACCEPT, Sender.CONSUMER)
            out.status = "confirmed"
        else:
            coord.send(MsgType.REJECTED, Primitive.TERMINATE, Sender.CONSUMER)
            out.status = "quit"
            decision = Decision.quit()
        close(decision)
        break

    out.coordinator = coord.state
    return out
