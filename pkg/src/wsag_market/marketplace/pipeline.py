"""The consumer's domain pipeline: COL, SEL, NEG, USAGE, domain agreement.

Marker events for each phase go into the transcript in the order the
phases start, so phase order can be checked from the log alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Callable, Mapping, Sequence

from ..aggregation import aggregate_templates, filter_templates, service_offer
from ..contract import (
    SEPARATOR,
    AgreementContext,
    AgreementDocument,
    GuaranteeOutcome,
    Level,
    Stage,
    TermValue,
    evaluate_guarantees,
    validate_offer,
)
from ..errors import (
    ExecutionRejected,
    InvalidDocument,
    MarketError,
    NegotiationFailed,
    NoShowsFound,
    NoTemplatesSurviveFilter,
    SelectionEmpty,
)
from ..protocol.multilateral import MultilateralOutcome, run_iterated_cnip
from ..protocol.ports import Limits, StrategyPort
from .engine import ExecutionEngine
from .store import AgreementStore

__all__ = [
    "PipelineResult",
    "SelectionCallback",
    "strategy_selector",
    "build_domain_agreement",
    "run_pipeline",
    "search_and_book",
    "book",
]

PHASES = ("COL", "SEL", "NEG", "USAGE")

# (aggregated template, [{"provider_id", "template"}]) -> ordered provider ids
SelectionCallback = Callable[[AgreementDocument, Sequence[Mapping[str, Any]]], Sequence[str]]


@dataclass
class PipelineResult:
    domain_agreement: AgreementDocument
    service_agreement: AgreementDocument
    results: dict[str, TermValue]
    outcomes: list[GuaranteeOutcome]
    negotiation: MultilateralOutcome | None = None
    shows: dict[str, list] = field(default_factory=dict)
    selected: list[str] = field(default_factory=list)


def strategy_selector(strategy: StrategyPort, domain_offer: AgreementDocument) -> SelectionCallback:
    """Keep every template whose supplemented offer the strategy can score."""

    def select(aggregate: AgreementDocument, meta: Sequence[Mapping[str, Any]]) -> list[str]:
        keep = []
        for m in meta:
            offer = service_offer(m["template"], domain_offer)
            score = getattr(strategy, "score", None)
            try:
                if score is not None:
                    score(offer)
            except MarketError:
                continue
            keep.append(m["provider_id"])
        return keep

    return select


def build_domain_agreement(
    domain_offer: AgreementDocument,
    service_agreement: AgreementDocument,
    results: Mapping[str, TermValue],
    *,
    created: int = 0,
) -> AgreementDocument:
    """Domain offer context plus the winning service agreement and its results.

    The service agreement is embedded under ``<provider>.<term>`` ids; the
    unprefixed terms show the agreed values and the observed outputs.
    """
    pid = service_agreement.provider_id
    terms = list(domain_offer.terms)
    known = {t.id for t in terms}
    bindings: dict[str, TermValue] = dict(domain_offer.bindings)
    for k, v in service_agreement.bindings.items():
        if k in known:
            bindings[k] = v
    for k, v in results.items():
        t = domain_offer.term(k)
        if t is not None:
            bindings[k] = t.coerce(v)
    pre = f"{pid}{SEPARATOR}"
    terms += [replace(t, id=pre + t.id) for t in service_agreement.terms]
    bindings.update({pre + k: v for k, v in service_agreement.bindings.items()})
    guarantees = tuple(replace(g, term_id=pre + g.term_id) for g in service_agreement.guarantees)
    ctx = AgreementContext(
        consumer_id=domain_offer.context.consumer_id or service_agreement.context.consumer_id,
        provider_id=pid,
        domain_id=domain_offer.domain_id,
        expiry=min(domain_offer.context.expiry, service_agreement.context.expiry),
        agreement_id=service_agreement.context.agreement_id,
        created=created,
    )
    return AgreementDocument(Stage.AGREEMENT, Level.DOMAIN, ctx, tuple(terms), (), guarantees, bindings)


class _Run:
    """State shared by the callbacks of one pipeline run."""

    def __init__(self, engine, strategy, domain_offer, limits, deterministic, templates):
        self.engine = engine
        self.strategy = strategy
        self.domain_offer = domain_offer
        self.limits = limits
        self.deterministic = deterministic
        self.templates: dict[str, AgreementDocument] = templates
        self.negotiation: MultilateralOutcome | None = None
        self.shows: dict[str, list] = {}

    @property
    def transcript(self):
        return self.engine.transcript

    def marker(self, phase: str) -> None:
        self.transcript.event(phase, session_id=self.engine.session_id)

    def _negotiate(self, targets: Sequence[str], extras: Mapping[str, Mapping[str, TermValue]]) -> AgreementDocument:
        self.marker("NEG")
        repo, did = self.engine.repository, self.engine.domain_id
        offers = {
            pid: service_offer(self.templates[pid], self.domain_offer, extras.get(pid)) for pid in targets
        }
        ports = {pid: repo.port(did, pid) for pid in targets}
        out = run_iterated_cnip(
            offers, ports, self.strategy, self.limits,
            transcript=self.transcript, deterministic=self.deterministic,
        )
        self.negotiation = out
        if out.status != "confirmed" or not out.agreements:
            raise NegotiationFailed(f"negotiation ended {out.status} after {out.iterations} iterations")
        return out.agreements[0]

    # callbacks -----------------------------------------------------------

    def negotiate(self, ctx: dict) -> AgreementDocument:
        show_id = ctx.get("show_id") or self.domain_offer.bindings.get("show_id")
        targets = [p for p in ctx["providers"] if p in self.templates]
        extras: dict[str, dict[str, TermValue]] = {}
        if show_id:
            # a show reference: negotiate with its owner only
            shows = ctx.get("shows") or self.engine.run("Search", ctx)
            owners = [p for p in targets if any(_show_id(s) == show_id for s in shows.get(p) or ())]
            if not owners:
                raise NoShowsFound(f"no provider offers show {show_id}")
            targets = owners[:1]
            extras = {targets[0]: {"show_id": show_id}}
        return self._negotiate(targets, extras)

    def negotiate_shows(self, ctx: dict) -> AgreementDocument:
        shows = ctx.get("shows") or {}
        self.shows = {p: list(v or ()) for p, v in shows.items()}
        picked = {p: v[0] for p, v in self.shows.items() if v and p in self.templates}
        if not picked:
            raise NoShowsFound(f"no show of {ctx.get('movie_title')!r} found")
        targets = [p for p in ctx["providers"] if p in picked]
        return self._negotiate(targets, {p: {"show_id": _show_id(s)} for p, s in picked.items()})

    def authorize(self, ctx: dict) -> list[str]:
        agr = ctx.get("agreement")
        if not isinstance(agr, AgreementDocument) or agr.stage is not Stage.AGREEMENT:
            raise ExecutionRejected("usage needs a service agreement")
        if agr.provider_id not in self.engine.repository.providers(self.engine.domain_id):
            raise ExecutionRejected(f"{agr.provider_id} is not registered")
        self.marker("USAGE")
        return [agr.provider_id]


def _show_id(show: Any) -> str:
    return show["show_id"] if isinstance(show, Mapping) else show.show_id


def _bind(engine: ExecutionEngine, run: _Run) -> None:
    engine.callbacks.update(
        negotiate=run.negotiate, negotiate_shows=run.negotiate_shows, authorize=run.authorize
    )
    for k, fn in engine.repository.domain(engine.domain_id).transforms.items():
        engine.transforms.setdefault(k, fn)


def _finish(
    engine: ExecutionEngine,
    run: _Run,
    ctx: dict,
    results: Mapping[str, TermValue],
    store: AgreementStore | None,
) -> PipelineResult:
    agreement = ctx["agreement"]
    outcomes = evaluate_guarantees(agreement, results)
    dom = build_domain_agreement(run.domain_offer, agreement, results, created=engine.transcript.clock.now)
    engine.transcript.event("domain_agreement", session_id=engine.session_id, payload=dom, peer=dom.provider_id)
    if store is not None:
        store.save(dom, tick=engine.transcript.clock.now, results=results, outcomes=outcomes)
    return PipelineResult(dom, agreement, dict(results), outcomes, run.negotiation, run.shows, list(ctx.get("providers", ())))


def run_pipeline(
    domain_id: str,
    class_op_id: str,
    domain_offer: AgreementDocument,
    selector: SelectionCallback | None,
    strategy: StrategyPort,
    engine: ExecutionEngine,
    *,
    store: AgreementStore | None = None,
    limits: Limits = Limits(),
    deterministic: bool = True,
    inputs: Mapping[str, Any] | None = None,
) -> PipelineResult:
    """Run one class-level operation through all four phases."""
    if engine.domain_id != domain_id:
        raise ValueError(f"engine is bound to {engine.domain_id}, not {domain_id}")
    if domain_offer.stage is not Stage.OFFER or domain_offer.level is not Level.DOMAIN:
        raise InvalidDocument("run_pipeline needs a domain-level Offer")
    repo = engine.repository
    op = repo.fetch_operation(domain_id, class_op_id)

    run = _Run(engine, strategy, domain_offer, limits, deterministic, {})
    run.marker("COL")
    collected = [(pid, repo.port(domain_id, pid).get_template()) for pid in repo.providers(domain_id)]
    survivors = filter_templates([t for _, t in collected], domain_offer)
    if not survivors:
        raise NoTemplatesSurviveFilter(f"no {domain_id} template admits the domain offer")
    aggregate = aggregate_templates(survivors)
    report = validate_offer(aggregate, domain_offer)
    if not report.ok:
        raise InvalidDocument(f"domain offer not admissible against the domain template: {list(report)}")

    run.marker("SEL")
    selector = selector or strategy_selector(strategy, domain_offer)
    meta = [{"provider_id": t.provider_id, "template": t} for t in survivors]
    surviving = {t.provider_id: t for t in survivors}
    chosen = [p for p in selector(aggregate, meta) if p in surviving]
    if not chosen:
        raise SelectionEmpty("the selector kept no template")
    run.templates = {p: surviving[p] for p in chosen}

    _bind(engine, run)
    ctx: dict[str, Any] = {"domain_offer": domain_offer, "providers": chosen}
    ctx.update(inputs or {})
    results = engine.run(op.id, ctx)
    return _finish(engine, run, ctx, results, store)


def search_and_book(
    domain_offer: AgreementDocument,
    strategy: StrategyPort,
    engine: ExecutionEngine,
    *,
    selector: SelectionCallback | None = None,
    store: AgreementStore | None = None,
    limits: Limits = Limits(),
    deterministic: bool = True,
) -> PipelineResult:
    """Search shows, negotiate every one, keep the best, cancel the rest, book it."""
    if "movie_title" not in domain_offer.bindings:
        raise InvalidDocument("search and book needs a movie title")
    return run_pipeline(
        engine.domain_id, "SearchAndBook", domain_offer, selector, strategy, engine,
        store=store, limits=limits, deterministic=deterministic,
    )


def book(
    agreement: AgreementDocument,
    domain_offer: AgreementDocument,
    engine: ExecutionEngine,
    *,
    store: AgreementStore | None = None,
) -> PipelineResult:
    """Use an existing service agreement; no negotiation takes place."""
    run = _Run(engine, None, domain_offer, Limits(), True, {})
    _bind(engine, run)
    ctx: dict[str, Any] = {"domain_offer": domain_offer, "providers": [agreement.provider_id], "agreement": agreement}
    results = engine.run("Book", ctx)
    return _finish(engine, run, ctx, results, store)
