"""Deterministic scenario runner."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from pathlib import Path
from typing import Any

from ..contract import AgreementDocument
from ..errors import NegotiationFailed, NoShowsFound
from ..marketplace import (
    AgreementStore,
    ExecutionEngine,
    PipelineResult,
    Repository,
    cinemas_domain,
    make_domain_offer,
    run_pipeline,
    search_and_book,
)
from ..marketplace.cinemas import DOMAIN_ID
from ..protocol.multilateral import MultilateralOutcome
from ..protocol.transcript import Transcript
from ..strategy import ScoringStrategy
from .scenario import Scenario

__all__ = ["RunResult", "run_scenario", "build_market"]


@dataclass
class RunResult:
    scenario: str
    seed: int
    deterministic: bool
    status: str  # confirmed | no_agreement
    transcript: Transcript
    reason: str = ""
    agreement: AgreementDocument | None = None
    domain_agreement: AgreementDocument | None = None
    iterations: int = 0
    final_price: Decimal | None = None
    utility: Fraction | None = None
    # price of the best-scoring fresh agreement in each iteration
    per_iteration_best: list[Decimal | None] = field(default_factory=list)
    provisional: int = 0
    cancellations: int = 0
    transcript_path: Path | None = None
    store_path: Path | None = None
    pipeline: PipelineResult | None = None
    ports: dict[str, Any] = field(default_factory=dict)

    @property
    def confirmed(self) -> bool:
        return self.status == "confirmed"

    def summary(self) -> dict[str, Any]:
        return {
            "scenario": self.scenario,
            "seed": self.seed,
            "status": self.status,
            "reason": self.reason,
            "confirmed_agreements": [self.agreement.context.agreement_id] if self.agreement else [],
            "provider": self.agreement.provider_id if self.agreement else None,
            "iterations": self.iterations,
            "final_price": str(self.final_price) if self.final_price is not None else None,
            "utility": str(self.utility) if self.utility is not None else None,
            "per_iteration_best": [str(p) if p is not None else None for p in self.per_iteration_best],
            "provisional": self.provisional,
            "cancellations": self.cancellations,
            "transcript": str(self.transcript_path) if self.transcript_path else None,
            "store": str(self.store_path) if self.store_path else None,
        }


def build_market(scenario: Scenario, seed: int) -> tuple[Repository, dict[str, Any]]:
    repo = Repository()
    repo.register_domain(cinemas_domain())
    ports = {}
    for model, port in scenario.build_ports(seed):
        repo.register_provider(DOMAIN_ID, model.properties_record(), None, port)
        ports[model.provider_id] = port
    return repo, ports


def _best_per_iteration(neg: MultilateralOutcome, strategy: ScoringStrategy) -> list[Decimal | None]:
    out = []
    for agreements in neg.per_iteration:
        if not agreements:
            out.append(None)
            continue
        best = max(agreements, key=strategy.score)  # max keeps the first of equals
        out.append(best.bindings.get("price"))
    return out


def run_scenario(
    scenario: Scenario,
    *,
    seed: int | None = None,
    out_dir: str | Path | None = None,
    deterministic: bool | None = None,
) -> RunResult:
    """Run the scenario's class operation end to end.

    With ``out_dir`` the transcript, the agreement store and ``run.json``
    are written there.
    """
    seed = scenario.seed if seed is None else seed
    deterministic = scenario.deterministic if deterministic is None else deterministic
    repo, ports = build_market(scenario, seed)
    strategy = scenario.build_strategy()
    transcript = Transcript()
    engine = ExecutionEngine(
        repo, DOMAIN_ID, transcript=transcript, session_id=f"pipeline/{scenario.class_operation}"
    )
    out = Path(out_dir) if out_dir is not None else None
    store = None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        store = AgreementStore(out / "store")
    offer = make_domain_offer(scenario.offer_bindings(), scenario.consumer_id)

    result = RunResult(scenario.name, seed, deterministic, "no_agreement", transcript, ports=ports)
    run = None
    try:
        if scenario.class_operation == "SearchAndBook":
            run = search_and_book(
                offer, strategy, engine, store=store, limits=scenario.limits, deterministic=deterministic
            )
        else:
            run = run_pipeline(
                DOMAIN_ID, scenario.class_operation, offer, None, strategy, engine,
                store=store, limits=scenario.limits, deterministic=deterministic,
            )
    except (NegotiationFailed, NoShowsFound) as exc:
        result.reason = f"{type(exc).__name__}: {exc}"
    neg = run.negotiation if run is not None else _last_negotiation(engine)
    if run is not None:
        result.status = "confirmed"
        result.pipeline = run
        result.agreement = run.service_agreement
        result.domain_agreement = run.domain_agreement
        result.final_price = run.service_agreement.bindings.get("price")
        result.utility = strategy.score(run.service_agreement)
    if neg is not None:
        result.iterations = neg.iterations
        result.per_iteration_best = _best_per_iteration(neg, strategy)
        result.provisional = len(neg.provisional_at_close)
        result.cancellations = len(neg.cancellations)

    if out is not None:
        result.transcript_path = transcript.write(out / "transcript.jsonl")
        result.store_path = store.root
        record = {
            "scenario": dict(scenario.raw),
            "seed": seed,
            "deterministic": deterministic,
            "summary": result.summary(),
        }
        (out / "run.json").write_text(json.dumps(record, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return result


def _last_negotiation(engine: ExecutionEngine) -> MultilateralOutcome | None:
    # a failed pipeline leaves its negotiation on the callback's owner
    cb = engine.callbacks.get("negotiate")
    owner = getattr(cb, "__self__", None)
    return getattr(owner, "negotiation", None)
