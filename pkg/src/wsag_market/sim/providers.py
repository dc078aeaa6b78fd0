"""Simulated WSAG-aware cinema providers."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field, replace
from decimal import Decimal
from typing import Any, Mapping

from ..contract import (
    AgreementDocument,
    CreationConstraint,
    ProviderProperties,
    Range,
    TermValue,
    dec,
    generate_service_template,
    make_agreement,
    validate_offer,
)
from ..errors import ExecutionRejected, InvalidRange
from ..marketplace.cinemas import DOMAIN_ID, INPUT_SCHEMA, OUTPUT_SCHEMA, PROPERTY_SCHEMA
from ..protocol.ports import ProviderReply

__all__ = ["Show", "ProviderModel", "CinemaProvider"]


@dataclass
class Show:
    show_id: str
    movie_title: str
    start_tick: int
    seats_free: int
    list_price: Decimal
    # defaults to the provider's reserve
    reserve_price: Decimal | None = None

    def __post_init__(self) -> None:
        self.list_price = dec(self.list_price)
        if self.reserve_price is not None:
            self.reserve_price = dec(self.reserve_price)
        if self.seats_free < 0:
            raise ValueError(f"{self.show_id}: negative seats_free")

    def as_dict(self) -> dict[str, Any]:
        return {
            "show_id": self.show_id,
            "movie_title": self.movie_title,
            "start_tick": self.start_tick,
            "seats_free": self.seats_free,
            "list_price": self.list_price,
        }


@dataclass
class ProviderModel:
    provider_id: str
    properties: dict[str, TermValue]
    shows: list[Show]
    reserve_price: Decimal
    price_floor: Decimal = Decimal("5")
    # price conceded per counter template, never below reserve
    concession: Decimal = Decimal("0.5")
    min_bundle: int = 1
    max_bundle: int = 10
    protocol: str = "CNIP"
    wsag_aware: bool = True

    def __post_init__(self) -> None:
        self.reserve_price = dec(self.reserve_price)
        self.price_floor = dec(self.price_floor)
        self.concession = dec(self.concession)
        for s in self.shows:
            if self.reserve_of(s) > s.list_price:
                raise InvalidRange(f"{s.show_id}: reserve above list price")
        if self.price_floor > self.list_price:
            raise InvalidRange(f"{self.provider_id}: price floor above list price")
        if not 1 <= self.min_bundle <= self.max_bundle:
            raise InvalidRange(f"{self.provider_id}: bad seat bundle")

    @property
    def list_price(self) -> Decimal:
        return max(s.list_price for s in self.shows)

    def reserve_of(self, show: Show) -> Decimal:
        return show.reserve_price if show.reserve_price is not None else self.reserve_price

    def find_show(self, bindings: Mapping[str, TermValue]) -> Show | None:
        sid = bindings.get("show_id")
        for s in self.shows:
            if sid is not None and s.show_id == sid:
                return s
            if sid is None and s.movie_title == bindings.get("movie_title"):
                return s
        return None

    def accepts(self, bindings: Mapping[str, TermValue]) -> bool:
        """The acceptance policy, independent of any protocol."""
        show = self.find_show(bindings)
        if show is None or show.movie_title != bindings.get("movie_title"):
            return False
        n = bindings.get("seat_count", 0)
        if not self.min_bundle <= n <= self.max_bundle or n > show.seats_free:
            return False
        price = bindings.get("price")
        return price is not None and self.reserve_of(show) <= price <= show.list_price

    def properties_record(self) -> ProviderProperties:
        return ProviderProperties(
            self.provider_id,
            DOMAIN_ID,
            dict(self.properties),
            term_ranges={
                "price": Range(self.price_floor, self.list_price),
                "seat_count": Range(self.min_bundle, self.max_bundle),
            },
        )


@dataclass
class _Issued:
    agreement: AgreementDocument
    show: Show
    status: str = "provisional"  # provisional | cancelled | executed


class CinemaProvider:
    """A WSAG-aware provider speaking CNIP or Alternating Offers."""

    def __init__(self, model: ProviderModel) -> None:
        self.model = model
        self.provider_id = model.provider_id
        self.protocol = model.protocol
        self.template = generate_service_template(
            model.properties_record(), INPUT_SCHEMA, OUTPUT_SCHEMA, property_schema=PROPERTY_SCHEMA
        )
        self.issued: dict[str, _Issued] = {}
        self.cancelled: list[str] = []
        self.last_price: Decimal | None = None
        self._seq = 0
        self._lock = threading.Lock()

    # ProviderPort ----------------------------------------------------------

    def get_template(self, round: int = 0) -> AgreementDocument:
        if round <= 0 or self.last_price is None:
            return self.template
        # concede one step from the last price we saw, never below reserve
        show_reserve = min(self.model.reserve_of(s) for s in self.model.shows)
        ask = max(show_reserve, self.last_price - self.model.concession)
        return self._with_price(min(ask, self.last_price), max(ask, self.last_price))

    def handle_offer(self, offer: AgreementDocument, round: int) -> ProviderReply:
        if not validate_offer(self.template, offer).ok:
            return ProviderReply.reject("offer not admissible against our template")
        b = offer.bindings
        self.last_price = b["price"]
        show = self.model.find_show(b)
        if show is None or show.movie_title != b.get("movie_title"):
            return ProviderReply.reject("no such show")
        if self.model.accepts(b):
            return ProviderReply.accept(self._issue(offer, show))
        if b["price"] < self.model.reserve_of(show) and self.protocol == "AlternatingOffers":
            ask = max(self.model.reserve_of(show), show.list_price - self.model.concession * round)
            return ProviderReply.counter(self._with_price(b["price"], max(ask, b["price"])))
        return ProviderReply.reject("below reserve" if b["price"] < self.model.reserve_of(show) else "no seats")

    def cancel(self, agreement: AgreementDocument) -> None:
        rec = self.issued.get(agreement.context.agreement_id)
        if rec is not None and rec.status == "provisional":
            rec.status = "cancelled"
            self.cancelled.append(agreement.context.agreement_id)

    def execute(self, agreement: AgreementDocument, inputs: Mapping[str, Any]) -> dict[str, TermValue]:
        with self._lock:
            rec = self.issued.get(agreement.context.agreement_id)
            if rec is None or rec.agreement != agreement:
                raise ExecutionRejected(f"{self.provider_id} never issued {agreement.context.agreement_id}")
            if rec.status != "provisional":
                raise ExecutionRejected(f"{agreement.context.agreement_id} is {rec.status}")
            n = agreement.bindings["seat_count"]
            if n > rec.show.seats_free:
                raise ExecutionRejected(f"{rec.show.show_id} has only {rec.show.seats_free} seats left")
            rec.show.seats_free -= n
            rec.status = "executed"
        return {"tickets": n, "charged": dec(agreement.bindings["price"] * n)}

    def search(self, movie_title: str) -> list[dict[str, Any]]:
        return [s.as_dict() for s in self.model.shows if s.movie_title == movie_title and s.seats_free > 0]

    # helpers ---------------------------------------------------------------

    def _with_price(self, lo: Decimal, hi: Decimal) -> AgreementDocument:
        cons = [c for c in self.template.constraints if c.term_id != "price"]
        cons.append(CreationConstraint("price", Range(lo, hi), True))
        return replace(self.template, constraints=tuple(cons))

    def _issue(self, offer: AgreementDocument, show: Show) -> AgreementDocument:
        with self._lock:
            self._seq += 1
            agr = make_agreement(offer, f"{self.provider_id}-{self._seq}", provider_id=self.provider_id)
            self.issued[agr.context.agreement_id] = _Issued(agr, show)
        return agr
