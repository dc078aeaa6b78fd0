"""A cinema that knows nothing about WSAG, and the adapter that hides it."""

from __future__ import annotations

import threading
from decimal import Decimal
from typing import Any, Mapping

from ..contract import (
    AgreementDocument,
    ProviderProperties,
    Range,
    TermValue,
    dec,
    generate_service_template,
    make_agreement,
    validate_offer,
)
from ..errors import ExecutionRejected, NativeFailure
from ..marketplace.cinemas import DOMAIN_ID, INPUT_SCHEMA, OUTPUT_SCHEMA, PROPERTY_SCHEMA
from ..protocol.ports import ProviderReply
from .providers import Show

__all__ = ["NativeCinemaAPI", "UnawareCinemaAdapter", "adapt_unaware_provider"]


class NativeCinemaAPI:
    """quote / hold / confirm, with fixed prices and no negotiation at all."""

    def __init__(self, name: str, shows: list[Show], properties: Mapping[str, TermValue], *, fail_on: set[str] | None = None) -> None:
        self.name = name
        self.shows = {s.show_id: s for s in shows}
        self.properties = dict(properties)
        self.fail_on = set(fail_on or ())
        self.holds: dict[str, tuple[str, int]] = {}
        self.tickets: list[dict[str, Any]] = []
        self._n = 0

    def _maybe_fail(self, op: str) -> None:
        if op in self.fail_on:
            raise NativeFailure(f"{self.name}: {op} unavailable")

    def listing(self, movie_title: str) -> list[Show]:
        self._maybe_fail("listing")
        return [s for s in self.shows.values() if s.movie_title == movie_title]

    def quote(self, show_id: str) -> Decimal:
        self._maybe_fail("quote")
        return self.shows[show_id].list_price

    def hold(self, show_id: str, seats: int) -> str | None:
        self._maybe_fail("hold")
        show = self.shows.get(show_id)
        held = sum(n for sid, n in self.holds.values() if sid == show_id)
        if show is None or seats > show.seats_free - held:
            return None
        self._n += 1
        hid = f"{self.name}-h{self._n}"
        self.holds[hid] = (show_id, seats)
        return hid

    def release(self, hold_id: str) -> None:
        self.holds.pop(hold_id, None)

    def confirm(self, hold_id: str) -> dict[str, Any]:
        self._maybe_fail("confirm")
        show_id, seats = self.holds.pop(hold_id)
        show = self.shows[show_id]
        show.seats_free -= seats
        ticket = {"show_id": show_id, "seats": seats, "price": show.list_price}
        self.tickets.append(ticket)
        return ticket


class UnawareCinemaAdapter:
    """Instance-level glue that makes a native cinema look like a WSAG provider."""

    def __init__(self, native: NativeCinemaAPI, provider_id: str, protocol: str = "CNIP") -> None:
        self.native = native
        self.provider_id = provider_id
        self.protocol = protocol
        self.holds: dict[str, str] = {}
        self.cancelled: list[str] = []
        self._seq = 0
        self._lock = threading.Lock()
        self.template = self._synthesize()

    def _synthesize(self) -> AgreementDocument:
        quotes = [self.native.quote(sid) for sid in self.native.shows]
        props = ProviderProperties(
            self.provider_id, DOMAIN_ID, self.native.properties,
            term_ranges={"price": Range(min(quotes), max(quotes))},
        )
        return generate_service_template(props, INPUT_SCHEMA, OUTPUT_SCHEMA, property_schema=PROPERTY_SCHEMA)

    def _show_for(self, b: Mapping[str, TermValue]) -> str | None:
        if b.get("show_id") is not None:
            return b["show_id"] if b["show_id"] in self.native.shows else None
        shows = self.native.listing(b.get("movie_title", ""))
        return shows[0].show_id if shows else None

    def get_template(self, round: int = 0) -> AgreementDocument:
        # take it or leave it: the counter template is the template
        return self.template

    def handle_offer(self, offer: AgreementDocument, round: int) -> ProviderReply:
        if not validate_offer(self.template, offer).ok:
            return ProviderReply.reject("offer not admissible against the synthesized template")
        b = offer.bindings
        try:
            sid = self._show_for(b)
            if sid is None:
                return ProviderReply.reject("no such show")
            q = self.native.quote(sid)
            if b["price"] != q:
                return ProviderReply.reject(f"price {b['price']} does not match quote {q}")
            hid = self.native.hold(sid, b["seat_count"])
        except NativeFailure as exc:
            return ProviderReply.reject(f"native failure: {exc}")
        if hid is None:
            return ProviderReply.reject("hold refused")
        with self._lock:
            self._seq += 1
            agr = make_agreement(offer, f"{self.provider_id}-{self._seq}", provider_id=self.provider_id)
            self.holds[agr.context.agreement_id] = hid
        return ProviderReply.accept(agr)

    def cancel(self, agreement: AgreementDocument) -> None:
        hid = self.holds.pop(agreement.context.agreement_id, None)
        if hid is not None:
            self.native.release(hid)
            self.cancelled.append(agreement.context.agreement_id)

    def execute(self, agreement: AgreementDocument, inputs: Mapping[str, Any]) -> dict[str, TermValue]:
        hid = self.holds.pop(agreement.context.agreement_id, None)
        if hid is None or agreement.provider_id != self.provider_id:
            raise ExecutionRejected(f"{self.provider_id} holds nothing for {agreement.context.agreement_id}")
        try:
            ticket = self.native.confirm(hid)
        except NativeFailure as exc:
            raise ExecutionRejected(str(exc)) from exc
        return {"tickets": ticket["seats"], "charged": dec(ticket["price"] * ticket["seats"])}

    def search(self, movie_title: str) -> list[dict[str, Any]]:
        try:
            return [s.as_dict() for s in self.native.listing(movie_title) if s.seats_free > 0]
        except NativeFailure:
            return []


def adapt_unaware_provider(native: NativeCinemaAPI, provider_id: str | None = None, protocol: str = "CNIP") -> UnawareCinemaAdapter:
    return UnawareCinemaAdapter(native, provider_id or native.name, protocol)
