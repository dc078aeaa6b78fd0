"""Domain templates built from per-provider service templates.

Aggregation concatenates the providers' terms. A term every provider
declares identically (same id, kind, unit and value domain) is kept once
under its own id; service properties that differ between providers are
kept per provider under ``<provider><sep><id>``. Constraints and
guarantees follow their term, and are rewritten to the provider-scoped
reference whenever providers disagree on them.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

from .contract import (
    SEPARATOR,
    AgreementContext,
    AgreementDocument,
    CreationConstraint,
    GuaranteeTerm,
    Level,
    Stage,
    TermDefinition,
    TermKind,
    TermValue,
    fill_template,
)
from .errors import ConflictingDuplicate, DomainMismatch, InvalidDocument, StageError

__all__ = [
    "PrefixRule",
    "aggregate_templates",
    "filter_templates",
    "project_bindings",
    "service_offer",
]


@dataclass(frozen=True)
class PrefixRule:
    provider_id: str
    separator: str = SEPARATOR

    def apply(self, term_id: str) -> str:
        return f"{self.provider_id}{self.separator}{term_id}"


def _check_inputs(templates: Sequence[AgreementDocument]) -> None:
    if not templates:
        raise ValueError("nothing to aggregate")
    domain = templates[0].domain_id
    seen: set[str] = set()
    for t in templates:
        if t.stage is not Stage.TEMPLATE or t.level is not Level.SERVICE:
            raise StageError("aggregation takes service-level templates")
        if t.domain_id != domain:
            raise DomainMismatch(f"{t.domain_id} != {domain}")
        pid = t.provider_id
        if not pid or SEPARATOR in pid:
            raise InvalidDocument(f"provider id {pid!r} cannot be used as a prefix")
        if pid in seen:
            raise InvalidDocument(f"provider {pid} appears twice")
        seen.add(pid)


def _structural_key(t: TermDefinition) -> tuple:
    return (t.kind, t.unit, t.domain)


def aggregate_templates(templates: Sequence[AgreementDocument]) -> AgreementDocument:
    """Concatenate service templates into one domain-level template.

    ``templates`` must be given in provider registration order.
    """
    _check_inputs(templates)

    owners: dict[str, list[tuple[str, TermDefinition]]] = {}
    for tmpl in templates:
        for term in tmpl.terms:
            owners.setdefault(term.id, []).append((tmpl.provider_id, term))

    merged: set[str] = set()
    out_terms: list[TermDefinition] = []
    for term_id, decls in owners.items():
        first = decls[0][1]
        if len({d.kind for _, d in decls}) > 1:
            raise ConflictingDuplicate(term_id, "declared with different kinds")
        if all(_structural_key(d) == _structural_key(first) for _, d in decls):
            merged.add(term_id)
            out_terms.append(replace(first, required=any(d.required for _, d in decls)))
            continue
        if first.kind is TermKind.SERVICE_PROPERTY and len({d.unit for _, d in decls}) == 1:
            for pid, d in decls:
                out_terms.append(replace(d, id=PrefixRule(pid).apply(term_id)))
            continue
        raise ConflictingDuplicate(term_id, "same id with a different unit or value domain")

    out_constraints: list[CreationConstraint] = []
    out_guarantees: list[GuaranteeTerm] = []
    by_provider = {t.provider_id: t for t in templates}
    for term_id, decls in owners.items():
        providers = [pid for pid, _ in decls]
        cons = [(pid, by_provider[pid].constraint(term_id)) for pid in providers]
        present = [(pid, c) for pid, c in cons if c is not None]
        shared = (
            term_id in merged
            and len(present) == len(providers)
            and all(c == present[0][1] for _, c in present)
        )
        if shared and present:
            out_constraints.append(present[0][1])
        else:
            for pid, c in present:
                out_constraints.append(replace(c, term_id=PrefixRule(pid).apply(term_id)))

        gs = [(pid, [g for g in by_provider[pid].guarantees if g.term_id == term_id]) for pid in providers]
        shared_g = term_id in merged and all(_same_guarantees(g, gs[0][1]) for _, g in gs)
        if shared_g:
            out_guarantees.extend(gs[0][1])
        else:
            for pid, glist in gs:
                out_guarantees.extend(replace(g, term_id=PrefixRule(pid).apply(term_id)) for g in glist)

    ctx0 = templates[0].context
    ctx = AgreementContext(
        consumer_id=ctx0.consumer_id,
        provider_id="",
        domain_id=ctx0.domain_id,
        expiry=min(t.context.expiry for t in templates),
        created=max(t.context.created for t in templates),
    )
    return AgreementDocument(
        Stage.TEMPLATE, Level.DOMAIN, ctx, tuple(out_terms), tuple(out_constraints), tuple(out_guarantees)
    )


def _same_guarantees(a: Iterable[GuaranteeTerm], b: Iterable[GuaranteeTerm]) -> bool:
    return sorted(a, key=repr) == sorted(b, key=repr)


def project_bindings(
    bindings: Mapping[str, TermValue], template: AgreementDocument
) -> dict[str, TermValue]:
    """The part of domain-level bindings that concerns one service template.

    A provider-scoped binding ``P.t`` overrides an unscoped ``t`` for P.
    """
    pid = template.provider_id
    out: dict[str, TermValue] = {}
    scoped: dict[str, TermValue] = {}
    for key, value in bindings.items():
        if SEPARATOR in key:
            owner, term_id = key.split(SEPARATOR, 1)
            if owner == pid and template.term(term_id) is not None:
                scoped[term_id] = value
        elif template.term(key) is not None:
            out[key] = value
    out.update(scoped)
    return out


def _admits(template: AgreementDocument, term_id: str, value: TermValue) -> bool:
    term = template.term(term_id)
    value = term.coerce(value)
    if not term.domain.contains(value):
        return False
    c = template.constraint(term_id)
    return c is None or c.allowed.contains(value)


def filter_templates(
    templates: Sequence[AgreementDocument], domain_offer: AgreementDocument
) -> list[AgreementDocument]:
    """Keep the templates whose constraints admit every relevant binding."""
    if domain_offer.stage is not Stage.OFFER or domain_offer.level is not Level.DOMAIN:
        raise StageError("filter_templates needs a domain-level Offer")
    survivors = []
    for tmpl in templates:
        relevant = project_bindings(domain_offer.bindings, tmpl)
        if all(_admits(tmpl, k, v) for k, v in relevant.items()):
            survivors.append(tmpl)
    return survivors


def service_offer(
    template: AgreementDocument,
    domain_offer: AgreementDocument,
    extra: Mapping[str, TermValue] | None = None,
) -> AgreementDocument:
    """Supplement a selected service template with the domain offer's values."""
    bindings = project_bindings(domain_offer.bindings, template)
    if extra:
        bindings.update(extra)
    return fill_template(template, bindings, consumer_id=domain_offer.context.consumer_id)
