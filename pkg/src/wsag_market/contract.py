"""Agreement documents: templates, offers and agreements.

The model keeps the part structure of a WS-Agreement document (context,
service terms, guarantee terms, creation constraints) without the XML.
Documents are immutable; every operation returns a new document.

Term values are plain Python values: ``int``, ``bool``, ``str`` and
:class:`~decimal.Decimal` quantized to four fractional digits.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from decimal import ROUND_HALF_EVEN, Decimal
from enum import Enum
from types import MappingProxyType
from typing import Any, Iterable, Mapping, Union

from .errors import (
    ConstraintViolation,
    DomainMismatch,
    InvalidDocument,
    InvalidRange,
    MissingBinding,
    MissingObservation,
    MissingProperty,
    StageError,
    UnknownTerm,
)

__all__ = [
    "QUANTUM",
    "SEPARATOR",
    "TermValue",
    "dec",
    "value_type",
    "Range",
    "Enumeration",
    "FreeString",
    "Boolean",
    "ValueDomain",
    "is_subset",
    "singleton",
    "Predicate",
    "TermKind",
    "Stage",
    "Level",
    "TermDefinition",
    "GuaranteeTerm",
    "CreationConstraint",
    "AgreementContext",
    "AgreementDocument",
    "ProviderProperties",
    "Violation",
    "ValidationReport",
    "GuaranteeOutcome",
    "generate_service_template",
    "fill_template",
    "validate_offer",
    "evaluate_guarantees",
    "make_agreement",
    "to_dict",
    "from_dict",
    "dumps",
    "loads",
    "digest",
    "encode_value",
    "decode_value",
]

QUANTUM = Decimal("0.0001")
SEPARATOR = "."
DEFAULT_EXPIRY = 1_000_000

TermValue = Union[int, Decimal, str, bool]


def dec(x: Any) -> Decimal:
    """Fixed-point decimal with four fractional digits."""
    if isinstance(x, bool):
        raise TypeError("booleans are not decimals")
    if isinstance(x, float):
        x = repr(x)
    return Decimal(x).quantize(QUANTUM, rounding=ROUND_HALF_EVEN)


def value_type(v: Any) -> str:
    # bool first: it is a subclass of int
    if isinstance(v, bool):
        return "boolean"
    if isinstance(v, int):
        return "integer"
    if isinstance(v, Decimal):
        return "decimal"
    if isinstance(v, str):
        return "string"
    raise TypeError(f"not a term value: {v!r}")


def _same(a: Any, b: Any) -> bool:
    return value_type(a) == value_type(b) and a == b


def _is_number(v: Any) -> bool:
    return isinstance(v, (int, Decimal)) and not isinstance(v, bool)


# ---------------------------------------------------------------- domains


@dataclass(frozen=True)
class Range:
    """Closed numeric interval; integer when both bounds are ``int``."""

    lo: int | Decimal
    hi: int | Decimal

    def __post_init__(self) -> None:
        if not (_is_number(self.lo) and _is_number(self.hi)):
            raise InvalidRange(f"range bounds must be numbers: {self.lo!r}, {self.hi!r}")
        if not (isinstance(self.lo, int) and isinstance(self.hi, int)):
            object.__setattr__(self, "lo", dec(self.lo))
            object.__setattr__(self, "hi", dec(self.hi))
        if self.lo > self.hi:
            raise InvalidRange(f"min {self.lo} > max {self.hi}")

    @property
    def integral(self) -> bool:
        return value_type(self.lo) == "integer"

    def contains(self, v: Any) -> bool:
        if not _is_number(v):
            return False
        if self.integral and not isinstance(v, int):
            return False
        return self.lo <= v <= self.hi

    def clamp(self, v: int | Decimal) -> int | Decimal:
        return min(max(v, self.lo), self.hi)


@dataclass(frozen=True)
class Enumeration:
    members: tuple

    def __post_init__(self) -> None:
        members = tuple(self.members)
        for m in members:
            value_type(m)
        seen: list = []
        for m in members:
            if not any(_same(m, s) for s in seen):
                seen.append(m)
        object.__setattr__(self, "members", tuple(seen))

    def contains(self, v: Any) -> bool:
        return any(_same(v, m) for m in self.members)


@dataclass(frozen=True)
class FreeString:
    def contains(self, v: Any) -> bool:
        return isinstance(v, str)


@dataclass(frozen=True)
class Boolean:
    def contains(self, v: Any) -> bool:
        return isinstance(v, bool)


ValueDomain = Union[Range, Enumeration, FreeString, Boolean]


def is_subset(a: ValueDomain, b: ValueDomain) -> bool:
    """True when every value admitted by ``a`` is admitted by ``b``."""
    if isinstance(a, Enumeration):
        return all(b.contains(m) for m in a.members)
    if isinstance(a, Range):
        if isinstance(b, Range):
            if b.integral and not a.integral:
                return False
            return b.lo <= a.lo and a.hi <= b.hi
        if isinstance(b, Enumeration):
            if a.integral:
                return all(b.contains(i) for i in range(a.lo, a.hi + 1))
            return a.lo == a.hi and b.contains(a.lo)
        return False
    if isinstance(a, FreeString):
        return isinstance(b, FreeString)
    if isinstance(a, Boolean):
        return isinstance(b, Boolean) or (
            isinstance(b, Enumeration) and b.contains(True) and b.contains(False)
        )
    raise TypeError(a)


def singleton(v: TermValue) -> ValueDomain:
    """The narrowest domain admitting exactly ``v``."""
    if _is_number(v):
        return Range(v, v)
    return Enumeration((v,))


# ---------------------------------------------------------------- predicates


_PREDICATE_ARITY = {"equals": 1, "at_least": 1, "at_most": 1, "within": 2}


@dataclass(frozen=True)
class Predicate:
    op: str
    args: tuple

    def __post_init__(self) -> None:
        if self.op not in _PREDICATE_ARITY:
            raise ValueError(f"unknown predicate {self.op!r}")
        args = tuple(self.args)
        if len(args) != _PREDICATE_ARITY[self.op]:
            raise ValueError(f"{self.op} takes {_PREDICATE_ARITY[self.op]} argument(s)")
        if self.op != "equals" and not all(_is_number(a) for a in args):
            raise ValueError(f"{self.op} needs numeric arguments")
        args = tuple(dec(a) if isinstance(a, Decimal) else a for a in args)
        if self.op == "within" and args[0] > args[1]:
            raise InvalidRange(f"within({args[0]}, {args[1]})")
        object.__setattr__(self, "args", args)

    @classmethod
    def equals(cls, v: TermValue) -> "Predicate":
        return cls("equals", (v,))

    @classmethod
    def at_least(cls, v: int | Decimal) -> "Predicate":
        return cls("at_least", (v,))

    @classmethod
    def at_most(cls, v: int | Decimal) -> "Predicate":
        return cls("at_most", (v,))

    @classmethod
    def within(cls, lo: int | Decimal, hi: int | Decimal) -> "Predicate":
        return cls("within", (lo, hi))

    def holds(self, v: TermValue) -> bool:
        if self.op == "equals":
            a = self.args[0]
            if _is_number(a) and _is_number(v):
                return a == v
            return _same(a, v)
        if not _is_number(v):
            return False
        if self.op == "at_least":
            return v >= self.args[0]
        if self.op == "at_most":
            return v <= self.args[0]
        return self.args[0] <= v <= self.args[1]


# ---------------------------------------------------------------- documents


class TermKind(str, Enum):
    SERVICE_PROPERTY = "service-property"
    INPUT = "input"
    OUTPUT = "output"


class Stage(str, Enum):
    TEMPLATE = "Template"
    OFFER = "Offer"
    AGREEMENT = "Agreement"


class Level(str, Enum):
    DOMAIN = "domain"
    SERVICE = "service"


@dataclass(frozen=True)
class TermDefinition:
    id: str
    kind: TermKind
    unit: str
    domain: ValueDomain
    required: bool = False

    def __post_init__(self) -> None:
        if not self.id:
            raise InvalidDocument("empty term id")
        object.__setattr__(self, "kind", TermKind(self.kind))

    def coerce(self, v: Any) -> TermValue:
        """Widen ints to decimals for decimal-valued terms."""
        if (
            isinstance(self.domain, Range)
            and not self.domain.integral
            and isinstance(v, int)
            and not isinstance(v, bool)
        ):
            return dec(v)
        if isinstance(v, Decimal):
            return dec(v)
        return v


@dataclass(frozen=True)
class GuaranteeTerm:
    term_id: str
    predicate: Predicate
    business_value: Decimal = Decimal("1.0000")

    def __post_init__(self) -> None:
        object.__setattr__(self, "business_value", dec(self.business_value))


@dataclass(frozen=True)
class CreationConstraint:
    term_id: str
    allowed: ValueDomain
    mandatory: bool = False


@dataclass(frozen=True)
class AgreementContext:
    consumer_id: str
    provider_id: str
    domain_id: str
    expiry: int = DEFAULT_EXPIRY
    agreement_id: str = ""
    created: int = 0

    def __post_init__(self) -> None:
        if self.expiry <= self.created:
            raise InvalidDocument(f"expiry {self.expiry} not after creation tick {self.created}")


def _freeze(bindings: Mapping[str, TermValue]) -> Mapping[str, TermValue]:
    for v in bindings.values():
        value_type(v)
    return MappingProxyType({k: bindings[k] for k in sorted(bindings)})


@dataclass(frozen=True, eq=True)
class AgreementDocument:
    """One contract artifact.

    Term, constraint and guarantee lists are kept sorted by term id so that
    equal documents serialize identically.
    """

    stage: Stage
    level: Level
    context: AgreementContext
    terms: tuple[TermDefinition, ...] = ()
    constraints: tuple[CreationConstraint, ...] = ()
    guarantees: tuple[GuaranteeTerm, ...] = ()
    bindings: Mapping[str, TermValue] = field(default_factory=dict)

    __hash__ = None  # type: ignore[assignment]

    def __post_init__(self) -> None:
        object.__setattr__(self, "stage", Stage(self.stage))
        object.__setattr__(self, "level", Level(self.level))
        object.__setattr__(self, "terms", tuple(sorted(self.terms, key=lambda t: t.id)))
        object.__setattr__(
            self, "constraints", tuple(sorted(self.constraints, key=lambda c: c.term_id))
        )
        object.__setattr__(
            self,
            "guarantees",
            tuple(sorted(self.guarantees, key=lambda g: (g.term_id, json.dumps(_enc_predicate(g.predicate))))),
        )
        object.__setattr__(self, "bindings", _freeze(self.bindings))
        self._check()

    def _check(self) -> None:
        ids = [t.id for t in self.terms]
        if len(set(ids)) != len(ids):
            raise InvalidDocument("duplicate term ids")
        if self.level is Level.SERVICE:
            bad = [i for i in ids if SEPARATOR in i]
            if bad:
                raise InvalidDocument(f"service-level term ids may not be prefixed: {bad}")
        if self.stage is Stage.TEMPLATE and self.bindings:
            raise InvalidDocument("templates carry no bindings")
        if (self.stage is Stage.AGREEMENT) != bool(self.context.agreement_id):
            raise InvalidDocument("agreement_id must be set exactly on agreements")
        if self.stage is Stage.AGREEMENT and not self.context.provider_id:
            raise InvalidDocument("agreements need a provider")
        seen = set()
        for c in self.constraints:
            if c.term_id in seen:
                raise InvalidDocument(f"two constraints on {c.term_id}")
            seen.add(c.term_id)
            term = self.resolve(c.term_id)
            if term is None:
                raise InvalidDocument(f"constraint on unknown term {c.term_id}")
            if not is_subset(c.allowed, term.domain):
                raise InvalidDocument(f"constraint on {c.term_id} exceeds the term's domain")
        for g in self.guarantees:
            if self.resolve(g.term_id) is None:
                raise InvalidDocument(f"guarantee on unknown term {g.term_id}")

    # lookups -----------------------------------------------------------

    def term(self, term_id: str) -> TermDefinition | None:
        for t in self.terms:
            if t.id == term_id:
                return t
        return None

    def resolve(self, ref: str) -> TermDefinition | None:
        """Find the term a reference points at.

        On domain-level documents ``provider.term`` may refer to a merged,
        unprefixed ``term`` scoped to one provider.
        """
        t = self.term(ref)
        if t is not None or self.level is Level.SERVICE:
            return t
        if SEPARATOR in ref:
            return self.term(ref.split(SEPARATOR, 1)[1])
        return None

    def constraint(self, ref: str) -> CreationConstraint | None:
        for c in self.constraints:
            if c.term_id == ref:
                return c
        return None

    def scoped_constraints(self, term_id: str) -> list[CreationConstraint]:
        """Provider-scoped constraints on a merged domain-level term."""
        return [
            c
            for c in self.constraints
            if SEPARATOR in c.term_id
            and self.term(c.term_id) is None
            and c.term_id.split(SEPARATOR, 1)[1] == term_id
        ]

    @property
    def domain_id(self) -> str:
        return self.context.domain_id

    @property
    def provider_id(self) -> str:
        return self.context.provider_id


@dataclass(frozen=True)
class ProviderProperties:
    """What a provider declares when joining a domain."""

    provider_id: str
    domain_id: str
    properties: Mapping[str, TermValue]
    # provider-specific restriction of input/output term domains
    term_ranges: Mapping[str, ValueDomain] = field(default_factory=dict)
    business_values: Mapping[str, Decimal] = field(default_factory=dict)
    expiry: int = DEFAULT_EXPIRY


# ---------------------------------------------------------------- operations


def _coerce_property(schema: TermDefinition | None, v: TermValue) -> TermValue:
    return schema.coerce(v) if schema is not None else (dec(v) if isinstance(v, Decimal) else v)


def generate_service_template(
    props: ProviderProperties,
    input_schema: Iterable[TermDefinition] = (),
    output_schema: Iterable[TermDefinition] = (),
    *,
    property_schema: Iterable[TermDefinition] | None = None,
) -> AgreementDocument:
    """Build a provider's service-level template from the domain schemas.

    Properties become service-property terms whose domain is the declared
    value itself. Input terms with a declared range or enumeration get a
    creation constraint; output terms with a range get a ``within``
    guarantee.
    """
    schema = {t.id: t for t in property_schema} if property_schema is not None else None
    if schema is not None:
        for t in schema.values():
            if t.required and t.id not in props.properties:
                raise MissingProperty(t.id)

    terms: list[TermDefinition] = []
    constraints: list[CreationConstraint] = []
    guarantees: list[GuaranteeTerm] = []

    for pid in sorted(props.properties):
        decl = schema.get(pid) if schema is not None else None
        v = _coerce_property(decl, props.properties[pid])
        if decl is not None and not decl.domain.contains(v):
            raise ConstraintViolation(pid, f"property value {v!r} outside the domain schema")
        unit = decl.unit if decl is not None else ""
        terms.append(TermDefinition(pid, TermKind.SERVICE_PROPERTY, unit, singleton(v), False))

    for t in input_schema:
        allowed = props.term_ranges.get(t.id)
        if allowed is not None and not is_subset(allowed, t.domain):
            raise InvalidRange(f"{t.id}: provider range exceeds the domain schema")
        terms.append(replace(t, kind=TermKind.INPUT))
        if allowed is None and isinstance(t.domain, (Range, Enumeration)):
            allowed = t.domain
        if allowed is not None:
            constraints.append(CreationConstraint(t.id, allowed, t.required))

    for t in output_schema:
        restricted = props.term_ranges.get(t.id, t.domain)
        if not is_subset(restricted, t.domain):
            raise InvalidRange(f"{t.id}: provider range exceeds the domain schema")
        terms.append(replace(t, kind=TermKind.OUTPUT, required=False))
        bv = props.business_values.get(t.id, Decimal(1))
        if isinstance(restricted, Range):
            guarantees.append(GuaranteeTerm(t.id, Predicate.within(restricted.lo, restricted.hi), bv))
        elif isinstance(restricted, Enumeration) and len(restricted.members) == 1:
            guarantees.append(GuaranteeTerm(t.id, Predicate.equals(restricted.members[0]), bv))

    ctx = AgreementContext("", props.provider_id, props.domain_id, props.expiry)
    return AgreementDocument(Stage.TEMPLATE, Level.SERVICE, ctx, tuple(terms), tuple(constraints), tuple(guarantees))


@dataclass(frozen=True)
class Violation:
    kind: str  # UnknownTerm | UnboundMandatory | ConstraintBreach
    term_id: str
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __len__(self) -> int:
        return len(self.violations)

    def __iter__(self):
        return iter(self.violations)


def _binding_admissible(tmpl: AgreementDocument, ref: str, v: TermValue) -> tuple[bool, str]:
    term = tmpl.resolve(ref)
    assert term is not None
    if not term.domain.contains(v):
        return False, f"{v!r} outside domain"
    direct = tmpl.constraint(ref)
    if direct is not None and not direct.allowed.contains(v):
        return False, f"{v!r} not allowed"
    if tmpl.level is Level.DOMAIN and tmpl.term(ref) is not None:
        scoped = tmpl.scoped_constraints(ref)
        if scoped and not any(c.allowed.contains(v) for c in scoped):
            return False, f"{v!r} allowed by no provider"
    return True, ""


def _mandatory_refs(tmpl: AgreementDocument) -> list[str]:
    refs = [t.id for t in tmpl.terms if t.required and t.kind is not TermKind.OUTPUT]
    refs += [c.term_id for c in tmpl.constraints if c.mandatory and c.term_id not in refs]
    return refs


def _is_bound(tmpl: AgreementDocument, ref: str, bindings: Mapping[str, TermValue]) -> bool:
    if ref in bindings:
        return True
    if tmpl.level is Level.DOMAIN and tmpl.term(ref) is None and SEPARATOR in ref:
        # a scoped mandatory constraint is met by binding the merged term
        return ref.split(SEPARATOR, 1)[1] in bindings
    if tmpl.level is Level.DOMAIN:
        return any(
            k.split(SEPARATOR, 1)[-1] == ref and tmpl.term(k) is None for k in bindings
        )
    return False


def _check(tmpl: AgreementDocument, bindings: Mapping[str, TermValue]) -> list[Violation]:
    found: list[Violation] = []
    for ref in sorted(bindings):
        term = tmpl.resolve(ref)
        if term is None:
            found.append(Violation("UnknownTerm", ref))
            continue
        ok, why = _binding_admissible(tmpl, ref, bindings[ref])
        if not ok:
            found.append(Violation("ConstraintBreach", ref, why))
    for ref in _mandatory_refs(tmpl):
        if not _is_bound(tmpl, ref, bindings):
            found.append(Violation("UnboundMandatory", ref))
    found.sort(key=lambda v: v.term_id)
    return found


def _coerce_bindings(tmpl: AgreementDocument, bindings: Mapping[str, Any]) -> dict[str, TermValue]:
    out = {}
    for k, v in bindings.items():
        term = tmpl.resolve(k)
        out[k] = term.coerce(v) if term is not None else v
    return out


def fill_template(
    tmpl: AgreementDocument,
    bindings: Mapping[str, TermValue],
    *,
    consumer_id: str | None = None,
) -> AgreementDocument:
    """Bind values into a template, producing an offer."""
    if tmpl.stage is not Stage.TEMPLATE:
        raise StageError(f"fill_template needs a Template, got {tmpl.stage.value}")
    values = _coerce_bindings(tmpl, bindings)
    for v in _check(tmpl, values):
        if v.kind == "UnknownTerm":
            raise UnknownTerm(v.term_id)
        if v.kind == "ConstraintBreach":
            raise ConstraintViolation(v.term_id, v.detail)
        raise MissingBinding(v.term_id)
    ctx = tmpl.context if consumer_id is None else replace(tmpl.context, consumer_id=consumer_id)
    return replace(tmpl, stage=Stage.OFFER, context=ctx, bindings=values)


def validate_offer(tmpl: AgreementDocument, offer: AgreementDocument) -> ValidationReport:
    """List every reason ``offer`` is not admissible against ``tmpl``."""
    if tmpl.stage is not Stage.TEMPLATE:
        raise StageError("first argument must be a Template")
    if offer.stage is not Stage.OFFER:
        raise StageError("second argument must be an Offer")
    if tmpl.domain_id != offer.domain_id:
        raise DomainMismatch(f"{tmpl.domain_id} != {offer.domain_id}")
    return ValidationReport(tuple(_check(tmpl, offer.bindings)))


@dataclass(frozen=True)
class GuaranteeOutcome:
    term_id: str
    fulfilled: bool
    business_value: Decimal


def evaluate_guarantees(
    agr: AgreementDocument, observed: Mapping[str, TermValue]
) -> list[GuaranteeOutcome]:
    if agr.stage is not Stage.AGREEMENT:
        raise StageError("guarantees are evaluated on agreements")
    outcomes = []
    for g in agr.guarantees:
        if g.term_id not in observed:
            raise MissingObservation(g.term_id)
        term = agr.resolve(g.term_id)
        v = term.coerce(observed[g.term_id]) if term is not None else observed[g.term_id]
        outcomes.append(GuaranteeOutcome(g.term_id, g.predicate.holds(v), g.business_value))
    return outcomes


def make_agreement(offer: AgreementDocument, agreement_id: str, *, provider_id: str | None = None) -> AgreementDocument:
    """Promote an offer to an agreement with identical bindings."""
    if offer.stage is not Stage.OFFER:
        raise StageError("only offers become agreements")
    ctx = replace(
        offer.context,
        agreement_id=agreement_id,
        provider_id=provider_id if provider_id is not None else offer.context.provider_id,
    )
    return replace(offer, stage=Stage.AGREEMENT, context=ctx)


# ---------------------------------------------------------------- serialization


def encode_value(v: TermValue) -> Any:
    if isinstance(v, Decimal):
        return {"dec": str(dec(v))}
    value_type(v)
    return v


def decode_value(x: Any) -> TermValue:
    if isinstance(x, dict):
        return dec(x["dec"])
    value_type(x)
    return x


def _enc_domain(d: ValueDomain) -> dict:
    if isinstance(d, Range):
        return {"kind": "range", "min": encode_value(d.lo), "max": encode_value(d.hi)}
    if isinstance(d, Enumeration):
        return {"kind": "enum", "members": [encode_value(m) for m in d.members]}
    if isinstance(d, FreeString):
        return {"kind": "string"}
    return {"kind": "boolean"}


def _dec_domain(x: dict) -> ValueDomain:
    kind = x["kind"]
    if kind == "range":
        return Range(decode_value(x["min"]), decode_value(x["max"]))
    if kind == "enum":
        return Enumeration(tuple(decode_value(m) for m in x["members"]))
    if kind == "string":
        return FreeString()
    if kind == "boolean":
        return Boolean()
    raise InvalidDocument(f"unknown domain kind {kind!r}")


def _enc_predicate(p: Predicate) -> dict:
    return {"op": p.op, "args": [encode_value(a) for a in p.args]}


def to_dict(doc: AgreementDocument) -> dict:
    c = doc.context
    return {
        "stage": doc.stage.value,
        "level": doc.level.value,
        "context": {
            "consumer_id": c.consumer_id,
            "provider_id": c.provider_id,
            "domain_id": c.domain_id,
            "created": c.created,
            "expiry": c.expiry,
            "agreement_id": c.agreement_id,
        },
        "terms": [
            {"id": t.id, "kind": t.kind.value, "unit": t.unit, "domain": _enc_domain(t.domain), "required": t.required}
            for t in doc.terms
        ],
        "constraints": [
            {"term_id": k.term_id, "allowed": _enc_domain(k.allowed), "mandatory": k.mandatory}
            for k in doc.constraints
        ],
        "guarantees": [
            {"term_id": g.term_id, "predicate": _enc_predicate(g.predicate), "business_value": str(g.business_value)}
            for g in doc.guarantees
        ],
        "bindings": {k: encode_value(v) for k, v in doc.bindings.items()},
    }


def from_dict(d: Mapping[str, Any]) -> AgreementDocument:
    c = d["context"]
    return AgreementDocument(
        stage=Stage(d["stage"]),
        level=Level(d["level"]),
        context=AgreementContext(
            consumer_id=c["consumer_id"],
            provider_id=c["provider_id"],
            domain_id=c["domain_id"],
            expiry=c["expiry"],
            agreement_id=c["agreement_id"],
            created=c["created"],
        ),
        terms=tuple(
            TermDefinition(t["id"], TermKind(t["kind"]), t["unit"], _dec_domain(t["domain"]), t["required"])
            for t in d["terms"]
        ),
        constraints=tuple(
            CreationConstraint(k["term_id"], _dec_domain(k["allowed"]), k["mandatory"]) for k in d["constraints"]
        ),
        guarantees=tuple(
            GuaranteeTerm(
                g["term_id"],
                Predicate(g["predicate"]["op"], tuple(decode_value(a) for a in g["predicate"]["args"])),
                dec(g["business_value"]),
            )
            for g in d["guarantees"]
        ),
        bindings={k: decode_value(v) for k, v in d["bindings"].items()},
    )


def dumps(doc: AgreementDocument) -> str:
    """Canonical JSON: fixed field order, no whitespace, ASCII only."""
    return json.dumps(to_dict(doc), separators=(",", ":"), ensure_ascii=True)


def loads(s: str) -> AgreementDocument:
    return from_dict(json.loads(s))


def digest(doc: AgreementDocument | None) -> str:
    if doc is None:
        return ""
    return hashlib.sha256(dumps(doc).encode("ascii")).hexdigest()
