"""The passive repository: domains, provider registrations and microflows.

Nothing in here runs an operation body. Bodies are plain data, fetched as
copies and interpreted by the consumer's :class:`~.engine.ExecutionEngine`.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping

from ..contract import ProviderProperties, TermDefinition
from ..errors import DuplicateProviderId, MissingProperty, UnknownDomain, UnknownOperation
from ..protocol.ports import ProviderPort

__all__ = ["Step", "OperationDef", "Domain", "Registration", "Repository"]

STEP_KINDS = ("fetch", "fan_out", "invoke", "transform", "callback")


@dataclass(frozen=True)
class Step:
    """One instruction of a microflow.

    ``args`` name context entries passed to the target. For ``fan_out`` the
    first arg names the list of provider ids to iterate (``providers`` by
    default). ``when`` skips the step unless the named entry is truthy;
    prefix it with ``not:`` to invert.
    """

    kind: str
    target: str
    args: tuple[str, ...] = ()
    into: str | None = None
    when: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in STEP_KINDS:
            raise ValueError(f"unknown step kind {self.kind!r}")
        object.__setattr__(self, "args", tuple(self.args))


@dataclass(frozen=True)
class OperationDef:
    id: str
    level: str  # class | instance
    domain_id: str
    provider_id: str = ""
    input_contract: tuple[TermDefinition, ...] = ()
    output_contract: tuple[TermDefinition, ...] = ()
    body: tuple[Step, ...] = ()
    # context entry holding the operation's result
    returns: str | None = None

    def __post_init__(self) -> None:
        if self.level not in ("class", "instance"):
            raise ValueError(f"level must be class or instance, got {self.level!r}")
        if (self.level == "instance") != bool(self.provider_id):
            raise ValueError("instance operations, and only they, belong to a provider")
        object.__setattr__(self, "body", tuple(self.body))
        object.__setattr__(self, "input_contract", tuple(self.input_contract))
        object.__setattr__(self, "output_contract", tuple(self.output_contract))
        if self.level == "instance":
            invokes = [s for s in self.body if s.kind == "invoke"]
            if len(invokes) != 1 or any(s.kind in ("fetch", "fan_out") for s in self.body):
                raise ValueError(f"instance operation {self.id} must invoke exactly one port call")
        elif any(s.kind == "invoke" for s in self.body):
            raise ValueError(f"class operation {self.id} cannot call a provider port directly")


@dataclass(frozen=True)
class Domain:
    domain_id: str
    property_schema: tuple[TermDefinition, ...]
    input_schema: tuple[TermDefinition, ...]
    output_schema: tuple[TermDefinition, ...]
    class_ops: tuple[OperationDef, ...] = ()
    # builds a provider's standard instance operations at registration
    instance_ops: Callable[[str], Iterable[OperationDef]] | None = field(default=None, compare=False)
    transforms: Mapping[str, Callable[..., Any]] = field(default_factory=dict, compare=False)

    @property
    def required_properties(self) -> list[str]:
        return [t.id for t in self.property_schema if t.required]


@dataclass(frozen=True)
class Registration:
    props: ProviderProperties
    ops: dict[str, OperationDef]
    port: ProviderPort


class Repository:
    def __init__(self) -> None:
        self._domains: dict[str, Domain] = {}
        self._providers: dict[str, dict[str, Registration]] = {}

    def register_domain(self, domain: Domain) -> None:
        self._domains[domain.domain_id] = domain
        self._providers.setdefault(domain.domain_id, {})

    def domain(self, domain_id: str) -> Domain:
        try:
            return self._domains[domain_id]
        except KeyError:
            raise UnknownDomain(domain_id) from None

    def register_provider(
        self,
        domain_id: str,
        props: ProviderProperties,
        instance_ops: Iterable[OperationDef] | None,
        port: ProviderPort,
    ) -> str:
        domain = self.domain(domain_id)
        for pid in domain.required_properties:
            if pid not in props.properties:
                raise MissingProperty(pid)
        regs = self._providers[domain_id]
        if props.provider_id in regs:
            raise DuplicateProviderId(props.provider_id)
        ops = list(instance_ops) if instance_ops is not None else []
        if not ops and domain.instance_ops is not None:
            ops = list(domain.instance_ops(props.provider_id))
        for op in ops:
            if op.level != "instance" or op.provider_id != props.provider_id or op.domain_id != domain_id:
                raise ValueError(f"{op.id} is not an instance operation of {props.provider_id}")
        regs[props.provider_id] = Registration(props, {op.id: op for op in ops}, port)
        return props.provider_id

    def providers(self, domain_id: str) -> list[str]:
        """Provider ids in registration order."""
        self.domain(domain_id)
        return list(self._providers[domain_id])

    def registration(self, domain_id: str, provider_id: str) -> Registration:
        try:
            return self._providers[domain_id][provider_id]
        except KeyError:
            raise UnknownOperation(f"{provider_id} is not registered in {domain_id}") from None

    def port(self, domain_id: str, provider_id: str) -> ProviderPort:
        return self.registration(domain_id, provider_id).port

    def fetch_operation(self, domain_id: str, op_id: str) -> OperationDef:
        for op in self.domain(domain_id).class_ops:
            if op.id == op_id:
                return op  # frozen, so sharing it is as good as a copy
        raise UnknownOperation(f"{domain_id}/{op_id}")

    def fetch_instance_operation(self, domain_id: str, provider_id: str, op_id: str) -> OperationDef:
        try:
            return self.registration(domain_id, provider_id).ops[op_id]
        except KeyError:
            raise UnknownOperation(f"{domain_id}/{provider_id}/{op_id}") from None

    def digest(self) -> str:
        """Fingerprint of everything the repository holds; ports are external."""
        state = []
        for did in sorted(self._domains):
            d = self._domains[did]
            regs = [
                (pid, repr(r.props), sorted((k, repr(v)) for k, v in r.ops.items()))
                for pid, r in self._providers[did].items()
            ]
            state.append((did, repr(d.property_schema), repr(d.input_schema), repr(d.output_schema), repr(d.class_ops), regs))
        return hashlib.sha256(json.dumps(state, default=str).encode()).hexdigest()
