"""A minimal in-process interpreter for microflow step lists."""

from __future__ import annotations

from typing import Any, Callable, Mapping

from ..contract import AgreementDocument
from ..errors import ExecutionRejected, MarketError
from ..protocol.transcript import Transcript
from .repository import OperationDef, Repository, Step

__all__ = ["ExecutionEngine"]

Context = dict[str, Any]


class ExecutionEngine:
    """Runs class- and instance-level operations fetched from a repository.

    ``callbacks`` receive the whole context and are how consumer logic
    (selection, negotiation) is injected; ``transforms`` are pure functions
    of their named arguments.
    """

    def __init__(
        self,
        repository: Repository,
        domain_id: str,
        *,
        callbacks: Mapping[str, Callable[[Context], Any]] | None = None,
        transforms: Mapping[str, Callable[..., Any]] | None = None,
        transcript: Transcript | None = None,
        session_id: str = "engine",
    ) -> None:
        self.repository = repository
        self.domain_id = domain_id
        self.callbacks = dict(callbacks or {})
        self.transforms = dict(transforms or {})
        self.transcript = transcript if transcript is not None else Transcript()
        self.session_id = session_id

    def run(self, op_id: str, ctx: Context) -> Any:
        op = self.repository.fetch_operation(self.domain_id, op_id)
        return self._run_body(op, ctx)

    def run_instance(self, provider_id: str, op_id: str, ctx: Context) -> Any:
        op = self.repository.fetch_instance_operation(self.domain_id, provider_id, op_id)
        sub = dict(ctx)
        sub["provider_id"] = provider_id
        sub["port"] = self.repository.port(self.domain_id, provider_id)
        return self._run_body(op, sub)

    def _run_body(self, op: OperationDef, ctx: Context) -> Any:
        for step in op.body:
            if not self._enabled(step, ctx):
                continue
            result = self._exec(step, ctx)
            if step.into is not None:
                ctx[step.into] = result
        return ctx.get(op.returns) if op.returns else None

    @staticmethod
    def _enabled(step: Step, ctx: Context) -> bool:
        if step.when is None:
            return True
        if step.when.startswith("not:"):
            return not ctx.get(step.when[4:])
        return bool(ctx.get(step.when))

    def _exec(self, step: Step, ctx: Context) -> Any:
        if step.kind == "fetch":
            return self.run(step.target, ctx)
        if step.kind == "fan_out":
            key = step.args[0] if step.args else "providers"
            return {pid: self.run_instance(pid, step.target, ctx) for pid in ctx.get(key, ())}
        if step.kind == "invoke":
            return self._invoke(step, ctx)
        if step.kind == "transform":
            try:
                fn = self.transforms[step.target]
            except KeyError:
                raise MarketError(f"no transform named {step.target!r}") from None
            return fn(*(ctx.get(a) for a in step.args))
        try:
            fn = self.callbacks[step.target]
        except KeyError:
            raise MarketError(f"no callback named {step.target!r}") from None
        return fn(ctx)

    def _invoke(self, step: Step, ctx: Context) -> Any:
        pid, port = ctx["provider_id"], ctx["port"]
        args = [ctx.get(a) for a in step.args]
        agreement = next((a for a in args if isinstance(a, AgreementDocument)), None)
        # usage must be authorized by the callee's own agreement
        if agreement is not None and agreement.provider_id != pid:
            raise ExecutionRejected(f"agreement of {agreement.provider_id} presented to {pid}")
        self.transcript.event(step.target, session_id=self.session_id, payload=agreement, peer=pid)
        return getattr(port, step.target)(*args)
