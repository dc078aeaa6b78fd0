"""Consumer-side persistence of domain agreements and their results."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Mapping

from ..contract import AgreementDocument, GuaranteeOutcome, TermValue, dumps, encode_value, loads

__all__ = ["AgreementStore"]


class AgreementStore:
    """``<root>/<domain>/<agreement_id>.json`` plus ``<root>/index.jsonl``.

    Index lines carry agreement_id, provider_id and tick, followed by the
    domain, the execution results and the guarantee outcomes.
    """

    def __init__(self, root: str | Path) -> None:
        self.root = Path(root)

    @property
    def index_path(self) -> Path:
        return self.root / "index.jsonl"

    def save(
        self,
        agreement: AgreementDocument,
        *,
        tick: int,
        results: Mapping[str, TermValue] | None = None,
        outcomes: Iterable[GuaranteeOutcome] = (),
    ) -> Path:
        aid = agreement.context.agreement_id
        if not aid or "/" in aid:
            raise ValueError(f"cannot store agreement id {aid!r}")
        folder = self.root / agreement.domain_id
        folder.mkdir(parents=True, exist_ok=True)
        path = folder / f"{aid}.json"
        if path.exists():
            raise FileExistsError(path)
        path.write_text(dumps(agreement) + "\n", encoding="utf-8")
        row = {
            "agreement_id": aid,
            "provider_id": agreement.provider_id,
            "tick": tick,
            "domain_id": agreement.domain_id,
            "results": {k: encode_value(v) for k, v in sorted((results or {}).items())},
            "guarantees": [
                {"term_id": o.term_id, "fulfilled": o.fulfilled, "business_value": str(o.business_value)}
                for o in outcomes
            ],
        }
        with self.index_path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(row, separators=(",", ":")) + "\n")
        return path

    def index(self) -> list[dict]:
        if not self.index_path.exists():
            return []
        return [json.loads(line) for line in self.index_path.read_text(encoding="utf-8").splitlines() if line]

    def load(self, domain_id: str, agreement_id: str) -> AgreementDocument:
        return loads((self.root / domain_id / f"{agreement_id}.json").read_text(encoding="utf-8"))

    def agreements(self, domain_id: str | None = None) -> list[AgreementDocument]:
        return [
            self.load(row["domain_id"], row["agreement_id"])
            for row in self.index()
            if domain_id is None or row["domain_id"] == domain_id
        ]

    def __len__(self) -> int:
        return len(self.index())
