"""Scenario files: parsing, field-level validation and seeded instantiation."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

from ..contract import Range, dec
from ..errors import MarketError, ScenarioInvalid
from ..marketplace.cinemas import INPUT_SCHEMA, make_domain_offer
from ..protocol.ports import Limits
from ..strategy import (
    PRESETS,
    BehaviorDependentTactic,
    FixedTargetTactic,
    LinearScore,
    ScoringModel,
    ScoringStrategy,
    TableScore,
    ThresholdSchedule,
    TimeDependentTactic,
)
from .native import NativeCinemaAPI, adapt_unaware_provider
from .providers import CinemaProvider, ProviderModel, Show

__all__ = [
    "Scenario",
    "ProviderSpec",
    "parse_scenario",
    "load_scenario",
    "bundled_scenarios",
    "bundled_path",
]

PROTOCOLS = ("CNIP", "AlternatingOffers")
OPERATIONS = ("Book", "SearchAndBook")
GRID = Decimal("0.5")


@dataclass(frozen=True)
class ProviderSpec:
    raw: Mapping[str, Any]

    @property
    def provider_id(self) -> str:
        return self.raw["provider_id"]

    @property
    def wsag_aware(self) -> bool:
        return self.raw.get("wsag_aware", True)


@dataclass(frozen=True)
class Scenario:
    name: str
    seed: int
    providers: tuple[ProviderSpec, ...]
    domain_offer: Mapping[str, Any]
    strategy: Mapping[str, Any]
    limits: Limits
    class_operation: str = "Book"
    deterministic: bool = True
    consumer_id: str = "consumer"
    # list prices of aware providers move up by a seeded number of grid steps
    price_jitter_steps: int = 0
    description: str = ""
    raw: Mapping[str, Any] = field(default_factory=dict, compare=False)

    # instantiation ---------------------------------------------------------

    def offer_bindings(self) -> dict[str, Any]:
        """Domain offer values with JSON decimal strings turned into decimals."""
        schema = {t.id: t for t in INPUT_SCHEMA}
        out = {}
        for k, v in self.domain_offer.items():
            t = schema.get(k)
            if t is not None and isinstance(t.domain, Range) and not t.domain.integral and isinstance(v, str):
                v = dec(v)
            out[k] = t.coerce(v) if t is not None else v
        return out

    def provider_models(self, seed: int | None = None) -> list[ProviderModel]:
        rng = random.Random(self.seed if seed is None else seed)
        models = []
        for spec in self.providers:
            r = spec.raw
            shows = []
            for s in r["shows"]:
                bump = GRID * rng.randint(0, self.price_jitter_steps) if spec.wsag_aware else Decimal(0)
                shows.append(
                    Show(
                        s["show_id"], s["movie_title"], int(s.get("start_tick", 0)), int(s["seats_free"]),
                        Decimal(str(s["list_price"])) + bump,
                        Decimal(str(s["reserve_price"])) if "reserve_price" in s else None,
                    )
                )
            bundle = r.get("seat_bundle", [1, 10])
            reserve = r.get("reserve_price", min(s.list_price for s in shows))
            models.append(
                ProviderModel(
                    r["provider_id"], dict(r["properties"]), shows, Decimal(str(reserve)),
                    price_floor=Decimal(str(r.get("price_floor", "5"))),
                    concession=Decimal(str(r.get("concession", "0.5"))),
                    min_bundle=int(bundle[0]), max_bundle=int(bundle[1]),
                    protocol=r.get("protocol", "CNIP"),
                    wsag_aware=spec.wsag_aware,
                )
            )
        return models

    def build_ports(self, seed: int | None = None) -> list[tuple[ProviderModel, Any]]:
        out = []
        for m in self.provider_models(seed):
            if m.wsag_aware:
                out.append((m, CinemaProvider(m)))
            else:
                native = NativeCinemaAPI(m.provider_id, m.shows, m.properties)
                out.append((m, adapt_unaware_provider(native, m.provider_id, m.protocol)))
        return out

    def scoring_model(self) -> ScoringModel:
        cfg = self.strategy
        fns = {}
        for term, spec in cfg["score"].items():
            if "table" in spec:
                fns[term] = TableScore(tuple((k, Decimal(str(v))) for k, v in spec["table"].items()))
            else:
                fns[term] = LinearScore(Decimal(str(spec["lo"])), Decimal(str(spec["hi"])), bool(spec.get("increasing", True)))
        weights = {k: Decimal(str(v)) for k, v in cfg.get("weights", {t: 1 for t in fns}).items()}
        return ScoringModel(fns, weights, frozenset(cfg.get("ignore", ())))

    def build_strategy(self) -> ScoringStrategy:
        cfg = self.strategy
        tactics = []
        deadline = self.limits.deadline_round
        for t in cfg.get("tactics", ()):
            grid = Decimal(str(t["grid"])) if "grid" in t else None
            if t["kind"] == "time":
                tactics.append(
                    TimeDependentTactic(
                        t["term"], Decimal(str(t["start"])), Decimal(str(t["reserve"])), int(t["deadline"]),
                        Decimal(str(t.get("beta", 1))), grid,
                    )
                )
            elif t["kind"] == "behavior":
                tactics.append(BehaviorDependentTactic(t["term"], Decimal(str(t["start"])), Decimal(str(t["reserve"])), grid))
            else:
                tactics.append(FixedTargetTactic(t["term"], Decimal(str(t["target"])), grid))
        th = cfg.get("threshold", {"start": "1"})
        return ScoringStrategy(
            self.scoring_model(),
            tactics,
            schedule=PRESETS[cfg.get("schedule", "constant")](deadline),
            threshold=ThresholdSchedule(Decimal(str(th["start"])), Decimal(str(th.get("end", th["start"]))), deadline),
            confirm_threshold=Decimal(str(cfg.get("confirm_threshold", "1"))),
            deadline_round=deadline,
            iteration_limit=self.limits.iteration_limit,
        )


# ---------------------------------------------------------------- parsing


def _decimal(v: Any) -> bool:
    """Ints and decimal strings; floats are refused so prices stay exact."""
    if isinstance(v, bool) or not isinstance(v, (int, str)):
        return False
    try:
        return Decimal(str(v)).is_finite()
    except InvalidOperation:
        return False


def _check_provider(i: int, p: Any, diag: dict[str, str]) -> None:
    at = f"providers[{i}]"
    if not isinstance(p, Mapping):
        diag[at] = "must be an object"
        return
    if not isinstance(p.get("provider_id"), str) or not p.get("provider_id") or "." in p["provider_id"]:
        diag[f"{at}.provider_id"] = "non-empty string without '.' required"
    if p.get("protocol", "CNIP") not in PROTOCOLS:
        diag[f"{at}.protocol"] = f"one of {', '.join(PROTOCOLS)}"
    if not isinstance(p.get("properties"), Mapping):
        diag[f"{at}.properties"] = "object required"
    else:
        for k in ("address", "seats", "smoking", "food_corner"):
            if k not in p["properties"]:
                diag[f"{at}.properties.{k}"] = "required property missing"
    for k in ("reserve_price", "price_floor", "concession"):
        if k in p and not _decimal(p[k]):
            diag[f"{at}.{k}"] = "decimal string expected"
    b = p.get("seat_bundle", [1, 10])
    if not (isinstance(b, list) and len(b) == 2 and all(isinstance(x, int) for x in b) and 1 <= b[0] <= b[1]):
        diag[f"{at}.seat_bundle"] = "[min, max] with 1 <= min <= max"
    shows = p.get("shows")
    if not isinstance(shows, list) or not shows:
        diag[f"{at}.shows"] = "non-empty list required"
        return
    for j, s in enumerate(shows):
        sat = f"{at}.shows[{j}]"
        if not isinstance(s, Mapping):
            diag[sat] = "must be an object"
            continue
        for k in ("show_id", "movie_title"):
            if not isinstance(s.get(k), str) or not s.get(k):
                diag[f"{sat}.{k}"] = "non-empty string required"
        if not isinstance(s.get("seats_free"), int) or s["seats_free"] < 0:
            diag[f"{sat}.seats_free"] = "non-negative integer required"
        if not _decimal(s.get("list_price")):
            diag[f"{sat}.list_price"] = "decimal string required"
        elif "reserve_price" in p and _decimal(p["reserve_price"]):
            if Decimal(str(p["reserve_price"])) > Decimal(str(s["list_price"])):
                diag[f"{sat}.list_price"] = "below the provider's reserve price"


def _check_strategy(cfg: Any, diag: dict[str, str]) -> None:
    if not isinstance(cfg, Mapping):
        diag["strategy"] = "object required"
        return
    score = cfg.get("score")
    if not isinstance(score, Mapping) or not score:
        diag["strategy.score"] = "at least one scored term required"
    else:
        for term, spec in score.items():
            if not isinstance(spec, Mapping) or not ("table" in spec or ("lo" in spec and "hi" in spec)):
                diag[f"strategy.score.{term}"] = "needs lo/hi or a table"
    if cfg.get("schedule", "constant") not in PRESETS:
        diag["strategy.schedule"] = f"one of {', '.join(sorted(PRESETS))}"
    for i, t in enumerate(cfg.get("tactics", ())):
        at = f"strategy.tactics[{i}]"
        kind = t.get("kind") if isinstance(t, Mapping) else None
        if kind not in ("time", "behavior", "fixed"):
            diag[f"{at}.kind"] = "time, behavior or fixed"
            continue
        need = {"time": ("term", "start", "reserve", "deadline"), "behavior": ("term", "start", "reserve"), "fixed": ("term", "target")}[kind]
        for k in need:
            if k not in t:
                diag[f"{at}.{k}"] = "required"
        if kind == "time" and "beta" in t and (not _decimal(t["beta"]) or Decimal(str(t["beta"])) <= 0):
            diag[f"{at}.beta"] = "must be > 0"


def parse_scenario(data: Mapping[str, Any]) -> Scenario:
    """Validate a decoded scenario document; every problem is reported at once."""
    diag: dict[str, str] = {}
    if not isinstance(data, Mapping):
        raise ScenarioInvalid({"": "scenario must be a JSON object"})
    if not isinstance(data.get("name"), str) or not data.get("name"):
        diag["name"] = "non-empty string required"
    if not isinstance(data.get("seed", 0), int):
        diag["seed"] = "integer required"
    providers = data.get("providers")
    if not isinstance(providers, list) or not providers:
        diag["providers"] = "non-empty list required"
        providers = []
    for i, p in enumerate(providers):
        _check_provider(i, p, diag)
    ids = [p.get("provider_id") for p in providers if isinstance(p, Mapping)]
    if len(set(ids)) != len(ids):
        diag["providers"] = "provider ids must be unique"
    offer = data.get("domain_offer")
    if not isinstance(offer, Mapping):
        diag["domain_offer"] = "object required"
    else:
        for k in ("movie_title", "price", "seat_count"):
            if k not in offer:
                diag[f"domain_offer.{k}"] = "required"
    _check_strategy(data.get("strategy"), diag)
    lim = data.get("limits", {})
    limits = None
    try:
        limits = Limits(**lim)
    except (TypeError, ValueError) as exc:
        diag["limits"] = str(exc)
    if data.get("class_operation", "Book") not in OPERATIONS:
        diag["class_operation"] = f"one of {', '.join(OPERATIONS)}"
    if not isinstance(data.get("price_jitter_steps", 0), int) or data.get("price_jitter_steps", 0) < 0:
        diag["price_jitter_steps"] = "non-negative integer required"
    if diag:
        raise ScenarioInvalid(diag)
    scenario = Scenario(
        name=data["name"],
        seed=data.get("seed", 0),
        providers=tuple(ProviderSpec(p) for p in providers),
        domain_offer=dict(offer),
        strategy=data["strategy"],
        limits=limits,
        class_operation=data.get("class_operation", "Book"),
        deterministic=data.get("deterministic", True),
        consumer_id=data.get("consumer_id", "consumer"),
        price_jitter_steps=data.get("price_jitter_steps", 0),
        description=data.get("description", ""),
        raw=data,
    )
    # catch values that are well-formed but inconsistent
    checks = (
        ("providers", scenario.build_ports),
        ("strategy", scenario.build_strategy),
        ("domain_offer", lambda: make_domain_offer(scenario.offer_bindings(), scenario.consumer_id)),
    )
    for where, build in checks:
        try:
            build()
        except (MarketError, ValueError, ArithmeticError) as exc:
            raise ScenarioInvalid({where: str(exc)}) from None
    return scenario


def load_scenario(path: str | Path) -> Scenario:
    p = Path(path)
    if not p.exists() and not p.suffix:
        p = bundled_path(str(path))
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ScenarioInvalid({"": f"no scenario file {path}"}) from None
    except json.JSONDecodeError as exc:
        raise ScenarioInvalid({"": f"not valid JSON: {exc}"}) from None
    return parse_scenario(data)


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("wsag_market.sim") / "scenarios" / f"{name}.json"))


def bundled_scenarios() -> list[str]:
    folder = resources.files("wsag_market.sim") / "scenarios"
    return sorted(p.name[:-5] for p in folder.iterdir() if p.name.endswith(".json"))
