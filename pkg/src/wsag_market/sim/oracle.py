"""Brute-force best outcome, with no protocol involved."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from decimal import ROUND_CEILING, Decimal
from fractions import Fraction
from typing import Any, Callable, Iterator, Mapping

from ..contract import TermValue, fill_template
from ..errors import GridTooCoarse, MarketError
from ..marketplace.cinemas import DOMAIN_ID, INPUT_SCHEMA
from ..strategy import permissible_range
from .providers import ProviderModel
from .scenario import Scenario

__all__ = ["OracleResult", "oracle_best_outcome", "grid_points"]


@dataclass(frozen=True)
class OracleResult:
    best_utility: Fraction
    best_provider: str
    best_bindings: dict[str, TermValue]
    points_checked: int = 0


def grid_points(lo: Any, hi: Any, step: Decimal) -> Iterator[Any]:
    """Multiples of ``step`` inside ``[lo, hi]``."""
    if isinstance(lo, int) and isinstance(hi, int):
        yield from range(lo, hi + 1)
        return
    v = (Decimal(lo) / step).to_integral_value(rounding=ROUND_CEILING) * step
    while v <= hi:
        yield v
        v += step


def _policy(model: ProviderModel) -> Callable[[Mapping[str, TermValue]], bool]:
    if model.wsag_aware:
        return model.accepts

    # a native cinema sells at its quote and nothing else
    def fixed_price(b: Mapping[str, TermValue]) -> bool:
        show = model.find_show(b)
        return (
            show is not None
            and show.movie_title == b.get("movie_title")
            and b.get("seat_count", 0) <= show.seats_free
            and b.get("price") == show.list_price
        )

    return fixed_price


def oracle_best_outcome(
    scenario: Scenario, grid_step: Decimal | str = Decimal("0.5"), *, seed: int | None = None
) -> OracleResult:
    """Enumerate every grid point of the tactic terms for every provider.

    Each point must be admissible against the provider's template and
    accepted by its policy; the consumer's scoring model ranks what is left.
    Ties go to the earlier provider and then to the earlier point.
    """
    step = Decimal(str(grid_step))
    if step <= 0:
        raise ValueError("grid step must be positive")
    strategy = scenario.build_strategy()
    model = strategy.model
    terms = sorted({t.term_id for t in strategy.tactics}) or sorted(model.weights)
    schema = {t.id: t for t in INPUT_SCHEMA}

    base = scenario.offer_bindings()
    best: tuple[Fraction, str, dict] | None = None
    checked = 0
    for prov, port in scenario.build_ports(seed):
        template = port.template
        accepts = _policy(prov)
        shows = [s for s in prov.shows if s.movie_title == base.get("movie_title")]
        for show in shows:
            if "show_id" in base and base["show_id"] != show.show_id:
                continue
            ranges = []
            for term in terms:
                try:
                    lo, hi = permissible_range(template, term)
                except MarketError:
                    ranges = []
                    break
                ranges.append(list(grid_points(lo, hi, step)))
            for values in itertools.product(*ranges):
                b = dict(base, show_id=show.show_id)
                b.update({t: schema[t].coerce(v) for t, v in zip(terms, values)})
                checked += 1
                if not accepts(b):
                    continue
                try:
                    fill_template(template, b)
                except MarketError:
                    continue
                u = model.score(b)
                if best is None or u > best[0]:
                    best = (u, prov.provider_id, b)
    if best is None:
        raise GridTooCoarse(f"no admissible point on a {step} grid in {scenario.name} ({DOMAIN_ID})")
    return OracleResult(best[0], best[1], best[2], checked)
