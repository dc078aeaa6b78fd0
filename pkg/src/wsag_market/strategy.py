"""Consumer-side decision logic built on value scoring.

Offers are scored as a weighted sum of per-term score functions. Scores
are exact fractions so that ties and threshold comparisons never depend on
float rounding. Counteroffers come from tactics, one or more per term,
whose outputs are blended by a round-dependent weight schedule and then
pulled into the counter template's permissible values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from typing import Any, Iterable, Mapping, Sequence

from .contract import (
    AgreementDocument,
    Range,
    TermValue,
    dec,
    fill_template,
)
from .errors import EmptyPermissibleRange, MarketError, MissingBinding, UnscoredTerm
from .protocol.ports import Decision, OfferHistory

__all__ = [
    "LinearScore",
    "TableScore",
    "ScoringModel",
    "score_offer",
    "TimeDependentTactic",
    "BehaviorDependentTactic",
    "FixedTargetTactic",
    "WeightSchedule",
    "ThresholdSchedule",
    "permissible_range",
    "generate_counteroffer",
    "decide",
    "check_agreements",
    "ScoringStrategy",
]


def _frac(v: Any) -> Fraction:
    if isinstance(v, bool):
        raise TypeError("booleans are not numeric scores")
    return Fraction(v) if not isinstance(v, str) else Fraction(Decimal(v))


# ---------------------------------------------------------------- scoring


@dataclass(frozen=True)
class LinearScore:
    """Linear over ``[lo, hi]``, clamped to ``[0, 1]`` outside it."""

    lo: Decimal
    hi: Decimal
    increasing: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "lo", dec(self.lo))
        object.__setattr__(self, "hi", dec(self.hi))
        if self.lo >= self.hi:
            raise ValueError(f"score range needs lo < hi, got [{self.lo}, {self.hi}]")

    def __call__(self, v: TermValue) -> Fraction:
        x = _frac(v)
        lo, hi = Fraction(self.lo), Fraction(self.hi)
        s = (x - lo) / (hi - lo)
        s = min(max(s, Fraction(0)), Fraction(1))
        return s if self.increasing else 1 - s


@dataclass(frozen=True)
class TableScore:
    """Lookup table for enumerations; values not listed score 0."""

    table: tuple[tuple[Any, Fraction], ...]

    def __post_init__(self) -> None:
        items = self.table.items() if isinstance(self.table, Mapping) else self.table
        rows = tuple((k, _frac(s)) for k, s in items)
        for _, s in rows:
            if not 0 <= s <= 1:
                raise ValueError(f"table scores must lie in [0, 1], got {s}")
        object.__setattr__(self, "table", rows)

    def __call__(self, v: TermValue) -> Fraction:
        for k, s in self.table:
            if k == v and type(k) is type(v):
                return s
        return Fraction(0)


ScoreFn = LinearScore | TableScore


@dataclass(frozen=True)
class ScoringModel:
    functions: Mapping[str, ScoreFn]
    weights: Mapping[str, Any]
    # bound terms the consumer is indifferent to, e.g. the movie title
    ignore: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        raw = {k: _frac(w) for k, w in self.weights.items()}
        if any(w < 0 for w in raw.values()):
            raise ValueError("weights must be non-negative")
        total = sum(raw.values(), Fraction(0))
        if total <= 0:
            raise ValueError("weights must not all be zero")
        missing = set(raw) - set(self.functions)
        if missing:
            raise ValueError(f"weighted terms without a score function: {sorted(missing)}")
        object.__setattr__(self, "weights", {k: raw[k] / total for k in sorted(raw)})
        object.__setattr__(self, "functions", dict(self.functions))
        object.__setattr__(self, "ignore", frozenset(self.ignore))

    def score(self, bindings: Mapping[str, TermValue]) -> Fraction:
        for k in bindings:
            if k not in self.functions and k not in self.ignore:
                raise UnscoredTerm(k)
        total = Fraction(0)
        for k, w in self.weights.items():
            if k not in bindings:
                raise MissingBinding(k, "scored term is unbound")
            total += w * self.functions[k](bindings[k])
        return total

    def rescaled(self, factor: Any) -> "ScoringModel":
        f = _frac(factor)
        return ScoringModel(self.functions, {k: w * f for k, w in self.weights.items()}, self.ignore)


def score_offer(model: ScoringModel, offer: AgreementDocument | Mapping[str, TermValue]) -> Fraction:
    bindings = offer.bindings if isinstance(offer, AgreementDocument) else offer
    return model.score(bindings)


# ---------------------------------------------------------------- tactics


@dataclass(frozen=True)
class TimeDependentTactic:
    """``start + (t / deadline) ** beta * (reserve - start)``."""

    term_id: str
    start: Decimal
    reserve: Decimal
    deadline: int
    beta: Decimal = Decimal(1)
    grid: Decimal | None = None
    kind = "time"

    def __post_init__(self) -> None:
        object.__setattr__(self, "start", dec(self.start))
        object.__setattr__(self, "reserve", dec(self.reserve))
        object.__setattr__(self, "beta", Decimal(str(self.beta)))
        if self.grid is not None:
            object.__setattr__(self, "grid", dec(self.grid))
        if self.deadline < 1 or self.beta <= 0:
            raise ValueError("deadline must be positive and beta > 0")

    def value(self, t: int, history: OfferHistory | None = None) -> Decimal:
        if t <= 0:
            return self.start
        if t >= self.deadline:
            return self.reserve
        frac = (Decimal(t) / Decimal(self.deadline)) ** self.beta
        return dec(self.start + frac * (self.reserve - self.start))

    @property
    def bounds(self) -> tuple[Decimal, Decimal]:
        return min(self.start, self.reserve), max(self.start, self.reserve)


@dataclass(frozen=True)
class BehaviorDependentTactic:
    """Mirror the opponent's last concession on this term."""

    term_id: str
    start: Decimal
    reserve: Decimal
    grid: Decimal | None = None
    kind = "behavior"

    def __post_init__(self) -> None:
        object.__setattr__(self, "start", dec(self.start))
        object.__setattr__(self, "reserve", dec(self.reserve))
        if self.grid is not None:
            object.__setattr__(self, "grid", dec(self.grid))

    def value(self, t: int, history: OfferHistory | None = None) -> Decimal:
        own = history.own_values(self.term_id) if history else []
        opp = history.opponent_values(self.term_id) if history else []
        if not own:
            return self.start
        if len(opp) < 2:
            return dec(own[-1])
        return dec(own[-1] - (opp[-1] - opp[-2]))

    @property
    def bounds(self) -> tuple[Decimal, Decimal]:
        return min(self.start, self.reserve), max(self.start, self.reserve)


@dataclass(frozen=True)
class FixedTargetTactic:
    term_id: str
    target: Decimal
    grid: Decimal | None = None
    kind = "fixed"

    def __post_init__(self) -> None:
        object.__setattr__(self, "target", dec(self.target))

    def value(self, t: int, history: OfferHistory | None = None) -> Decimal:
        return self.target

    @property
    def bounds(self) -> tuple[Decimal, Decimal]:
        return self.target, self.target


Tactic = TimeDependentTactic | BehaviorDependentTactic | FixedTargetTactic


@dataclass(frozen=True)
class WeightSchedule:
    """Per tactic kind, weights fade linearly from ``start`` to ``end`` over ``deadline`` rounds."""

    start: Mapping[str, Any] = field(default_factory=dict)
    end: Mapping[str, Any] = field(default_factory=dict)
    deadline: int = 1

    def raw(self, kind: str, round: int) -> Fraction:
        a = _frac(self.start.get(kind, 1))
        b = _frac(self.end.get(kind, self.start.get(kind, 1)))
        t = Fraction(min(max(round, 0), self.deadline), self.deadline)
        return a + (b - a) * t

    def weights(self, tactics: Sequence[Tactic], round: int) -> list[Fraction]:
        """Weights for tactics sharing one term, normalized to sum to 1."""
        raw = [self.raw(t.kind, round) for t in tactics]
        total = sum(raw, Fraction(0))
        if total <= 0:
            return [Fraction(1, len(tactics))] * len(tactics)
        return [w / total for w in raw]

    @classmethod
    def constant(cls) -> "WeightSchedule":
        return cls()

    @classmethod
    def behavior_then_criteria(cls, deadline: int) -> "WeightSchedule":
        # imitate the opponent early, follow own criteria late
        return cls(
            start={"behavior": Fraction(4, 5), "time": Fraction(1, 5), "fixed": Fraction(1, 5)},
            end={"behavior": Fraction(1, 5), "time": Fraction(4, 5), "fixed": Fraction(4, 5)},
            deadline=deadline,
        )


PRESETS = {
    "constant": lambda deadline: WeightSchedule.constant(),
    "behavior_then_criteria": WeightSchedule.behavior_then_criteria,
}


@dataclass(frozen=True)
class ThresholdSchedule:
    """Acceptance threshold decaying linearly from ``start`` to ``end``."""

    start: Fraction
    end: Fraction | None = None
    deadline: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "start", _frac(self.start))
        object.__setattr__(self, "end", _frac(self.end) if self.end is not None else self.start)

    def __call__(self, round: int) -> Fraction:
        t = Fraction(min(max(round, 0), self.deadline), max(self.deadline, 1))
        return self.start + (self.end - self.start) * t


# ---------------------------------------------------------------- counteroffers


def permissible_range(template: AgreementDocument, term_id: str) -> tuple[Any, Any]:
    """Numeric bounds a binding for ``term_id`` must respect in ``template``."""
    term = template.resolve(term_id)
    if term is None:
        raise EmptyPermissibleRange(term_id, "term not in the counter template")
    if not isinstance(term.domain, Range):
        raise EmptyPermissibleRange(term_id, "tactics need a numeric range")
    lo, hi = term.domain.lo, term.domain.hi
    c = template.constraint(term_id)
    if c is not None:
        if not isinstance(c.allowed, Range):
            raise EmptyPermissibleRange(term_id, "constraint is not a range")
        lo, hi = max(lo, c.allowed.lo), min(hi, c.allowed.hi)
    return lo, hi


def _snap(v: Decimal, grid: Decimal | None, integral: bool) -> int | Decimal:
    if grid is not None:
        v = (v / grid).quantize(Decimal(1), rounding=ROUND_HALF_UP) * grid
    if integral:
        return int(v.quantize(Decimal(1), rounding=ROUND_HALF_UP))
    return dec(v)


def generate_counteroffer(
    tactics: Sequence[Tactic],
    schedule: WeightSchedule,
    counter_template: AgreementDocument,
    round: int,
    history: OfferHistory,
    base: Mapping[str, TermValue] | None = None,
) -> dict[str, TermValue]:
    """Blend tactic outputs per term and pull them into the permissible values.

    Terms without a tactic keep the value from ``base`` (by default our
    previous offer). Raises :class:`EmptyPermissibleRange` when the template
    leaves no value inside our own tactic bounds.
    """
    if base is None:
        base = history.own[-1] if history.own else {}
    out: dict[str, TermValue] = {
        k: v for k, v in base.items() if counter_template.resolve(k) is not None
    }
    by_term: dict[str, list[Tactic]] = {}
    for t in tactics:
        by_term.setdefault(t.term_id, []).append(t)

    for term_id, group in by_term.items():
        lo, hi = permissible_range(counter_template, term_id)
        own_lo = max(t.bounds[0] for t in group)
        own_hi = min(t.bounds[1] for t in group)
        lo, hi = max(lo, own_lo), min(hi, own_hi)
        if lo > hi:
            raise EmptyPermissibleRange(term_id, "template allows nothing within our limits")
        weights = schedule.weights(group, round)
        combined = sum(
            (Decimal(w.numerator) / Decimal(w.denominator) * t.value(round, history) for w, t in zip(weights, group)),
            Decimal(0),
        )
        term = counter_template.resolve(term_id)
        grid = next((t.grid for t in group if t.grid is not None), None)
        v = _snap(combined, grid, term.domain.integral)
        v = min(max(v, lo), hi)
        out[term_id] = term.coerce(v)

    # validates every binding against the counter template
    fill_template(counter_template, out)
    return out


# ---------------------------------------------------------------- decisions


def decide(
    model: ScoringModel,
    threshold_schedule: ThresholdSchedule | Any,
    incoming: AgreementDocument | Mapping[str, TermValue],
    round: int,
    deadline_round: int,
) -> Decision:
    """accept if the score clears the threshold, else counter until the deadline."""
    s = score_offer(model, incoming)
    bindings = incoming.bindings if isinstance(incoming, AgreementDocument) else incoming
    if s >= _frac(threshold_schedule(round)):
        return Decision.accept(dict(bindings))
    if round < deadline_round:
        return Decision.counter()
    return Decision.quit()


def check_agreements(
    model: ScoringModel,
    agreements: Sequence[AgreementDocument],
    round: int,
    confirm_threshold: Any,
    iteration_limit: int,
) -> Decision:
    """Confirm the best agreement if good enough; ties go to the first listed."""
    if not agreements:
        return Decision.quit()
    best, best_score = None, None
    for a in agreements:
        s = score_offer(model, a)
        if best_score is None or s > best_score:
            best, best_score = a, s
    if best_score >= _frac(confirm_threshold):
        return Decision.confirm([best.context.agreement_id])
    if round < iteration_limit:
        return Decision.counter()
    return Decision.quit()


class ScoringStrategy:
    """A :class:`~wsag_market.protocol.ports.StrategyPort` driven by a scoring model."""

    def __init__(
        self,
        model: ScoringModel,
        tactics: Iterable[Tactic],
        *,
        schedule: WeightSchedule | None = None,
        threshold: ThresholdSchedule | None = None,
        confirm_threshold: Any = 1,
        deadline_round: int = 10,
        iteration_limit: int = 10,
    ) -> None:
        self.model = model
        self.tactics = tuple(tactics)
        self.schedule = schedule or WeightSchedule.constant()
        self.threshold = threshold or ThresholdSchedule(Fraction(1))
        self.confirm_threshold = _frac(confirm_threshold)
        self.deadline_round = deadline_round
        self.iteration_limit = iteration_limit

    def score(self, doc: AgreementDocument | Mapping[str, TermValue]) -> Fraction:
        return score_offer(self.model, doc)

    def _accept_point(self, history: OfferHistory) -> dict[str, TermValue] | None:
        tmpl = history.last_template
        if tmpl is None or not history.own:
            return None
        point = {k: v for k, v in history.own[-1].items() if tmpl.resolve(k) is not None}
        opp = history.opponent[-1] if history.opponent else {}
        for t in self.tactics:
            if t.term_id in opp:
                point[t.term_id] = opp[t.term_id]
        try:
            fill_template(tmpl, point)
        except MarketError:
            return None
        return point

    def decide(self, round: int, history: OfferHistory) -> Decision:
        point = self._accept_point(history)
        if point is not None and self.score(point) >= self.threshold(round):
            return Decision.accept(point)
        if round >= self.deadline_round or history.last_template is None:
            return Decision.quit()
        try:
            bindings = generate_counteroffer(
                self.tactics, self.schedule, history.last_template, round, history
            )
        except EmptyPermissibleRange:
            return Decision.quit()
        return Decision.counter(bindings)

    def check_agreements(self, agreements: Sequence[AgreementDocument], round: int) -> Decision:
        return check_agreements(self.model, agreements, round, self.confirm_threshold, self.iteration_limit)

    def filter_and_counter(
        self,
        templates: Mapping[str, AgreementDocument],
        round: int,
        previous: Mapping[str, AgreementDocument] | None = None,
    ) -> dict[str, dict[str, TermValue]]:
        out: dict[str, dict[str, TermValue]] = {}
        for pid, tmpl in templates.items():
            last = dict(previous[pid].bindings) if previous and pid in previous else {}
            history = OfferHistory(own=[last] if last else [], templates=[tmpl])
            try:
                bindings = generate_counteroffer(self.tactics, self.schedule, tmpl, round, history)
            except EmptyPermissibleRange:
                continue
            # nothing new to offer this provider
            if bindings == last:
                continue
            out[pid] = bindings
        return out
