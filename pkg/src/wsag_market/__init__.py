"""Contract-aware service marketplace: WSAG-style documents, negotiation
protocols, scoring strategies and a deterministic cinema simulator."""

from . import aggregation, contract, errors, marketplace, protocol, sim, strategy
from .aggregation import aggregate_templates, filter_templates
from .contract import (
    AgreementDocument,
    evaluate_guarantees,
    fill_template,
    generate_service_template,
    validate_offer,
)
from .sim import oracle_best_outcome, run_scenario

__version__ = "0.1.0"

__all__ = [
    "AgreementDocument",
    "aggregate_templates",
    "aggregation",
    "contract",
    "errors",
    "evaluate_guarantees",
    "fill_template",
    "filter_templates",
    "generate_service_template",
    "marketplace",
    "oracle_best_outcome",
    "protocol",
    "run_scenario",
    "sim",
    "strategy",
    "validate_offer",
]
