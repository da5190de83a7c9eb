"""Toolchain for adaptable services: language frontend, resource analysis,
customization, a negotiation-capable registry and a consumer client."""

from .analysis import Binding, DemandReport, analyze_adaptation, analyze_method, derive_offered_sls
from .customize import build_descriptor, enumerate_bindings, prune_dominated, tailor
from .parser import ParseError, parse
from .resources import ResourceDemand, ResourceSupply, fits
from .sls import Level, Polarity, SlsSchema, match_score, satisfies
from .validate import validate

__all__ = [
    "Binding",
    "DemandReport",
    "Level",
    "ParseError",
    "Polarity",
    "ResourceDemand",
    "ResourceSupply",
    "SlsSchema",
    "analyze_adaptation",
    "analyze_method",
    "build_descriptor",
    "derive_offered_sls",
    "enumerate_bindings",
    "fits",
    "match_score",
    "parse",
    "prune_dominated",
    "satisfies",
    "tailor",
    "validate",
]
