"""Exact capitulation analysis for totally ramified cyclic p-extensions."""

from .errors import CanonicalizationWarning, CapnormError, IngestError, ModuleError
from .heuristics import SimulationConfig, SimulationReport, merge_reports, simulate
from .ingest import load, parse_canonical, parse_transcript, to_canonical
from .normpoly import NormPolynomial, build_nu, decompose, is_smooth, program_output, reduce_mod_ideal
from .padic import f_step, valuation
from .pmodule import (
    CapitulationVerdict,
    Kind,
    PGroupModule,
    Rule,
    analyze,
    check_sufficient_criterion,
    filtration,
    invariants,
    make_module,
    nu_image,
)
from .tower import TowerData, analyze_tower, iwasawa_fit, stability_index

__version__ = "0.1.0"

__all__ = [
    "CanonicalizationWarning",
    "CapnormError",
    "CapitulationVerdict",
    "IngestError",
    "Kind",
    "ModuleError",
    "NormPolynomial",
    "PGroupModule",
    "Rule",
    "SimulationConfig",
    "SimulationReport",
    "TowerData",
    "analyze",
    "analyze_tower",
    "build_nu",
    "check_sufficient_criterion",
    "decompose",
    "f_step",
    "filtration",
    "invariants",
    "is_smooth",
    "iwasawa_fit",
    "load",
    "make_module",
    "merge_reports",
    "nu_image",
    "parse_canonical",
    "parse_transcript",
    "program_output",
    "reduce_mod_ideal",
    "simulate",
    "stability_index",
    "to_canonical",
    "valuation",
]
