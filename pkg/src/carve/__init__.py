"""Extract-method suggestion toolkit: generate, filter, enhance, rank, apply."""

from carve.enhancement import enhance, enhance_all, extend_for_declaration, shrink_control_header
from carve.errors import CarveError
from carve.evaluation import (
    OracleEntry,
    RecallReport,
    ablation,
    load_oracle,
    recall_at_n,
    run_experiment,
    sweep,
    within_tolerance,
)
from carve.extraction import ExtractionPlan, apply, plan_extraction
from carve.filtering import FilterConfig, check_usefulness, check_validity, triage
from carve.gateway import LlmGateway, LlmParams, PromptBundle, build_prompt, parse_response
from carve.method_model import (
    DefUseChains,
    LongMethod,
    Statement,
    def_use,
    live_in,
    live_out,
    parse_method,
    scope_depth_at,
)
from carve.pipeline import PipelineResult, run_pipeline
from carve.ranking import HeatMap, RankScore, build_heatmap, score, top_n
from carve.suggestions import ExtractSuggestion, SuggestionSet, Verdict, normalize_scope

__version__ = "0.1.0"

__all__ = [
    "CarveError",
    "DefUseChains",
    "ExtractSuggestion",
    "ExtractionPlan",
    "FilterConfig",
    "HeatMap",
    "LlmGateway",
    "LlmParams",
    "LongMethod",
    "OracleEntry",
    "PipelineResult",
    "PromptBundle",
    "RankScore",
    "RecallReport",
    "Statement",
    "SuggestionSet",
    "Verdict",
    "ablation",
    "apply",
    "build_heatmap",
    "build_prompt",
    "check_usefulness",
    "check_validity",
    "def_use",
    "enhance",
    "enhance_all",
    "extend_for_declaration",
    "live_in",
    "live_out",
    "load_oracle",
    "normalize_scope",
    "parse_method",
    "parse_response",
    "plan_extraction",
    "recall_at_n",
    "run_experiment",
    "run_pipeline",
    "score",
    "scope_depth_at",
    "shrink_control_header",
    "sweep",
    "top_n",
    "triage",
    "within_tolerance",
]
