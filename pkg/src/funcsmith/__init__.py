"""funcsmith: constrained LLM code generation with a growing skill library.

The package splits into small, independently testable pieces: the skill
library and its persistence, dataset loading and sub-dataset derivation,
prompt rendering, output parsing, call-site compliance metrics, sandboxed
evaluation with pass@k, a record/replay chat gateway, and the episode
orchestrator that ties them together. ``funcsmith.cli`` is the command-line
entry point.
"""

__version__ = "0.1.0"

from .library import LibraryState, SkillFunction, add_skill, load_library, reset_relevant, save_library, seed_replicas
from .corpus import Dataset, OutcomeRecord, OutcomeTable, Task, derive_subset, load_dataset
from .prompts import ChatMessage, PromptBundle, TemplateConfig, build_codegen_prompt, build_halfshot_prompt, build_skill_prompt
from .parsing import ParsedCode, assemble_program, extract_completion, extract_subfunction
from .compliance import CallSite, ComplianceReport, aggregate, compliance_report, extract_calls
from .evaluator import EvalOutcome, Limits, ShimEvaluator, pass_at_k
from .gateway import ChatRequest, Completion, Gateway, Transcript, fingerprint
from .orchestrator import EpisodeConfig, EpisodeResult, RunReport, run_benchmark, run_episode

__all__ = [
    "LibraryState", "SkillFunction", "add_skill", "load_library", "reset_relevant",
    "save_library", "seed_replicas",
    "Dataset", "OutcomeRecord", "OutcomeTable", "Task", "derive_subset", "load_dataset",
    "ChatMessage", "PromptBundle", "TemplateConfig", "build_codegen_prompt",
    "build_halfshot_prompt", "build_skill_prompt",
    "ParsedCode", "assemble_program", "extract_completion", "extract_subfunction",
    "CallSite", "ComplianceReport", "aggregate", "compliance_report", "extract_calls",
    "EvalOutcome", "Limits", "ShimEvaluator", "pass_at_k",
    "ChatRequest", "Completion", "Gateway", "Transcript", "fingerprint",
    "EpisodeConfig", "EpisodeResult", "RunReport", "run_benchmark", "run_episode",
]
