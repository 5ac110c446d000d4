"""Engine for Task-Method-Knowledge skill models: guard DSL, mechanism FSM
execution, retrieval, constrained answer generation, and study metrics."""

__version__ = "0.1.0"

from .guards import parse_guard, eval_guard, pretty  # noqa: F401
from .model import (parse_model, load_model, validate_model,  # noqa: F401
                    extract_top_level_names, serialize_documents)
from .executor import execute_mechanism, invoke_goal  # noqa: F401
from .gpp import gpp_oracle_solve, verify_plan  # noqa: F401
from .retrieval import build_index, classify_scope, search  # noqa: F401
from .pipeline import answer  # noqa: F401
from .evalharness import compute_report, load_ratings  # noqa: F401
