"""Page-aligned KV-cache selection with hierarchical semantic indexing."""

from .config import PRESETS, SelectionConfig, preset_config
from .costmodel import CostModelParams, cost_model_step, cost_model_sweep
from .errors import (
    CalibrationError,
    ConfigurationError,
    EmptyContextError,
    OutOfPagesError,
    PageSelError,
)
from .hierarchy import HierarchyIndex, PageVector, rebuild_from_scratch
from .kv_store import AppendEvent, KvPage, PagedKvStore, SequenceState
from .runconfig import RunConfig
from .selection import (
    QueryAnchor,
    WorkingSet,
    compute_anchor,
    hierarchical_prune,
    oracle_flat_topk,
    reconstruct_working_set,
    score_all,
)
from .simulate import (
    RunReport,
    StepRecord,
    collect_page_uncertainties,
    run_decode_loop,
    selection_overhead_profile,
)
from .uncertainty import (
    PageUncertainty,
    TriggerThresholds,
    calibrate,
    check_trigger,
    entropy,
    load_thresholds,
    page_uncertainty,
    save_thresholds,
)
from .workload import Workload, WorkloadSpec, generate_workload

__all__ = [
    "AppendEvent",
    "CalibrationError",
    "ConfigurationError",
    "CostModelParams",
    "EmptyContextError",
    "HierarchyIndex",
    "KvPage",
    "OutOfPagesError",
    "PRESETS",
    "PageSelError",
    "PageUncertainty",
    "PageVector",
    "PagedKvStore",
    "QueryAnchor",
    "RunConfig",
    "RunReport",
    "SelectionConfig",
    "SequenceState",
    "StepRecord",
    "TriggerThresholds",
    "Workload",
    "WorkingSet",
    "WorkloadSpec",
    "calibrate",
    "check_trigger",
    "collect_page_uncertainties",
    "compute_anchor",
    "cost_model_step",
    "cost_model_sweep",
    "entropy",
    "generate_workload",
    "hierarchical_prune",
    "load_thresholds",
    "oracle_flat_topk",
    "page_uncertainty",
    "preset_config",
    "rebuild_from_scratch",
    "reconstruct_working_set",
    "run_decode_loop",
    "save_thresholds",
    "score_all",
    "selection_overhead_profile",
]
