"""Synthetic decode-loop harness.

Drives store -> index -> selector -> uncertainty page by page on a generated
workload, reconstructing the working set whenever the chosen policy fires,
and records recall/budget/trigger statistics against the planted ground
truth. No model runs here; distributions come from the workload.
"""

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .config import SelectionConfig  # noqa: F401  (re-exported for callers)
from .errors import ConfigurationError
from .hierarchy import HierarchyIndex
from .kv_store import PagedKvStore
from .selection import (
    compute_anchor,
    hierarchical_prune,
    reconstruct_working_set,
    score_all,
)
from .uncertainty import check_trigger, entropy, page_uncertainty
from .workload import generate_workload


@dataclass
class StepRecord:
    step: int  # generated-page index
    working_set_size: int
    budget_fraction_semantic: float
    budget_fraction_total: float
    recall: float
    precision: float
    trigger_fired: bool
    selection_ops: int
    attention_ops: int


@dataclass
class RunReport:
    steps: list = field(default_factory=list)
    trigger_count: int = 0
    mean_recall: float = 0.0
    mean_precision: float = 0.0
    mean_budget_semantic: float = 0.0
    mean_budget_total: float = 0.0
    mean_inter_trigger_gap: float = 0.0
    zero_copy_ok: bool = True

    def summary(self):
        return {
            "steps": len(self.steps),
            "trigger_count": self.trigger_count,
            "mean_recall": self.mean_recall,
            "mean_precision": self.mean_precision,
            "mean_budget_semantic": self.mean_budget_semantic,
            "mean_budget_total": self.mean_budget_total,
            "mean_inter_trigger_gap": self.mean_inter_trigger_gap,
            "zero_copy_ok": self.zero_copy_ok,
        }

    def write_jsonl(self, path):
        with open(path, "w") as fh:
            for rec in self.steps:
                fh.write(json.dumps(asdict(rec)) + "\n")

    def write_csv(self, path):
        import csv

        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(asdict(self.steps[0]).keys()))
            writer.writeheader()
            writer.writerows(asdict(rec) for rec in self.steps)


def parse_policy(policy):
    """Normalize a policy spec to ('dynamic'|'never'|'always'|'fixed', interval)."""
    if isinstance(policy, tuple):
        return policy
    if policy in ("dynamic", "never", "always"):
        return (policy, None)
    if policy.startswith("fixed(") and policy.endswith(")"):
        interval = int(policy[6:-1])
        if interval < 1:
            raise ConfigurationError("fixed interval must be >= 1 page")
        return ("fixed", interval)
    raise ConfigurationError(
        f"unknown policy {policy!r}; expected dynamic, never, always or fixed(N)"
    )


def page_entropies(probs_block):
    """Per-token Shannon entropies for one page of distributions."""
    return [entropy(row) for row in probs_block]


def collect_page_uncertainties(spec):
    """Uncertainty statistics for every generated page (calibration path)."""
    load = generate_workload(spec)
    page = spec.page_size
    out = []
    for g in range(spec.generation_pages):
        block = load.gen_probs[g * page : (g + 1) * page]
        out.append(page_uncertainty(page_entropies(block)))
    return out


def run_decode_loop(spec, config, policy, thresholds=None, trigger_mode="joint"):
    """Simulate prefill plus page-by-page generation under a trigger policy."""
    kind, interval = parse_policy(policy)
    if kind == "dynamic" and thresholds is None:
        raise ConfigurationError("policy 'dynamic' needs calibrated thresholds")
    if spec.page_size != config.page_size:
        raise ConfigurationError("workload and selection page sizes differ")
    if spec.pages_per_chunk != config.pages_per_chunk:
        raise ConfigurationError("workload and selection chunk fan-outs differ")

    load = generate_workload(spec)
    page = config.page_size
    total_pages = spec.context_pages + spec.generation_pages
    store = PagedKvStore(total_pages + 1, spec.dim, page_size=page)
    seq = store.create_sequence(config)
    index = HierarchyIndex(spec.dim, config.pages_per_chunk, config.chunks_per_grid)
    versions_at_seal = {}

    def append_block(keys, values):
        for k, v in zip(keys, values):
            ev = store.append_token(seq, k, v)
            if ev.sealed:
                index.finalize_page(store.page(ev.page_id), ev.logical_index)
                versions_at_seal[ev.page_id] = store.page(ev.page_id).version

    def run_selection():
        anchor = compute_anchor(index, None, config)
        v_all, splits = index.coalesced_matrix()
        s_g, s_c, s_p = score_all(anchor, v_all, splits)
        selected = hierarchical_prune(
            s_g, s_c, s_p, index.page_to_chunk, index.chunk_to_grid, config
        )
        ops = v_all.shape[0] * (spec.dim + 1)  # one GEMV plus per-row compares
        return selected, ops

    append_block(load.context_keys, load.context_values)

    pending_ops = 0
    if kind == "never":
        semantic = np.arange(index.num_pages)
    else:
        semantic, pending_ops = run_selection()

    relevant = load.relevant_pages
    report = RunReport()
    trigger_pages = []

    for g in range(spec.generation_pages):
        lo, hi = g * page, (g + 1) * page
        append_block(load.gen_keys[lo:hi], load.gen_values[lo:hi])
        block_entropy = page_entropies(load.gen_probs[lo:hi])
        stats = page_uncertainty(block_entropy)

        if kind == "never":
            fired = False
        elif kind == "always":
            fired = True
        elif kind == "fixed":
            fired = (g + 1) % interval == 0
        else:
            fired = check_trigger(stats, thresholds, mode=trigger_mode)

        step_ops = pending_ops
        pending_ops = 0
        if fired:
            semantic, ops = run_selection()
            step_ops += ops
            trigger_pages.append(g)

        sealed = index.num_pages
        if kind == "never":
            semantic = np.arange(sealed)
        ws = reconstruct_working_set(semantic, seq, config)
        hits = len(relevant & set(ws.pages))
        recall = hits / len(relevant) if relevant else 1.0
        precision = hits / len(ws) if len(ws) else 0.0
        attention_ops = page * 2 * len(ws) * page * spec.dim
        report.steps.append(
            StepRecord(
                step=g,
                working_set_size=len(ws),
                budget_fraction_semantic=min(1.0, len(semantic) / sealed),
                budget_fraction_total=min(1.0, len(ws) / sealed),
                recall=recall,
                precision=precision,
                trigger_fired=fired,
                selection_ops=step_ops,
                attention_ops=attention_ops,
            )
        )

    for pid, version in versions_at_seal.items():
        if store.page(pid).version != version:
            report.zero_copy_ok = False

    steps = report.steps
    if steps:
        report.mean_recall = float(np.mean([s.recall for s in steps]))
        report.mean_precision = float(np.mean([s.precision for s in steps]))
        report.mean_budget_semantic = float(
            np.mean([s.budget_fraction_semantic for s in steps])
        )
        report.mean_budget_total = float(
            np.mean([s.budget_fraction_total for s in steps])
        )
    report.trigger_count = len(trigger_pages)
    report.mean_inter_trigger_gap = spec.generation_pages / max(1, len(trigger_pages))
    return report


def selection_overhead_profile(report):
    """Modeled fraction of per-run work spent on selection rather than attention."""
    sel = sum(s.selection_ops for s in report.steps)
    attn = sum(s.attention_ops for s in report.steps)
    if sel + attn == 0:
        return 0.0
    return sel / (sel + attn)
