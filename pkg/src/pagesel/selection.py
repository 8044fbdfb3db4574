"""Anchor construction, affinity scoring and the hierarchical pruning cascade.

Scoring is one matrix-vector product over the coalesced centroid matrix.
Each level keeps the top ceil(rho * active) entries among children of
surviving parents; ties break toward the lower (earlier) index. The final
context is the union of the semantic pages, the attention sinks and the
recent window, in positional order.
"""

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyContextError


@dataclass
class QueryAnchor:
    """Mean of the last-window page vectors (unsealed tail pooled over fill)."""

    v: np.ndarray
    source_pages: list

    def checksum(self):
        return hashlib.sha256(np.ascontiguousarray(self.v).tobytes()).hexdigest()[:16]


@dataclass
class WorkingSet:
    """Strictly increasing logical page indices plus a per-page reason tag."""

    pages: list
    provenance: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.pages)

    def __contains__(self, idx):
        return idx in self.provenance


def compute_anchor(index, tail, config):
    """Average the most recent page vectors into a query anchor.

    The unsealed tail page, when non-empty, counts as the last effective page
    with a mean over its filled rows only.
    """
    vectors = list(index.page_vectors)
    sources = list(range(index.num_pages))
    if tail is not None and tail.fill > 0 and not tail.sealed:
        vectors.append(tail.keys.astype(np.float64).mean(axis=0))
        sources.append(index.num_pages)
    if not vectors:
        raise EmptyContextError("no tokens to anchor on")
    w = min(config.window_pages, len(vectors))
    window = np.asarray(vectors[-w:])
    return QueryAnchor(v=window.mean(axis=0), source_pages=sources[-w:])


def score_all(anchor, v_all, split_points):
    """Score every hierarchy row against the anchor in one product, then split."""
    g, c, p = split_points
    if v_all.shape[0] == 0:
        empty = np.zeros(0)
        return empty, empty, empty
    if v_all.shape[1] != anchor.v.shape[0]:
        raise ValueError(
            f"dimension mismatch: matrix has {v_all.shape[1]} columns, "
            f"anchor has {anchor.v.shape[0]}"
        )
    scores = v_all @ anchor.v
    return scores[:g], scores[g : g + c], scores[g + c :]


def _top_k(scores, k, active=None):
    """Indices of the k best scores, ties to the lower index.

    Only entries flagged active compete; inactive entries are never selected
    (equivalent to masking them to -inf, which stays correct for negative
    scores where zeroing would not).
    """
    candidates = np.flatnonzero(active) if active is not None else np.arange(len(scores))
    if k <= 0 or len(candidates) == 0:
        return np.zeros(0, dtype=np.intp)
    order = np.argsort(-scores[candidates], kind="stable")
    return candidates[order[: min(k, len(candidates))]]


def hierarchical_prune(s_g, s_c, s_p, page_to_chunk, chunk_to_grid, config):
    """Top-down cascade: grids, then chunks of kept grids, then their pages.

    Returns the selected logical page indices in increasing order.
    """
    n_grids, n_pages = len(s_g), len(s_p)
    if n_pages == 0:
        return np.zeros(0, dtype=np.intp)

    keep_g = _top_k(s_g, math.ceil(config.rho_grid * n_grids))
    grid_mask = np.zeros(n_grids, dtype=bool)
    grid_mask[keep_g] = True

    active_c = grid_mask[chunk_to_grid]
    keep_c = _top_k(s_c, math.ceil(config.rho_chunk * active_c.sum()), active_c)
    chunk_mask = np.zeros(len(s_c), dtype=bool)
    chunk_mask[keep_c] = True

    active_p = chunk_mask[page_to_chunk]
    keep_p = _top_k(s_p, math.ceil(config.rho_page * active_p.sum()), active_p)
    return np.sort(keep_p)


def oracle_flat_topk(anchor, v_p, k):
    """Exhaustive top-k pages by affinity; same tie-break, same output order."""
    n = v_p.shape[0]
    if k > n:
        raise ValueError(f"k={k} exceeds page count {n}")
    if k <= 0 or n == 0:
        return np.zeros(0, dtype=np.intp)
    scores = v_p @ anchor.v
    order = np.argsort(-scores, kind="stable")
    return np.sort(order[:k])


def reconstruct_working_set(selected, seq, config):
    """Union semantic pages with sinks and the recent window.

    Provenance keeps the strongest reason per page: sink > window > semantic.
    """
    n = len(seq.page_table)
    provenance = {}
    for idx in selected:
        provenance[int(idx)] = "semantic"
    for idx in range(max(0, n - config.window_pages), n):
        provenance[idx] = "window"
    for idx in range(min(seq.sink_count, n)):
        provenance[idx] = "sink"
    pages = sorted(provenance)
    return WorkingSet(pages=pages, provenance=provenance)


def trace_record(step, anchor, index, selected_g, selected_c, working_set):
    """JSON-lines record of one selection pass (consumed by report tooling)."""
    semantic = [p for p, tag in working_set.provenance.items() if tag == "semantic"]
    return {
        "step": step,
        "anchor_checksum": anchor.checksum(),
        "counts": {
            "G": index.num_grids,
            "C": index.num_chunks,
            "P": index.num_pages,
            "selected_g": int(selected_g),
            "selected_c": int(selected_c),
            "selected_p": len(semantic),
        },
        "working_set": working_set.pages,
        "provenance": {str(k): v for k, v in sorted(working_set.provenance.items())},
    }
