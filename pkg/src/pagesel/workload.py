"""Synthetic decode workloads with planted relevance.

Background keys are i.i.d. random unit vectors, which in high dimension are
nearly orthogonal, so their pooled means carry little mutual signal. Relevant
pages add signal_strength times a shared unit direction to every key; keys of
the generated (anchor-window) tokens carry the same direction, so affinity
scoring should surface the planted pages. Token distributions are peaked
one-hot/uniform mixtures; scheduled instability pages alternate mixing
weights to raise both the mean and the variance of per-token entropy.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True)
class WorkloadSpec:
    seed: int = 0
    dim: int = 256
    context_pages: int = 128
    relevant_page_fraction: float = 0.02
    clustering: str = "clustered"  # or "scattered"
    signal_strength: float = 4.0
    generation_pages: int = 16
    instability_schedule: tuple = ()  # (generated_page_index, entropy_shift) pairs
    # Generated keys carry the signal at a fraction of the planted strength:
    # enough to align the anchor, without letting fresh pages crowd the
    # planted ones out of a tight semantic budget.
    gen_signal_factor: float = 0.5
    page_size: int = 32
    pages_per_chunk: int = 8
    vocab: int = 64

    def __post_init__(self):
        if self.clustering not in ("clustered", "scattered"):
            raise ConfigurationError(
                f"clustering must be 'clustered' or 'scattered', got {self.clustering!r}"
            )
        if not 0.0 <= self.relevant_page_fraction <= 1.0:
            raise ConfigurationError("relevant_page_fraction must be in [0, 1]")
        if self.signal_strength < 0:
            raise ConfigurationError("signal_strength must be >= 0")

    @property
    def workload_id(self):
        return (
            f"seed{self.seed}-d{self.dim}-ctx{self.context_pages}"
            f"-gen{self.generation_pages}-{self.clustering}"
        )


@dataclass
class Workload:
    spec: WorkloadSpec
    context_keys: np.ndarray  # [context tokens, dim]
    context_values: np.ndarray
    gen_keys: np.ndarray  # [generated tokens, dim]
    gen_values: np.ndarray
    gen_probs: np.ndarray  # [generated tokens, vocab]
    relevant_pages: frozenset
    signal_direction: np.ndarray = field(repr=False, default=None)


def _unit_rows(rng, n, dim):
    x = rng.standard_normal((n, dim))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def _place_relevant(rng, spec):
    n_rel = round(spec.relevant_page_fraction * spec.context_pages)
    if spec.relevant_page_fraction > 0:
        n_rel = max(n_rel, 1)
    n_rel = min(n_rel, spec.context_pages)
    if n_rel == 0:
        return frozenset()
    if spec.clustering == "scattered":
        picks = rng.choice(spec.context_pages, size=n_rel, replace=False)
        return frozenset(int(i) for i in picks)
    # Clustered: one contiguous run starting on a chunk boundary.
    n_chunks = max(1, (spec.context_pages - n_rel) // spec.pages_per_chunk + 1)
    start = int(rng.integers(n_chunks)) * spec.pages_per_chunk
    start = min(start, spec.context_pages - n_rel)
    return frozenset(range(start, start + n_rel))


def _mixture_probs(rng, lam, vocab):
    top = int(rng.integers(vocab))
    probs = np.full(vocab, lam / vocab)
    probs[top] += 1.0 - lam
    return probs


def generate_workload(spec):
    """Deterministic token stream plus the ground-truth relevant-page set."""
    rng = np.random.default_rng(spec.seed)
    dim, page = spec.dim, spec.page_size

    signal = _unit_rows(rng, 1, dim)[0]
    relevant = _place_relevant(rng, spec)

    n_ctx = spec.context_pages * page
    context_keys = _unit_rows(rng, n_ctx, dim)
    context_values = _unit_rows(rng, n_ctx, dim)
    for p in relevant:
        context_keys[p * page : (p + 1) * page] += spec.signal_strength * signal

    n_gen = spec.generation_pages * page
    gen_keys = _unit_rows(rng, n_gen, dim) + (
        spec.gen_signal_factor * spec.signal_strength
    ) * signal
    gen_values = _unit_rows(rng, n_gen, dim)

    unstable = {int(p): float(shift) for p, shift in spec.instability_schedule}
    gen_probs = np.zeros((n_gen, spec.vocab))
    for g in range(spec.generation_pages):
        shift = unstable.get(g)
        for t in range(page):
            lam = rng.uniform(0.01, 0.05)
            if shift is not None and t % 2 == 1:
                # Alternating near-uniform tokens: high mean entropy and
                # high varentropy at once.
                lam = min(0.98, 1.0 - np.exp(-shift))
            gen_probs[g * page + t] = _mixture_probs(rng, lam, spec.vocab)

    return Workload(
        spec=spec,
        context_keys=context_keys,
        context_values=context_values,
        gen_keys=gen_keys,
        gen_values=gen_values,
        gen_probs=gen_probs,
        relevant_pages=relevant,
        signal_direction=signal,
    )
