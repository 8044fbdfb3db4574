"""Analytical per-step I/O and compute model for long-context decoding.

The defaults describe an 8B-class GQA model in bfloat16: 32 layers, 8 KV
heads of dimension 128, 4 query heads per KV head. With those numbers a
12288-token context holds exactly 1.5 GiB of KV state (128 KiB per token).
KV traffic grows linearly with the active context L while weight traffic is
constant, so the attention share of per-step compute rises monotonically
toward 1.
"""

import csv
from dataclasses import dataclass


@dataclass(frozen=True)
class CostModelParams:
    layers: int = 32
    heads: int = 8  # KV heads per layer
    head_dim: int = 128
    hidden_dim: int = 4096
    vocab: int = 151936
    bytes_per_element: int = 2
    weight_bytes: int = 16_000_000_000
    query_groups: int = 4  # query heads per KV head (GQA)

    def __post_init__(self):
        for name in (
            "layers",
            "heads",
            "head_dim",
            "hidden_dim",
            "vocab",
            "bytes_per_element",
            "weight_bytes",
            "query_groups",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


def cost_model_step(params, active_tokens):
    """Modeled bytes moved and flops for one decode step over L active tokens."""
    if active_tokens < 1:
        raise ValueError("active_tokens must be >= 1")
    kv_bytes = (
        2  # keys and values
        * params.layers
        * params.heads
        * params.head_dim
        * active_tokens
        * params.bytes_per_element
    )
    # QK^T plus AV over the prefix, 2 flops per multiply-accumulate each.
    attention_flops = (
        4
        * params.layers
        * params.heads
        * params.query_groups
        * params.head_dim
        * active_tokens
    )
    linear_flops = 2 * params.weight_bytes // params.bytes_per_element
    return {
        "kv_bytes": kv_bytes,
        "weight_bytes": params.weight_bytes,
        "attention_flops": attention_flops,
        "linear_flops": linear_flops,
        "attention_ratio": attention_flops / (attention_flops + linear_flops),
    }


def cost_model_sweep(params, lengths):
    """One model evaluation per context length, as plot-ready rows."""
    rows = []
    for length in lengths:
        row = {"active_tokens": length}
        row.update(cost_model_step(params, length))
        rows.append(row)
    return rows


def write_sweep_csv(rows, path):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
