"""Sweep the analytical cost model over context length.

Prints KV-cache bytes against the constant weight traffic and the attention
share of per-step compute, including the length where attention crosses 50%.
"""

from pagesel import CostModelParams, cost_model_sweep

GIB = 2**30


def main():
    params = CostModelParams()
    print(f"model: {params.layers} layers, {params.heads} KV heads x "
          f"{params.head_dim}, {params.bytes_per_element} B/elem, "
          f"{params.weight_bytes / 1e9:.0f} GB weights")
    print(f"{'tokens':>8} {'kv GiB':>8} {'weights GiB':>12} {'attn ratio':>11}")
    crossing = None
    for row in cost_model_sweep(params, range(4096, 65537, 4096)):
        length = row["active_tokens"]
        print(f"{length:>8} {row['kv_bytes'] / GIB:>8.3f} "
              f"{row['weight_bytes'] / GIB:>12.3f} {row['attention_ratio']:>11.3f}")
        if crossing is None and row["attention_ratio"] > 0.5:
            crossing = length
    print(f"\nattention exceeds 50% of per-step flops at ~{crossing} tokens")


if __name__ == "__main__":
    main()
