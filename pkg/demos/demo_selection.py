"""Walk through one selection pass, from raw tokens to the working set.

Builds a paged store with a planted-relevance workload, pools page vectors
into the three-tier index, scores everything with a single matrix product,
and prints what the cascade keeps at each level.
"""

import math

import numpy as np

from pagesel import (
    HierarchyIndex,
    PagedKvStore,
    WorkloadSpec,
    compute_anchor,
    generate_workload,
    hierarchical_prune,
    oracle_flat_topk,
    preset_config,
    reconstruct_working_set,
    score_all,
)


def main():
    config = preset_config("aggressive")
    spec = WorkloadSpec(
        seed=0,
        dim=512,
        context_pages=256,
        relevant_page_fraction=0.01,
        clustering="clustered",
        signal_strength=4.0,
        generation_pages=4,
    )
    load = generate_workload(spec)
    print(f"planted relevant pages: {sorted(load.relevant_pages)}")

    store = PagedKvStore(300, spec.dim, page_size=config.page_size)
    seq = store.create_sequence(config)
    index = HierarchyIndex(spec.dim, config.pages_per_chunk, config.chunks_per_grid)

    keys = np.concatenate([load.context_keys, load.gen_keys])
    values = np.concatenate([load.context_values, load.gen_values])
    for k, v in zip(keys, values):
        event = store.append_token(seq, k, v)
        if event.sealed:
            index.finalize_page(store.page(event.page_id), event.logical_index)

    g, c, p = index.num_grids, index.num_chunks, index.num_pages
    print(f"hierarchy: {g} grids, {c} chunks, {p} pages "
          f"({p * config.page_size} tokens)")

    anchor = compute_anchor(index, None, config)
    v_all, splits = index.coalesced_matrix()
    scores = score_all(anchor, v_all, splits)
    selected = hierarchical_prune(
        *scores, index.page_to_chunk, index.chunk_to_grid, config
    )
    print(f"cascade keeps {len(selected)} pages "
          f"({len(selected) / p:.1%} of the cache): {selected.tolist()}")

    flat = oracle_flat_topk(anchor, index.page_vectors, len(selected))
    print(f"exhaustive top-{len(selected)} oracle:    {flat.tolist()}")

    ws = reconstruct_working_set(selected, seq, config)
    tags = {t: sum(1 for v in ws.provenance.values() if v == t)
            for t in ("sink", "window", "semantic")}
    print(f"working set: {len(ws)} pages ({tags})")
    hits = load.relevant_pages & set(ws.pages)
    print(f"recall of planted pages: {len(hits)}/{len(load.relevant_pages)}")
    print(f"semantic budget vs ratio product: {len(selected) / p:.4f} vs "
          f"{math.prod(config.ratios):.4f}")


if __name__ == "__main__":
    main()
