"""Three-tier centroid index over sealed pages.

Each sealed page is summarized by the mean of its key rows. Pages group
positionally into chunks (pages_per_chunk consecutive pages) and chunks into
grids; chunk and grid rows are exact means over their existing children.
Only centroid matrices are stored here, never KV payloads.
"""

import hashlib
import json
from dataclasses import dataclass

import numpy as np


def _checksum(matrix):
    return hashlib.sha256(np.ascontiguousarray(matrix).tobytes()).hexdigest()[:16]


@dataclass
class PageVector:
    v: np.ndarray
    page_logical_index: int


class HierarchyIndex:
    """Incrementally maintained page/chunk/grid centroid matrices.

    Accumulation is always float64 so the mean invariants hold to ~1e-15
    per element regardless of how keys were produced.
    """

    def __init__(self, dim, pages_per_chunk, chunks_per_grid):
        self.dim = dim
        self.pages_per_chunk = pages_per_chunk
        self.chunks_per_grid = chunks_per_grid
        self._page_rows = []
        self._chunk_sums = []  # sum of child page vectors
        self._chunk_counts = []
        self._grid_sums = []  # sum of child chunk centroids (kept in sync)
        self._grid_counts = []

    @classmethod
    def from_page_vectors(cls, rows, pages_per_chunk, chunks_per_grid):
        """Build an index directly from page vectors (no pooling step)."""
        rows = np.asarray(rows, dtype=np.float64)
        index = cls(rows.shape[1] if rows.size else 0, pages_per_chunk, chunks_per_grid)
        index._page_rows = [row for row in rows]
        for start in range(0, rows.shape[0], pages_per_chunk):
            group = rows[start : start + pages_per_chunk]
            index._chunk_sums.append(group.sum(axis=0))
            index._chunk_counts.append(group.shape[0])
        chunks = index.chunk_vectors
        for start in range(0, chunks.shape[0], chunks_per_grid):
            group = chunks[start : start + chunks_per_grid]
            index._grid_sums.append(group.sum(axis=0))
            index._grid_counts.append(group.shape[0])
        return index

    @property
    def num_pages(self):
        return len(self._page_rows)

    @property
    def num_chunks(self):
        return len(self._chunk_sums)

    @property
    def num_grids(self):
        return len(self._grid_sums)

    @property
    def page_vectors(self):
        if not self._page_rows:
            return np.zeros((0, self.dim))
        return np.asarray(self._page_rows)

    @property
    def chunk_vectors(self):
        if not self._chunk_sums:
            return np.zeros((0, self.dim))
        sums = np.asarray(self._chunk_sums)
        counts = np.asarray(self._chunk_counts, dtype=np.float64)
        return sums / counts[:, None]

    @property
    def grid_vectors(self):
        if not self._grid_sums:
            return np.zeros((0, self.dim))
        sums = np.asarray(self._grid_sums)
        counts = np.asarray(self._grid_counts, dtype=np.float64)
        return sums / counts[:, None]

    @property
    def page_to_chunk(self):
        return np.arange(self.num_pages) // self.pages_per_chunk

    @property
    def chunk_to_grid(self):
        return np.arange(self.num_chunks) // self.chunks_per_grid

    def finalize_page(self, page, logical_index):
        """Fold a freshly sealed page into the index.

        Pages must finalize in logical order; the parent chunk and grandparent
        grid centroids are updated to stay exact means over existing children.
        """
        if not page.sealed:
            raise ValueError("only sealed pages can be finalized")
        if logical_index != self.num_pages:
            raise ValueError(
                f"pages finalize in order: expected index {self.num_pages}, "
                f"got {logical_index}"
            )
        v = page.keys.astype(np.float64).mean(axis=0)
        self._page_rows.append(v)

        chunk = logical_index // self.pages_per_chunk
        grid = chunk // self.chunks_per_grid
        if chunk == len(self._chunk_sums):
            self._chunk_sums.append(v.copy())
            self._chunk_counts.append(1)
            centroid = self._chunk_sums[chunk] / self._chunk_counts[chunk]
            if grid == len(self._grid_sums):
                self._grid_sums.append(centroid.copy())
                self._grid_counts.append(1)
            else:
                self._grid_sums[grid] += centroid
                self._grid_counts[grid] += 1
        else:
            old_centroid = self._chunk_sums[chunk] / self._chunk_counts[chunk]
            self._chunk_sums[chunk] += v
            self._chunk_counts[chunk] += 1
            centroid = self._chunk_sums[chunk] / self._chunk_counts[chunk]
            self._grid_sums[grid] += centroid - old_centroid
        return PageVector(v=v, page_logical_index=logical_index)

    def coalesced_matrix(self):
        """Stacked (grid, chunk, page) rows plus the level split counts."""
        g, c, p = self.num_grids, self.num_chunks, self.num_pages
        if p == 0:
            return np.zeros((0, self.dim)), (0, 0, 0)
        v_all = np.concatenate(
            [self.grid_vectors, self.chunk_vectors, self.page_vectors], axis=0
        )
        return v_all, (g, c, p)

    def snapshot(self):
        """Compact golden-file record of the index state."""
        return {
            "pages_per_chunk": self.pages_per_chunk,
            "chunks_per_grid": self.chunks_per_grid,
            "num_pages": self.num_pages,
            "num_chunks": self.num_chunks,
            "num_grids": self.num_grids,
            "checksum_pages": _checksum(self.page_vectors),
            "checksum_chunks": _checksum(self.chunk_vectors),
            "checksum_grids": _checksum(self.grid_vectors),
        }

    def snapshot_json(self):
        return json.dumps(self.snapshot(), sort_keys=True)


def rebuild_from_scratch(pages, config):
    """Batch-build an index from sealed pages; oracle for incremental updates."""
    if pages:
        dim = pages[0].keys.shape[1]
    else:
        dim = 0
    index = HierarchyIndex(dim, config.pages_per_chunk, config.chunks_per_grid)
    for i, page in enumerate(pages):
        index.finalize_page(page, i)
    return index
