"""Page-aligned KV storage with logical page tables.

The store owns a fixed pool of physical pages. Sequences reference pages
through an ordered page table of physical ids; selection only ever edits
index lists, never page payloads. Every page carries a write-version counter
so the zero-copy contract is checkable: once a page seals, its version must
never change again.
"""

import json
import threading
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, OutOfPagesError


@dataclass
class AppendEvent:
    """Outcome of a single token append."""

    sealed: bool
    page_id: int
    logical_index: int  # position of the written page in the page table


class KvPage:
    """Fixed-size block of key/value rows; sealed (immutable) once full."""

    def __init__(self, page_id, page_size, dim):
        self.page_id = page_id
        self.page_size = page_size
        self._keys = np.zeros((page_size, dim), dtype=np.float64)
        self._values = np.zeros((page_size, dim), dtype=np.float64)
        self.fill = 0
        self.version = 0

    @property
    def sealed(self):
        return self.fill == self.page_size

    def write(self, key, value):
        if self.sealed:
            raise ValueError(f"page {self.page_id} is sealed")
        self._keys[self.fill] = key
        self._values[self.fill] = value
        self.fill += 1
        self.version += 1

    def _ro(self, arr):
        view = arr[: self.fill]
        view.flags.writeable = False
        return view

    @property
    def keys(self):
        """Read-only view of the filled key rows."""
        return self._ro(self._keys)

    @property
    def values(self):
        """Read-only view of the filled value rows."""
        return self._ro(self._values)

    def dump(self):
        """Serializable fixture record (row-major float64 payload)."""
        return {
            "page_id": self.page_id,
            "fill": self.fill,
            "keys": self._keys[: self.fill].ravel().tolist(),
            "values": self._values[: self.fill].ravel().tolist(),
        }


def page_from_record(record, page_size, dim):
    """Rebuild a KvPage from a dump() record (test-fixture path)."""
    page = KvPage(record["page_id"], page_size, dim)
    keys = np.asarray(record["keys"], dtype=np.float64).reshape(record["fill"], dim)
    values = np.asarray(record["values"], dtype=np.float64).reshape(record["fill"], dim)
    for k, v in zip(keys, values):
        page.write(k, v)
    return page


def dump_pages(pages, path):
    """Write page records as JSON lines."""
    with open(path, "w") as fh:
        for page in pages:
            fh.write(json.dumps(page.dump()) + "\n")


@dataclass
class SequenceState:
    """Per-sequence logical view: ordered page table plus counters."""

    page_table: list = field(default_factory=list)
    token_count: int = 0
    sink_count: int = 0


class PagedKvStore:
    """Physical page pool shared by independent sequences.

    Allocation is serialized by a lock; one writer per sequence is assumed,
    while sealed pages may be read concurrently.
    """

    def __init__(self, capacity_pages, dim, page_size=32):
        if capacity_pages < 1:
            raise ConfigurationError(
                f"store capacity must be >= 1 page, got {capacity_pages}"
            )
        self.capacity_pages = capacity_pages
        self.dim = dim
        self.page_size = page_size
        self._pages = {}
        self._free = deque(range(capacity_pages))
        self._lock = threading.Lock()

    def create_sequence(self, config=None):
        """New empty sequence; sinks sized from config if given."""
        sink = config.sink_pages if config is not None else 0
        return SequenceState(sink_count=sink)

    def _allocate(self):
        with self._lock:
            if not self._free:
                raise OutOfPagesError(
                    f"page pool exhausted ({self.capacity_pages} pages)"
                )
            pid = self._free.popleft()
        page = KvPage(pid, self.page_size, self.dim)
        self._pages[pid] = page
        return page

    def page(self, page_id):
        return self._pages[page_id]

    def append_token(self, seq, key, value):
        """Write one token to the sequence tail, allocating a page if needed."""
        if not seq.page_table or self._pages[seq.page_table[-1]].sealed:
            page = self._allocate()
            seq.page_table.append(page.page_id)
        else:
            page = self._pages[seq.page_table[-1]]
        page.write(key, value)
        seq.token_count += 1
        return AppendEvent(
            sealed=page.sealed,
            page_id=page.page_id,
            logical_index=len(seq.page_table) - 1,
        )

    def gather_pages(self, seq, logical_indices):
        """Physical ids for the given logical positions; index lookup only."""
        table = seq.page_table
        out = []
        for i in logical_indices:
            if not 0 <= i < len(table):
                raise IndexError(
                    f"logical index {i} out of range for {len(table)}-page table"
                )
            out.append(table[i])
        return out

    def sealed_versions(self, seq):
        """page_id -> version for every sealed page of the sequence."""
        return {
            pid: self._pages[pid].version
            for pid in seq.page_table
            if self._pages[pid].sealed
        }
