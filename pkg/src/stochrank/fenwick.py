"""Binary indexed tree over 0-based slots with integer counts."""

from __future__ import annotations

import numpy as np


class FenwickTree:
    def __init__(self, size: int):
        if size < 0:
            raise ValueError("size must be non-negative")
        self.size = size
        self._tree = np.zeros(size + 1, dtype=np.int64)
        self.total = 0

    def add(self, index: int, delta: int) -> None:
        """Add ``delta`` to slot ``index`` (0-based)."""
        if not 0 <= index < self.size:
            raise IndexError(index)
        self.total += delta
        tree = self._tree
        j = index + 1
        while j <= self.size:
            tree[j] += delta
            j += j & -j

    def prefix(self, index: int) -> int:
        """Sum of slots ``0..index`` inclusive; 0 when ``index < 0``."""
        tree = self._tree
        j = min(index, self.size - 1) + 1
        s = 0
        while j > 0:
            s += tree[j]
            j -= j & -j
        return int(s)

    def count_above(self, index: int) -> int:
        """Sum of slots strictly after ``index``."""
        return self.total - self.prefix(index)
