"""Dag with an eagerly maintained full transitive closure.

Nodes are added in what callers guarantee to be a topological order, so the
closure can be kept as one growable bit row per node and every edge insertion
propagates reachability with wide bitwise ORs. ``reach`` is strict: a node
never reaches itself.
"""

from __future__ import annotations

from .errors import InvariantError, UsageError


class ReachDag:
    def __init__(self) -> None:
        self._rows: list[int] = []  # _rows[i] bit j set <=> i reaches j

    def __len__(self) -> int:
        return len(self._rows)

    def add_node(self) -> int:
        self._rows.append(0)
        return len(self._rows) - 1

    def add_edge(self, src: int, dst: int) -> None:
        rows = self._rows
        n = len(rows)
        if not (0 <= src < n and 0 <= dst < n):
            raise UsageError(f"unknown node in edge {src}->{dst}")
        # Callers only add edges along execution order; a cycle means the
        # caller's bookkeeping is broken, not that the input was bad.
        if src == dst:
            raise InvariantError(f"self edge on node {src}")
        if (rows[dst] >> src) & 1:
            raise InvariantError(f"edge {src}->{dst} would close a cycle")
        new_bits = rows[dst] | (1 << dst)
        src_bit = 1 << src
        for i in range(n):
            if i == src or rows[i] & src_bit:
                rows[i] |= new_bits

    def reach(self, a: int, b: int) -> bool:
        n = len(self._rows)
        if not (0 <= a < n and 0 <= b < n):
            raise UsageError(f"unknown node in reach({a}, {b})")
        return bool((self._rows[a] >> b) & 1)

    def row(self, a: int) -> int:
        """Reachability row of ``a`` as a bitmask (test hook)."""
        return self._rows[a]
