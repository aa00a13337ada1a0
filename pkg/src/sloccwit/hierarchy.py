"""Inclusion order of mixed-state classes derived from saturated overlaps.

An edge ``j -> i`` means the orbit of ``psi_j`` approximates ``psi_i``
arbitrarily well, so mixtures from class i are contained in those of class j.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .overlap import OverlapTable

NODE_NOTES = {"psi6": "GHZ-like", "psi7": "W-like"}


@dataclass(frozen=True)
class HierarchyGraph:
    nodes: tuple
    edges: frozenset
    reduced: bool = False

    @classmethod
    def from_mask(cls, ids, saturated, reduce=False):
        ids = tuple(str(s) for s in ids)
        sat = np.asarray(saturated, dtype=bool)
        edges = frozenset((ids[j], ids[i]) for j in range(len(ids)) for i in range(len(ids))
                          if i != j and sat[j, i])
        g = cls(ids, edges)
        return g.transitive_reduction() if reduce else g

    @classmethod
    def from_table(cls, table: OverlapTable, reduce=False):
        return cls.from_mask(table.ids, table.saturated_mask(), reduce)

    def successors(self, node):
        return sorted((b for a, b in self.edges if a == node), key=self.nodes.index)

    def reachable(self, node):
        seen, stack = set(), [node]
        while stack:
            for nxt in self.successors(stack.pop()):
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        seen.discard(node)
        return seen

    def transitive_reduction(self):
        """Drop ``a -> c`` whenever ``c`` is reachable from ``a`` through another successor.

        Mutual approximation (cycles) cannot occur between distinct classes, but
        if a table contains one, edges inside the cycle are kept.
        """
        keep = set()
        for a, c in self.edges:
            via = any(c in self.reachable(b) and a not in self.reachable(b)
                      for b in self.successors(a) if b != c)
            if not via:
                keep.add((a, c))
        return HierarchyGraph(self.nodes, frozenset(keep), True)

    def to_dot(self):
        lines = ["digraph slocc_hierarchy {"]
        if self.reduced:
            lines.append("  // transitive reduction")
        for n in self.nodes:
            note = NODE_NOTES.get(n)
            lines.append(f'  "{n}";' + (f"  // {note}" if note else ""))
        for a in self.nodes:
            for b in self.successors(a):
                lines.append(f'  "{a}" -> "{b}";')
        lines.append("}")
        return "\n".join(lines) + "\n"
