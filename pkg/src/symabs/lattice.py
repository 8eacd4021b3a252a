"""Coarsening-order DAG over a family of partitions.

completeHierarchy deduplicates extensionally equal partitions, determines
all pairwise order relations (using subset-monotonicity preseeding and
transitive closure to skip contingency queries), and emits the Hasse
reduction.  Edges run finer -> coarser; the DOT export repeats that
convention in a header comment since both arrow directions are in use in
the wild.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .core import FiniteSet
from .partition import Partition, Relation, relate


def bell_number(k):
    """Number of partitions of a k-element set, by the Bell triangle."""
    if k < 0 or k > 20:
        raise ValueError("bell_number supports 0 <= k <= 20")
    row = [1]
    for _ in range(k):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]


def enumerate_all_partitions(set_size):
    """Every partition of {0..set_size-1}, as restricted-growth labelings."""
    if not 1 <= set_size <= 5:
        raise ValueError("exhaustive enumeration supports sizes 1..5")
    space = FiniteSet(set_size)
    out = []

    def grow(labels, used):
        if len(labels) == set_size:
            out.append(Partition(space, labels))
            return
        for lab in range(used + 1):
            grow(labels + [lab], max(used, lab + 1))

    grow([0], 1)
    return out


@dataclass
class DagNode:
    id: int
    partition: Partition
    labels: tuple
    cell_count: int


@dataclass
class AbstractionDag:
    nodes: list
    edges: list  # (finer_node_id, coarser_node_id), Hasse-reduced
    relation_queries: int = 0

    def node_by_label(self, label):
        for node in self.nodes:
            if label in node.labels:
                return node
        raise KeyError(label)

    def to_json_obj(self):
        return {
            "edge_convention": "finer->coarser",
            "nodes": [{"id": n.id, "labels": list(n.labels),
                       "cells": n.cell_count} for n in self.nodes],
            "edges": [list(e) for e in self.edges],
        }

    def to_dot(self):
        lines = [
            "// edge u -> v means: u is finer than v (v is the coarser abstraction)",
            "digraph hierarchy {",
            "  rankdir=BT;",
        ]
        for node in self.nodes:
            label = "\\n".join(list(node.labels) + [f"{node.cell_count} cells"])
            lines.append(f'  n{node.id} [label="{label}"];')
        for u, v in self.edges:
            lines.append(f"  n{u} -> n{v};")
        lines.append("}")
        return "\n".join(lines) + "\n"

    def save(self, dot_path=None, json_path=None):
        if dot_path:
            with open(dot_path, "w") as fh:
                fh.write(self.to_dot())
        if json_path:
            with open(json_path, "w") as fh:
                json.dump(self.to_json_obj(), fh, indent=1, sort_keys=True)
                fh.write("\n")


def _normalize_family(family):
    """-> list of (label, partition, mask or None)."""
    if hasattr(family, "entries") and hasattr(family, "subset_name"):
        return [(family.subset_name(m), family.entries[m], m)
                for m in family.masks()]
    if isinstance(family, dict):
        return [(str(k), p, k if isinstance(k, int) else None)
                for k, p in family.items()]
    out = []
    for i, item in enumerate(family):
        if isinstance(item, Partition):
            out.append((f"P{i}", item, None))
        else:
            label, part = item
            out.append((str(label), part, label if isinstance(label, int) else None))
    return out


def hasse_reduce(edges, node_count=None):
    """Drop exactly the edges implied by 2+ step paths; reject cycles."""
    edges = sorted(set(tuple(e) for e in edges))
    nodes = sorted({u for e in edges for u in e})
    if node_count is not None:
        nodes = sorted(set(nodes) | set(range(node_count)))
    adj = {u: [] for u in nodes}
    indeg = {u: 0 for u in nodes}
    for u, v in edges:
        adj[u].append(v)
        indeg[v] += 1
    order = [u for u in nodes if indeg[u] == 0]
    topo = []
    pending = dict(indeg)
    queue = list(order)
    while queue:
        u = queue.pop()
        topo.append(u)
        for v in adj[u]:
            pending[v] -= 1
            if pending[v] == 0:
                queue.append(v)
    if len(topo) != len(nodes):
        raise ValueError("relation contains a cycle; corrupted input")
    reach = {u: set() for u in nodes}
    for u in reversed(topo):
        for v in adj[u]:
            reach[u].add(v)
            reach[u] |= reach[v]
    kept = []
    for u, v in edges:
        if not any(w != v and v in reach[w] for w in adj[u]):
            kept.append((u, v))
    return kept


def complete_hierarchy(family, use_shortcuts=True):
    """Build the Hasse-reduced coarsening DAG of a partition family.

    Extensionally equal partitions collapse to one node carrying all their
    subset labels.  With shortcuts enabled, relations implied by generator
    subset inclusion or by transitivity are not queried; the number of
    contingency-table queries actually made is reported on the result.
    """
    items = _normalize_family(family)
    if not items:
        return AbstractionDag([], [])
    node_of = {}
    nodes = []
    masks_of = []
    for label, part, mask in items:
        nid = node_of.get(part)
        if nid is None:
            nid = node_of[part] = len(nodes)
            nodes.append(DagNode(nid, part, (label,), part.cell_count))
            masks_of.append([])
        else:
            nodes[nid] = DagNode(nid, nodes[nid].partition,
                                 nodes[nid].labels + (label,),
                                 nodes[nid].cell_count)
        if mask is not None:
            masks_of[nid].append(mask)
    m = len(nodes)
    finer = [set() for _ in range(m)]  # finer[u] = nodes strictly coarser than u

    def add_known(u, v):
        # u strictly finer than v; keep the closure current
        if v in finer[u]:
            return
        finer[u].add(v)
        finer[u] |= finer[v]
        for w in range(m):
            if u in finer[w]:
                finer[w].add(v)
                finer[w] |= finer[v]

    queries = 0
    if use_shortcuts:
        for u in range(m):
            for v in range(m):
                if u != v and any(mu | mv == mv for mu in masks_of[u]
                                  for mv in masks_of[v]):
                    # fewer generators -> finer; distinct nodes make it strict
                    add_known(u, v)
    for u in range(m):
        for v in range(u + 1, m):
            if use_shortcuts and (v in finer[u] or u in finer[v]):
                continue
            queries += 1
            rel = relate(nodes[u].partition, nodes[v].partition)
            if rel is Relation.FINER:
                add_known(u, v)
            elif rel is Relation.COARSER:
                add_known(v, u)
    edges = [(u, v) for u in range(m) for v in sorted(finer[u])]
    reduced = hasse_reduce(edges, node_count=m)
    return AbstractionDag(nodes, reduced, relation_queries=queries)
