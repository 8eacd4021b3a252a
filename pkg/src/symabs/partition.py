"""Partitions of finite spaces and their algebra.

A partition labels every point of a window (or enumerated set) with a cell
id.  Labels are canonical: cells are numbered by first occurrence in the
space's enumeration order, so equality is a plain tuple comparison.
Partitions are immutable; meet, join, restriction, and group action all
return new values.
"""

from __future__ import annotations

import json
from enum import Enum

from .core import AffineMap, TableMap, apply, space_from_json_obj


class Relation(Enum):
    EQUAL = "equal"
    COARSER = "coarser"
    FINER = "finer"
    INCOMPARABLE = "incomparable"


def _canonical(labels):
    remap = {}
    out = []
    for lab in labels:
        new = remap.get(lab)
        if new is None:
            new = remap[lab] = len(remap)
        out.append(new)
    return tuple(out), len(remap)


class Partition:
    """A labeling of a finite space's points into disjoint nonempty cells."""

    __slots__ = ("space", "labels", "cell_count", "_cells")

    def __init__(self, space, labels):
        labels = list(labels)
        if len(labels) != len(space):
            raise ValueError(
                f"need {len(space)} labels, got {len(labels)}")
        self.space = space
        self.labels, self.cell_count = _canonical(labels)
        self._cells = None

    @classmethod
    def finest(cls, space):
        return cls(space, range(len(space)))

    @classmethod
    def coarsest(cls, space):
        return cls(space, [0] * len(space))

    @classmethod
    def from_cells(cls, space, cells):
        labels = [None] * len(space)
        for c, cell in enumerate(cells):
            for x in cell:
                idx = space.index(x)
                if labels[idx] is not None:
                    raise ValueError(f"point {x} appears in two cells")
                labels[idx] = c
        if any(l is None for l in labels):
            raise ValueError("cells do not cover the space")
        return cls(space, labels)

    @property
    def cells(self):
        """Per-cell point-index tuples, in cell-id order."""
        if self._cells is None:
            buckets = [[] for _ in range(self.cell_count)]
            for idx, lab in enumerate(self.labels):
                buckets[lab].append(idx)
            self._cells = tuple(tuple(b) for b in buckets)
        return self._cells

    def cell_points(self, label):
        return tuple(self.space.point_at(i) for i in self.cells[label])

    def __eq__(self, other):
        return isinstance(other, Partition) and \
            self.space == other.space and self.labels == other.labels

    def __hash__(self):
        return hash((self.space, self.labels))

    def __len__(self):
        return self.cell_count

    def __repr__(self):
        return f"Partition({self.cell_count} cells over {len(self.labels)} points)"

    def to_json_obj(self):
        return {"window": self.space.to_json_obj(), "labels": list(self.labels)}


def partition_from_json_obj(obj):
    space = space_from_json_obj(obj["window"])
    labels = obj["labels"]
    if len(labels) != len(space):
        raise ValueError("label count does not match the window size")
    if any(not isinstance(l, int) or l < 0 for l in labels):
        raise ValueError("labels must be nonnegative integers")
    used = set(labels)
    if used != set(range(len(used))):
        raise ValueError("labels must be dense in [0, cellCount)")
    return Partition(space, labels)


def save_partition(p, path):
    with open(path, "w") as fh:
        json.dump(p.to_json_obj(), fh, sort_keys=True)
        fh.write("\n")


def load_partition(path):
    with open(path) as fh:
        return partition_from_json_obj(json.load(fh))


def _check_same_space(p, q):
    if p.space != q.space:
        raise ValueError("partitions are over different spaces")


def meet(p, q, trace=None):
    """Finest common coarsening of p and q.

    Walks q's cells in label order, merging every current p-cell that the
    q-cell touches.  When trace is a list, one record is appended per outer
    iteration: (q-cell point indices, tuple of the touched current cells as
    sorted point-index tuples, before merging).
    """
    _check_same_space(p, q)
    parent = list(range(p.cell_count))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    contents = None
    if trace is not None:
        contents = {r: list(cell) for r, cell in enumerate(p.cells)}
    plabels = p.labels
    for qcell in q.cells:
        roots = []
        for idx in qcell:
            r = find(plabels[idx])
            if r not in roots:
                roots.append(r)
        if trace is not None:
            trace.append((qcell,
                          tuple(tuple(sorted(contents[r])) for r in roots)))
        r0 = roots[0]
        for r in roots[1:]:
            parent[r] = r0
            if contents is not None:
                contents[r0].extend(contents.pop(r))
    return Partition(p.space, [find(l) for l in plabels])


def join(p, q):
    """Coarsest common refinement: points share a cell iff they do in both."""
    _check_same_space(p, q)
    pairs = {}
    labels = []
    for pl, ql in zip(p.labels, q.labels):
        key = pl * q.cell_count + ql
        lab = pairs.get(key)
        if lab is None:
            lab = pairs[key] = len(pairs)
        labels.append(lab)
    return Partition(p.space, labels)


def relate(p, q):
    """Compare two partitions of one space in the coarsening order.

    COARSER means p is coarser than q (every q-cell sits inside one p-cell).
    One pass over the point labels, tracking the contingency structure
    sparsely.
    """
    _check_same_space(p, q)
    if p.labels == q.labels:
        return Relation.EQUAL
    p_of_q = [-1] * q.cell_count
    q_of_p = [-1] * p.cell_count
    q_inside_p = True
    p_inside_q = True
    for pl, ql in zip(p.labels, q.labels):
        if q_inside_p:
            seen = p_of_q[ql]
            if seen == -1:
                p_of_q[ql] = pl
            elif seen != pl:
                q_inside_p = False
        if p_inside_q:
            seen = q_of_p[pl]
            if seen == -1:
                q_of_p[pl] = ql
            elif seen != ql:
                p_inside_q = False
        if not q_inside_p and not p_inside_q:
            return Relation.INCOMPARABLE
    if q_inside_p:
        return Relation.COARSER
    return Relation.FINER


def restrict(p, sub):
    """Restriction of p to a sub-window: nonempty cell intersections."""
    if sub == p.space:
        return p
    if not hasattr(p.space, "contains_window") or \
            not p.space.contains_window(sub):
        raise ValueError("restriction target is not contained in the window")
    return Partition(sub, [p.labels[p.space.index(x)] for x in sub.points()])


def act_on(g, p):
    """The image partition {g . cell}; g must map the space onto itself."""
    space = p.space
    n = len(space)
    labels = [None] * n
    for idx, x in enumerate(space.points()):
        y = apply(g, x)
        if y not in space:
            raise ValueError(
                f"transform does not stabilize the space: {x} -> {y}")
        labels[space.index(y)] = p.labels[idx]
    return Partition(space, labels)


def translate_partition(p, v):
    """The same cell structure over the window shifted by v."""
    new_space = p.space.translate(v)
    q = Partition.__new__(Partition)
    q.space = new_space
    q.labels = p.labels
    q.cell_count = p.cell_count
    q._cells = None
    return q
