"""Orbit tracing, subset induction, window expansion, and test oracles.

The induction computation takes a generator set S and a finite window Y and
produces one partition of Y per generator subset: single generators by
linear-time orbit tracing, larger subsets as the meet of two smaller ones.
When the transforms act on all of Z^n rather than on Y itself, each entry is
corrected by recomputing on enlarged windows and restricting back until
consecutive restrictions agree; entries that never reach consensus within
the expansion cap are kept but flagged approximate.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .affine_id import hnf_rows
from .core import (AffineMap, FiniteSet, GeneratorSet, GenMeta, TableMap,
                   Window, identity_matrix)
from .partition import Partition, meet, restrict, translate_partition


@dataclass(frozen=True)
class ExpansionPolicy:
    """Window-growth search settings.

    delta_k is the consensus length (stop once that many consecutive
    restrictions agree), max_k caps the expansion factor, and center
    controls whether non-centered windows are first shifted to the origin
    when the generators make that exact ("auto") or never ("never").
    """

    delta_k: int = 1
    max_k: int = 8
    center: str = "auto"

    def __post_init__(self):
        if self.delta_k < 1:
            raise ValueError("delta_k must be at least 1")
        if self.max_k < 0:
            raise ValueError("max_k must be nonnegative")
        if self.center not in ("auto", "never"):
            raise ValueError("center must be 'auto' or 'never'")


def successor_indices(t, space):
    """Index of t(x) for every point of the space, -1 when t(x) falls out.

    One transform application per point, done in bulk.
    """
    if isinstance(t, TableMap):
        if t.size != len(space):
            raise ValueError("table size does not match the space")
        return list(t.forward)
    if not isinstance(space, Window):
        raise ValueError("affine maps need a window space")
    n = space.n
    if t.n != n:
        raise ValueError("dimension mismatch between transform and window")
    npts = len(space)
    st = space.strides()
    sizes = space.sizes
    lo, hi = space.lo, space.hi
    idx = np.arange(npts, dtype=np.int64)
    cols = []
    for i in range(n):
        c = (idx // st[i]) % sizes[i]
        cols.append(hi[i] - c if i == n - 1 else lo[i] + c)
    pts = np.stack(cols, axis=1)
    if t.matrix == identity_matrix(n):
        img = pts + np.asarray(t.offset, dtype=np.int64)
    else:
        img = pts @ np.asarray(t.matrix, dtype=np.int64).T \
            + np.asarray(t.offset, dtype=np.int64)
    ok = np.ones(npts, dtype=bool)
    out = np.zeros(npts, dtype=np.int64)
    for i in range(n):
        ok &= (img[:, i] >= lo[i]) & (img[:, i] <= hi[i])
        c = hi[i] - img[:, i] if i == n - 1 else img[:, i] - lo[i]
        out += c * st[i]
    return np.where(ok, out, -1).tolist()


def base_partition(t, space, counters=None):
    """Partition of the space into orbit pieces of a single transform.

    Forward orbit tracing: from each yet-unlabeled point, follow successors
    until the image leaves the space, closes the cycle, or hits a labeled
    point (whose label the whole trace then takes).  Every point is
    transformed exactly once and labeled exactly once; when counters is a
    dict it receives 'applications' (= space size) and 'traces' (number of
    fresh orbit traces started).
    """
    succ = successor_indices(t, space)
    npts = len(succ)
    labels = [-1] * npts
    next_label = 0
    traces = 0
    for start in range(npts):
        if labels[start] >= 0:
            continue
        traces += 1
        orbit = [start]
        push = orbit.append
        j = succ[start]
        while j >= 0:
            if j == start or labels[j] >= 0:
                break
            push(j)
            j = succ[j]
        if j >= 0 and j != start:
            lab = labels[j]
        else:
            lab = next_label
            next_label += 1
        for k in orbit:
            labels[k] = lab
    if counters is not None:
        counters["applications"] = counters.get("applications", 0) + npts
        counters["traces"] = counters.get("traces", 0) + traces
    return Partition(space, labels)


def orbit_partition_oracle(gens, space, expansion_bound=0):
    """Ground-truth partition by breadth-first closure.

    Two points of the space share a cell iff they are connected by
    generator or inverse-generator steps that stay inside the space grown by
    expansion_bound on every side.  Quadratic-ish and simple on purpose:
    this is the reference the fast path is checked against.
    """
    transforms = list(gens.transforms if isinstance(gens, GeneratorSet) else gens)
    if isinstance(space, Window) and expansion_bound:
        region = space.expand(expansion_bound)
    else:
        region = space
    npts = len(region)
    parent = list(range(npts))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for t in transforms:
        for i, j in enumerate(successor_indices(t, region)):
            if j >= 0:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj
    if region == space:
        return Partition(space, [find(i) for i in range(npts)])
    return Partition(space, [find(region.index(x)) for x in space.points()])


# ---------------------------------------------------------------------------
# subset pruning


def pruned_subset_count(n, tau):
    """Number of generator subsets kept when multi-period mixes are skipped.

    Counts subsets of the standard generating set that contain single-axis
    translation steps of at most one period: (2^(3n+1) - 2^(2n+1)) tau
    + 2^(2n+1).  Python integers do not overflow, so the guard is only on
    the argument range.
    """
    if n < 1 or tau < 1:
        raise ValueError("need n >= 1 and tau >= 1")
    return (2 ** (3 * n + 1) - 2 ** (2 * n + 1)) * tau + 2 ** (2 * n + 1)


def pruned_subset_masks(genset):
    """Bitmasks of the subsets kept by the at-most-one-period pruning.

    Generators with period metadata are grouped by period; a kept subset
    combines any subset of the remaining generators with a (possibly empty)
    choice of one period group's nonempty subset.  For generator sets where
    n = 1 collapsed duplicate members, the distinct-mask count is smaller
    than the symbolic counting formula.
    """
    by_period = {}
    others = []
    for i, m in enumerate(genset.meta):
        if m.period is not None:
            by_period.setdefault(m.period, []).append(i)
        else:
            others.append(i)
    other_masks = [0]
    for i in others:
        other_masks += [mask | (1 << i) for mask in other_masks]
    masks = list(other_masks)
    for period in sorted(by_period):
        group = by_period[period]
        group_masks = [0]
        for i in group:
            group_masks += [mask | (1 << i) for mask in group_masks]
        for gm in group_masks[1:]:
            masks += [om | gm for om in other_masks]
    masks = sorted(set(masks), key=lambda m: (bin(m).count("1"), m))
    return masks


# ---------------------------------------------------------------------------
# the induction computation


class _Level:
    """Partitions of generator subsets over one (possibly expanded) window."""

    def __init__(self, space, transforms):
        self.space = space
        self.transforms = transforms
        self.by_mask = {}
        self.split_used = {}

    def partition(self, mask, counters=None):
        cached = self.by_mask.get(mask)
        if cached is not None:
            return cached
        if mask == 0:
            part = Partition.finest(self.space)
        elif mask & (mask - 1) == 0:
            part = base_partition(self.transforms[mask.bit_length() - 1],
                                  self.space, counters)
        else:
            best = None
            bits = [b for b in range(mask.bit_length()) if mask >> b & 1]
            for b in bits:
                half, single = mask & ~(1 << b), 1 << b
                p1, p2 = self.by_mask.get(half), self.by_mask.get(single)
                if p1 is not None and p2 is not None:
                    cost = p1.cell_count * p2.cell_count
                    if best is None or cost < best[0]:
                        best = (cost, half, single)
            if best is None:
                b = bits[0]
                best = (0, mask & ~(1 << b), 1 << b)
            _, half, single = best
            part = meet(self.partition(half, counters),
                        self.partition(single, counters))
            self.split_used[mask] = (half, single)
        self.by_mask[mask] = part
        return part


class AbstractionFamily:
    """One partition of the target window per computed generator subset."""

    def __init__(self, genset, window, policy):
        self.genset = genset
        self.window = window
        self.policy = policy
        self.entries = {}
        self.provenance = {}
        self.expansion = {}
        self.approximate = set()

    def masks(self):
        return sorted(self.entries, key=lambda m: (bin(m).count("1"), m))

    def partition(self, mask):
        return self.entries[mask]

    def subset_name(self, mask):
        return self.genset.subset_name(mask)

    def items(self):
        return [(m, self.entries[m]) for m in self.masks()]

    def max_expansion(self):
        return max(self.expansion.values(), default=0)

    def duplicate_classes(self):
        groups = {}
        for m in self.masks():
            groups.setdefault(self.entries[m], []).append(m)
        return [v for v in groups.values() if len(v) > 1]

    def save(self, outdir):
        os.makedirs(os.path.join(outdir, "partitions"), exist_ok=True)
        from .core import generator_set_to_json_obj
        from .partition import save_partition
        manifest = {
            "generator_set": generator_set_to_json_obj(self.genset),
            "window": self.window.to_json_obj(),
            "policy": {"delta_k": self.policy.delta_k,
                       "max_k": self.policy.max_k,
                       "center": self.policy.center},
            "entries": [],
        }
        for mask in self.masks():
            fname = f"partitions/{mask}.json"
            save_partition(self.entries[mask], os.path.join(outdir, fname))
            manifest["entries"].append({
                "mask": mask,
                "subset": self.subset_name(mask),
                "file": fname,
                "cells": self.entries[mask].cell_count,
                "expansion_k": self.expansion.get(mask, 0),
                "approximate": mask in self.approximate,
            })
        with open(os.path.join(outdir, "manifest.json"), "w") as fh:
            json.dump(manifest, fh, indent=1, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, outdir):
        from .core import generator_set_from_json_obj, space_from_json_obj
        from .partition import load_partition
        with open(os.path.join(outdir, "manifest.json")) as fh:
            manifest = json.load(fh)
        genset = generator_set_from_json_obj(manifest["generator_set"])
        window = space_from_json_obj(manifest["window"])
        pol = manifest.get("policy", {})
        policy = ExpansionPolicy(delta_k=pol.get("delta_k", 1),
                                 max_k=pol.get("max_k", 8),
                                 center=pol.get("center", "auto"))
        fam = cls(genset, window, policy)
        for rec in manifest["entries"]:
            mask = rec["mask"]
            fam.entries[mask] = load_partition(os.path.join(outdir, rec["file"]))
            fam.expansion[mask] = rec.get("expansion_k", 0)
            if rec.get("approximate"):
                fam.approximate.add(mask)
        return fam


def _translations_span_unit_steps(genset):
    offsets = [t.offset for t in genset.transforms
               if isinstance(t, AffineMap) and t.matrix == identity_matrix(t.n)]
    if not offsets:
        return False
    n = len(offsets[0])
    basis = hnf_rows(offsets, n)
    return len(basis) == n and all(row[i] == 1 for i, row in enumerate(basis))


def _center_offset(window, genset, policy):
    """Shift that recenters the window when that is provably harmless."""
    if policy.center != "auto" or window.centered:
        return None
    if not genset.is_affine or not _translations_span_unit_steps(genset):
        return None
    if any((a + b) % 2 for a, b in zip(window.lo, window.hi)):
        return None
    return tuple(-(a + b) // 2 for a, b in zip(window.lo, window.hi))


def expand_and_restrict(genset, mask, window, policy=None, level_cache=None):
    """Partition of the window for one generator subset, corrected by
    computing on enlarged windows until consecutive restrictions agree.

    Returns (partition, k, exact): k is the expansion factor the result came
    from; exact is False when max_k ran out before a consensus of length
    delta_k was seen (the last restriction is returned in that case).
    """
    policy = policy or ExpansionPolicy()
    transforms = genset.transforms
    levels = level_cache if level_cache is not None else {}
    if not isinstance(window, Window):
        level = levels.setdefault(0, _Level(window, transforms))
        return level.partition(mask), 0, True
    if mask == 0:
        return Partition.finest(window), 0, True
    restrictions = []
    run = 0
    for k in range(policy.max_k + 1):
        level = levels.setdefault(k, _Level(window.expand(k), transforms))
        rk = restrict(level.partition(mask), window)
        if restrictions and rk == restrictions[-1]:
            run += 1
        else:
            run = 0
        restrictions.append(rk)
        if run >= policy.delta_k:
            return restrictions[k - policy.delta_k], k - policy.delta_k, True
    return restrictions[-1], policy.max_k, False


def induction_family(genset, window=None, policy=None, masks=None,
                     prune=False, jobs=1):
    """Compute the partition family over all (or the given) generator
    subsets of one window.

    Subsets are processed by increasing popcount so both halves of any meet
    are already cached; when prune is set only the at-most-one-period
    subsets are scheduled.  jobs > 1 computes same-popcount entries
    concurrently.
    """
    if len(genset) > 30:
        raise ValueError("generator sets above 30 elements exceed the mask bound")
    policy = policy or ExpansionPolicy()
    if window is None:
        if genset.is_affine or not len(genset):
            raise ValueError("a window is required for affine generator sets")
        window = FiniteSet(genset.dimension)
    if masks is None:
        if prune:
            masks = pruned_subset_masks(genset)
        else:
            masks = list(range(1 << len(genset)))
    masks = sorted(set(masks), key=lambda m: (bin(m).count("1"), m))

    work_window = window
    offset = None
    if isinstance(window, Window):
        offset = _center_offset(window, genset, policy)
        if offset is not None:
            work_window = window.translate(offset)

    fam = AbstractionFamily(genset, window, policy)
    levels = {}

    def compute(mask):
        part, k, exact = expand_and_restrict(genset, mask, work_window,
                                             policy, level_cache=levels)
        if offset is not None:
            part = translate_partition(part, tuple(-c for c in offset))
        fam.entries[mask] = part
        fam.expansion[mask] = k
        if not exact:
            fam.approximate.add(mask)
        if mask == 0:
            fam.provenance[mask] = ("empty",)
        elif mask & (mask - 1) == 0:
            fam.provenance[mask] = ("base", mask.bit_length() - 1)
        else:
            lev = levels.get(k)
            split = lev.split_used.get(mask) if lev is not None else None
            if split is None:
                split = (mask & (mask - 1), mask & -mask)
            fam.provenance[mask] = ("meet", split[0], split[1])

    by_pop = {}
    for m in masks:
        by_pop.setdefault(bin(m).count("1"), []).append(m)
    for pop in sorted(by_pop):
        group = by_pop[pop]
        if jobs > 1 and pop > 1 and len(group) > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                list(pool.map(compute, group))
        else:
            for m in group:
                compute(m)
    return fam


def surjectivity_witness(target):
    """A transposition generator set whose induced partition is the target.

    One adjacent-pair swap per consecutive pair inside each cell; the finest
    partition yields the empty set.
    """
    if not isinstance(target.space, FiniteSet):
        raise ValueError("witness construction needs an enumerated set")
    npts = len(target.space)
    transforms, meta = [], []
    for cell in target.cells:
        for a, b in zip(cell, cell[1:]):
            transforms.append(TableMap.swap(npts, a, b))
            meta.append(GenMeta(name=f"swap({a},{b})", kind="table"))
    return GeneratorSet(name="witness", transforms=tuple(transforms),
                        meta=tuple(meta))
