"""Measure-annotated partitions and the teacher/student rule loop.

A measure attaches point weights to a window; projecting it through a
partition gives a cell distribution.  The teacher scans a partition family
for the largest Kullback-Leibler gap between a target measure and the
student's current measure; the student then rebuilds itself as the
maximum-entropy distribution matching every extracted rule, by iterative
proportional fitting (a single rule has a closed form and is returned
exactly).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .core import SymabsError
from .partition import Partition

_NORM_TOL = 1e-12
_TIE_TOL = 1e-9


class InfeasibleRulesError(SymabsError):
    """The rule constraints admit no joint distribution."""


@dataclass(frozen=True)
class Measure:
    """Nonnegative point weights over a space, summing to one."""

    space: object
    weights: tuple

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        if len(w) != len(self.space):
            raise ValueError("one weight per point required")
        if any(x < 0 for x in w):
            raise ValueError("weights must be nonnegative")
        if abs(sum(w) - 1.0) > _NORM_TOL:
            raise ValueError("weights must sum to 1")
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, space):
        n = len(space)
        return cls(space, (1.0 / n,) * n)

    @classmethod
    def from_counts(cls, space, counts):
        total = float(sum(counts))
        if total <= 0:
            raise ValueError("counts must have positive total")
        return cls(space, tuple(c / total for c in counts))

    @classmethod
    def point_mass(cls, space, index):
        w = [0.0] * len(space)
        w[index] = 1.0
        return cls(space, w)


def project(measure, partition):
    """Cell masses of the measure under the partition."""
    if measure.space != partition.space:
        raise ValueError("measure and partition are over different spaces")
    out = [0.0] * partition.cell_count
    for idx, w in enumerate(measure.weights):
        out[partition.labels[idx]] += w
    return tuple(out)


def entropy(dist):
    """Shannon entropy in bits, with 0 log 0 = 0."""
    return -sum(p * math.log2(p) for p in dist if p > 0.0)


def kl_divergence(target, student):
    """KL(target || student) in bits; +inf where the student lacks support."""
    total = 0.0
    for t, s in zip(target, student):
        if t == 0.0:
            continue
        if s == 0.0:
            return math.inf
        total += t * math.log2(t / s)
    return total


def conditional_entropy(p, q, measure):
    """H of p's cell variable given q's, under the measure."""
    joint = {}
    for idx, w in enumerate(measure.weights):
        if w > 0.0:
            key = (p.labels[idx], q.labels[idx])
            joint[key] = joint.get(key, 0.0) + w
    return entropy(joint.values()) - entropy(project(measure, q))


def info_metric(p, q, measure):
    """The entropy distance H(p|q) + H(q|p) between two partitions."""
    return conditional_entropy(p, q, measure) + conditional_entropy(q, p, measure)


def info_leq(coarse, fine, measure):
    """Measure-aware order: every positive-mass cell of `fine` sits inside
    one cell of `coarse`, ignoring mass-zero points."""
    if coarse.space != fine.space or measure.space != fine.space:
        raise ValueError("arguments are over different spaces")
    seen = {}
    for idx, w in enumerate(measure.weights):
        if w <= 0.0:
            continue
        fl = fine.labels[idx]
        cl = coarse.labels[idx]
        if seen.setdefault(fl, cl) != cl:
            return False
    return True


@dataclass(frozen=True)
class Rule:
    """A partition together with the cell distribution the student must hit."""

    partition: Partition
    target: tuple

    def __post_init__(self):
        t = tuple(float(x) for x in self.target)
        if len(t) != self.partition.cell_count:
            raise ValueError("one target mass per cell required")
        object.__setattr__(self, "target", t)


class TeacherPick(NamedTuple):
    index: int
    partition: Partition
    divergence: float


def teacher_pick(target, student, family):
    """The family member exposing the largest statistical gap.

    Ties (within a small relative tolerance, including the all-infinite
    case) break toward fewer cells, then the lower family index.
    """
    if not family:
        raise ValueError("family must be non-empty")
    best = None
    for idx, part in enumerate(family):
        d = kl_divergence(project(target, part), project(student, part))
        if best is None:
            best = TeacherPick(idx, part, d)
            continue
        if math.isinf(d) and math.isinf(best.divergence):
            tied = True
        elif math.isinf(d) or math.isinf(best.divergence):
            tied = False
        else:
            tied = abs(d - best.divergence) <= _TIE_TOL * max(1.0, abs(d),
                                                              abs(best.divergence))
        if tied:
            if part.cell_count < best.partition.cell_count:
                best = TeacherPick(idx, part, d)
        elif d > best.divergence:
            best = TeacherPick(idx, part, d)
    return best


def student_update(rules, space, tol=1e-10, max_sweeps=10000):
    """Maximum-entropy measure matching every rule's cell distribution.

    No rules: uniform.  One rule: the closed form (uniform within each cell,
    scaled to the rule's mass).  Otherwise iterative proportional fitting in
    rule order until the worst marginal error is below tol; failure to get
    there raises InfeasibleRulesError.
    """
    n = len(space)
    if not rules:
        return Measure.uniform(space)
    if len(rules) == 1:
        rule = rules[0]
        w = [0.0] * n
        for lab, cell in enumerate(rule.partition.cells):
            share = rule.target[lab] / len(cell)
            for idx in cell:
                w[idx] = share
        return Measure(space, _renormalize(w))
    w = [1.0 / n] * n
    err = math.inf
    for _ in range(max_sweeps):
        for rule in rules:
            cur = [0.0] * rule.partition.cell_count
            for idx, x in enumerate(w):
                cur[rule.partition.labels[idx]] += x
            factors = []
            for c, y in zip(cur, rule.target):
                if y == 0.0:
                    factors.append(0.0)
                elif c == 0.0:
                    raise InfeasibleRulesError(
                        "rules force positive mass onto an empty region")
                else:
                    factors.append(y / c)
            for idx in range(n):
                w[idx] *= factors[rule.partition.labels[idx]]
        err = 0.0
        for rule in rules:
            cur = [0.0] * rule.partition.cell_count
            for idx, x in enumerate(w):
                cur[rule.partition.labels[idx]] += x
            err = max(err, max(abs(c - y) for c, y in zip(cur, rule.target)))
        if err < tol:
            return Measure(space, _renormalize(w))
    raise InfeasibleRulesError(
        f"no feasible point: residual {err:g} after {max_sweeps} sweeps")


def _renormalize(w):
    total = sum(w)
    return [x / total for x in w]


def learn_loop(target, family, max_rules, eps):
    """Alternate teacher picks and student updates.

    Stops after max_rules rules or once the best remaining divergence drops
    below eps.  Returns (rules, trace); each trace record carries the
    iteration number, the picked family index, the divergence that
    triggered the rule, and the student's entropy after applying it.
    """
    space = target.space
    student = student_update([], space)
    rules = []
    trace = []
    for k in range(1, max_rules + 1):
        pick = teacher_pick(target, student, family)
        if pick.divergence < eps:
            break
        rules.append(Rule(pick.partition, project(target, pick.partition)))
        student = student_update(rules, space)
        trace.append({
            "k": k,
            "subset": pick.index,
            "divergence": pick.divergence,
            "studentEntropy": entropy(student.weights),
        })
    return rules, trace
