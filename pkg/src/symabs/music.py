"""MIDI chord ingestion and closed-form concept labels.

Chords are integer MIDI vectors (middle C = 60).  Three concept levels are
supported: the pitch-class vector (per-coordinate octave classes, order
kept), the pitch-class multiset (order forgotten), and the transposition
class (uniform shifts forgotten too).  Labels are computed in closed form;
concept_chain_check validates them against the orbit engine on a window.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .core import AffineMap, GeneratorSet, GenMeta, Window, identity_matrix
from .engine import ExpansionPolicy, induction_family
from .infolattice import Measure
from .partition import Relation, relate

PITCH_NAMES = ("C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B")


class ConceptLevel(Enum):
    PITCH_CLASS_VECTOR = "s1"
    PITCH_CLASS_MULTISET = "s2"
    TRANSPOSITION_CLASS = "s3"


def pitch_name(m):
    return PITCH_NAMES[m % 12]


def canonical_label(chord, level, valid_range=None):
    """Text label such that two chords agree iff they share a concept cell.

    The transposition class is named by the lexicographically smallest
    uniform shift of its sorted pitch-class multiset.
    """
    chord = tuple(int(c) for c in chord)
    if valid_range is not None:
        a, b = valid_range
        if any(not a <= c <= b for c in chord):
            raise ValueError(f"chord {chord} outside range [{a},{b}]")
    if level is ConceptLevel.PITCH_CLASS_VECTOR:
        return "(" + ",".join(pitch_name(c) for c in chord) + ")"
    if level is ConceptLevel.PITCH_CLASS_MULTISET:
        return "{" + ",".join(sorted(pitch_name(c) for c in chord)) + "}"
    if level is ConceptLevel.TRANSPOSITION_CLASS:
        pcs = [c % 12 for c in chord]
        best = min(tuple(sorted((p + k) % 12 for p in pcs)) for k in range(12))
        return "T{" + ",".join(str(p) for p in best) + "}"
    raise ValueError(f"unknown level {level!r}")


def music_generator_set(n):
    """Octave steps, adjacent swaps, and the uniform half-step translation.

    Returns (generator_set, masks) where masks maps each ConceptLevel to the
    generator subset that induces it: octave steps alone, octave steps plus
    swaps, and all of the above plus the uniform translation.
    """
    transforms, meta = [], []
    for i in range(n):
        u = tuple(12 if j == i else 0 for j in range(n))
        transforms.append(AffineMap.translation(u))
        meta.append(GenMeta(name="t(" + ",".join(map(str, u)) + ")",
                            kind="translation", period=12))
    for i in range(n - 1):
        perm = [list(row) for row in identity_matrix(n)]
        perm[i], perm[i + 1] = perm[i + 1], perm[i]
        transforms.append(AffineMap.linear(tuple(tuple(r) for r in perm)))
        meta.append(GenMeta(name=f"swap({i + 1},{i + 2})", kind="permutation"))
    ones = (1,) * n
    transforms.append(AffineMap.translation(ones))
    meta.append(GenMeta(name="t(" + ",".join(map(str, ones)) + ")",
                        kind="translation"))
    genset = GeneratorSet(name=f"music(n={n})", transforms=tuple(transforms),
                          meta=tuple(meta))
    s1 = (1 << n) - 1
    s2 = (1 << (2 * n - 1)) - 1
    s3 = (1 << len(transforms)) - 1
    masks = {
        ConceptLevel.PITCH_CLASS_VECTOR: s1,
        ConceptLevel.PITCH_CLASS_MULTISET: s2,
        ConceptLevel.TRANSPOSITION_CLASS: s3,
    }
    return genset, masks


@dataclass
class ChainReport:
    window: Window
    cell_counts: dict
    expansion_k: dict
    failures: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.failures


def concept_chain_check(window, policy=None):
    """Compute the three concept partitions on a window and verify that the
    levels coarsen in order and that label equality matches cell equality."""
    n = window.n
    genset, masks = music_generator_set(n)
    policy = policy or ExpansionPolicy(max_k=14)
    fam = induction_family(genset, window, policy=policy,
                           masks=sorted(masks.values()))
    levels = list(ConceptLevel)
    report = ChainReport(
        window=window,
        cell_counts={lv: fam.entries[masks[lv]].cell_count for lv in levels},
        expansion_k={lv: fam.expansion[masks[lv]] for lv in levels},
    )
    for fine, coarse in zip(levels, levels[1:]):
        rel = relate(fam.entries[masks[fine]], fam.entries[masks[coarse]])
        if rel not in (Relation.FINER, Relation.EQUAL):
            report.failures.append(
                f"{fine.value} is not finer-or-equal than {coarse.value}: {rel.value}")
    for lv in levels:
        part = fam.entries[masks[lv]]
        label_of_cell = {}
        for idx, x in enumerate(window.points()):
            text = canonical_label(x, lv)
            cell = part.labels[idx]
            if label_of_cell.setdefault(cell, text) != text:
                report.failures.append(
                    f"{lv.value}: cell {cell} mixes labels "
                    f"{label_of_cell[cell]!r} and {text!r}")
        by_label = {}
        for cell, text in label_of_cell.items():
            if text in by_label:
                report.failures.append(
                    f"{lv.value}: label {text!r} spans cells "
                    f"{by_label[text]} and {cell}")
            by_label[text] = cell
    return report


def load_chords(path, n, center=False):
    """Read comma-separated integer chords of width n.

    Returns (chords, measure, offset): the empirical measure lives on the
    hypercube spanning the observed value range (one shared range across
    coordinates).  With center=True the window and the chords are shifted
    so the window is centered; offset records the shift applied.
    """
    chords = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != n:
                raise ValueError(
                    f"{path}:{lineno}: expected {n} values, got {len(parts)}")
            try:
                chords.append(tuple(int(p) for p in parts))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: malformed integer row") \
                    from None
    if not chords:
        raise ValueError(f"{path}: no data")
    lo = min(min(c) for c in chords)
    hi = max(max(c) for c in chords)
    offset = (0,) * n
    if center:
        mid = (lo + hi) // 2
        offset = (-mid,) * n
        chords = [tuple(c + offset[0] for c in chord) for chord in chords]
        lo, hi = lo + offset[0], hi + offset[0]
    window = Window((lo,) * n, (hi,) * n)
    counts = [0] * len(window)
    for chord in chords:
        counts[window.index(chord)] += 1
    return chords, Measure.from_counts(window, counts), offset


def label_table(chords, valid_range=None):
    """Tab-separated chord -> labels table, one row per chord."""
    lines = ["chord\ts1\ts2\ts3"]
    for chord in chords:
        lines.append("\t".join([
            ",".join(str(c) for c in chord),
            canonical_label(chord, ConceptLevel.PITCH_CLASS_VECTOR, valid_range),
            canonical_label(chord, ConceptLevel.PITCH_CLASS_MULTISET, valid_range),
            canonical_label(chord, ConceptLevel.TRANSPOSITION_CLASS, valid_range),
        ]))
    return "\n".join(lines) + "\n"
