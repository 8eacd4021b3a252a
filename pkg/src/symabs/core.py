"""Spaces, transforms, and generator sets.

Everything in this module is exact integer arithmetic: points are tuples of
ints, affine maps are integer matrix/offset pairs invertible over the
integers, and table maps are index bijections over a finite enumerated set.
No floats anywhere, so orbit equality is always exact.  All objects are
immutable and hashable and can be shared freely across workers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product


class SymabsError(Exception):
    """Base class for package errors."""


class BudgetExceededError(SymabsError):
    """A closure grew past its budget; the query is undecidable within it."""


def _as_ivec(v):
    return tuple(int(c) for c in v)


def _as_imat(m):
    return tuple(tuple(int(c) for c in row) for row in m)


def identity_matrix(n):
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def mat_vec(a, x):
    return tuple(sum(row[j] * x[j] for j in range(len(x))) for row in a)


def mat_mul(a, b):
    n = len(a)
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n))
        for i in range(n)
    )


def vec_add(u, v):
    return tuple(a + b for a, b in zip(u, v))


def vec_neg(u):
    return tuple(-a for a in u)


def det(a):
    """Exact integer determinant (fraction-free Bareiss)."""
    n = len(a)
    m = [list(row) for row in a]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def mat_inv(a):
    """Exact inverse of an integer matrix with determinant +-1."""
    n = len(a)
    work = [[Fraction(a[i][j]) for j in range(n)] + [Fraction(int(i == j)) for j in range(n)]
            for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if work[r][col] != 0), None)
        if piv is None:
            raise ValueError("matrix is singular")
        work[col], work[piv] = work[piv], work[col]
        pv = work[col][col]
        work[col] = [x / pv for x in work[col]]
        for r in range(n):
            if r != col and work[r][col] != 0:
                f = work[r][col]
                work[r] = [x - f * y for x, y in zip(work[r], work[col])]
    inv = []
    for i in range(n):
        row = []
        for j in range(n, 2 * n):
            x = work[i][j]
            if x.denominator != 1:
                raise ValueError("matrix is not invertible over the integers")
            row.append(int(x))
        inv.append(tuple(row))
    return tuple(inv)


def is_orthogonal(a):
    n = len(a)
    at = tuple(tuple(a[j][i] for j in range(n)) for i in range(n))
    return mat_mul(at, a) == identity_matrix(n)


def is_permutation_matrix(a):
    return all(sorted(row) == [0] * (len(a) - 1) + [1] for row in a) and \
        all(sorted(col) == [0] * (len(a) - 1) + [1]
            for col in zip(*a))


def classify_kind(matrix, offset):
    n = len(matrix)
    if matrix == identity_matrix(n):
        return "translation" if any(offset) else "identity"
    if all(matrix[i][j] == 0 for i in range(n) for j in range(n) if i != j) \
            and all(matrix[i][i] in (1, -1) for i in range(n)):
        return "negation"
    if is_permutation_matrix(matrix):
        return "permutation"
    if is_orthogonal(matrix):
        return "orthogonal"
    return "general"


# ---------------------------------------------------------------------------
# spaces


@dataclass(frozen=True)
class Window:
    """A finite axis-aligned box in Z^n with inclusive per-axis bounds.

    Points enumerate in display order: the last axis runs top-down (hi to lo)
    as the slowest index while the remaining axes run lo to hi, first axis
    fastest.  index() and point_at() are inverse bijections between points
    and range(len(self)).
    """

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo, hi = _as_ivec(self.lo), _as_ivec(self.hi)
        if not lo or len(lo) != len(hi):
            raise ValueError("lo and hi must be nonempty vectors of equal length")
        if any(a > b for a, b in zip(lo, hi)):
            raise ValueError(f"empty window: lo={lo} hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def n(self):
        return len(self.lo)

    @property
    def sizes(self):
        return tuple(b - a + 1 for a, b in zip(self.lo, self.hi))

    def __len__(self):
        npts = 1
        for s in self.sizes:
            npts *= s
        return npts

    def strides(self):
        st, acc = [], 1
        for s in self.sizes:
            st.append(acc)
            acc *= s
        return tuple(st)

    def __contains__(self, x):
        return len(x) == self.n and \
            all(a <= c <= b for c, a, b in zip(x, self.lo, self.hi))

    def index(self, x):
        if x not in self:
            raise ValueError(f"point {x} outside window {self.lo}..{self.hi}")
        st = self.strides()
        last = self.n - 1
        idx = (self.hi[last] - x[last]) * st[last]
        for i in range(last):
            idx += (x[i] - self.lo[i]) * st[i]
        return idx

    def point_at(self, idx):
        st, sizes = self.strides(), self.sizes
        last = self.n - 1
        coords = []
        for i in range(self.n):
            c = (idx // st[i]) % sizes[i]
            coords.append(self.hi[i] - c if i == last else self.lo[i] + c)
        return tuple(coords)

    def points(self):
        last = self.n - 1
        axes = [range(self.hi[last], self.lo[last] - 1, -1)]
        axes += [range(self.lo[i], self.hi[i] + 1) for i in range(last - 1, -1, -1)]
        for rev in product(*axes):
            yield rev[::-1]

    def expand(self, k):
        return Window(tuple(a - k for a in self.lo), tuple(b + k for b in self.hi))

    def translate(self, v):
        return Window(vec_add(self.lo, v), vec_add(self.hi, v))

    @property
    def centered(self):
        return all(a == -b for a, b in zip(self.lo, self.hi))

    def contains_window(self, other):
        return other.n == self.n and \
            all(a <= c and d <= b for a, b, c, d
                in zip(self.lo, self.hi, other.lo, other.hi))

    def to_json_obj(self):
        return {"lo": list(self.lo), "hi": list(self.hi)}


@dataclass(frozen=True)
class FiniteSet:
    """An enumerated set {0, ..., size-1}; points are plain ints."""

    size: int

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("size must be positive")

    def __len__(self):
        return self.size

    def __contains__(self, x):
        return isinstance(x, int) and 0 <= x < self.size

    def index(self, x):
        if x not in self:
            raise ValueError(f"point {x} outside set of size {self.size}")
        return x

    def point_at(self, idx):
        return idx

    def points(self):
        return iter(range(self.size))

    def to_json_obj(self):
        return {"size": self.size}


def space_from_json_obj(obj):
    if "size" in obj:
        return FiniteSet(int(obj["size"]))
    return Window(tuple(obj["lo"]), tuple(obj["hi"]))


# ---------------------------------------------------------------------------
# transforms


@dataclass(frozen=True)
class AffineMap:
    """x -> Ax + u on Z^n, with A invertible over the integers."""

    matrix: tuple
    offset: tuple

    def __post_init__(self):
        a = _as_imat(self.matrix)
        u = _as_ivec(self.offset)
        n = len(u)
        if len(a) != n or any(len(row) != n for row in a):
            raise ValueError("matrix must be square and match the offset dimension")
        if det(a) not in (1, -1):
            raise ValueError("matrix must be invertible over the integers")
        object.__setattr__(self, "matrix", a)
        object.__setattr__(self, "offset", u)

    @property
    def n(self):
        return len(self.offset)

    @property
    def kind(self):
        return classify_kind(self.matrix, self.offset)

    @property
    def is_identity(self):
        return self.matrix == identity_matrix(self.n) and not any(self.offset)

    @classmethod
    def identity(cls, n):
        return cls(identity_matrix(n), (0,) * n)

    @classmethod
    def translation(cls, u):
        u = _as_ivec(u)
        return cls(identity_matrix(len(u)), u)

    @classmethod
    def linear(cls, a):
        a = _as_imat(a)
        return cls(a, (0,) * len(a))


@dataclass(frozen=True)
class TableMap:
    """A bijection of {0, ..., size-1} given by its forward lookup table."""

    forward: tuple

    def __post_init__(self):
        fwd = _as_ivec(self.forward)
        if sorted(fwd) != list(range(len(fwd))):
            raise ValueError("forward table is not a bijection")
        object.__setattr__(self, "forward", fwd)

    @property
    def size(self):
        return len(self.forward)

    @property
    def backward(self):
        back = [0] * self.size
        for i, j in enumerate(self.forward):
            back[j] = i
        return tuple(back)

    @property
    def is_identity(self):
        return all(i == j for i, j in enumerate(self.forward))

    @classmethod
    def identity(cls, size):
        return cls(tuple(range(size)))

    @classmethod
    def swap(cls, size, a, b):
        fwd = list(range(size))
        fwd[a], fwd[b] = b, a
        return cls(tuple(fwd))


def apply(t, x):
    """Apply a transform to a point."""
    if isinstance(t, AffineMap):
        if len(x) != t.n:
            raise ValueError(f"dimension mismatch: point {x} vs transform n={t.n}")
        return vec_add(mat_vec(t.matrix, x), t.offset)
    if isinstance(t, TableMap):
        if not 0 <= x < t.size:
            raise ValueError(f"index {x} outside table domain of size {t.size}")
        return t.forward[x]
    raise TypeError(f"not a transform: {t!r}")


def compose(t1, t2):
    """The transform mapping x to t1(t2(x))."""
    if isinstance(t1, AffineMap) and isinstance(t2, AffineMap):
        if t1.n != t2.n:
            raise ValueError("dimension mismatch in composition")
        return AffineMap(mat_mul(t1.matrix, t2.matrix),
                         vec_add(t1.offset, mat_vec(t1.matrix, t2.offset)))
    if isinstance(t1, TableMap) and isinstance(t2, TableMap):
        if t1.size != t2.size:
            raise ValueError("domain size mismatch in composition")
        return TableMap(tuple(t1.forward[j] for j in t2.forward))
    raise ValueError("cannot compose transforms from different families")


def invert(t):
    if isinstance(t, AffineMap):
        ainv = mat_inv(t.matrix)
        return AffineMap(ainv, vec_neg(mat_vec(ainv, t.offset)))
    if isinstance(t, TableMap):
        return TableMap(t.backward)
    raise TypeError(f"not a transform: {t!r}")


# ---------------------------------------------------------------------------
# generator sets


@dataclass(frozen=True)
class GenMeta:
    """Bookkeeping attached to one generator.

    period is set on single-axis translation powers (the step length along
    the axis); the subset pruning in the engine groups generators by it.
    """

    name: str
    kind: str
    period: int | None = None


@dataclass(frozen=True)
class GeneratorSet:
    """A named, ordered set of transforms of one family and one dimension.

    raw_size records the symbolic pre-deduplication count when the set was
    built from a formula that can collide at small n.
    """

    name: str
    transforms: tuple
    meta: tuple = ()
    raw_size: int | None = None

    def __post_init__(self):
        ts = tuple(self.transforms)
        meta = tuple(self.meta)
        if not meta:
            meta = tuple(
                GenMeta(name=f"g{i}", kind=_kind_of(t)) for i, t in enumerate(ts)
            )
        if len(meta) != len(ts):
            raise ValueError("one metadata entry per generator required")
        families = {type(t) for t in ts}
        if len(families) > 1:
            raise ValueError("affine and table transforms cannot mix in one set")
        if ts:
            dims = {t.n if isinstance(t, AffineMap) else t.size for t in ts}
            if len(dims) > 1:
                raise ValueError("all generators must share one dimension")
        if len(set(ts)) != len(ts):
            raise ValueError("generator set contains extensional duplicates")
        object.__setattr__(self, "transforms", ts)
        object.__setattr__(self, "meta", meta)

    def __len__(self):
        return len(self.transforms)

    def __iter__(self):
        return iter(self.transforms)

    def __getitem__(self, i):
        return self.transforms[i]

    @property
    def is_affine(self):
        return all(isinstance(t, AffineMap) for t in self.transforms)

    @property
    def dimension(self):
        if not self.transforms:
            return None
        t = self.transforms[0]
        return t.n if isinstance(t, AffineMap) else t.size

    def subset_name(self, mask):
        names = [self.meta[i].name for i in range(len(self)) if mask >> i & 1]
        return "{" + ",".join(names) + "}"

    def names(self):
        return tuple(m.name for m in self.meta)


def _kind_of(t):
    if isinstance(t, AffineMap):
        return t.kind
    return "table"


def _vec_name(u):
    return "t(" + ",".join(str(c) for c in u) + ")"


def standard_generators(n, tau):
    """The stock generating set for isometries of Z^n with period bound tau.

    Contents, in order: axis translations of step 1..tau, the all-ones
    translation, the single-axis negations, full negation, and adjacent
    coordinate swaps.  The symbolic count is (tau+2)n+1; extensional
    duplicates (possible at n=1) are removed and the symbolic count is kept
    in raw_size.
    """
    if n < 1 or tau < 1:
        raise ValueError("need n >= 1 and tau >= 1")
    entries = []
    for alpha in range(1, tau + 1):
        for i in range(n):
            u = tuple(alpha if j == i else 0 for j in range(n))
            entries.append((AffineMap.translation(u),
                            GenMeta(_vec_name(u), "translation", period=alpha)))
    ones = (1,) * n
    entries.append((AffineMap.translation(ones),
                    GenMeta(_vec_name(ones), "translation")))
    for i in range(n):
        diag = tuple(tuple((-1 if j == i else 1) if j == k else 0
                           for k in range(n)) for j in range(n))
        entries.append((AffineMap.linear(diag),
                        GenMeta(f"neg({i + 1})", "negation")))
    neg_all = tuple(tuple(-1 if j == k else 0 for k in range(n)) for j in range(n))
    entries.append((AffineMap.linear(neg_all), GenMeta("neg(all)", "negation")))
    for i in range(n - 1):
        perm = [list(row) for row in identity_matrix(n)]
        perm[i], perm[i + 1] = perm[i + 1], perm[i]
        entries.append((AffineMap.linear(tuple(tuple(r) for r in perm)),
                        GenMeta(f"swap({i + 1},{i + 2})", "permutation")))
    raw_size = len(entries)
    assert raw_size == (tau + 2) * n + 1
    seen, transforms, meta = set(), [], []
    for t, m in entries:
        if t in seen:
            continue
        seen.add(t)
        transforms.append(t)
        meta.append(m)
    return GeneratorSet(name=f"standard(n={n},tau={tau})",
                        transforms=tuple(transforms), meta=tuple(meta),
                        raw_size=raw_size)


def closure(transforms, budget=10000, include_identity=True):
    """All finite products of the given transforms and their inverses.

    Raises BudgetExceededError when the generated group grows past budget.
    """
    transforms = list(transforms)
    gens = []
    for t in transforms:
        if t not in gens:
            gens.append(t)
        ti = invert(t)
        if ti not in gens:
            gens.append(ti)
    elems = set(gens)
    if include_identity and transforms:
        t0 = transforms[0]
        ident = (AffineMap.identity(t0.n) if isinstance(t0, AffineMap)
                 else TableMap.identity(t0.size))
        elems.add(ident)
    frontier = list(elems)
    while frontier:
        new = []
        for a in gens:
            for b in frontier:
                c = compose(a, b)
                if c not in elems:
                    elems.add(c)
                    new.append(c)
                    if len(elems) > budget:
                        raise BudgetExceededError(
                            f"closure exceeded budget {budget}; "
                            "undecidable within budget")
        frontier = new
    return elems


def is_minimal_generating_set(genset, budget=10000):
    """True iff no generator lies in the group generated by the others."""
    ts = list(genset.transforms)
    for i, s in enumerate(ts):
        rest = ts[:i] + ts[i + 1:]
        if rest:
            cl = closure(rest, budget=budget)
        else:
            ident = (AffineMap.identity(s.n) if isinstance(s, AffineMap)
                     else TableMap.identity(s.size))
            cl = {ident}
        if s in cl:
            return False
    return True


# ---------------------------------------------------------------------------
# serialization


def generator_set_to_json_obj(genset):
    gens = []
    for t, m in zip(genset.transforms, genset.meta):
        rec = {"name": m.name, "kind": m.kind}
        if m.period is not None:
            rec["period"] = m.period
        if isinstance(t, AffineMap):
            if t.matrix != identity_matrix(t.n):
                rec["A"] = [list(row) for row in t.matrix]
            rec["u"] = list(t.offset)
        else:
            rec["forward"] = list(t.forward)
        gens.append(rec)
    obj = {"name": genset.name, "generators": gens}
    if genset.is_affine and genset.transforms:
        obj["n"] = genset.dimension
    elif genset.transforms:
        obj["size"] = genset.dimension
    if genset.raw_size is not None:
        obj["raw_size"] = genset.raw_size
    return obj


def generator_set_from_json_obj(obj):
    transforms, meta = [], []
    for i, rec in enumerate(obj.get("generators", [])):
        if "forward" in rec:
            t = TableMap(tuple(rec["forward"]))
        else:
            u = tuple(rec.get("u", ()))
            if "A" in rec:
                a = tuple(tuple(row) for row in rec["A"])
                if not u:
                    u = (0,) * len(a)
            else:
                a = identity_matrix(len(u))
            t = AffineMap(a, u)
        kind = rec.get("kind") or _kind_of(t)
        meta.append(GenMeta(name=rec.get("name", f"g{i}"), kind=kind,
                            period=rec.get("period")))
        transforms.append(t)
    return GeneratorSet(name=obj.get("name", "generators"),
                        transforms=tuple(transforms), meta=tuple(meta),
                        raw_size=obj.get("raw_size"))


def save_generator_set(genset, path):
    with open(path, "w") as fh:
        json.dump(generator_set_to_json_obj(genset), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_generator_set(path):
    with open(path) as fh:
        return generator_set_from_json_obj(json.load(fh))
