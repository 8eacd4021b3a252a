"""Integer matrix groups, sublattices, and affine-subgroup triples.

An affine subgroup is parametrized by a triple (L, V, xi): a finite group L
of orthogonal integer matrices, a sublattice V of Z^n closed under every
matrix in L, and a vector system xi assigning each matrix a translation
coset mod V subject to the cocycle law.  The membership predicate decides
whether a concrete affine map belongs to the parametrized subgroup.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations, product

from .core import (AffineMap, SymabsError, identity_matrix, mat_inv, mat_mul,
                   mat_vec)


# ---------------------------------------------------------------------------
# integer lattice arithmetic (Hermite form over rows)


def hnf_rows(vectors, n):
    """Canonical Hermite basis (as rows) of the lattice spanned by vectors.

    Pivots are positive, entries below a pivot are zero, entries above are
    reduced into [0, pivot).  The result is the unique canonical form, so
    lattice equality is tuple equality.
    """
    pool = [list(v) for v in vectors if any(v)]
    basis = []
    for col in range(n):
        live = [r for r in pool if r[col] != 0]
        while len(live) > 1:
            live.sort(key=lambda r: abs(r[col]))
            small = live[0]
            for r in live[1:]:
                q = r[col] // small[col]
                for j in range(n):
                    r[j] -= q * small[j]
            live = [r for r in live if r[col] != 0]
        if not live:
            continue
        piv = live[0]
        pool.remove(piv)
        if piv[col] < 0:
            piv = [-c for c in piv]
        for r in pool:
            if r[col] != 0:
                q = r[col] // piv[col]
                for j in range(n):
                    r[j] -= q * piv[j]
        basis.append(piv)
    # reduce entries above each pivot
    for i, row in enumerate(basis):
        col = next(j for j in range(n) if row[j] != 0)
        for k in range(i):
            q = basis[k][col] // row[col]
            if q:
                for j in range(n):
                    basis[k][j] -= q * row[j]
    return tuple(tuple(r) for r in basis)


@dataclass(frozen=True)
class Sublattice:
    """A sublattice of Z^n held in canonical Hermite row form."""

    n: int
    basis: tuple

    @classmethod
    def from_vectors(cls, n, vectors):
        return cls(n, hnf_rows(vectors, n))

    @classmethod
    def full(cls, n):
        return cls.from_vectors(n, identity_matrix(n))

    @property
    def rank(self):
        return len(self.basis)

    def _pivots(self):
        for row in self.basis:
            col = next(j for j in range(self.n) if row[j] != 0)
            yield col, row

    def reduce(self, v):
        """Canonical representative of v modulo this lattice."""
        v = list(v)
        for col, row in self._pivots():
            q = v[col] // row[col]
            if q:
                for j in range(self.n):
                    v[j] -= q * row[j]
        return tuple(v)

    def __contains__(self, v):
        v = list(v)
        for col, row in self._pivots():
            if v[col] % row[col]:
                return False
            q = v[col] // row[col]
            for j in range(self.n):
                v[j] -= q * row[j]
        return not any(v)

    def transform(self, a):
        """The image lattice {A v}."""
        return Sublattice.from_vectors(self.n, [mat_vec(a, row) for row in self.basis])

    def join(self, other):
        return Sublattice.from_vectors(self.n, list(self.basis) + list(other.basis))

    def to_json_obj(self):
        return {"basis": [list(r) for r in self.basis]}


# ---------------------------------------------------------------------------
# matrix groups


def close_matrices(gens, limit=None):
    """Multiplicative closure of a set of invertible integer matrices."""
    gens = [tuple(tuple(row) for row in g) for g in gens]
    n = len(gens[0]) if gens else 0
    elems = set(gens)
    elems.add(identity_matrix(n))
    for g in gens:
        elems.add(mat_inv(g))
    frontier = list(elems)
    while frontier:
        new = []
        for a in gens:
            for b in frontier:
                c = mat_mul(a, b)
                if c not in elems:
                    elems.add(c)
                    new.append(c)
                    if limit is not None and len(elems) > limit:
                        raise SymabsError(f"matrix closure exceeded limit {limit}")
        frontier = new
    return elems


@dataclass(frozen=True)
class MatrixGroup:
    """A finite group of n x n integer matrices, stored sorted."""

    n: int
    elements: tuple

    @classmethod
    def from_elements(cls, n, elements, check=True):
        elems = sorted({tuple(tuple(row) for row in e) for e in elements})
        g = cls(n, tuple(elems))
        if check:
            g.verify()
        return g

    @classmethod
    def from_generators(cls, gens, limit=100000):
        gens = list(gens)
        n = len(gens[0])
        return cls(n, tuple(sorted(close_matrices(gens, limit=limit))))

    @classmethod
    def trivial(cls, n):
        return cls(n, (identity_matrix(n),))

    def verify(self):
        elems = set(self.elements)
        if identity_matrix(self.n) not in elems:
            raise ValueError("group is missing the identity")
        for a in elems:
            if mat_inv(a) not in elems:
                raise ValueError("group is not closed under inverse")
            for b in elems:
                if mat_mul(a, b) not in elems:
                    raise ValueError("group is not closed under product")

    def __len__(self):
        return len(self.elements)

    def __contains__(self, a):
        return tuple(tuple(row) for row in a) in set(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def conjugate(self, g):
        ginv = mat_inv(g)
        return MatrixGroup.from_elements(
            self.n, (mat_mul(mat_mul(g, a), ginv) for a in self.elements),
            check=False)


def factor_signed_permutation(a):
    """Split an orthogonal integer matrix as (negation diag, permutation)."""
    n = len(a)
    signs = [0] * n
    perm = [[0] * n for _ in range(n)]
    for j in range(n):
        col = [a[i][j] for i in range(n)]
        nz = [i for i, c in enumerate(col) if c != 0]
        if len(nz) != 1 or col[nz[0]] not in (1, -1):
            raise ValueError("matrix is not a signed permutation")
        i = nz[0]
        signs[i] = col[i]
        perm[i][j] = 1
    return (tuple(tuple(signs[i] if i == j else 0 for j in range(n)) for i in range(n)),
            tuple(tuple(row) for row in perm))


def enumerate_signed_permutations(n):
    """The full orthogonal integer group in dimension n; size n! 2^n."""
    if n > 6:
        raise ValueError("dimension too large to enumerate")
    elems = []
    for perm in permutations(range(n)):
        base = [[0] * n for _ in range(n)]
        for j, i in enumerate(perm):
            base[i][j] = 1
        for signs in product((1, -1), repeat=n):
            elems.append(tuple(tuple(signs[i] * base[i][j] for j in range(n))
                               for i in range(n)))
    return MatrixGroup.from_elements(n, elems, check=False)


def enumerate_subgroups(group, limit=400):
    """All subgroups, by cyclic extension.

    Seeds with every cyclic subgroup, then repeatedly extends each known
    subgroup by one outside element and closes, until no new subgroup
    appears.
    """
    if len(group) > limit:
        raise ValueError(f"group too large ({len(group)} > {limit})")
    elems = list(group.elements)
    found = set()
    queue = []

    def add(subset):
        key = tuple(sorted(subset))
        if key not in found:
            found.add(key)
            queue.append(key)

    for g in elems:
        add(close_matrices([g]))
    while queue:
        sub = queue.pop()
        members = set(sub)
        for g in elems:
            if g not in members:
                add(close_matrices(list(sub) + [g]))
    subs = [MatrixGroup(group.n, key) for key in sorted(found, key=lambda k: (len(k), k))]
    return subs


# ---------------------------------------------------------------------------
# vector systems and triples


@dataclass(frozen=True)
class VectorSystem:
    """A map from the matrices of L to translation cosets mod V."""

    group: MatrixGroup
    modulus: Sublattice
    values: tuple  # pairs (matrix, reduced vector), aligned with group.elements

    @classmethod
    def from_dict(cls, group, modulus, mapping):
        vals = []
        for a in group.elements:
            if a not in mapping:
                raise ValueError("vector system is missing a value for a matrix in L")
            vals.append((a, modulus.reduce(mapping[a])))
        return cls(group, modulus, tuple(vals))

    @classmethod
    def trivial(cls, group, modulus):
        zero = (0,) * group.n
        return cls(group, modulus, tuple((a, zero) for a in group.elements))

    def value(self, a):
        a = tuple(tuple(row) for row in a)
        for m, v in self.values:
            if m == a:
                return v
        raise KeyError("matrix not in the system's domain")


def compatible(group, lattice):
    """True iff every matrix of the group maps the lattice onto itself."""
    return all(lattice.transform(a) == lattice for a in group.elements)


def validate_vector_system(xi):
    """Check a vector system; returns (ok, first violation or None)."""
    L, V = xi.group, xi.modulus
    for a in L.elements:
        if V.transform(a) != V:
            return False, f"compatibility: A V != V for A={a}"
    ident = identity_matrix(L.n)
    if xi.value(ident) not in V:
        return False, "identity law: xi(I) is not in V"
    for a in L.elements:
        xa = xi.value(a)
        for b in L.elements:
            lhs = xi.value(mat_mul(a, b))
            rhs = [x + y for x, y in zip(xa, mat_vec(a, xi.value(b)))]
            if tuple(l - r for l, r in zip(lhs, rhs)) not in V:
                return False, f"cocycle: fails for pair A={a}, A'={b}"
    for a in L.elements:
        ainv = mat_inv(a)
        want = mat_vec(ainv, xi.value(a))
        got = xi.value(ainv)
        if tuple(g + w for g, w in zip(got, want)) not in V:
            return False, f"inverse law: fails for A={a}"
    return True, None


@dataclass(frozen=True)
class AffineTriple:
    """(L, V, xi): the parametrization of one affine subgroup."""

    group: MatrixGroup
    lattice: Sublattice
    system: VectorSystem

    def __post_init__(self):
        if self.system.group != self.group or self.system.modulus != self.lattice:
            raise ValueError("vector system does not match (L, V)")


def membership(triple, f):
    """True iff the affine map belongs to the subgroup the triple encodes."""
    if not isinstance(f, AffineMap) or f.n != triple.group.n:
        raise ValueError("dimension mismatch")
    if f.matrix not in triple.group:
        return False
    want = triple.system.value(f.matrix)
    diff = tuple(a - b for a, b in zip(f.offset, want))
    return diff in triple.lattice


def music_sublattices(n):
    """The class of translation lattices used for pitch spaces.

    All-ones steps, per-axis octave steps, and their join; deduplicated
    (at n=1 the all-ones lattice and the join both equal Z).
    """
    ones = Sublattice.from_vectors(n, [(1,) * n])
    octaves = Sublattice.from_vectors(
        n, [tuple(12 if j == i else 0 for j in range(n)) for i in range(n)])
    lats = [ones, octaves, ones.join(octaves)]
    out = []
    for lat in lats:
        if lat not in out:
            out.append(lat)
    return out


def enumerate_music_triples(n):
    """Trivial-system triples over subgroups of the signed permutations
    crossed with the music lattices, filtered by compatibility."""
    if n > 4:
        raise ValueError("dimension too large for triple enumeration")
    full = enumerate_signed_permutations(n)
    triples = []
    for sub in enumerate_subgroups(full):
        for lat in music_sublattices(n):
            if compatible(sub, lat):
                triples.append(AffineTriple(sub, lat, VectorSystem.trivial(sub, lat)))
    return triples


def triple_to_json_obj(triple):
    return {
        "L": [[list(row) for row in a] for a in triple.group.elements],
        "V": triple.lattice.to_json_obj(),
        "xi": {str(i): list(v)
               for i, (_, v) in enumerate(triple.system.values)},
    }


def triple_from_json_obj(obj, n=None):
    mats = [tuple(tuple(row) for row in a) for a in obj["L"]]
    if n is None:
        n = len(mats[0])
    group = MatrixGroup.from_elements(n, mats)
    lattice = Sublattice.from_vectors(n, obj["V"]["basis"])
    mapping = {group.elements[int(i)]: tuple(v) for i, v in obj["xi"].items()}
    system = VectorSystem.from_dict(group, lattice, mapping)
    return AffineTriple(group, lattice, system)
