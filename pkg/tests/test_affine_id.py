import itertools
import random

import pytest

from symabs.affine_id import (AffineTriple, MatrixGroup, Sublattice,
                              VectorSystem, close_matrices, compatible,
                              enumerate_music_triples,
                              enumerate_signed_permutations,
                              enumerate_subgroups, factor_signed_permutation,
                              hnf_rows, membership, music_sublattices,
                              triple_from_json_obj, triple_to_json_obj,
                              validate_vector_system)
from symabs.core import (AffineMap, GeneratorSet, Window, identity_matrix,
                         mat_mul, mat_vec)
from symabs.engine import orbit_partition_oracle

I2 = identity_matrix(2)
NEG2 = ((-1, 0), (0, -1))
SWAP = ((0, 1), (1, 0))


class TestHermiteForm:
    def test_canonical_for_equal_lattices(self):
        a = Sublattice.from_vectors(2, [(1, 1), (12, 0)])
        b = Sublattice.from_vectors(2, [(12, 0), (13, 1), (-11, 1)])
        assert a == b
        assert a.basis == ((1, 1), (0, 12))

    def test_contains(self):
        lat = Sublattice.from_vectors(2, [(1, 1), (12, 0)])
        assert (5, 5) in lat and (13, 1) in lat
        assert (1, 0) not in lat

    def test_reduce_is_canonical_residue(self):
        lat = Sublattice.from_vectors(2, [(2, 0), (0, 2)])
        assert lat.reduce((5, -3)) == (1, 1)
        assert lat.reduce((4, 2)) == (0, 0)

    def test_partial_rank(self):
        lat = Sublattice.from_vectors(2, [(1, 1)])
        assert lat.rank == 1
        assert (3, 3) in lat and (3, 2) not in lat

    def test_random_lattice_membership_against_span_oracle(self):
        # for |targets| <= 4 and |entries| <= 3 Cramer bounds the integer
        # coefficients by 24, so enumerating [-40, 40]^2 is exhaustive
        rng = random.Random(5)
        for _ in range(12):
            vecs = [tuple(rng.randint(-3, 3) for _ in range(2)) for _ in range(2)]
            lat = Sublattice.from_vectors(2, vecs)
            span = set()
            for c1 in range(-40, 41):
                for c2 in range(-40, 41):
                    v = (c1 * vecs[0][0] + c2 * vecs[1][0],
                         c1 * vecs[0][1] + c2 * vecs[1][1])
                    if -4 <= v[0] <= 4 and -4 <= v[1] <= 4:
                        span.add(v)
            for v in itertools.product(range(-4, 5), repeat=2):
                assert (v in lat) == (v in span), (vecs, v)


class TestSignedPermutations:
    def test_sizes(self):
        for n, want in ((1, 2), (2, 8), (3, 48), (4, 384)):
            assert len(enumerate_signed_permutations(n)) == want

    def test_n1_members(self):
        g = enumerate_signed_permutations(1)
        assert set(g.elements) == {((1,),), ((-1,),)}

    def test_group_axioms(self):
        enumerate_signed_permutations(2).verify()

    def test_unique_negation_permutation_factorization(self):
        for n in (2, 3):
            group = enumerate_signed_permutations(n)
            seen = set()
            for a in group:
                neg, perm = factor_signed_permutation(a)
                assert all(neg[i][i] in (1, -1) for i in range(n))
                assert mat_mul(neg, perm) == a
                seen.add((neg, perm))
            assert len(seen) == len(group)

    def test_kind_counts(self):
        # permutations and negations inside the full signed-permutation group
        for n in (2, 3):
            group = enumerate_signed_permutations(n)
            perms = [a for a in group
                     if all(v >= 0 for row in a for v in row)]
            negs = [a for a in group
                    if all(a[i][j] == 0 for i in range(n) for j in range(n)
                           if i != j)]
            assert len(perms) == [1, 1, 2, 6, 24][n]
            assert len(negs) == 2 ** n


def _brute_force_subgroups(group):
    elems = list(group.elements)
    found = set()
    for r in range(len(elems) + 1):
        for combo in itertools.combinations(elems, r):
            if not combo:
                found.add((identity_matrix(group.n),))
                continue
            found.add(tuple(sorted(close_matrices(list(combo)))))
    return found


class TestSubgroupEnumeration:
    def test_o1(self):
        subs = enumerate_subgroups(enumerate_signed_permutations(1))
        assert len(subs) == 2

    def test_trivial_group(self):
        subs = enumerate_subgroups(MatrixGroup.trivial(2))
        assert len(subs) == 1

    def test_o2_has_ten_subgroups_vs_brute_force(self):
        group = enumerate_signed_permutations(2)
        subs = enumerate_subgroups(group)
        assert len(subs) == 10
        assert {tuple(s.elements) for s in subs} == _brute_force_subgroups(group)

    def test_closed_under_intersection(self):
        subs = enumerate_subgroups(enumerate_signed_permutations(2))
        keys = {tuple(s.elements) for s in subs}
        for a in subs:
            for b in subs:
                inter = set(a.elements) & set(b.elements)
                assert tuple(sorted(inter)) in keys

    def test_closed_under_conjugation(self):
        group = enumerate_signed_permutations(2)
        subs = enumerate_subgroups(group)
        keys = {tuple(s.elements) for s in subs}
        for sub in subs:
            for g in group:
                assert tuple(sub.conjugate(g).elements) in keys

    @pytest.mark.slow
    def test_o3_stretch(self):
        subs = enumerate_subgroups(enumerate_signed_permutations(3))
        assert len(subs) == 98


class TestCompatibility:
    def test_negation_fixes_every_lattice(self):
        L = MatrixGroup.from_elements(2, [I2, NEG2])
        assert compatible(L, Sublattice.full(2))
        assert compatible(L, Sublattice.from_vectors(2, [(1, 1)]))

    def test_swap_vs_axis_line(self):
        L = MatrixGroup.from_elements(2, [I2, SWAP])
        assert not compatible(L, Sublattice.from_vectors(2, [(1, 0)]))

    def test_swap_vs_diagonal_line(self):
        L = MatrixGroup.from_elements(2, [I2, SWAP])
        assert compatible(L, Sublattice.from_vectors(2, [(1, 1)]))

    def test_against_point_set_oracle(self):
        subs = enumerate_subgroups(enumerate_signed_permutations(2))
        for L in subs:
            for V in music_sublattices(2):
                box = [v for v in itertools.product(range(-24, 25), repeat=2)
                       if v in V]
                oracle = all(tuple(mat_vec(a, v)) in V for a in L for v in box)
                assert compatible(L, V) == oracle


class TestVectorSystems:
    def test_trivial_system_valid(self):
        L = MatrixGroup.from_elements(2, [I2, NEG2])
        V = Sublattice.from_vectors(2, [(2, 0), (0, 2)])
        ok, report = validate_vector_system(VectorSystem.trivial(L, V))
        assert ok and report is None

    def test_identity_law_violation(self):
        L = MatrixGroup.trivial(2)
        V = Sublattice.from_vectors(2, [(2, 0), (0, 2)])
        xi = VectorSystem.from_dict(L, V, {I2: (1, 0)})
        ok, report = validate_vector_system(xi)
        assert not ok and "identity law" in report

    def test_nontrivial_valid_system(self):
        # xi(-I) = (1,0) over V = 2Z^2 satisfies every law exhaustively
        L = MatrixGroup.from_elements(2, [I2, NEG2])
        V = Sublattice.from_vectors(2, [(2, 0), (0, 2)])
        xi = VectorSystem.from_dict(L, V, {I2: (0, 0), NEG2: (1, 0)})
        ok, report = validate_vector_system(xi)
        assert ok, report

    def test_negation_group_admits_any_assignment(self):
        # over {I,-I} the inverse term cancels, so any xi(-I) passes
        L = MatrixGroup.from_elements(2, [I2, NEG2])
        V = Sublattice.from_vectors(2, [(4, 0), (0, 4)])
        xi = VectorSystem.from_dict(L, V, {I2: (0, 0), NEG2: (1, 0)})
        ok, report = validate_vector_system(xi)
        assert ok, report

    def test_cocycle_violation_reported(self):
        # swap with xi(D) = (1,0): the D,D pair needs (1,1) in V
        L = MatrixGroup.from_elements(2, [I2, SWAP])
        V = Sublattice.from_vectors(2, [(2, 0), (0, 2)])
        xi = VectorSystem.from_dict(L, V, {I2: (0, 0), SWAP: (1, 0)})
        ok, report = validate_vector_system(xi)
        assert not ok and ("cocycle" in report or "inverse" in report)


class TestMembership:
    def test_pure_translations(self):
        L = MatrixGroup.trivial(2)
        V = Sublattice.full(2)
        triple = AffineTriple(L, V, VectorSystem.trivial(L, V))
        assert membership(triple, AffineMap.translation((3, 5)))
        assert not membership(triple, AffineMap(NEG2, (0, 0)))

    def test_octave_lattice(self):
        L = enumerate_signed_permutations(2)
        V = Sublattice.from_vectors(2, [(12, 0), (0, 12)])
        triple = AffineTriple(L, V, VectorSystem.trivial(L, V))
        assert membership(triple, AffineMap.translation((12, 24)))
        assert not membership(triple, AffineMap.translation((1, 0)))

    def test_shifted_coset(self):
        L = MatrixGroup.from_elements(2, [I2, NEG2])
        V = Sublattice.from_vectors(2, [(2, 0), (0, 2)])
        xi = VectorSystem.from_dict(L, V, {I2: (0, 0), NEG2: (1, 0)})
        triple = AffineTriple(L, V, xi)
        assert membership(triple, AffineMap(NEG2, (1, 0)))
        assert membership(triple, AffineMap(NEG2, (3, 2)))
        assert not membership(triple, AffineMap(NEG2, (0, 0)))


class TestMusicTriples:
    def test_n1_count(self):
        triples = enumerate_music_triples(1)
        assert len(triples) == 4
        assert len(music_sublattices(1)) == 2

    def test_n2_trivial_group_compatible_with_all(self):
        lats = music_sublattices(2)
        assert len(lats) == 3
        L = MatrixGroup.trivial(2)
        assert all(compatible(L, V) for V in lats)

    def test_n2_count_matches_pairwise_compatibility(self):
        subs = enumerate_subgroups(enumerate_signed_permutations(2))
        lats = music_sublattices(2)
        want = sum(compatible(L, V) for L in subs for V in lats)
        triples = enumerate_music_triples(2)
        assert len(triples) == want
        assert all(validate_vector_system(t.system)[0] for t in triples)

    def test_round_trip_against_engine(self):
        # realize each triple by generators and compare orbits with the
        # membership predicate's reachability relation on a small window
        for n, window, bound in ((1, Window((-13,), (13,)), 13),
                                 (2, Window((-2, -2), (2, 2)), 24)):
            for triple in enumerate_music_triples(n):
                transforms = [AffineMap.translation(v)
                              for v in triple.lattice.basis]
                transforms += [AffineMap.linear(a) for a in triple.group
                               if a != identity_matrix(n)]
                if not transforms:
                    transforms = [AffineMap.identity(n)]
                gens = GeneratorSet("triple", tuple(dict.fromkeys(transforms)))
                got = orbit_partition_oracle(gens, window, bound)
                pts = list(window.points())
                for i, x in enumerate(pts):
                    for j in range(i + 1, len(pts)):
                        y = pts[j]
                        related = any(
                            tuple(a - b for a, b in
                                  zip(y, mat_vec(m, x))) in triple.lattice
                            for m in triple.group)
                        same_cell = got.labels[i] == got.labels[j]
                        assert same_cell == related, (n, x, y)


def test_triple_json_round_trip():
    triple = enumerate_music_triples(2)[5]
    obj = triple_to_json_obj(triple)
    back = triple_from_json_obj(obj)
    assert back.group == triple.group
    assert back.lattice == triple.lattice
    assert back.system.values == triple.system.values
