import itertools

import numpy as np
import pytest

from imgm.errors import ContractError, ValidationError
from imgm.matroid import GeneralMatroid, PartitionMatroid, UniformMatroid, graphic_matroid
from imgm.oracle import bases, independent_sets

from _fixtures import random_matroid


def two_parts():
    return PartitionMatroid([0, 0, 1], [1, 1])


def k4_graphic():
    return graphic_matroid(4, [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (1, 3)])


def sample_matroids():
    rng = np.random.default_rng(0)
    out = [random_matroid(rng, int(rng.integers(1, 11))) for _ in range(15)]
    out += [UniformMatroid(6, 0), PartitionMatroid([0, 1, 1, 2], [0, 1, 2]), k4_graphic()]
    return out


class TestCanAdd:
    def test_examples(self):
        m = two_parts()
        assert m.can_add(set(), 0)
        assert not m.can_add({0}, 1)
        assert m.can_add({0}, 2)

    def test_out_of_range(self):
        with pytest.raises(ValidationError):
            two_parts().can_add(set(), 3)

    def test_builder_matches_oracle(self):
        rng = np.random.default_rng(1)
        for m in sample_matroids():
            b = m.builder()
            for u in rng.permutation(m.n).tolist():
                expected = m.can_add(set(b.members), u)
                assert b.can_add(u) == expected
                if expected:
                    b.add(u)
            assert len(b) == m.rank


class TestAxioms:
    """Empty set, downward closure and augmentation, exhaustively for n <= 10."""

    @pytest.mark.parametrize("m", sample_matroids())
    def test_matroid_axioms(self, m):
        fam = set(independent_sets(m))
        assert () in fam
        for S in fam:
            for T in itertools.combinations(S, len(S) - 1) if S else ():
                assert T in fam
        by_size = {}
        for S in fam:
            by_size.setdefault(len(S), []).append(set(S))
        for S in fam:
            for T in by_size.get(len(S) + 1, []):
                assert any(tuple(sorted(set(S) | {u})) in fam for u in T - set(S))

    @pytest.mark.parametrize("m", sample_matroids())
    def test_rank(self, m):
        assert m.rank == max(len(S) for S in independent_sets(m))


class TestPartitionMatroid:
    def test_rank_uses_part_sizes(self):
        assert PartitionMatroid([0, 0, 1], [5, 1]).rank == 3

    def test_negative_capacity(self):
        with pytest.raises(ValidationError):
            PartitionMatroid([0, 1], [1, -1])

    def test_uniform(self):
        m = UniformMatroid(5, 2)
        assert m.rank == 2 and m.is_independent({0, 4}) and not m.is_independent({0, 1, 2})

    def test_members(self):
        m = PartitionMatroid([1, 0, 1, 0, 2], [1, 1, 1])
        assert [m.members(l).tolist() for l in range(3)] == [[1, 3], [0, 2], [4]]


class TestFindExchange:
    def test_partition_example(self):
        assert two_parts().find_exchange({0, 2}, {1, 2}, 0) == 1

    def test_identical_bases_violate_precondition(self):
        with pytest.raises(ContractError):
            two_parts().find_exchange({0, 2}, {0, 2}, 0)

    def test_uniform_any_swap(self):
        assert UniformMatroid(4, 2).find_exchange({0, 1}, {2, 3}, 0) in {2, 3}

    @pytest.mark.parametrize("m", sample_matroids())
    def test_both_swaps_are_bases(self, m):
        bs = bases(m)
        rng = np.random.default_rng(2)
        for _ in range(60):
            B1 = set(bs[rng.integers(len(bs))])
            B2 = set(bs[rng.integers(len(bs))])
            for ui in sorted(B1 - B2):
                for impl in (m.find_exchange, lambda a, b, u: GeneralMatroid.find_exchange(m, a, b, u)):
                    uj = impl(B1, B2, ui)
                    assert uj in B2 - B1
                    assert m.is_base((B1 - {ui}) | {uj})
                    assert m.is_base((B2 - {uj}) | {ui})

    def test_non_base_detected(self):
        with pytest.raises(ContractError):
            two_parts().find_exchange({0, 2}, {2}, 0)


class TestMaxWeightBase:
    def test_uniform_top_two(self):
        m = UniformMatroid(3, 2)
        B = m.max_weight_base([3, 1, 2])
        assert B == [0, 2]

    def test_equal_weights(self):
        m = UniformMatroid(5, 3)
        B = m.max_weight_base([2.0] * 5)
        assert len(B) == 3 and B == [0, 1, 2]

    def test_partition_example(self):
        assert two_parts().max_weight_base([5, 9, 1]) == [1, 2]

    @pytest.mark.parametrize("m", sample_matroids())
    def test_optimal_against_brute_force(self, m):
        rng = np.random.default_rng(5)
        bs = bases(m)
        for _ in range(20):
            w = rng.integers(0, 5, size=m.n).astype(float)
            B = m.max_weight_base(w)
            assert m.is_base(B)
            assert w[B].sum() == max(w[list(S)].sum() for S in bs)

    def test_length_checked(self):
        with pytest.raises(ValidationError):
            two_parts().max_weight_base([1, 2])


class TestGeneralMatroid:
    def test_graphic_rank(self):
        assert k4_graphic().rank == 3

    def test_empty_must_be_independent(self):
        with pytest.raises(ValidationError):
            GeneralMatroid(2, lambda S: False)

    def test_predicate_rejects_out_of_range(self):
        assert not k4_graphic().is_independent({7})
