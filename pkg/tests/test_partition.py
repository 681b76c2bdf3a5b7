import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from src.partition import (
    corner_block,
    corners_fit,
    extract_block,
    lower_corner_block,
    permute_corner,
    plan_partition,
    separator_size,
)
from src.shared.errors import (
    IndexOutOfRange,
    InvalidParameter,
    NothingToPermute,
    TooManyPartitions,
    UnsupportedKind,
    UnsupportedStructure,
)
from src.structmat import generate_random, make, to_dense

from .conftest import dominant, toeplitz


class TestPlan:
    def test_tridiagonal_two_way(self, tridiag9):
        plan = plan_partition(tridiag9, 2)
        assert plan.separator_size == 1
        assert plan.body_ranges == ((0, 4), (5, 9))
        assert plan.separator_indices == (4,)
        assert plan.separator_labels() == [1]
        assert plan.separator_rows(1) == (4, 5)

    def test_separator_size_is_max_bandwidth(self):
        A = generate_random("banded", 20, 1, 2, 1, seed=0)
        plan = plan_partition(A, 3)
        assert separator_size(A) == 2
        assert plan.separator_size == 2
        assert plan.num_separators == 2
        assert [stop - start for start, stop in plan.body_ranges] == [6, 5, 5]

    def test_babd_has_p_plus_one_separators(self, babd24):
        plan = plan_partition(babd24, 3)
        assert plan.has_corner
        assert plan.num_separators == 4
        assert plan.separator_labels() == [0, 1, 2, 3]
        assert plan.separator_indices[0] == 0
        assert plan.separator_indices[-1] == babd24.nblk - 1
        assert plan.left_separator(1) == 0 and plan.right_separator(3) == 3

    @given(n=st.integers(10, 60), p=st.integers(1, 4))
    def test_tiles_cover_the_matrix(self, n, p):
        A = toeplitz(n)
        plan = plan_partition(A, p)
        tiles = plan.tiles()
        assert tiles[0][1] == 0 and tiles[-1][2] == A.nblk
        for (_, _, stop), (_, start, _) in zip(tiles, tiles[1:]):
            assert stop == start
        sizes = [stop - start for start, stop in plan.body_ranges]
        assert max(sizes) - min(sizes) <= 1
        assert min(sizes) >= plan.separator_size

    def test_too_many_partitions(self):
        with pytest.raises(TooManyPartitions):
            plan_partition(toeplitz(5), 4)

    def test_zero_partitions(self, tridiag9):
        with pytest.raises(InvalidParameter):
            plan_partition(tridiag9, 0)

    def test_periodic_matrix_gets_closing_separator(self):
        A = generate_random("circulantlike", 20, 1, 1, 1, seed=1)
        plan = plan_partition(A, 2)
        assert plan.has_corner and plan.num_separators == 3
        assert plan.separator_indices == (0, 10, 19)
        assert plan.lower_corner_shape == (1, 1)
        assert plan.describe().splitlines()[0].endswith("corner=1x1 lower_corner=1x1")

    def test_oversized_lower_corner(self):
        A = generate_random("circulantlike", 20, 1, 1, 1, seed=1, corner_shape=(1, 1), lower_corner_shape=(3, 3))
        assert not corners_fit(A)
        with pytest.raises(UnsupportedStructure):
            plan_partition(A, 2)

    def test_describe_lists_one_based_rows(self, tridiag9):
        text = plan_partition(tridiag9, 2).describe()
        lines = text.splitlines()
        assert lines[0].startswith("PLAN kind=banded n=9 m=1 p=2 separator_size=1 separators=1")
        assert lines[1:] == ["A1 rows 1-4", "a1 rows 5-5", "A2 rows 6-9"]


class TestExtractBlock:
    def test_identity_has_zero_couplings(self):
        A = make("banded", 9, 1, 1, 1, [0] * 8 + [1] * 9 + [0] * 8)
        plan = plan_partition(A, 3)
        for i in range(1, 4):
            pb = extract_block(A, plan, i)
            np.testing.assert_array_equal(pb.A_i, np.eye(pb.nb))
            for coupling in (pb.b0, pb.c0, pb.b1, pb.c1):
                assert not np.any(coupling)

    def test_toeplitz_couplings(self, tridiag9):
        plan = plan_partition(tridiag9, 2)
        pb = extract_block(tridiag9, plan, 1)
        assert pb.left_key is None and pb.right_key == 4
        assert pb.b0.shape == (4, 0)
        np.testing.assert_array_equal(pb.b1[:, 0], [0, 0, 0, -1])
        np.testing.assert_array_equal(pb.c1[:, 0], [0, 0, 0, -1])
        np.testing.assert_array_equal(pb.a_right, [[2.0]])
        # a1 belongs to partition 2
        np.testing.assert_array_equal(pb.bottom_right, [[0.0]])
        np.testing.assert_array_equal(extract_block(tridiag9, plan, 2).top_left, [[2.0]])

    @pytest.mark.parametrize("i", [1, 2, 3])
    def test_assembled_block_is_dense_submatrix(self, i):
        A = dominant("banded", 30, 1, 2, 2, seed=4)
        plan = plan_partition(A, 3)
        pb = extract_block(A, plan, i)
        D = to_dense(A)
        idx = []
        if pb.left_key is not None:
            idx += list(range(pb.left_key, pb.left_key + plan.sep_rows))
        idx += list(range(*pb.row_range))
        if pb.right_key is not None:
            idx += list(range(pb.right_key, pb.right_key + plan.sep_rows))
        expected = D[np.ix_(idx, idx)]
        if pb.right_key is not None:
            # the right separator's diagonal block belongs to the next partition
            expected[-plan.sep_rows:, -plan.sep_rows:] = 0.0
        np.testing.assert_array_equal(pb.assemble(), expected)

    def test_babd_first_partition_owns_corner(self, babd24):
        plan = plan_partition(babd24, 3)
        pb = extract_block(babd24, plan, 1)
        assert pb.left_key == 0
        np.testing.assert_array_equal(pb.top_left, babd24.blocks[0, 1])
        np.testing.assert_array_equal(pb.corner_slice, babd24.corner)
        np.testing.assert_array_equal(corner_block(babd24, plan), babd24.corner)
        assert not np.any(pb.bottom_right)
        later = extract_block(babd24, plan, 2)
        assert later.corner_slice is None
        np.testing.assert_array_equal(later.top_left, later.a_left)
        closing = extract_block(babd24, plan, 3)
        np.testing.assert_array_equal(closing.bottom_right, babd24.blocks[-1, 1])
        assert closing.lower_corner_slice is None

    def test_separator_diagonals_owned_once(self, babd24):
        plan = plan_partition(babd24, 3)
        owned = {}
        for i in range(1, 4):
            pb = extract_block(babd24, plan, i)
            for key, blk in ((pb.left_key, pb.top_left), (pb.right_key, pb.bottom_right)):
                owned[key] = owned.get(key, 0.0) + blk
        D = to_dense(babd24)
        for key, blk in owned.items():
            np.testing.assert_array_equal(blk, D[key:key + 2, key:key + 2])

    def test_periodic_lower_corner_goes_to_last_partition(self):
        A = dominant("circulantlike", 24, 2, seed=2)
        plan = plan_partition(A, 3)
        first, last = extract_block(A, plan, 1), extract_block(A, plan, 3)
        np.testing.assert_array_equal(first.corner_slice, corner_block(A, plan))
        np.testing.assert_array_equal(last.lower_corner_slice, A.lower_corner)
        np.testing.assert_array_equal(lower_corner_block(A, plan), A.lower_corner)
        assert last.lower_corner_slice is not None and first.lower_corner_slice is None

    def test_single_partition_folds_corner(self):
        A = dominant("babd", 12, 2, seed=1)
        plan = plan_partition(A, 1)
        pb = extract_block(A, plan, 1)
        assert pb.corner_slice is None
        np.testing.assert_array_equal(pb.dir_lr, A.corner)

    def test_single_partition_folds_both_corners(self):
        A = dominant("circulantlike", 12, 1, 1, 1, seed=3)
        pb = extract_block(A, plan_partition(A, 1), 1)
        assert pb.dir_lr[0, 0] == A.corner[0, 0]
        assert pb.dir_rl[0, 0] == A.lower_corner[0, 0]

    def test_index_out_of_range(self, tridiag9):
        plan = plan_partition(tridiag9, 2)
        with pytest.raises(IndexOutOfRange):
            extract_block(tridiag9, plan, 3)


class TestPermuteCorner:
    def test_canonical_babd_is_identity(self, babd24):
        B, P = permute_corner(babd24)
        assert P.is_identity
        assert B is babd24

    def test_strict_refuses_canonical(self, babd24):
        with pytest.raises(NothingToPermute):
            permute_corner(babd24, strict=True)

    def test_banded_has_nothing_to_permute(self, tridiag9):
        with pytest.raises(UnsupportedKind):
            permute_corner(tridiag9)

    @given(seed=st.integers(0, 2**16), m=st.sampled_from([1, 2]))
    def test_rotation_matches_dense(self, seed, m):
        A = generate_random("circulantlike", 12 * m, m, 1, 1, seed=seed)
        B, P = permute_corner(A)
        assert B.lower_corner is None and B.corner is not None
        np.testing.assert_array_equal(to_dense(B), P.matrix() @ to_dense(A))
        f = np.arange(A.n, dtype=float)
        np.testing.assert_array_equal(P.inverse(P.apply(f)), f)
