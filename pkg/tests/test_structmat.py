import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from src.shared.errors import (
    CornerForbidden,
    DimensionMismatch,
    InvalidBandwidth,
    ParseError,
    TooLargeForDense,
    UnsupportedKind,
    UnsupportedVersion,
)
from src.structmat import (
    generate_random,
    make,
    matvec,
    pack,
    parse_matrix,
    parse_vector,
    to_dense,
    write_matrix,
    write_vector,
)

from .conftest import toeplitz


def structural_mask(A):
    """Positions allowed by the kind definition, built without the storage layout."""
    n, m = A.n, A.m
    mask = np.zeros((n, n), dtype=bool)
    for i in range(n):
        for j in range(n):
            mask[i, j] = -A.s <= j // m - i // m <= A.r
    if A.corner is not None:
        cr, cc = A.corner.shape
        mask[:cr, n - cc:] = True
    if A.lower_corner is not None:
        lr, lc = A.lower_corner.shape
        mask[n - lr:, :lc] = True
    return mask


class TestMake:
    def test_identity_banded(self):
        A = make("banded", 3, 1, 0, 0, [1, 1, 1])
        np.testing.assert_array_equal(to_dense(A), np.eye(3))

    def test_toeplitz_dense(self):
        np.testing.assert_array_equal(
            to_dense(toeplitz(3)), [[2, -1, 0], [-1, 2, -1], [0, -1, 2]])

    def test_babd_corner_placement(self):
        data = np.arange(1.0, 29.0)
        A = make("babd", 8, 2, 1, 0, data, corner=np.ones((2, 2)))
        D = to_dense(A)
        np.testing.assert_array_equal(D[0:2, 6:8], np.ones((2, 2)))
        # first block row holds only its diagonal block and the corner
        np.testing.assert_array_equal(D[0:2, 2:6], np.zeros((2, 4)))
        np.testing.assert_array_equal(D[0:2, 0:2], [[1, 2], [3, 4]])
        np.testing.assert_array_equal(D[2:4, 0:4], [[5, 6, 9, 10], [7, 8, 11, 12]])

    def test_storage_is_read_only(self):
        A = toeplitz(4)
        with pytest.raises(ValueError):
            A.blocks[0, 1, 0, 0] = 5.0

    def test_pack_inverts_make(self):
        data = np.arange(1.0, 11.0)
        A = make("banded", 4, 1, 1, 1, data)
        np.testing.assert_array_equal(pack(A), data)

    @pytest.mark.parametrize("kind, n, m, s, r, corner, err", [
        ("banded", 4, 1, 5, 0, None, InvalidBandwidth),
        ("banded", 4, 2, 1, 0, None, DimensionMismatch),
        ("blocktridiagonal", 9, 3, 1, 0, None, InvalidBandwidth),
        ("abd", 8, 2, 1, 1, None, InvalidBandwidth),
        ("babd", 8, 2, 1, 0, None, DimensionMismatch),
        ("banded", 6, 1, 1, 1, [[1.0]], CornerForbidden),
        ("blocktridiagonal", 7, 2, 1, 1, None, DimensionMismatch),
    ])
    def test_invalid_shapes(self, kind, n, m, s, r, corner, err):
        with pytest.raises(err):
            make(kind, n, m, s, r, np.zeros(1), corner=corner)

    def test_wrong_data_length(self):
        with pytest.raises(DimensionMismatch):
            make("banded", 4, 1, 1, 1, np.zeros(9))

    def test_unknown_kind(self):
        with pytest.raises(UnsupportedKind):
            make("pentadiagonal", 4, 1, 1, 1, np.zeros(10))


class TestDenseAndMatvec:
    def test_identity_matvec(self):
        A = make("banded", 3, 1, 0, 0, [1, 1, 1])
        np.testing.assert_array_equal(matvec(A, [3, -1, 4]), [3, -1, 4])

    def test_toeplitz_matvec(self):
        np.testing.assert_array_equal(matvec(toeplitz(3), [1, 1, 1]), [1, 0, 1])

    def test_babd_corner_contributes(self):
        A = generate_random("babd", 8, 2, seed=2)
        x = np.ones(8)
        y = matvec(A, x)
        np.testing.assert_allclose(y, to_dense(A) @ x, rtol=0, atol=1e-13)
        without = to_dense(A)[:2, :2] @ x[:2]
        np.testing.assert_allclose(y[:2] - without, A.corner @ x[6:], atol=1e-13)

    def test_random_babd_mask(self):
        A = generate_random("babd", 16, 2, seed=7)
        D = to_dense(A)
        assert not np.any(D[~structural_mask(A)])
        assert np.all(D[:2, 14:] == A.corner)

    def test_block_tridiagonal_mask(self):
        A = generate_random("blocktridiagonal", 12, 3, seed=5)
        D = to_dense(A)
        assert not np.any(D[~structural_mask(A)])
        assert np.count_nonzero(D) == np.count_nonzero(structural_mask(A))

    def test_matvec_wrong_length(self):
        with pytest.raises(DimensionMismatch):
            matvec(toeplitz(3), [1.0, 2.0])

    def test_dense_limit(self):
        with pytest.raises(TooLargeForDense):
            to_dense(toeplitz(10), limit=5)

    @given(seed=st.integers(0, 2**16), n=st.integers(4, 24), s=st.integers(0, 2), r=st.integers(0, 2))
    def test_matvec_matches_dense(self, seed, n, s, r):
        A = generate_random("banded", n, 1, s, r, seed=seed)
        x = np.linspace(-1.0, 1.0, n)
        np.testing.assert_allclose(matvec(A, x), to_dense(A) @ x, rtol=1e-13, atol=1e-13)

    @given(seed=st.integers(0, 2**16))
    def test_circulant_like_matvec(self, seed):
        A = generate_random("circulantlike", 12, 2, 1, 1, seed=seed)
        x = np.arange(12.0)
        assert not np.any(to_dense(A)[~structural_mask(A)])
        np.testing.assert_allclose(matvec(A, x), to_dense(A) @ x, rtol=1e-13, atol=1e-12)


class TestGenerateRandom:
    def test_deterministic(self):
        a = generate_random("banded", 10, 1, 1, 1, seed=1, diag_dominance=2)
        b = generate_random("banded", 10, 1, 1, 1, seed=1, diag_dominance=2)
        assert a.same_as(b)
        assert not a.same_as(generate_random("banded", 10, 1, 1, 1, seed=2, diag_dominance=2))

    @given(seed=st.integers(0, 2**16), kind=st.sampled_from(["banded", "blocktridiagonal", "babd"]))
    def test_dominance(self, seed, kind):
        m = 1 if kind == "banded" else 2
        A = generate_random(kind, 12, m, seed=seed, diag_dominance=2)
        D = to_dense(A)
        diag = np.abs(np.diag(D))
        off = np.sum(np.abs(D), axis=1) - diag
        assert np.all(diag >= 2 * off)

    def test_meta_records_seed(self):
        A = generate_random("banded", 6, seed=11)
        assert A.meta == {"rng": "philox", "seed": "11"}


class TestFormat:
    def test_identity_round_trip(self):
        A = make("banded", 2, 1, 0, 0, [1, 1])
        assert parse_matrix(write_matrix(A)).same_as(A)

    def test_header_and_decimal_entries(self):
        text = "STRUCTMAT 1 banded 4 1 1 1\n" + "\n".join(["-1"] * 3 + ["2"] * 4 + ["-1"] * 3) + "\n"
        A = parse_matrix(text)
        np.testing.assert_array_equal(to_dense(A), to_dense(toeplitz(4)))

    def test_random_babd_round_trip_keeps_bits(self):
        A = generate_random("babd", 12, 2, seed=9)
        B = parse_matrix(write_matrix(A))
        assert B.same_as(A)
        assert B.meta.get("seed") == "9"

    def test_comments_and_blank_lines(self):
        text = "# generated\n\nSTRUCTMAT 1 banded 2 1 0 0\n# diagonal\n1.0\n\n0x1.8p+1\n"
        np.testing.assert_array_equal(to_dense(parse_matrix(text)), np.diag([1.0, 3.0]))

    def test_bandwidth_too_large(self):
        text = "STRUCTMAT 1 banded 4 1 5 0\n" + "1\n" * 4
        with pytest.raises(ParseError):
            parse_matrix(text)

    def test_too_few_entries_names_line(self):
        text = "STRUCTMAT 1 banded 3 1 0 0\n1\n2\n"
        with pytest.raises(ParseError) as info:
            parse_matrix(text)
        assert info.value.line == 4

    def test_trailing_data(self):
        with pytest.raises(ParseError):
            parse_matrix("STRUCTMAT 1 banded 1 1 0 0\n1\n2\n")

    def test_bad_real(self):
        with pytest.raises(ParseError):
            parse_matrix("STRUCTMAT 1 banded 1 1 0 0\nabc\n")

    def test_decimal_tokens_are_not_read_as_hex(self):
        A = parse_matrix("STRUCTMAT 1 banded 2 1 0 0\n10\n0.5\n")
        np.testing.assert_array_equal(to_dense(A), np.diag([10.0, 0.5]))
        np.testing.assert_array_equal(parse_vector("VEC 1 3\n2.5\n100\n-0x1p-2\n"), [2.5, 100.0, -0.25])

    def test_unsupported_version(self):
        with pytest.raises(UnsupportedVersion):
            parse_matrix("STRUCTMAT 2 banded 1 1 0 0\n1\n")

    def test_empty_input(self):
        with pytest.raises(ParseError):
            parse_matrix("")

    def test_vector_round_trip(self):
        x = np.array([0.1, -2.5, 1e-300])
        np.testing.assert_array_equal(parse_vector(write_vector(x)), x)

    def test_vector_length_mismatch(self):
        with pytest.raises(ParseError):
            parse_vector("VEC 1 3\n1\n2\n")
