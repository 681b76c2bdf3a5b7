import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from src.localfact import Strategy
from src.parfact import (
    OpCounter,
    ReducedSystem,
    assemble_reduced,
    dense_factors,
    parallel_factor,
    residual,
    solve,
    solve_reduced,
    solve_with_stats,
)
from src.partition import plan_partition
from src.shared.errors import (
    DimensionMismatch,
    SingularReducedSystem,
    TooLargeForDense,
    UnsupportedStructure,
    ZeroPivot,
)
from src.structmat import make, make_rng, to_dense

from .conftest import dominant, toeplitz


def identity(n):
    return make("banded", n, 1, 1, 1, [0] * (n - 1) + [1] * n + [0] * (n - 1))


def paired_minor_matrix(n, p):
    """Tridiagonal (1, 4, 1) with a singular 2x2 leading minor at the start of every body."""
    plan = plan_partition(toeplitz(n), p)
    diag = np.full(n, 4.0)
    for start, _ in plan.body_ranges:
        diag[start:start + 2] = 1.0
    return make("banded", n, 1, 1, 1, [1.0] * (n - 1) + list(diag) + [1.0] * (n - 1))


def scalar_reduced(T):
    T = np.asarray(T, dtype=float)
    q = T.shape[0]
    return ReducedSystem(
        q=q, K=1, keys=list(range(q)),
        diag=T.diagonal().reshape(q, 1, 1).copy(),
        sub=np.array([T[t + 1, t] for t in range(q - 1)]).reshape(q - 1, 1, 1),
        sup=np.array([T[t, t + 1] for t in range(q - 1)]).reshape(q - 1, 1, 1),
    )


def dense_solution(A, f):
    return np.linalg.solve(to_dense(A), f)


# (kind, m, s, r) families and the strategies each accepts
FAMILIES = [
    ("banded", 1, 1, 1, ["lu", "lud", "cr", "lupivot", "qr"]),
    ("banded", 1, 2, 1, ["lu", "lud", "lupivot", "qr"]),
    ("banded", 1, 0, 2, ["lu", "lud", "lupivot", "qr"]),
    ("banded", 1, 3, 3, ["lu", "lud", "lupivot", "qr"]),
    ("blocktridiagonal", 2, None, None, ["lu", "lud", "cr", "lupivot", "qr"]),
    ("blocktridiagonal", 3, None, None, ["lu", "lud", "cr", "lupivot", "qr"]),
    ("blocktridiagonal", 4, None, None, ["lu", "lud", "cr", "lupivot", "qr"]),
    ("abd", 2, None, None, ["lu", "lud", "arce", "lupivot", "qr"]),
    ("abd", 3, None, None, ["lu", "lud", "arce", "lupivot", "qr"]),
    ("babd", 2, None, None, ["lu", "lud", "arce", "lupivot", "qr"]),
    ("babd", 3, None, None, ["lu", "lud", "arce", "lupivot", "qr"]),
    ("circulantlike", 1, 1, 1, ["lu", "lud", "cr", "lupivot", "qr"]),
    ("circulantlike", 1, 2, 1, ["lu", "lud", "lupivot", "qr"]),
    ("circulantlike", 2, 1, 1, ["lu", "lud", "cr", "lupivot", "qr"]),
]


def sweep_cases():
    cases = []
    for kind, m, s, r, strategies in FAMILIES:
        for strategy in strategies:
            for p in (2, 3, 4):
                idx = len(cases)
                nblk = (30 + 7 * (idx % 5)) if m == 1 else (12 + 5 * (idx % 5))
                cases.append(pytest.param(kind, m, s, r, strategy, p, nblk * m, idx,
                                          id=f"{kind}-m{m}-s{s}-r{r}-{strategy}-p{p}"))
    return cases


SWEEP = sweep_cases()


class TestParallelFactor:
    @pytest.mark.parametrize("p", [2, 3, 4])
    def test_identity(self, p):
        A = identity(20)
        Fct = parallel_factor(A, p, workers=1)
        assert Fct.q == p - 1
        np.testing.assert_array_equal(Fct.reduced.to_dense(), np.eye(p - 1))
        for F in Fct.locals:
            for vec in (F.z, F.y, F.v, F.w):
                assert not np.any(vec)

    def test_toeplitz_two_way(self, tridiag9):
        Fct = parallel_factor(tridiag9, 2, Strategy.LU)
        assert Fct.q == 1
        F, T, G = dense_factors(Fct)
        np.testing.assert_allclose(F @ T @ G, to_dense(tridiag9), atol=1e-12)
        # alpha of the one separator: 2 - 2 * (last entry of the inverse body)
        alpha = Fct.reduced.diag[0, 0, 0]
        body_inv = np.linalg.inv(to_dense(toeplitz(4)))
        assert alpha == pytest.approx(2.0 - 2.0 * body_inv[-1, -1], abs=1e-12)

    def test_babd_arce_reduced_shape(self, babd24):
        Fct = parallel_factor(babd24, 3, Strategy.ARCE)
        R = Fct.reduced
        assert R.q == 4 and R.K == 2
        assert R.corner is not None
        assert not np.any(R.sup)
        assert R.far == {}
        F, T, G = dense_factors(Fct)
        np.testing.assert_allclose(F @ T @ G, to_dense(babd24), atol=1e-11)

    @pytest.mark.parametrize("kind, m, s, r, strategy, p, n, seed", SWEEP)
    def test_ftg_reconstructs(self, kind, m, s, r, strategy, p, n, seed):
        A = dominant(kind, n, m, s, r, seed=seed)
        Fct = parallel_factor(A, p, strategy)
        F, T, G = dense_factors(Fct)
        D = to_dense(A)
        np.testing.assert_allclose(F @ T @ G, D, atol=1e-12 * np.abs(D).max())

    @pytest.mark.parametrize("n", [50, 100, 400])
    @pytest.mark.parametrize("p", [2, 4, 8])
    def test_q_laws(self, n, p):
        assert parallel_factor(toeplitz(n), p).q == p - 1
        assert parallel_factor(dominant("banded", n, 1, 2, 1, seed=1), p).q == p - 1
        babd = parallel_factor(dominant("babd", 2 * n, 2, seed=1), p)
        assert babd.q == p + 1 and babd.reduced.K == 2
        assert parallel_factor(dominant("circulantlike", n, 1, 1, 1, seed=1), p).q == p + 1
        assert parallel_factor(toeplitz(n), 1).q == 0

    @pytest.mark.parametrize("strategy", [Strategy.LU_PIVOT, Strategy.QR])
    @pytest.mark.parametrize("p", [2, 4])
    def test_adaptive_growth_law(self, strategy, p):
        for n in (50, 100, 400):
            A = paired_minor_matrix(n, p)
            Fct = parallel_factor(A, p, strategy)
            starts = [start for start, _ in Fct.plan.body_ranges]
            assert Fct.extra_separators == p
            assert Fct.q == (p - 1) + p
            assert [e.position for F in Fct.locals for e in F.extra_separators] == [s + 1 for s in starts]
            f = np.cos(np.arange(float(n)))
            x_ref = dense_solution(A, f)
            assert np.max(np.abs(solve(Fct, f) - x_ref)) <= 1e-10 * np.max(np.abs(x_ref))

    def test_adaptive_growth(self):
        A = make("banded", 7, 1, 1, 1, [1.0] * 6 + [1, 1, 1, 4, 4, 4, 4] + [1.0] * 6)
        with pytest.raises(ZeroPivot):
            parallel_factor(A, 2, Strategy.LU)
        Fct = parallel_factor(A, 2, Strategy.LU_PIVOT)
        assert Fct.q == 2 and Fct.extra_separators == 1
        assert Fct.reduced.keys == [1, 3]
        f = np.arange(1.0, 8.0)
        np.testing.assert_allclose(solve(Fct, f), dense_solution(A, f), rtol=1e-12, atol=1e-12)

    def test_dense_factors_limit(self, tridiag9):
        with pytest.raises(TooLargeForDense):
            dense_factors(parallel_factor(tridiag9, 2), limit=4)


class TestOracleSweep:
    @pytest.mark.parametrize("kind, m, s, r, strategy, p, n, seed", SWEEP)
    def test_matches_dense_solve(self, kind, m, s, r, strategy, p, n, seed):
        A = dominant(kind, n, m, s, r, seed=seed)
        f = make_rng(seed + 1000).uniform(-1.0, 1.0, n)
        x = solve(parallel_factor(A, p, strategy), f)
        x_ref = dense_solution(A, f)
        assert np.max(np.abs(x - x_ref)) <= 1e-10 * np.max(np.abs(x_ref))


class TestReduced:
    def test_identity(self):
        R = scalar_reduced(np.eye(3))
        np.testing.assert_array_equal(solve_reduced(R, [1.0, 2.0, 3.0]), [1.0, 2.0, 3.0])

    def test_two_by_two(self):
        R = scalar_reduced([[2.0, 1.0], [1.0, 2.0]])
        np.testing.assert_allclose(solve_reduced(R, [3.0, 3.0]), [1.0, 1.0], rtol=1e-15)

    def test_pivots_within_band(self):
        R = scalar_reduced([[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0]])
        b = np.array([1.0, 2.0, 3.0])
        np.testing.assert_allclose(solve_reduced(R, b), np.linalg.solve(R.to_dense(), b), atol=1e-14)

    def test_singular(self):
        R = scalar_reduced([[1.0, 1.0], [1.0, 1.0]])
        with pytest.raises(SingularReducedSystem):
            solve_reduced(R, [1.0, 1.0])

    def test_rhs_length(self):
        with pytest.raises(DimensionMismatch):
            solve_reduced(scalar_reduced(np.eye(2)), [1.0])

    def test_corner_lands_in_sup_for_two_separators(self):
        corner = np.array([[5.0]])
        R = assemble_reduced([0, 4], 1, [(0, 0, np.eye(1)), (4, 4, np.eye(1))], corner)
        assert R.corner is None
        assert R.sup[0, 0, 0] == 5.0

    def test_stored_corner_and_far_coupling(self):
        contributions = [(k, k, np.array([[4.0]])) for k in (0, 2, 4, 6)]
        contributions.append((4, 0, np.array([[1.0]])))
        R = assemble_reduced([0, 2, 4, 6], 1, contributions, np.array([[1.0]]))
        assert R.corner is not None
        assert R.bandwidth == 2
        b = np.array([1.0, 2.0, 3.0, 4.0])
        np.testing.assert_allclose(solve_reduced(R, b), np.linalg.solve(R.to_dense(), b), atol=1e-14)

    def test_lower_corner_row_taken_as_pivot(self):
        diag = [1e-3, 4.0, 4.0, 4.0, 1.0]
        contributions = [(k, k, np.array([[d]])) for k, d in enumerate(diag)]
        contributions += [(k + 1, k, np.array([[1.0]])) for k in range(4)]
        contributions += [(k, k + 1, np.array([[1.0]])) for k in range(4)]
        R = assemble_reduced(range(5), 1, contributions, np.array([[1.0]]), np.array([[10.0]]))
        assert R.lower_corner is not None
        T = R.to_dense()
        assert T[4, 0] == 10.0 and T[0, 4] == 1.0
        b = np.array([1.0, -2.0, 3.0, -4.0, 5.0])
        np.testing.assert_allclose(solve_reduced(R, b), np.linalg.solve(T, b), rtol=1e-13, atol=1e-13)

    def test_wrong_block_shape(self):
        with pytest.raises(DimensionMismatch):
            assemble_reduced([0], 2, [(0, 0, np.eye(1))])

    @given(seed=st.integers(0, 2**16))
    def test_from_dominant_matrix(self, seed):
        A = dominant("babd", 40, 2, seed=seed)
        Fct = parallel_factor(A, 4, workers=1)
        R = Fct.reduced
        b = np.linspace(-1.0, 1.0, R.order)
        np.testing.assert_allclose(solve_reduced(R, b), np.linalg.solve(R.to_dense(), b), rtol=1e-12, atol=1e-12)

    def test_op_count_independent_of_n(self):
        counts = []
        for n in (200, 2000):
            Fct = parallel_factor(dominant("banded", n, seed=1), 4, workers=1)
            counter = OpCounter()
            solve_reduced(Fct.reduced, np.ones(Fct.reduced.order), counter)
            counts.append(counter.flops)
        assert counts[0] == counts[1] > 0


class TestSolve:
    def test_identity(self):
        A = identity(12)
        f = np.arange(12.0)
        np.testing.assert_array_equal(solve(parallel_factor(A, 3), f), f)

    def test_toeplitz_three(self):
        x = solve(parallel_factor(toeplitz(3), 2), np.ones(3))
        np.testing.assert_allclose(x, [1.5, 2.0, 1.5], rtol=1e-14)

    def test_random_babd(self):
        A = dominant("babd", 64, 2, seed=11)
        f = make_rng(12).uniform(-1.0, 1.0, 64)
        x = solve(parallel_factor(A, 4), f)
        np.testing.assert_allclose(x, dense_solution(A, f), rtol=1e-10, atol=1e-10)
        assert residual(A, x, f) <= 1e-10

    @pytest.mark.parametrize("strategy", [Strategy.LU, Strategy.LUD, Strategy.CR, Strategy.LU_PIVOT, Strategy.QR])
    def test_strategies_match_dense(self, strategy):
        A = dominant("banded", 60, seed=3)
        f = np.sin(np.arange(60.0))
        x = solve(parallel_factor(A, 4, strategy), f)
        np.testing.assert_allclose(x, dense_solution(A, f), rtol=1e-11, atol=1e-11)

    @pytest.mark.parametrize("strategy", [Strategy.LU, Strategy.CR, Strategy.LU_PIVOT])
    def test_circulant_like_keeps_its_corners(self, strategy):
        A = make("circulantlike", 20, 1, 1, 1, [-1.0] * 19 + [4.0] * 20 + [-1.0] * 19,
                 corner=[[-1.0]], lower_corner=[[-1.0]])
        Fct = parallel_factor(A, 2, strategy)
        assert Fct.permutation.is_identity
        R = Fct.reduced
        assert R.q == 3
        assert R.corner[0, 0] == -1.0 and R.lower_corner[0, 0] == -1.0
        f = np.cos(np.arange(20.0))
        np.testing.assert_allclose(solve(Fct, f), dense_solution(A, f), rtol=1e-12, atol=1e-12)

    @pytest.mark.parametrize("strategy", ["lu", "lupivot", "qr"])
    @given(seed=st.integers(0, 2**16), m=st.sampled_from([1, 2]))
    def test_random_circulant_like(self, strategy, seed, m):
        A = dominant("circulantlike", 40 * m, m, 1, 1, seed=seed)
        f = make_rng(seed).uniform(-1.0, 1.0, A.n)
        Fct = parallel_factor(A, 3, strategy)
        assert Fct.extra_separators == 0
        x_ref = dense_solution(A, f)
        assert np.max(np.abs(solve(Fct, f) - x_ref)) <= 1e-10 * np.max(np.abs(x_ref))

    def test_oversized_lower_corner_rotation_must_fit(self):
        A = dominant("circulantlike", 30, 1, 1, 1, seed=4, corner_shape=(1, 1), lower_corner_shape=(2, 2))
        with pytest.raises(UnsupportedStructure):
            parallel_factor(A, 2)

    def test_single_partition(self):
        A = dominant("banded", 30, seed=5)
        Fct = parallel_factor(A, 1)
        assert Fct.q == 0
        f = np.ones(30)
        np.testing.assert_allclose(solve(Fct, f), dense_solution(A, f), rtol=1e-12)

    def test_bit_identical_across_workers(self):
        A = dominant("babd", 80, 2, seed=21)
        f = np.linspace(0.0, 1.0, 80)
        results = [solve(parallel_factor(A, 5, workers=w), f, workers=w) for w in (1, 2, 4)]
        for x in results[1:]:
            assert np.array_equal(x.view(np.uint64), results[0].view(np.uint64))

    def test_stats(self):
        A = dominant("banded", 100, seed=2)
        Fct = parallel_factor(A, 4)
        _, stats = solve_with_stats(Fct, np.ones(100), workers=2)
        assert set(stats.phase_seconds) == {"forward", "reduced", "backward"}
        assert stats.q == 3 and stats.reduced_flops > 0

    def test_rhs_length(self, tridiag9):
        with pytest.raises(DimensionMismatch):
            solve(parallel_factor(tridiag9, 2), np.ones(8))


class TestResidual:
    def test_exact(self, tridiag9):
        f = np.ones(9)
        assert residual(tridiag9, solve(parallel_factor(tridiag9, 2), f), f) <= 1e-10

    def test_zero_guess(self, tridiag9):
        assert residual(tridiag9, np.zeros(9), np.ones(9)) == 1.0

    def test_perturbed(self):
        A = dominant("banded", 50, seed=9)
        f = np.ones(50)
        x = dense_solution(A, f) + 1e-3
        assert 1e-5 <= residual(A, x, f) <= 1e-1
