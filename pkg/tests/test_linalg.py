import numpy as np
import pytest
from numpy.testing import assert_allclose

import linalg
from linalg import NotPositiveDefinite, Poly, RankError


def _random_hurwitz(rng, n, margin=0.1):
    A = rng.normal(size=(n, n))
    shift = np.max(np.real(np.linalg.eigvals(A))) + margin + rng.uniform(0.0, 1.0)
    return A - shift * np.eye(n)


def test_poly_trims_trailing_zeros_and_evaluates():
    p = Poly((1.0, 2.0, 0.0))
    assert p.degree == 1
    assert p.coeffs == (1.0, 2.0)
    assert linalg.poly_eval(Poly((2.0, 3.0, 1.0)), -1.0) == 0.0
    assert Poly.from_descending([1.0, 3.0, 2.0]).coeffs == (2.0, 3.0, 1.0)


def test_poly_rejects_empty_and_non_finite():
    with pytest.raises(ValueError):
        Poly(())
    with pytest.raises(ValueError):
        Poly((1.0, float("nan")))


def test_det_matches_numpy(rng):
    for n in (1, 2, 3, 5):
        M = rng.normal(size=(n, n))
        assert_allclose(linalg.det(M), np.linalg.det(M), rtol=1e-10, atol=1e-12)
    assert linalg.det([[1.0, 2.0], [2.0, 4.0]]) == 0.0


def test_det_rejects_non_square():
    with pytest.raises(ValueError, match="square"):
        linalg.det(np.ones((2, 3)))


def test_char_poly_companion_example():
    p = linalg.char_poly([[0.0, 1.0], [-2.0, -3.0]])
    assert_allclose(p.coeffs, (2.0, 3.0, 1.0), atol=1e-14)


def test_char_poly_matches_numpy(rng):
    for n in range(1, 6):
        A = rng.normal(size=(n, n))
        assert_allclose(linalg.char_poly(A).descending(), np.poly(A), rtol=1e-9, atol=1e-9)


def test_companion_pair_shares_char_poly():
    p = Poly((6.0, 11.0, 6.0, 1.0))
    Fc, gc = linalg.companion_pair(p)
    assert_allclose(Fc, [[0, 1, 0], [0, 0, 1], [-6, -11, -6]])
    assert_allclose(gc, [0, 0, 1])
    assert_allclose(linalg.char_poly(Fc).coeffs, p.coeffs, atol=1e-12)


def test_companion_pair_needs_monic():
    with pytest.raises(ValueError, match="monic"):
        linalg.companion_pair(Poly((1.0, 2.0)))


def test_controllability_matrix_columns():
    F = np.array([[-0.2, 0.0], [0.2, -0.2]])
    R = linalg.controllability_matrix(F, [1.0, 0.0])
    assert_allclose(R, [[1.0, -0.2], [0.0, 0.2]])


@pytest.mark.parametrize("coeffs,expected", [
    ((6.0, 11.0, 6.0, 1.0), True),     # (s+1)(s+2)(s+3)
    ((10.0, 1.0, 1.0, 1.0), False),    # Routh sign change
    ((-1.0, 0.0, 1.0), False),         # s^2 - 1
    ((1.0, 0.0, 1.0), False),          # roots on the imaginary axis
    ((1.0, 1.0), True),
    ((-1.0, 1.0), False),
])
def test_hurwitz_known_cases(coeffs, expected):
    assert linalg.hurwitz_test(Poly(coeffs)) is expected


def test_hurwitz_agrees_with_roots(rng):
    for _ in range(200):
        n = int(rng.integers(1, 6))
        roots = rng.normal(size=n) + 1j * 0.0
        # conjugate-closed random root sets
        if n >= 2 and rng.uniform() < 0.5:
            z = complex(rng.normal(), abs(rng.normal()) + 0.1)
            roots[:2] = [z, z.conjugate()]
        margin = float(np.max(np.real(roots)))
        if abs(margin) < 1e-3:
            continue
        p = Poly.from_descending(np.real(np.poly(roots)))
        assert linalg.hurwitz_test(p) == (margin < 0)


def test_hurwitz_rejects_degenerate_input():
    with pytest.raises(ValueError):
        linalg.hurwitz_test(Poly((0.0,)))
    with pytest.raises(ValueError):
        linalg.hurwitz_test(Poly((3.0,)))


def test_rank_and_null_vector():
    M = np.array([[1.0, 2.0], [2.0, 4.0]])
    assert linalg.rank(M) == 1
    assert linalg.rank(np.eye(3)) == 3
    assert linalg.rank(np.zeros((2, 2))) == 0
    v = linalg.null_vector(M)
    assert_allclose(v, np.array([2.0, -1.0]) / np.sqrt(5.0), atol=1e-14)


def test_null_vector_rank_errors():
    with pytest.raises(RankError, match="nonsingular"):
        linalg.null_vector(np.eye(2))
    with pytest.raises(RankError, match="not unique"):
        linalg.null_vector(np.zeros((3, 3)) + np.diag([1.0, 0.0, 0.0]))


def test_matrix_inverse_small(rng):
    M = rng.normal(size=(3, 3)) + 3 * np.eye(3)
    assert_allclose(linalg.matrix_inverse_small(M) @ M, np.eye(3), atol=1e-12)
    with pytest.raises(RankError):
        linalg.matrix_inverse_small([[1.0, 2.0], [2.0, 4.0]])


def test_lyapunov_residual_on_random_hurwitz(rng):
    for _ in range(100):
        n = int(rng.integers(1, 5))
        A = _random_hurwitz(rng, n)
        P = linalg.lyapunov_solve(A)
        residual = np.max(np.abs(A.T @ P + P @ A + np.eye(n)))
        assert residual <= 1e-10 * max(1.0, np.linalg.norm(P))
        assert_allclose(P, P.T)
        assert np.all(np.linalg.eigvalsh(P) > 0)


def test_lyapunov_rejects_unstable():
    with pytest.raises(NotPositiveDefinite):
        linalg.lyapunov_solve([[1.0, 0.0], [0.0, -1.0]])
    with pytest.raises(NotPositiveDefinite):
        linalg.lyapunov_solve([[0.5, 1.0], [0.0, 0.3]])


def test_symmetric_extreme_eigs(rng):
    for n in (1, 2, 3, 4):
        B = rng.normal(size=(n, n))
        S = B @ B.T + np.eye(n)
        lo, hi = linalg.symmetric_extreme_eigs(S)
        ref = np.linalg.eigvalsh(S)
        assert_allclose([lo, hi], [ref[0], ref[-1]], rtol=1e-8)


def test_symmetric_extreme_eigs_rejects_asymmetric():
    with pytest.raises(ValueError, match="symmetric"):
        linalg.symmetric_extreme_eigs([[1.0, 2.0], [0.0, 1.0]])
