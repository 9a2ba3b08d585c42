#!/usr/bin/env python3
"""
linalg.py

Small dense real-matrix kernel used by the synthesis layer.

- determinants (LU with partial pivoting)
- characteristic polynomials (Faddeev-LeVerrier, no complex arithmetic)
- companion pairs and controllability matrices
- Routh-Hurwitz stability test
- null vectors / numerical rank by row reduction
- Lyapunov solve F^T P + P F = -I for small n

Everything here is a pure function of its inputs. Polynomials carry their
coefficients in ascending order, c0 + c1 s + ... + cd s^d.
"""
import logging
import warnings
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve
from scipy.optimize import brentq

logger = logging.getLogger(__name__)

# -------------------------
# Configuration
# -------------------------
RANK_TOL = 1e-9          # relative to the largest admissible pivot
LYAP_RESIDUAL = 1e-10    # entrywise, relative to ||P||
MONIC_TOL = 1e-12


class RankError(ValueError):
    """Raised when a matrix does not have the rank an operation needs."""


class NotPositiveDefinite(ValueError):
    """Raised when a Lyapunov solve has no positive-definite solution."""


# -------------------------
# helpers
# -------------------------
def as_matrix(M, name: str = "M") -> np.ndarray:
    A = np.atleast_2d(np.asarray(M, dtype=float))
    if A.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    return A


def as_square(M, name: str = "M") -> np.ndarray:
    A = as_matrix(M, name)
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be square, got {A.shape}")
    return A


def as_vector(v, n: int = None, name: str = "v") -> np.ndarray:
    x = np.asarray(v, dtype=float).reshape(-1)
    if n is not None and x.shape[0] != n:
        raise ValueError(f"{name} must have length {n}, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} has non-finite entries")
    return x


@dataclass(frozen=True)
class Poly:
    """Real polynomial, coefficients ascending (c0, c1, ..., cd)."""
    coeffs: Tuple[float, ...]

    def __post_init__(self):
        c = tuple(float(x) for x in self.coeffs)
        if len(c) == 0:
            raise ValueError("Poly needs at least one coefficient")
        if not all(np.isfinite(c)):
            raise ValueError(f"Poly has non-finite coefficients: {c}")
        # drop trailing (highest-order) zeros, keep at least c0
        while len(c) > 1 and c[-1] == 0.0:
            c = c[:-1]
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_descending(cls, coeffs: Sequence[float]) -> "Poly":
        return cls(tuple(coeffs)[::-1])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> float:
        return self.coeffs[-1]

    @property
    def is_zero(self) -> bool:
        return self.degree == 0 and self.coeffs[0] == 0.0

    def is_monic(self, tol: float = MONIC_TOL) -> bool:
        return abs(self.leading - 1.0) <= tol

    def descending(self) -> np.ndarray:
        return np.array(self.coeffs[::-1])

    def __call__(self, s: float) -> float:
        return poly_eval(self, s)

    def __str__(self) -> str:
        terms = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if c == 0.0 and k != 0:
                continue
            if k == 0:
                terms.append(f"{c:g}")
            elif k == 1:
                terms.append(f"{c:g}*s")
            else:
                terms.append(f"{c:g}*s^{k}")
        return " + ".join(terms)


def poly_eval(p: Poly, s: float) -> float:
    acc = 0.0
    for c in reversed(p.coeffs):
        acc = acc * s + c
    return acc


# -------------------------
# determinants / inverses
# -------------------------
def _lu(M: np.ndarray):
    with warnings.catch_warnings():
        # an exactly singular M is a legal input here
        warnings.simplefilter("ignore", LinAlgWarning)
        return lu_factor(M, check_finite=False)


def det(M) -> float:
    """Determinant via LU with partial pivoting."""
    A = as_square(M)
    lu, piv = _lu(A)
    swaps = int(np.count_nonzero(piv != np.arange(A.shape[0])))
    sign = -1.0 if swaps % 2 else 1.0
    return float(sign * np.prod(np.diag(lu)))


def matrix_inverse_small(M) -> np.ndarray:
    A = as_square(M)
    lu, piv = _lu(A)
    diag = np.abs(np.diag(lu))
    scale = max(float(np.max(np.abs(A))), 1.0)
    if np.min(diag) <= np.finfo(float).eps * scale:
        raise RankError(f"matrix is singular (smallest LU pivot {np.min(diag):.3e})")
    return lu_solve((lu, piv), np.eye(A.shape[0]), check_finite=False)


# -------------------------
# polynomials / canonical forms
# -------------------------
def char_poly(F) -> Poly:
    """Monic det(sI - F) by the Faddeev-LeVerrier recursion."""
    A = as_square(F, "F")
    n = A.shape[0]
    c = np.zeros(n + 1)
    c[n] = 1.0
    M = np.zeros_like(A)
    I = np.eye(n)
    for k in range(1, n + 1):
        M = A @ M + c[n - k + 1] * I
        c[n - k] = -np.trace(A @ M) / k
    return Poly(tuple(c))


def companion_pair(p: Poly) -> Tuple[np.ndarray, np.ndarray]:
    """Controllability canonical form (F_c, g_c) with char_poly(F_c) = p."""
    if not p.is_monic():
        raise ValueError(f"companion_pair needs a monic polynomial, leading coefficient is {p.leading}")
    n = p.degree
    if n < 1:
        raise ValueError("companion_pair needs degree >= 1")
    Fc = np.zeros((n, n))
    Fc[:-1, 1:] = np.eye(n - 1)
    Fc[-1, :] = -np.asarray(p.coeffs[:-1])
    gc = np.zeros(n)
    gc[-1] = 1.0
    return Fc, gc


def controllability_matrix(F, g) -> np.ndarray:
    """Columns [g, Fg, ..., F^{n-1} g]."""
    A = as_square(F, "F")
    n = A.shape[0]
    col = as_vector(g, n, "g")
    R = np.empty((n, n))
    for k in range(n):
        R[:, k] = col
        col = A @ col
    return R


def hurwitz_test(p: Poly) -> bool:
    """True iff every root of p has strictly negative real part.

    Routh array on the descending coefficients. A zero or negative entry in
    the first column (zero pivot included) means not Hurwitz.
    """
    if p.is_zero:
        raise ValueError("hurwitz_test of the zero polynomial")
    if p.degree < 1:
        raise ValueError(f"hurwitz_test needs degree >= 1, got {p.degree}")

    a = p.descending()
    if a[0] < 0:
        a = -a
    if np.any(a <= 0):
        return False

    n = p.degree
    width = n // 2 + 2
    rows = [np.zeros(width), np.zeros(width)]
    rows[0][: len(a[0::2])] = a[0::2]
    rows[1][: len(a[1::2])] = a[1::2]
    for k in range(2, n + 1):
        prev, pprev = rows[k - 1], rows[k - 2]
        if prev[0] <= 0:
            return False
        new = np.zeros(width)
        for j in range(width - 1):
            new[j] = (prev[0] * pprev[j + 1] - pprev[0] * prev[j + 1]) / prev[0]
        rows.append(new)
    return all(r[0] > 0 for r in rows[: n + 1])


# -------------------------
# rank / null space
# -------------------------
def _row_reduce(M: np.ndarray, tol: float):
    """Reduced row echelon form with partial pivoting; returns (R, pivot_cols)."""
    A = M.astype(float).copy()
    n_rows, n_cols = A.shape
    threshold = tol * float(np.max(np.abs(A))) if A.size else 0.0
    pivots = []
    row = 0
    for col in range(n_cols):
        if row >= n_rows:
            break
        p = row + int(np.argmax(np.abs(A[row:, col])))
        if abs(A[p, col]) <= threshold:
            continue
        if p != row:
            A[[row, p]] = A[[p, row]]
        A[row] /= A[row, col]
        for r in range(n_rows):
            if r != row and A[r, col] != 0.0:
                A[r] -= A[r, col] * A[row]
        pivots.append(col)
        row += 1
    return A, pivots


def rank(M, tol: float = RANK_TOL) -> int:
    A = as_matrix(M)
    if not np.any(A):
        return 0
    return len(_row_reduce(A, tol)[1])


def null_vector(M, tol: float = RANK_TOL) -> np.ndarray:
    """Unit vector spanning the kernel of a rank-(n-1) square matrix.

    Sign is fixed so the largest-magnitude component is positive.
    """
    A = as_square(M)
    n = A.shape[0]
    R, pivots = _row_reduce(A, tol)
    r = len(pivots)
    if r == n:
        raise RankError("matrix nonsingular")
    if r < n - 1:
        raise RankError(f"equilibrium direction not unique (rank {r} < {n - 1})")

    free = next(c for c in range(n) if c not in pivots)
    v = np.zeros(n)
    v[free] = 1.0
    for i, pc in enumerate(pivots):
        v[pc] = -R[i, free]
    v /= np.linalg.norm(v)
    if v[int(np.argmax(np.abs(v)))] < 0:
        v = -v

    residual = float(np.linalg.norm(A @ v))
    norm_a = float(np.linalg.norm(A))
    if residual > tol * max(norm_a, 1.0) * n:
        logger.warning("null_vector residual %.3e above tolerance for ||M||=%.3e", residual, norm_a)
    return v


# -------------------------
# Lyapunov
# -------------------------
def lyapunov_solve(F) -> np.ndarray:
    """Symmetric P with F^T P + P F = -I, by stacking the n(n+1)/2 unknowns."""
    A = as_square(F, "F")
    n = A.shape[0]
    idx = [(i, j) for i in range(n) for j in range(i, n)]
    m = len(idx)
    L = np.empty((m, m))
    for col, (i, j) in enumerate(idx):
        E = np.zeros((n, n))
        E[i, j] = E[j, i] = 1.0
        image = A.T @ E + E @ A
        L[:, col] = [image[k, l] for (k, l) in idx]
    rhs = np.array([-1.0 if k == l else 0.0 for (k, l) in idx])

    try:
        sol = np.linalg.solve(L, rhs)
    except np.linalg.LinAlgError as e:
        raise NotPositiveDefinite(f"Lyapunov operator is singular for this F: {e}") from e

    P = np.zeros((n, n))
    for val, (i, j) in zip(sol, idx):
        P[i, j] = P[j, i] = val

    try:
        np.linalg.cholesky(P)
    except np.linalg.LinAlgError as e:
        raise NotPositiveDefinite("Lyapunov solution is not positive definite (F not Hurwitz)") from e

    residual = float(np.max(np.abs(A.T @ P + P @ A + np.eye(n))))
    if residual > LYAP_RESIDUAL * float(np.linalg.norm(P)):
        logger.warning("lyapunov residual %.3e exceeds %.1e*||P||", residual, LYAP_RESIDUAL)
    return P


def symmetric_extreme_eigs(P) -> Tuple[float, float]:
    """(lambda_min, lambda_max) of a symmetric matrix from its characteristic polynomial."""
    S = as_square(P, "P")
    if not np.allclose(S, S.T, rtol=0.0, atol=1e-12 * max(1.0, float(np.max(np.abs(S))))):
        raise ValueError("symmetric_extreme_eigs needs a symmetric matrix")
    p = char_poly(S)
    roots = np.sort(np.real(np.roots(p.descending())))

    def polish(r: float) -> float:
        h = 1e-6 * max(1.0, abs(r))
        lo, hi = r - h, r + h
        f_lo, f_hi = poly_eval(p, lo), poly_eval(p, hi)
        if f_lo == 0.0:
            return lo
        if f_hi == 0.0:
            return hi
        if f_lo * f_hi < 0:
            return float(brentq(lambda s: poly_eval(p, s), lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps))
        return float(r)

    return polish(float(roots[0])), polish(float(roots[-1]))
