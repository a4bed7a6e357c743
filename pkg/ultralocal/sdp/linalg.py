import numpy as np
import scipy.linalg

SQRT2 = np.sqrt(2.)


class NotSymmetric(ValueError):
    pass


def symmetrize(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + np.swapaxes(M, -1, -2))


def asymmetry(M: np.ndarray) -> float:
    if not M.size:
        return 0.
    return float(np.max(np.abs(M - np.swapaxes(M, -1, -2))))


def min_eig(M: np.ndarray, tol: float = 1e-10) -> float:
    """Smallest eigenvalue of a symmetric matrix; +inf for an empty one."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NotSymmetric(f'Expected a square matrix, got shape {M.shape}')
    if not M.size:
        return float('inf')
    scale = max(1., float(np.max(np.abs(M))))
    if asymmetry(M) > tol * scale:
        raise NotSymmetric(f'Matrix is not symmetric: max |M - M^T| = {asymmetry(M):.3g}')
    return float(scipy.linalg.eigvalsh(symmetrize(M), subset_by_index=[0, 0])[0])


def svec_indices(n: int):
    return np.triu_indices(n)


def svec(S: np.ndarray) -> np.ndarray:
    """Upper triangle, row-major, off-diagonals scaled by sqrt(2) so that svec(A) . svec(B) = <A, B>."""
    rows, cols = svec_indices(S.shape[0])
    scale = np.where(rows == cols, 1., SQRT2)
    return S[rows, cols] * scale


def smat(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = int(round((np.sqrt(8 * v.size + 1) - 1) / 2))
    if n * (n + 1) // 2 != v.size:
        raise ValueError(f'Vector of length {v.size} is not a packed symmetric matrix')
    rows, cols = svec_indices(n)
    S = np.zeros((n, n))
    S[rows, cols] = np.where(rows == cols, v, v / SQRT2)
    S[cols, rows] = S[rows, cols]
    return S


def svec_basis(n: int) -> np.ndarray:
    """(n(n+1)/2, n, n) stack of symmetric basis matrices with smat(v) = sum_k v_k basis[k]."""
    rows, cols = svec_indices(n)
    basis = np.zeros((rows.size, n, n))
    k = np.arange(rows.size)
    diag = rows == cols
    basis[k[diag], rows[diag], cols[diag]] = 1.
    basis[k[~diag], rows[~diag], cols[~diag]] = 1. / SQRT2
    basis[k[~diag], cols[~diag], rows[~diag]] = 1. / SQRT2
    return basis
