"""
Dense complex linear-algebra kernel shared by every other module.

All functions are pure: they never modify their inputs and return fresh arrays.
Eigenvalues are always reported in ascending order so that "the n smallest"
is a prefix slice.
"""

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from schbf import config
from schbf.exceptions import DimensionError, SingularMatrixError


@dataclass(frozen=True)
class HermitianEig:
    """Eigen-decomposition of a Hermitian matrix.

    Column ``i`` of ``eigenvectors`` belongs to ``eigenvalues[i]``; the
    eigenvalues are real and ascending.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def smallest(self, n: int) -> np.ndarray:
        """Orthonormal eigenvectors of the ``n`` smallest eigenvalues."""
        return self.eigenvectors[:, :n]


def _require_square(m: np.ndarray) -> None:
    if m.ndim < 2 or m.shape[-1] != m.shape[-2] or m.shape[-1] == 0:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")


def hermitian_part(m: np.ndarray) -> np.ndarray:
    """Return (M + M^H) / 2 (applied over the last two axes)."""
    m = np.asarray(m)
    return 0.5 * (m + np.conj(np.swapaxes(m, -1, -2)))


def hermitian_eig(m) -> HermitianEig:
    """Eigen-decomposition of the Hermitian part of a single square matrix, eigenvalues ascending."""
    m = np.asarray(m, dtype=complex)
    _require_square(m)
    if m.ndim != 2:
        raise DimensionError(f"expected a single matrix, got shape {m.shape}")
    # eigh already returns ascending eigenvalues
    eigenvalues, eigenvectors = linalg.eigh(hermitian_part(m))
    return HermitianEig(eigenvalues=eigenvalues, eigenvectors=eigenvectors)


def inverse(m) -> np.ndarray:
    """Inverse of a square matrix, or of a stack of them (last two axes).

    Raises ``SingularMatrixError`` when the 2-norm condition number exceeds
    ``config.SINGULAR_CONDITION_LIMIT``.
    """
    m = np.asarray(m, dtype=complex)
    _require_square(m)
    cond = np.linalg.cond(m)
    if not np.all(np.isfinite(cond)) or np.any(cond > config.SINGULAR_CONDITION_LIMIT):
        raise SingularMatrixError(f"matrix is singular to working precision (cond={np.max(cond):.3e})")
    return np.linalg.inv(m)


def unitary_dft(time_vectors, axis: int = -1) -> np.ndarray:
    """Unitary DFT along ``axis``: s_k = (1/sqrt(N)) sum_n s_n exp(-j 2 pi n k / N).

    A block of N vectors is passed as a matrix whose columns are the time
    samples (time along the last axis by default).
    """
    x = np.asarray(time_vectors, dtype=complex)
    if x.ndim == 0 or x.shape[axis] == 0:
        raise DimensionError("cannot transform an empty block")
    return np.fft.fft(x, axis=axis, norm="ortho")


def unitary_idft(freq_vectors, axis: int = -1) -> np.ndarray:
    """Inverse of :func:`unitary_dft`: y_n = (1/sqrt(N)) sum_k y_k exp(j 2 pi n k / N)."""
    x = np.asarray(freq_vectors, dtype=complex)
    if x.ndim == 0 or x.shape[axis] == 0:
        raise DimensionError("cannot transform an empty block")
    return np.fft.ifft(x, axis=axis, norm="ortho")


def complex_gaussian(rng: np.random.Generator, shape, variance: float = 1.0) -> np.ndarray:
    """Circularly-symmetric complex Gaussian samples with the given variance."""
    scale = np.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def random_para_unitary(m: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Random m x n matrix R with R^H R = I_n (QR of a complex Gaussian draw)."""
    if n < 1 or m < n:
        raise DimensionError(f"para-unitary matrix needs m >= n >= 1, got m={m}, n={n}")
    q, r = linalg.qr(complex_gaussian(rng, (m, n)), mode="economic")
    # fixing the phase of diag(r) makes the draw Haar distributed
    phases = np.diag(r) / np.where(np.abs(np.diag(r)) > 0, np.abs(np.diag(r)), 1.0)
    return q * phases[np.newaxis, :]


def random_hermitian(m: int, rng: np.random.Generator) -> np.ndarray:
    """Hermitian part of an m x m complex Gaussian draw."""
    s = complex_gaussian(rng, (m, m))
    return hermitian_part(s)


def random_positive_definite(m: int, rng: np.random.Generator, epsilon: float = 1e-6) -> np.ndarray:
    """S^H S + epsilon I for a complex Gaussian S."""
    s = complex_gaussian(rng, (m, m))
    return hermitian_part(s.conj().T @ s) + epsilon * np.eye(m)
