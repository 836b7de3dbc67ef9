"""Small dense complex-matrix kernel.

Everything here works on plain ``numpy`` arrays of shape ``(d, d)`` with
``d <= MAX_DIM``. Bipartite index convention: ``(i_A, i_B)`` flattened with
A as the slow index, i.e. the same ordering as ``np.kron(a, b)``.
"""

from __future__ import annotations

from typing import Literal, NamedTuple

import numpy as np

MAX_DIM = 64
HERMITIAN_RTOL = 1e-8


class DimensionError(ValueError):
    """Raised for shape mismatches or dimensions beyond ``MAX_DIM``."""


class NotHermitianError(ValueError):
    pass


class EigenDecomposition(NamedTuple):
    values: np.ndarray
    vectors: np.ndarray  # columns are eigenvectors

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.conj().T


def as_matrix(m) -> np.ndarray:
    """Validate ``m`` as a finite square complex matrix and return a copy."""
    a = np.array(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionError(f"expected a non-empty square matrix, got shape {a.shape}")
    if a.shape[0] > MAX_DIM:
        raise DimensionError(f"dimension {a.shape[0]} exceeds cap {MAX_DIM}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def hermitian_part(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def is_hermitian(m: np.ndarray, rtol: float = HERMITIAN_RTOL) -> bool:
    return np.linalg.norm(m - m.conj().T) <= rtol * np.linalg.norm(m)


def tensor(a, b) -> np.ndarray:
    """Kronecker product with A as the slow index."""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[0] * b.shape[0] > MAX_DIM:
        raise DimensionError(
            f"tensor product dimension {a.shape[0] * b.shape[0]} exceeds cap {MAX_DIM}"
        )
    return np.kron(a, b)


def partial_trace(m, dims: tuple[int, int], keep: Literal["A", "B"]) -> np.ndarray:
    """Reduced matrix of subsystem ``keep`` of a ``dA*dB`` operator."""
    m = as_matrix(m)
    da, db = dims
    if da * db != m.shape[0]:
        raise DimensionError(f"dims {dims} do not match matrix dimension {m.shape[0]}")
    r = m.reshape(da, db, da, db)
    if keep == "A":
        return np.einsum("ijkj->ik", r)
    if keep == "B":
        return np.einsum("ijil->jl", r)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def swap_subsystems(m: np.ndarray, dims: tuple[int, int]) -> np.ndarray:
    """Reorder a bipartite operator from (A, B) to (B, A) ordering."""
    da, db = dims
    return m.reshape(da, db, da, db).transpose(1, 0, 3, 2).reshape(da * db, da * db)


def fix_phases(vectors: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude entry is real positive.

    Ties (within 1e-12) go to the lowest index.
    """
    out = vectors.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        mags = np.abs(col)
        k = int(np.flatnonzero(mags >= mags.max() - 1e-12)[0])
        out[:, j] = col * (np.conj(col[k]) / mags[k])
    return out


def eigh(m) -> EigenDecomposition:
    """Hermitian eigendecomposition with ascending eigenvalues and fixed phases."""
    m = as_matrix(m)
    if not is_hermitian(m):
        raise NotHermitianError("matrix is not Hermitian within tolerance")
    values, vectors = np.linalg.eigh(hermitian_part(m))
    return EigenDecomposition(values, fix_phases(vectors))


def _xlogx(x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = x[pos] * np.log(x[pos])
    return out


def _log_on_support(x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.log(x[pos])
    return out


def matrix_function(
    m,
    kind: Literal["exp", "expm1", "log", "xlogx"],
    scale: complex = 1.0,
) -> np.ndarray:
    """Apply a scalar function to a Hermitian matrix through its spectrum.

    ``exp`` gives ``e^{scale*m}`` and ``expm1`` gives ``e^{scale*m} - I``
    (accurate when ``scale*m`` is small). ``log`` and ``xlogx`` clamp the
    spectrum at zero and act on the support only, with ``0 log 0 = 0``.
    """
    lam, v = eigh(m)
    if kind == "exp":
        f = np.exp(scale * lam.astype(complex))
    elif kind == "expm1":
        f = np.expm1(scale * lam.astype(complex))
    elif kind == "log":
        f = _log_on_support(np.clip(lam, 0.0, None))
    elif kind == "xlogx":
        f = _xlogx(np.clip(lam, 0.0, None))
    else:
        raise ValueError(f"unknown matrix function {kind!r}")
    return (v * f) @ v.conj().T


def unitary_from_hamiltonian(h, t: float) -> np.ndarray:
    """``exp(-i h t)``."""
    return matrix_function(h, "exp", scale=-1j * t)
