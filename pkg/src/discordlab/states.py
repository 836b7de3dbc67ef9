"""Density matrices, Gibbs states, entropies and energies."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from mpmath import mp

from . import qmat

K_B_SI = 1.380649e-23  # J/K
LN2 = np.log(2.0)

NEGATIVE_EIG_TOL = 1e-10
TRACE_TOL = 1e-10


class StateError(ValueError):
    pass


@dataclass(frozen=True)
class DensityMatrix:
    """Validated density matrix with bipartite dimension metadata.

    ``dims = (dA, dB)`` with ``dA * dB`` equal to the matrix dimension;
    monopartite states use ``dB = 1``. On construction the matrix is
    Hermitized, eigenvalues in ``[-1e-10, 0)`` are clipped to zero and the
    trace renormalized; anything worse raises :class:`StateError`.
    """

    mat: np.ndarray
    dims: tuple[int, int] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        m = qmat.as_matrix(self.mat)
        d = m.shape[0]
        dims = (d, 1) if self.dims is None else tuple(int(x) for x in self.dims)
        if len(dims) != 2 or dims[0] * dims[1] != d:
            raise StateError(f"dims {dims} incompatible with dimension {d}")
        if not qmat.is_hermitian(m):
            raise StateError("density matrix is not Hermitian")
        m = qmat.hermitian_part(m)
        tr = np.trace(m).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise StateError(f"trace {tr!r} differs from 1")
        lam, v = np.linalg.eigh(m)
        if lam[0] < -NEGATIVE_EIG_TOL:
            raise StateError(f"negative eigenvalue {lam[0]:.3e}")
        if lam[0] < 0:
            lam = np.clip(lam, 0.0, None)
            lam /= lam.sum()
            m = qmat.hermitian_part((v * lam) @ v.conj().T)
        m.setflags(write=False)
        object.__setattr__(self, "mat", m)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @property
    def is_bipartite(self) -> bool:
        return self.dims[1] > 1 and self.dims[0] > 1

    def reduced(self, keep: str) -> "DensityMatrix":
        r = qmat.partial_trace(self.mat, self.dims, keep)
        return DensityMatrix(r, (r.shape[0], 1))

    def swapped(self) -> "DensityMatrix":
        """Same state with the subsystem order reversed."""
        return DensityMatrix(qmat.swap_subsystems(self.mat, self.dims), self.dims[::-1])

    def purity(self) -> float:
        return float(np.real(np.trace(self.mat @ self.mat)))


@dataclass(frozen=True)
class HermitianOperator:
    mat: np.ndarray
    label: str = ""

    def __post_init__(self):
        m = qmat.as_matrix(self.mat)
        if not qmat.is_hermitian(m):
            raise qmat.NotHermitianError(f"operator {self.label!r} is not Hermitian")
        object.__setattr__(self, "mat", qmat.hermitian_part(m))


@dataclass(frozen=True)
class ThermalSpec:
    """Hamiltonian and temperature of a Gibbs state.

    ``boltzmann_constant`` fixes the unit system: the SI value for energies
    in joules and temperatures in kelvin, or 1 for dimensionless ``kT``.
    """

    hamiltonian: HermitianOperator
    temperature: float
    boltzmann_constant: float = K_B_SI

    def __post_init__(self):
        if not self.temperature > 0:
            raise StateError("temperature must be positive")
        if not self.boltzmann_constant > 0:
            raise StateError("Boltzmann constant must be positive")

    @property
    def kT(self) -> float:
        return self.boltzmann_constant * self.temperature

    @property
    def beta(self) -> float:
        return 1.0 / self.kT


def _op(h) -> np.ndarray:
    return h.mat if isinstance(h, HermitianOperator) else qmat.as_matrix(h)


def thermal_state(spec: ThermalSpec) -> DensityMatrix:
    """Gibbs state ``exp(-H/kT)/Z``; the ground energy is shifted out first."""
    lam, v = qmat.eigh(spec.hamiltonian.mat)
    w = np.exp(-(lam - lam[0]) / spec.kT)
    p = w / w.sum()
    return DensityMatrix((v * p) @ v.conj().T)


def thermal_populations(energies, kT: float) -> np.ndarray:
    e = np.asarray(energies, dtype=float)
    w = np.exp(-(e - e.min()) / kT)
    return w / w.sum()


def shannon_entropy(p) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def entropy_of(mat: np.ndarray) -> float:
    """von Neumann entropy (nats) of a raw Hermitian matrix."""
    lam = np.linalg.eigvalsh(qmat.hermitian_part(mat))
    return shannon_entropy(np.clip(lam, 0.0, None))


def von_neumann_entropy(rho: DensityMatrix) -> float:
    return entropy_of(rho.mat)


def entropy_hp(mat, dps: int = 50):
    """Entropy evaluated at ``dps`` decimal digits; returns an mpmath number.

    ``mat`` may be a numpy array or an ``mp.matrix``.
    """
    with mp.workdps(dps):
        a = mat if isinstance(mat, mp.matrix) else mp.matrix(np.asarray(mat).tolist())
        a = (a + a.transpose_conj()) / 2
        lam = mp.eighe(a, eigvals_only=True)
        s = mp.mpf(0)
        for x in lam:
            x = mp.re(x)
            if x > 0:
                s -= x * mp.log(x)
        return +s


def energy(rho: DensityMatrix, h) -> float:
    """``tr(H rho)``."""
    hm = _op(h)
    if hm.shape != rho.mat.shape:
        raise qmat.DimensionError(
            f"operator shape {hm.shape} does not match state shape {rho.mat.shape}"
        )
    val = np.trace(hm @ rho.mat)
    if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
        raise ValueError("energy expectation has a non-negligible imaginary part")
    return float(val.real)


def pure_state(psi, dims: tuple[int, int] | None = None) -> DensityMatrix:
    psi = np.asarray(psi, dtype=complex).ravel()
    psi = psi / np.linalg.norm(psi)
    return DensityMatrix(np.outer(psi, psi.conj()), dims)


def product_state(rho_a: DensityMatrix, rho_b: DensityMatrix) -> DensityMatrix:
    return DensityMatrix(qmat.tensor(rho_a.mat, rho_b.mat), (rho_a.dim, rho_b.dim))


def nats_to_bits(x: float) -> float:
    return x / LN2
