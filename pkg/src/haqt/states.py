"""Quantum-state types, fidelity metrics, random-state sampling and
deterministic Hermitian eigendecomposition.

All types are immutable after construction and validated against their
defining invariants (Hermiticity, unit trace, positivity, unit norm) at
tolerance 1e-10; round-trip identities are guaranteed at 1e-9.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
NORM_TOL = 1e-10
PHASE_SIGNIFICANCE = 1e-8


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DensityMatrix:
    """A d x d Hermitian, unit-trace, positive-semidefinite matrix."""

    dim: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.dim, self.dim):
            raise ValueError(f"expected a {self.dim}x{self.dim} matrix, got {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > HERMITICITY_TOL:
            raise ValueError("matrix is not Hermitian within tolerance")
        if abs(np.trace(m).real - 1.0) > TRACE_TOL or abs(np.trace(m).imag) > TRACE_TOL:
            raise ValueError("matrix trace differs from 1 beyond tolerance")
        if np.linalg.eigvalsh(m).min() < -PSD_TOL:
            raise ValueError("matrix has a negative eigenvalue beyond tolerance")
        object.__setattr__(self, "matrix", _freeze(m))

    @staticmethod
    def from_matrix(matrix) -> "DensityMatrix":
        m = np.asarray(matrix, dtype=complex)
        return DensityMatrix(dim=m.shape[0], matrix=m)

    @staticmethod
    def maximally_mixed(dim: int) -> "DensityMatrix":
        return DensityMatrix(dim, np.eye(dim, dtype=complex) / dim)


@dataclass(frozen=True)
class PureState:
    """A unit-norm complex amplitude vector of length d."""

    dim: int
    amplitudes: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.amplitudes, dtype=complex)
        if v.shape != (self.dim,):
            raise ValueError(f"expected an amplitude vector of length {self.dim}")
        if abs(np.linalg.norm(v) - 1.0) > NORM_TOL:
            raise ValueError("amplitudes are not unit norm within tolerance")
        object.__setattr__(self, "amplitudes", _freeze(v))

    @staticmethod
    def from_amplitudes(amplitudes) -> "PureState":
        v = np.asarray(amplitudes, dtype=complex)
        return PureState(dim=v.shape[0], amplitudes=v)

    @staticmethod
    def basis_state(dim: int, index: int) -> "PureState":
        v = np.zeros(dim, dtype=complex)
        v[index] = 1.0
        return PureState(dim, v)

    def density(self) -> DensityMatrix:
        """The rank-one density matrix |psi><psi|."""
        return DensityMatrix(self.dim, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues sorted descending, paired with unitary eigenvector columns.

    Column phases are fixed so the first significant component of each
    eigenvector is real and positive, which makes the decomposition a
    deterministic function of the input matrix.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.eigenvalues, dtype=float)
        u = np.asarray(self.eigenvectors, dtype=complex)
        d = w.shape[0]
        if u.shape != (d, d):
            raise ValueError("eigenvector matrix shape does not match eigenvalues")
        if np.any(np.diff(w) > 1e-12):
            raise ValueError("eigenvalues must be sorted descending")
        if np.max(np.abs(u.conj().T @ u - np.eye(d))) > HERMITICITY_TOL:
            raise ValueError("eigenvectors are not unitary within tolerance")
        object.__setattr__(self, "eigenvalues", _freeze(w))
        object.__setattr__(self, "eigenvectors", _freeze(u))

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def reconstruct(self) -> np.ndarray:
        """U diag(w) U^dag."""
        return (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.conj().T


def _as_matrix(state) -> np.ndarray:
    if isinstance(state, DensityMatrix):
        return state.matrix
    if isinstance(state, PureState):
        return np.outer(state.amplitudes, state.amplitudes.conj())
    return np.asarray(state, dtype=complex)


def eigendecompose(state) -> EigenDecomposition:
    """Deterministic eigendecomposition of a Hermitian matrix.

    Eigenvalues are sorted descending with a stable tie-break, and each
    eigenvector's global phase is fixed by making its first component of
    magnitude above 1e-8 real and positive.
    """
    m = _as_matrix(state)
    if np.max(np.abs(m - m.conj().T)) > HERMITICITY_TOL:
        raise ValueError("eigendecompose requires a Hermitian matrix")
    w, u = np.linalg.eigh(m)
    order = np.argsort(-w, kind="stable")
    w = w[order]
    u = np.array(u[:, order])
    for c in range(u.shape[1]):
        col = u[:, c]
        significant = np.flatnonzero(np.abs(col) > PHASE_SIGNIFICANCE)
        pivot = col[significant[0]]
        u[:, c] = col * (pivot.conjugate() / abs(pivot))
    return EigenDecomposition(w, u)


def _sqrt_psd(m: np.ndarray) -> np.ndarray:
    """Matrix square root of a PSD Hermitian matrix, clipping round-off negatives."""
    w, u = np.linalg.eigh(m)
    if w.min() < -1e-9:
        raise ValueError("matrix is not positive semidefinite within tolerance")
    w = np.clip(w, 0.0, None)
    return (u * np.sqrt(w)) @ u.conj().T


def _root_fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Tr sqrt(sqrt(rho) sigma sqrt(rho)), clipped into [0, 1]."""
    sq = _sqrt_psd(rho)
    inner = sq @ sigma @ sq
    inner = 0.5 * (inner + inner.conj().T)
    w = np.linalg.eigvalsh(inner)
    if w.min() < -1e-9:
        raise ValueError("matrix is not positive semidefinite within tolerance")
    w = np.clip(w, 0.0, None)
    return min(1.0, float(np.sum(np.sqrt(w))))


def _check_same_dim(rho, sigma):
    a, b = _as_matrix(rho), _as_matrix(sigma)
    if a.shape != b.shape:
        raise ValueError("states have mismatched dimensions")
    return a, b


def fidelity(rho, sigma) -> float:
    """Squared-overlap fidelity Tr^2 sqrt(sqrt(rho) sigma sqrt(rho)), in [0, 1]."""
    a, b = _check_same_dim(rho, sigma)
    return _root_fidelity(a, b) ** 2


def infidelity(rho, sigma) -> float:
    """1 - fidelity(rho, sigma); zero exactly when the states coincide."""
    return 1.0 - fidelity(rho, sigma)


def bures_distance_sq(rho, sigma) -> float:
    """Squared Bures distance 2 (1 - Tr sqrt(sqrt(rho) sigma sqrt(rho)))."""
    a, b = _check_same_dim(rho, sigma)
    return 2.0 * (1.0 - _root_fidelity(a, b))


def random_pure(d: int, rng: np.random.Generator) -> PureState:
    """Haar-random pure state: normalized complex Gaussian vector."""
    if d < 2:
        raise ValueError("dimension must be at least 2")
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return PureState(d, v / np.linalg.norm(v))


def random_full_rank(d: int, rng: np.random.Generator) -> DensityMatrix:
    """Hilbert-Schmidt-random mixed state G G^dag / Tr(G G^dag), full rank a.s."""
    if d < 2:
        raise ValueError("dimension must be at least 2")
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    m = g @ g.conj().T
    return DensityMatrix(d, m / np.trace(m).real)


# --- JSON serialization -----------------------------------------------------
#
# Schema: {"dim": d, "matrix": [[[re, im], ...], ...]} row-major.


def density_matrix_to_json(rho: DensityMatrix) -> dict:
    m = rho.matrix
    rows = [[[float(m[i, j].real), float(m[i, j].imag)] for j in range(rho.dim)]
            for i in range(rho.dim)]
    return {"dim": rho.dim, "matrix": rows}


def density_matrix_from_json(obj: dict) -> DensityMatrix:
    """Parse and validate; rejects matrices violating the state invariants."""
    d = int(obj["dim"])
    rows = obj["matrix"]
    if len(rows) != d or any(len(r) != d for r in rows):
        raise ValueError("matrix shape does not match declared dim")
    m = np.array([[complex(e[0], e[1]) for e in row] for row in rows])
    return DensityMatrix(d, m)


def save_state(rho: DensityMatrix, path) -> None:
    with open(path, "w") as fh:
        json.dump(density_matrix_to_json(rho), fh, sort_keys=True)
        fh.write("\n")


def load_state(path) -> DensityMatrix:
    with open(path) as fh:
        return density_matrix_from_json(json.load(fh))
