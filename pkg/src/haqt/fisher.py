"""Fisher-information analysis: quantum and classical information matrices
in Gell-Mann coordinates, the Gill-Massar bound and the guarantee factor.

For a full-rank state written in its own eigenbasis (eigenvalues lam_m),
the quantum Fisher matrix is block diagonal in the canonical coordinate
ordering:

    J^A[(alpha,j,k), (alpha,j,k)] = 1 / (lam_j + lam_k)
    J^D[k, l] = sum_m c_km c_lm / (4 lam_m),  c_km = <m|sigma_k|m>
    J^{AD} = 0.

``qfim`` assembles these blocks directly; ``sld_qfim_oracle`` rebuilds the
same matrix from explicitly solved symmetric logarithmic derivatives and
serves as an independent cross-check.

``cfim`` evaluates the classical Fisher matrix of an arbitrary basis-set
measurement, sum_m (1/p_m) (dp_m/dS_a)(dp_m/dS_b) with each basis weighted
by its ensemble share 1/M. For the minimal adaptive set aligned with the
state's eigenbasis, its off-diagonal sector satisfies I^A = J^A / M_d
exactly and the diagonal sector dominates (in the semidefinite order) the
closed-form prediction assembled by ``cfim_block``, guaranteeing
I >= J / M_d.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bases import BasisSet, n_bases
from .gellmann import (a_block_size, all_operators, diag_expectations,
                       n_coords, pair_list)
from .states import DensityMatrix, EigenDecomposition

RANK_TOL = 1e-10
SYMMETRY_TOL = 1e-9


@dataclass(frozen=True)
class FisherMatrix:
    """A (d^2-1) x (d^2-1) real symmetric information matrix in the
    canonical Gell-Mann coordinate ordering."""

    dim: int
    matrix: np.ndarray
    kind: str   # "quantum" | "classical"

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        n = n_coords(self.dim)
        if m.shape != (n, n):
            raise ValueError(f"expected a {n}x{n} matrix for dimension {self.dim}")
        if np.max(np.abs(m - m.T)) > SYMMETRY_TOL:
            raise ValueError("information matrix must be symmetric")
        if self.kind not in ("quantum", "classical"):
            raise ValueError("kind must be 'quantum' or 'classical'")
        m = 0.5 * (m + m.T)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def a_block(self) -> "_SubMatrix":
        """The off-diagonal (pair-coordinate) sub-matrix."""
        n = a_block_size(self.dim)
        return _sub_matrix(self, self.matrix[:n, :n])

    def d_block(self) -> "_SubMatrix":
        """The diagonal-coordinate sub-matrix."""
        n = a_block_size(self.dim)
        return _sub_matrix(self, self.matrix[n:, n:])

    def ad_block(self) -> np.ndarray:
        """The off-diagonal/diagonal coupling rectangle (zero when aligned)."""
        n = a_block_size(self.dim)
        return self.matrix[:n, n:]


@dataclass(frozen=True)
class _SubMatrix:
    """A coordinate sub-block of a FisherMatrix (not square-completed)."""

    dim: int
    matrix: np.ndarray
    kind: str


def _sub_matrix(parent: FisherMatrix, block: np.ndarray) -> _SubMatrix:
    b = 0.5 * (block + block.T)
    b.setflags(write=False)
    return _SubMatrix(parent.dim, b, parent.kind)


def _eigenvalues_or_raise(eig: EigenDecomposition) -> np.ndarray:
    lam = eig.eigenvalues
    if lam.min() <= RANK_TOL:
        raise ValueError("QFIM singular for rank-deficient state")
    return lam


def qfim(eig: EigenDecomposition) -> FisherMatrix:
    """Quantum Fisher matrix of a full-rank state, in its eigenbasis."""
    lam = _eigenvalues_or_raise(eig)
    d = eig.dim
    n = n_coords(d)
    out = np.zeros((n, n))
    idx = 0
    for _alpha in (0, 1):
        for j, k in pair_list(d):
            out[idx, idx] = 1.0 / (lam[j] + lam[k])
            idx += 1
    c = diag_expectations(d)
    out[idx:, idx:] = c @ ((1.0 / (4.0 * lam))[:, None] * c.T)
    return FisherMatrix(d, out, "quantum")


def sld_qfim_oracle(eig: EigenDecomposition) -> FisherMatrix:
    """Quantum Fisher matrix from explicit symmetric logarithmic derivatives.

    Solves (L_a)_{mn} = (sigma_a)_{mn} / (lam_m + lam_n) elementwise in the
    eigenbasis and assembles Re Tr[rho L_a L_b]; independent of
    :func:`qfim` and used to validate it.
    """
    lam = _eigenvalues_or_raise(eig)
    d = eig.dim
    denom = lam[:, None] + lam[None, :]
    slds = np.array([op / denom for op in all_operators(d)])
    out = np.einsum("m,amn,bnm->ab", lam, slds, slds).real
    return FisherMatrix(d, 0.5 * (out + out.T), "quantum")


def cfim(rho: DensityMatrix, bs: BasisSet) -> FisherMatrix:
    """Classical Fisher matrix of a basis-set measurement at ``rho``.

    Uses analytic derivatives dp_m/dS_a = <b_m| sigma_a / 2 |b_m> and the
    ensemble weight 1/M per basis. Raises if any outcome has vanishing
    probability but a non-vanishing derivative (the information diverges).
    """
    if rho.dim != bs.dim:
        raise ValueError("state and basis-set dimensions do not match")
    d = rho.dim
    rows = bs.stacked
    probs = np.einsum("ij,ij->i", rows.conj() @ rho.matrix, rows).real
    probs = np.clip(probs, 0.0, None)

    derivs = np.empty((rows.shape[0], n_coords(d)))
    pairs = pair_list(d)
    ji = np.array([p[0] for p in pairs])
    ki = np.array([p[1] for p in pairs])
    npair = len(pairs)
    cross = rows[:, ji].conj() * rows[:, ki]
    derivs[:, :npair] = cross.real
    derivs[:, npair:2 * npair] = -cross.imag
    derivs[:, 2 * npair:] = 0.5 * (np.abs(rows) ** 2) @ diag_expectations(d).T

    degenerate = probs < RANK_TOL
    if np.any(degenerate & (np.max(np.abs(derivs), axis=1) > 1e-9)):
        raise ValueError("CFIM singular: an outcome has zero probability "
                         "but non-zero sensitivity")
    keep = ~degenerate
    weighted = derivs[keep] / probs[keep, None]
    out = derivs[keep].T @ weighted / len(bs)
    return FisherMatrix(d, 0.5 * (out + out.T), "classical")


def cfim_haqt(rho: DensityMatrix, bs: BasisSet) -> FisherMatrix:
    """Classical Fisher matrix of the minimal adaptive measurement.

    ``rho`` must be full rank and expressed in its eigenframe, with ``bs``
    the minimal basis set aligned to that frame.
    """
    if np.linalg.eigvalsh(rho.matrix).min() <= RANK_TOL:
        raise ValueError("CFIM singular for rank-deficient state")
    if len(bs) != n_bases(bs.dim):
        raise ValueError("expected the minimal basis set "
                         f"({n_bases(bs.dim)} bases for dimension {bs.dim})")
    return cfim(rho, bs)


def cfim_block(eig: EigenDecomposition) -> FisherMatrix:
    """Closed-form block prediction for the minimal adaptive measurement:
    blockdiag(J^A / M_d, (1 + [d]) J^D / M_d) with [d] = d mod 2.

    The off-diagonal block is exact. The diagonal block counts only the
    information carried by computational-type outcomes; the measured
    matrix from :func:`cfim_haqt` additionally picks up the diagonal-
    sector sensitivity of the superposition outcomes for d >= 3, so it
    dominates this prediction in the semidefinite order.
    """
    d = eig.dim
    m = n_bases(d)
    parity = d % 2
    j = qfim(eig).matrix.copy()
    na = a_block_size(d)
    j[:na, :na] /= m
    j[na:, na:] *= (1.0 + parity) / m
    return FisherMatrix(d, j, "classical")


def gill_massar_bound(d: int, total_shots: int) -> float:
    """Lower bound (d^2 - 1)(d + 1) / (4 N) on the mean infidelity of
    separable-measurement estimation with N copies."""
    if d < 2:
        raise ValueError("dimension must be at least 2")
    if total_shots < 1:
        raise ValueError("ensemble size must be positive")
    return (d * d - 1) * (d + 1) / (4.0 * total_shots)


def alpha(d: int) -> float:
    """Guarantee factor (2d - 1 + [d]) / (d + 1): the method's mean
    infidelity is at most alpha(d) times the Gill-Massar bound. Equals 1
    at d = 2 and tends to 2 for large d."""
    if d < 2:
        raise ValueError("dimension must be at least 2")
    return (2 * d - 1 + d % 2) / (d + 1)


def optimality_gap(cfim_matrix, qfim_matrix, d: int) -> float:
    """Smallest eigenvalue of M_d J^{-1/2} I J^{-1/2} minus one.

    Non-negative output certifies I >= J / M_d. Accepts full Fisher
    matrices or matching sub-blocks.
    """
    i_mat = np.asarray(getattr(cfim_matrix, "matrix", cfim_matrix), dtype=float)
    j_mat = np.asarray(getattr(qfim_matrix, "matrix", qfim_matrix), dtype=float)
    if i_mat.shape != j_mat.shape:
        raise ValueError("information matrices must have matching shapes")
    w, u = np.linalg.eigh(j_mat)
    if w.min() <= RANK_TOL:
        raise ValueError("QFIM singular for rank-deficient state")
    inv_sqrt = (u / np.sqrt(w)) @ u.T
    core = inv_sqrt @ i_mat @ inv_sqrt
    core = 0.5 * (core + core.T)
    return float(n_bases(d) * np.linalg.eigvalsh(core).min() - 1.0)


def save_matrix_csv(fm, path) -> None:
    """Row-major CSV export for offline inspection."""
    m = np.asarray(getattr(fm, "matrix", fm), dtype=float)
    with open(path, "w") as fh:
        for row in m:
            fh.write(",".join(repr(float(x)) for x in row))
            fh.write("\n")
