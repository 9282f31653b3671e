"""Generalized Gell-Mann operators, their eigenstates and Bloch coordinates.

The d^2 - 1 traceless Hermitian generators come in two families:

* off-diagonal, for 0 <= j < k <= d-1 and alpha in {0, 1}:
      sigma_{alpha,j,k} = i^alpha (|j><k| + (-1)^alpha |k><j|)
* diagonal, for 1 <= k <= d-1:
      sigma_k = sqrt(2 / (k (k+1))) (sum_{j<k} |j><j| - k |k><k|)

All satisfy Tr(sigma_a sigma_b) = 2 delta_ab. Note the alpha = 1 sign
convention: at d = 2 it gives [[0, i], [-i, 0]], the negative of the usual
Pauli Y. Bloch coordinates are ordered (all alpha=0 pairs lexicographic,
all alpha=1 pairs, diagonals k = 1..d-1), so the off-diagonal ("A") and
diagonal ("D") sectors occupy contiguous coordinate blocks.
"""

from __future__ import annotations

import numpy as np

from .states import DensityMatrix, PureState

BLOCH_PSD_TOL = 1e-8


def n_coords(d: int) -> int:
    """Number of Bloch coordinates, d^2 - 1."""
    return d * d - 1


def n_pairs(d: int) -> int:
    """Number of index pairs j < k, i.e. d (d-1) / 2."""
    return d * (d - 1) // 2


def a_block_size(d: int) -> int:
    """Number of off-diagonal coordinates (both alpha families)."""
    return d * (d - 1)


def pair_list(d: int) -> list[tuple[int, int]]:
    """All (j, k) with j < k in lexicographic order."""
    return [(j, k) for j in range(d) for k in range(j + 1, d)]


def pair_index(d: int, j: int, k: int) -> int:
    """Rank of the pair (j, k), j < k, in lexicographic order."""
    if not 0 <= j < k <= d - 1:
        raise ValueError("pair indices must satisfy 0 <= j < k <= d-1")
    return j * d - j * (j + 1) // 2 + (k - j - 1)


def offdiag_coord_index(d: int, alpha: int, j: int, k: int) -> int:
    """Bloch-coordinate position of the off-diagonal operator (alpha, j, k)."""
    if alpha not in (0, 1):
        raise ValueError("alpha must be 0 or 1")
    return alpha * n_pairs(d) + pair_index(d, j, k)


def diag_coord_index(d: int, k: int) -> int:
    """Bloch-coordinate position of the diagonal operator k."""
    if not 1 <= k <= d - 1:
        raise ValueError("diagonal index must satisfy 1 <= k <= d-1")
    return a_block_size(d) + (k - 1)


def coordinate_labels(d: int) -> list[tuple]:
    """Descriptors matching the Bloch ordering: ("off", alpha, j, k) / ("diag", k)."""
    labels: list[tuple] = []
    for alpha in (0, 1):
        for j, k in pair_list(d):
            labels.append(("off", alpha, j, k))
    for k in range(1, d):
        labels.append(("diag", k))
    return labels


def diagonal_op(d: int, k: int) -> np.ndarray:
    """Diagonal generator sqrt(2/(k(k+1))) (sum_{j<k} |j><j| - k |k><k|)."""
    if not 1 <= k <= d - 1:
        raise ValueError("diagonal index must satisfy 1 <= k <= d-1 "
                         "(the k = 0 prefactor is undefined)")
    m = np.zeros((d, d), dtype=complex)
    pref = np.sqrt(2.0 / (k * (k + 1)))
    for j in range(k):
        m[j, j] = pref
    m[k, k] = -k * pref
    return m


def offdiag_op(d: int, alpha: int, j: int, k: int) -> np.ndarray:
    """Off-diagonal generator i^alpha (|j><k| + (-1)^alpha |k><j|)."""
    if alpha not in (0, 1):
        raise ValueError("alpha must be 0 or 1")
    if not 0 <= j < k <= d - 1:
        raise ValueError("pair indices must satisfy 0 <= j < k <= d-1")
    m = np.zeros((d, d), dtype=complex)
    m[j, k] = 1j ** alpha
    m[k, j] = (1j ** alpha) * ((-1) ** alpha)
    return m


def all_operators(d: int) -> list[np.ndarray]:
    """The d^2 - 1 generators in Bloch-coordinate order."""
    ops = [offdiag_op(d, alpha, j, k)
           for alpha in (0, 1) for j, k in pair_list(d)]
    ops.extend(diagonal_op(d, k) for k in range(1, d))
    return ops


def diag_expectations(d: int) -> np.ndarray:
    """Matrix C with C[k-1, m] = <m|sigma_k|m> for the diagonal generators."""
    c = np.zeros((d - 1, d))
    for k in range(1, d):
        c[k - 1] = np.diag(diagonal_op(d, k)).real
    return c


def pair_state(d: int, alpha: int, j: int, k: int, sign: int) -> PureState:
    """Superposition (|j> + sign * i^alpha |k>) / sqrt(2).

    These are the non-null eigenstates of offdiag_op(d, alpha, j, k); the
    eigenvalue is sign * (-1)^alpha under the alpha = 1 sign convention
    above.
    """
    if j == k:
        raise ValueError("pair state requires two distinct indices")
    if not (0 <= j < d and 0 <= k < d):
        raise ValueError("pair indices out of range")
    if alpha not in (0, 1):
        raise ValueError("alpha must be 0 or 1")
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    v = np.zeros(d, dtype=complex)
    v[j] = 1.0 / np.sqrt(2.0)
    v[k] = sign * (1j ** alpha) / np.sqrt(2.0)
    return PureState(d, v)


def bloch_from_state(rho) -> np.ndarray:
    """Bloch coordinates S_a = Tr(rho sigma_a) in the canonical ordering."""
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    d = m.shape[0]
    pairs = pair_list(d)
    ji = np.array([p[0] for p in pairs])
    ki = np.array([p[1] for p in pairs])
    upper = m[ji, ki]
    coords = np.empty(n_coords(d))
    p = n_pairs(d)
    coords[:p] = 2.0 * upper.real
    coords[p:2 * p] = 2.0 * upper.imag
    coords[2 * p:] = diag_expectations(d) @ np.diag(m).real
    return coords


def state_from_bloch(coords, d: int) -> DensityMatrix:
    """Inverse of :func:`bloch_from_state`: I/d + (1/2) sum_a S_a sigma_a.

    Raises if the reconstructed matrix has an eigenvalue below -1e-8
    ("unphysical Bloch vector"); round-off negatives above that are
    clipped to zero.
    """
    coords = np.asarray(coords, dtype=float)
    if coords.shape != (n_coords(d),):
        raise ValueError(f"expected {n_coords(d)} coordinates for dimension {d}")
    m = np.eye(d, dtype=complex) / d
    pairs = pair_list(d)
    p = n_pairs(d)
    for idx, (j, k) in enumerate(pairs):
        m[j, k] += 0.5 * (coords[idx] + 1j * coords[p + idx])
        m[k, j] += 0.5 * (coords[idx] - 1j * coords[p + idx])
    m[np.diag_indices(d)] += 0.5 * (diag_expectations(d).T @ coords[2 * p:])
    w, u = np.linalg.eigh(m)
    if w.min() < -BLOCH_PSD_TOL:
        raise ValueError("unphysical Bloch vector")
    if w.min() < 0:
        w = np.clip(w, 0.0, None)
        m = (u * w) @ u.conj().T
        m /= np.trace(m).real
    return DensityMatrix(d, m)
