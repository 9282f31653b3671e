"""Density-matrix reconstruction from measured counts.

The primary estimator is maximum likelihood via the diluted R-rho-R fixed
point: with R(rho) = (1/N) sum_i (n_i / p_i(rho)) P_i over all recorded
projectors P_i, iterate

    rho  <-  (1 - eps) rho + eps * RrhoR / Tr(RrhoR),

halving eps whenever a step would decrease the log-likelihood, so the
likelihood is non-decreasing across accepted iterations. Linear inversion
(constrained least squares over Bloch coordinates) and projection of a
Hermitian matrix to the closest physical state are provided as baseline
and initializer utilities.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .bases import BasisSet
from .gellmann import all_operators, bloch_from_state, n_coords
from .measurement import CountData
from .states import DensityMatrix, density_matrix_to_json

MIN_DILUTION = 1e-9

TAG_SQT = "SQT"
TAG_HAQT_STAGE1 = "HAQT-stage1"
TAG_HAQT_FINAL = "HAQT-final"


@dataclass(frozen=True)
class MleOptions:
    """Stopping and damping controls for the likelihood iteration."""

    max_iters: int = 5000
    log_likelihood_tol: float = 1e-11   # relative change per accepted step
    step_tol: float = 1e-10             # Frobenius norm of the update
    dilution: float = 0.5
    prob_floor: float = 1e-12           # applied inside n_i / p_i
    track_history: bool = False
    polish_iters: int = 0               # ungated fixed-point steps at the end

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if self.log_likelihood_tol <= 0 or self.step_tol <= 0 or self.prob_floor <= 0:
            raise ValueError("tolerances must be positive")
        if not 0.0 < self.dilution <= 1.0:
            raise ValueError("dilution must lie in (0, 1]")
        if self.polish_iters < 0:
            raise ValueError("polish_iters must be non-negative")


@dataclass(frozen=True)
class TomographyResult:
    """Outcome of one reconstruction."""

    estimate: DensityMatrix
    iterations: int
    final_log_likelihood: float
    converged: bool
    protocol_tag: str
    stage1: "TomographyResult | None" = None
    log_likelihoods: np.ndarray | None = None

    def to_json(self) -> dict:
        out = {
            "estimate": density_matrix_to_json(self.estimate),
            "iterations": self.iterations,
            "final_log_likelihood": self.final_log_likelihood,
            "converged": self.converged,
            "protocol_tag": self.protocol_tag,
        }
        if self.stage1 is not None:
            out["stage1"] = self.stage1.to_json()
        return out


def _check_complete(bs: BasisSet) -> None:
    rows = np.array([np.outer(v, v.conj()).ravel()
                     for basis in bs.bases for v in basis.vectors])
    rank = int(np.sum(np.linalg.svd(rows, compute_uv=False) > 1e-8))
    if rank < bs.dim ** 2:
        warnings.warn(
            "basis set is not informationally complete; the likelihood "
            "maximum may not be unique", stacklevel=3)


_completeness_seen: set = set()


def _flag_incomplete_once(bs: BasisSet) -> None:
    key = (bs.dim, len(bs), bs.frame_hash)
    if key in _completeness_seen:
        return
    _completeness_seen.add(key)
    _check_complete(bs)


def mle_core(rows: np.ndarray, counts: np.ndarray, opts: MleOptions,
             tag: str) -> TomographyResult:
    """Maximize the multinomial log-likelihood over density matrices.

    ``rows`` holds one measurement vector per recorded outcome (row i is
    <b_i| as components of b_i) and ``counts`` the matching click counts;
    counts may be non-integer for exact-frequency studies.
    """
    rows = np.asarray(rows, dtype=complex)
    counts = np.asarray(counts, dtype=float)
    if rows.ndim != 2 or counts.shape != (rows.shape[0],):
        raise ValueError("rows and counts shapes are inconsistent")
    total = counts.sum()
    if total <= 0:
        raise ValueError("reconstruction requires a non-empty count record")
    d = rows.shape[1]
    conj_rows = rows.conj()
    observed = counts > 0
    n_obs = counts[observed]
    floor = opts.prob_floor

    def probs(rho: np.ndarray) -> np.ndarray:
        return np.einsum("ij,ij->i", conj_rows @ rho, rows).real

    def loglik(p: np.ndarray) -> float:
        return float(n_obs @ np.log(np.maximum(p[observed], floor)))

    def gain_over(p_new: np.ndarray, p_old: np.ndarray) -> float:
        # sum n log(p_new/p_old) via log1p: free of the cancellation that
        # makes direct likelihood differences unresolvable near the optimum
        old = np.maximum(p_old[observed], floor)
        return float(n_obs @ np.log1p((p_new[observed] - old) / old))

    rho = np.eye(d, dtype=complex) / d
    p = probs(rho)
    log_l = loglik(p)
    history = [log_l] if opts.track_history else None
    iterations = 0
    converged = False

    for _ in range(opts.max_iters):
        weights = counts / (np.maximum(p, floor) * total)
        r_op = (rows.T * weights) @ conj_rows
        trial = r_op @ rho @ r_op
        trial = 0.5 * (trial + trial.conj().T)
        trial /= np.trace(trial).real

        eps = opts.dilution
        accepted = False
        while eps >= MIN_DILUTION:
            cand = (1.0 - eps) * rho + eps * trial
            p_cand = probs(cand)
            gain = gain_over(p_cand, p)
            if gain >= 0.0:
                accepted = True
                break
            eps *= 0.5
        if not accepted:
            converged = True   # no ascent direction left at machine scale
            break

        step = float(np.linalg.norm(cand - rho))
        rho, p = cand, p_cand
        log_l += gain
        iterations += 1
        if history is not None:
            history.append(log_l)
        if gain <= opts.log_likelihood_tol * max(1.0, abs(log_l)) or step <= opts.step_tol:
            converged = True
            break

    # Optional ungated polish: pure fixed-point steps squeeze out the last
    # few digits that the noise-limited accept rule cannot resolve. Only
    # sound near an interior optimum, hence off by default.
    for _ in range(opts.polish_iters):
        weights = counts / (np.maximum(p, floor) * total)
        r_op = (rows.T * weights) @ conj_rows
        rho = r_op @ rho @ r_op
        rho = 0.5 * (rho + rho.conj().T)
        rho /= np.trace(rho).real
        p = probs(rho)

    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.trace(rho).real
    return TomographyResult(
        estimate=DensityMatrix(d, rho),
        iterations=iterations,
        final_log_likelihood=loglik(p),
        converged=converged,
        protocol_tag=tag,
        log_likelihoods=None if history is None else np.array(history),
    )


def mle_reconstruct(data: CountData, bs: BasisSet,
                    opts: MleOptions | None = None,
                    tag: str = TAG_SQT) -> TomographyResult:
    """Maximum-likelihood estimate from one measurement run."""
    opts = opts or MleOptions()
    if data.dim != bs.dim or data.counts.shape[0] != len(bs):
        raise ValueError("count data does not match the basis set")
    if data.frame_hash != bs.frame_hash:
        raise ValueError("count data was recorded in a different frame")
    _flag_incomplete_once(bs)
    return mle_core(bs.stacked, data.counts.ravel(), opts, tag)


def mle_reconstruct_pooled(runs, opts: MleOptions | None = None,
                           tag: str = TAG_SQT) -> TomographyResult:
    """Joint maximum-likelihood estimate over several measurement runs.

    ``runs`` is a sequence of (CountData, BasisSet) pairs, possibly in
    different frames; the pooled likelihood treats every recorded
    projector with its own counts.
    """
    opts = opts or MleOptions()
    rows = []
    counts = []
    for data, bs in runs:
        if data.dim != bs.dim or data.frame_hash != bs.frame_hash:
            raise ValueError("count data does not match its basis set")
        rows.append(bs.stacked)
        counts.append(data.counts.ravel())
    if not rows:
        raise ValueError("reconstruction requires at least one run")
    return mle_core(np.concatenate(rows), np.concatenate(counts), opts, tag)


def linear_inversion(data: CountData, bs: BasisSet) -> np.ndarray:
    """Least-squares fit of Bloch coordinates to observed frequencies.

    Returns the Hermitian unit-trace matrix whose Born probabilities best
    match the per-basis frequencies; the result may fail positivity and
    is typically passed through :func:`project_to_physical`.
    """
    if data.dim != bs.dim or data.frame_hash != bs.frame_hash:
        raise ValueError("count data does not match the basis set")
    d = bs.dim
    rows = bs.stacked
    design = np.empty((rows.shape[0], n_coords(d)))
    for i, v in enumerate(rows):
        design[i] = 0.5 * bloch_from_state(np.outer(v, v.conj()))
    if np.linalg.matrix_rank(design) < n_coords(d):
        raise ValueError("rank-deficient design matrix; basis set is not "
                         "informationally complete")
    freq = (data.counts / np.maximum(data.shots[:, None], 1)).ravel()
    target = freq - 1.0 / d
    coords, *_ = np.linalg.lstsq(design, target, rcond=None)

    m = np.eye(d, dtype=complex) / d
    for c, op in zip(coords, all_operators(d)):
        m += 0.5 * c * op
    return m


def project_to_physical(hermitian) -> DensityMatrix:
    """Closest density matrix under iterated eigenvalue truncation.

    Eigenvalues are zeroed one at a time starting from the most negative,
    each deficit being spread uniformly over the eigenvalues still in
    play; the unit trace is preserved exactly.
    """
    m = np.asarray(hermitian, dtype=complex)
    if np.max(np.abs(m - m.conj().T)) > 1e-9:
        raise ValueError("projection requires a Hermitian matrix")
    if abs(np.trace(m).real - 1.0) > 1e-9:
        raise ValueError("projection requires a unit-trace matrix")
    w, u = np.linalg.eigh(m)
    lam = w.copy()
    removed = np.zeros(lam.shape[0], dtype=bool)
    while True:
        candidates = np.flatnonzero(~removed & (lam < 0))
        if candidates.size == 0:
            break
        worst = candidates[np.argmin(lam[candidates])]
        deficit = lam[worst]
        lam[worst] = 0.0
        removed[worst] = True
        rest = ~removed
        lam[rest] += deficit / rest.sum()
    out = (u * lam) @ u.conj().T
    return DensityMatrix(m.shape[0], out)
