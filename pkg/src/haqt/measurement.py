"""Born-rule outcome distributions, finite-shot sampling and shot allocation.

Sampling is multinomial via sequential binomial conditionals, which is
exact and reproducible across platforms given the fixed generator. Count
records can be written to a CSV file (``basis_label,outcome_index,count``)
with a JSON sidecar carrying dimension, measurement frame, total shots and
seed.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .bases import (BasisSet, MeasurementBasis, _cmatrix_from_json,
                    _cmatrix_to_json, build_basis_set, observable_basis_set,
                    rotate_basis_set)
from .states import DensityMatrix

PROB_SUM_TOL = 1e-10


@dataclass(frozen=True)
class OutcomeDistribution:
    """Outcome probabilities of one basis measurement."""

    basis_label: int
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.min() < 0:
            raise ValueError("probabilities must be non-negative")
        if abs(p.sum() - 1.0) > PROB_SUM_TOL:
            raise ValueError("probabilities must sum to one")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)


@dataclass(frozen=True)
class CountData:
    """Per-basis click counts for one measurement run of a basis set."""

    dim: int
    frame_hash: str
    counts: np.ndarray   # shape (n_bases, dim), integers
    shots: np.ndarray    # shape (n_bases,), per-basis totals

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64)
        s = np.asarray(self.shots, dtype=np.int64)
        if c.ndim != 2 or c.shape[1] != self.dim or c.shape[0] != s.shape[0]:
            raise ValueError("counts must be (n_bases, dim) matching shots")
        if c.min() < 0:
            raise ValueError("counts must be non-negative")
        if np.any(c.sum(axis=1) != s):
            raise ValueError("per-basis counts must sum to the allocated shots")
        c.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "counts", c)
        object.__setattr__(self, "shots", s)

    @property
    def total_shots(self) -> int:
        return int(self.shots.sum())


def born_probabilities(rho: DensityMatrix, basis: MeasurementBasis) -> OutcomeDistribution:
    """Outcome probabilities p_m = <b_m| rho |b_m>.

    Round-off negatives are clipped at zero and the distribution is
    renormalized; the normalization defect of a valid input is below
    1e-10 to begin with.
    """
    if rho.dim != basis.dim:
        raise ValueError("state and basis dimensions do not match")
    v = basis.vectors
    p = np.einsum("mi,ij,mj->m", v.conj(), rho.matrix, v).real
    p = np.clip(p, 0.0, None)
    total = p.sum()
    if abs(total - 1.0) > PROB_SUM_TOL:
        raise ValueError("basis does not resolve the identity within tolerance")
    return OutcomeDistribution(basis.label, p / total)


def sample_counts(dist: OutcomeDistribution, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Multinomial draw of ``shots`` outcomes from ``dist``.

    Implemented as a chain of binomial conditionals so the draw is exact
    and deterministic given the generator state.
    """
    if shots < 0:
        raise ValueError("shots must be non-negative")
    p = dist.probs
    d = p.shape[0]
    counts = np.zeros(d, dtype=np.int64)
    remaining = int(shots)
    mass_left = 1.0
    for m in range(d - 1):
        if remaining == 0:
            break
        if mass_left <= 0:
            break
        q = min(max(p[m] / mass_left, 0.0), 1.0)
        c = int(rng.binomial(remaining, q))
        counts[m] = c
        remaining -= c
        mass_left -= p[m]
    counts[d - 1] += remaining
    return counts


def allocate_shots(total: int, bs: BasisSet) -> np.ndarray:
    """Split ``total`` shots over the bases: floor(total / M) each, with the
    remainder going one shot apiece to the lowest-labelled bases."""
    m = len(bs)
    if total < m:
        raise ValueError("ensemble smaller than basis count")
    base, rem = divmod(int(total), m)
    shots = np.full(m, base, dtype=np.int64)
    shots[:rem] += 1
    return shots


def simulate_measurement(rho: DensityMatrix, bs: BasisSet, total: int,
                         rng: np.random.Generator) -> CountData:
    """Allocate shots, compute Born distributions and sample every basis.

    Each basis consumes an independently derived child stream of ``rng``,
    so per-basis sampling is order-independent.
    """
    if rho.dim != bs.dim:
        raise ValueError("state and basis-set dimensions do not match")
    shots = allocate_shots(total, bs)
    streams = rng.spawn(len(bs))
    counts = np.zeros((len(bs), bs.dim), dtype=np.int64)
    for b, basis in enumerate(bs.bases):
        dist = born_probabilities(rho, basis)
        counts[b] = sample_counts(dist, int(shots[b]), streams[b])
    return CountData(bs.dim, bs.frame_hash, counts, shots)


# --- count-file round trip ---------------------------------------------------


def save_counts(data: CountData, bs: BasisSet, csv_path, sidecar_path,
                seed: int | None = None) -> None:
    """Write counts as CSV rows plus a JSON sidecar describing the run."""
    if data.frame_hash != bs.frame_hash:
        raise ValueError("count data does not belong to this basis set")
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["basis_label", "outcome_index", "count"])
        for b in range(data.counts.shape[0]):
            for m in range(data.dim):
                writer.writerow([b, m, int(data.counts[b, m])])
    sidecar = {
        "dim": data.dim,
        "frame": _cmatrix_to_json(bs.frame),
        "frame_hash": bs.frame_hash,
        "n_bases": len(bs),
        "N": data.total_shots,
        "seed": seed,
    }
    with open(sidecar_path, "w") as fh:
        json.dump(sidecar, fh, sort_keys=True)
        fh.write("\n")


def load_counts(csv_path, sidecar_path) -> tuple[CountData, BasisSet, dict]:
    """Read a counts CSV and its sidecar; rebuild the measurement basis set.

    Rows may appear in any order; missing or malformed rows are rejected
    with their row number.
    """
    with open(sidecar_path) as fh:
        sidecar = json.load(fh)
    dim = int(sidecar["dim"])
    frame = _cmatrix_from_json(sidecar["frame"])
    n = int(sidecar["n_bases"])
    if n == len(build_basis_set(dim)):
        bs = build_basis_set(dim)
    else:
        bs = observable_basis_set(dim)
        if n != len(bs):
            raise ValueError(f"sidecar declares {n} bases, which matches no known set")
    if np.max(np.abs(frame - np.eye(dim))) > 1e-12:
        bs = rotate_basis_set(bs, frame)

    counts = np.full((n, dim), -1, dtype=np.int64)
    with open(csv_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["basis_label", "outcome_index", "count"]:
            raise ValueError("counts CSV row 1: bad or missing header")
        for row_no, row in enumerate(reader, start=2):
            try:
                b, m, c = int(row[0]), int(row[1]), int(row[2])
            except (ValueError, IndexError) as exc:
                raise ValueError(f"counts CSV row {row_no}: malformed row {row!r}") from exc
            if not (0 <= b < n and 0 <= m < dim) or c < 0:
                raise ValueError(f"counts CSV row {row_no}: values out of range")
            counts[b, m] = c
    if (counts < 0).any():
        missing = np.argwhere(counts < 0)[0]
        raise ValueError(f"counts CSV is missing basis {missing[0]} outcome {missing[1]}")
    data = CountData(dim, bs.frame_hash, counts, counts.sum(axis=1))
    return data, bs, sidecar
