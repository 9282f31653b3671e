"""Measurement-basis construction: the minimal adaptive set and the
per-observable set.

``build_basis_set(d)`` groups the eigenstates of all d^2 - 1 Gell-Mann
operators into M_d = 2d - 1 + (d mod 2) orthonormal bases. For odd d there
are 2d bases

    B_{k + d alpha} = {|k>} u {|pm^alpha_{k-nu, k+nu}>} u
                      {|pm^alpha_{D+k-mu, D+k+1+mu}>},

with D = (d-1)/2, 0 <= mu < |k-D|, 0 < nu <= D - |k-D| and index
arithmetic mod d. For even d, D = (d-2)/2 and the 2d - 2 bases carry
|pm^alpha_{k, d-1}> in place of |k>, with index arithmetic mod (d-1)
restricted to {0..d-2}; the computational basis completes the set. Each
Gell-Mann pair (alpha, j, k) appears in exactly one basis and the pooled
projectors span the full operator space (informational completeness).

``observable_basis_set(d)`` instead yields one eigenbasis per Gell-Mann
operator (d^2 - 1 bases), the non-adaptive tomography baseline.
"""

from __future__ import annotations

import hashlib
import json
from collections import Counter
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .gellmann import pair_list, pair_state
from .states import EigenDecomposition, PureState

ORTHONORMALITY_TOL = 1e-10
COMPLETENESS_SV_TOL = 1e-8


def n_bases(d: int) -> int:
    """Size of the minimal basis set, M_d = 2d - 1 + (d mod 2)."""
    return 2 * d - 1 + d % 2


@dataclass(frozen=True)
class Computational:
    """Provenance tag for a computational element |index>."""

    index: int


@dataclass(frozen=True)
class Pair:
    """Provenance tag for a superposition element (|j> + sign i^alpha |k>)/sqrt(2)."""

    alpha: int
    j: int
    k: int
    sign: int


@dataclass(frozen=True)
class MeasurementBasis:
    """An orthonormal basis of C^d; row m of ``vectors`` is the m-th element."""

    dim: int
    label: int
    vectors: np.ndarray
    provenance: tuple

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=complex)
        if v.shape != (self.dim, self.dim):
            raise ValueError("basis must contain exactly dim vectors of length dim")
        gram = v.conj() @ v.T
        if np.max(np.abs(gram - np.eye(self.dim))) > ORTHONORMALITY_TOL:
            raise ValueError("basis vectors are not orthonormal within tolerance")
        if len(self.provenance) != self.dim:
            raise ValueError("provenance must describe every basis element")
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    def states(self) -> list[PureState]:
        return [PureState(self.dim, self.vectors[m]) for m in range(self.dim)]


@dataclass(frozen=True)
class BasisSet:
    """An ordered collection of measurement bases sharing a reference frame.

    ``frame`` is the unitary relating the stored vectors to their
    computational-frame construction (identity = computational frame).
    """

    dim: int
    bases: tuple
    frame: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.frame, dtype=complex)
        if f.shape != (self.dim, self.dim):
            raise ValueError("frame must be a dim x dim unitary")
        if np.max(np.abs(f.conj().T @ f - np.eye(self.dim))) > ORTHONORMALITY_TOL:
            raise ValueError("frame is not unitary within tolerance")
        for basis in self.bases:
            if basis.dim != self.dim:
                raise ValueError("all bases must share the set dimension")
        f.setflags(write=False)
        object.__setattr__(self, "frame", f)
        object.__setattr__(self, "bases", tuple(self.bases))

    def __len__(self) -> int:
        return len(self.bases)

    @cached_property
    def stacked(self) -> np.ndarray:
        """All basis vectors stacked row-wise, shape (len(self) * dim, dim)."""
        out = np.concatenate([b.vectors for b in self.bases], axis=0)
        out.setflags(write=False)
        return out

    @cached_property
    def frame_hash(self) -> str:
        """SHA-256 of the frame entries; identifies the measurement frame."""
        return hashlib.sha256(np.ascontiguousarray(self.frame).tobytes()).hexdigest()


def _pair_elements(d: int, alpha: int, a: int, b: int) -> tuple[list, list]:
    """Both superposition vectors for the canonical pair (min, max)."""
    j, k = min(a, b), max(a, b)
    vecs = [pair_state(d, alpha, j, k, s).amplitudes for s in (+1, -1)]
    tags = [Pair(alpha, j, k, s) for s in (+1, -1)]
    return vecs, tags


def build_basis_set(d: int) -> BasisSet:
    """Construct the minimal basis set in the computational frame."""
    if d < 2:
        raise ValueError("dimension must be at least 2")
    bases = []
    if d % 2 == 1:
        big = (d - 1) // 2
        for alpha in (0, 1):
            for k in range(d):
                vecs = [np.eye(d, dtype=complex)[k]]
                tags: list = [Computational(k)]
                for nu in range(1, big - abs(k - big) + 1):
                    v, t = _pair_elements(d, alpha, (k - nu) % d, (k + nu) % d)
                    vecs.extend(v)
                    tags.extend(t)
                for mu in range(abs(k - big)):
                    v, t = _pair_elements(d, alpha, (big + k - mu) % d,
                                          (big + k + 1 + mu) % d)
                    vecs.extend(v)
                    tags.extend(t)
                bases.append(MeasurementBasis(d, len(bases), np.array(vecs), tuple(tags)))
    else:
        big = (d - 2) // 2
        mod = d - 1
        for alpha in (0, 1):
            for k in range(d - 1):
                vecs, tags = _pair_elements(d, alpha, k, d - 1)
                for nu in range(1, big - abs(k - big) + 1):
                    v, t = _pair_elements(d, alpha, (k - nu) % mod, (k + nu) % mod)
                    vecs.extend(v)
                    tags.extend(t)
                for mu in range(abs(k - big)):
                    v, t = _pair_elements(d, alpha, (big + k - mu) % mod,
                                          (big + k + 1 + mu) % mod)
                    vecs.extend(v)
                    tags.extend(t)
                bases.append(MeasurementBasis(d, len(bases), np.array(vecs), tuple(tags)))
        comp = tuple(Computational(m) for m in range(d))
        bases.append(MeasurementBasis(d, len(bases), np.eye(d, dtype=complex), comp))

    bs = BasisSet(d, tuple(bases), np.eye(d, dtype=complex))
    report = verify_basis_set(bs)
    if not report.passed:
        raise RuntimeError(f"basis-set construction is internally broken: {report}")
    return bs


def observable_basis_set(d: int) -> BasisSet:
    """One eigenbasis per Gell-Mann operator, d^2 - 1 bases in total.

    The off-diagonal operator (alpha, j, k) contributes its two
    superposition eigenstates completed by the remaining computational
    states; each diagonal operator contributes the computational basis.
    """
    if d < 2:
        raise ValueError("dimension must be at least 2")
    bases = []
    for alpha in (0, 1):
        for j, k in pair_list(d):
            vecs, tags = _pair_elements(d, alpha, j, k)
            for l in range(d):
                if l not in (j, k):
                    vecs.append(np.eye(d, dtype=complex)[l])
                    tags.append(Computational(l))
            bases.append(MeasurementBasis(d, len(bases), np.array(vecs), tuple(tags)))
    comp = tuple(Computational(m) for m in range(d))
    for _ in range(1, d):
        bases.append(MeasurementBasis(d, len(bases), np.eye(d, dtype=complex), comp))
    return BasisSet(d, tuple(bases), np.eye(d, dtype=complex))


def rotate_basis_set(bs: BasisSet, frame) -> BasisSet:
    """Replace every vector v by U v, where U comes from ``frame``.

    ``frame`` may be an :class:`EigenDecomposition` (its eigenvector
    columns form U) or a unitary matrix.
    """
    u = frame.eigenvectors if isinstance(frame, EigenDecomposition) else np.asarray(frame, dtype=complex)
    if u.shape != (bs.dim, bs.dim):
        raise ValueError("frame dimension does not match basis set")
    if np.max(np.abs(u.conj().T @ u - np.eye(bs.dim))) > ORTHONORMALITY_TOL:
        raise ValueError("frame is not unitary within tolerance")
    rotated = tuple(
        MeasurementBasis(bs.dim, b.label, b.vectors @ u.T, b.provenance)
        for b in bs.bases
    )
    return BasisSet(bs.dim, rotated, u @ bs.frame)


@dataclass(frozen=True)
class VerificationReport:
    """Structural health of a minimal basis set."""

    dim: int
    basis_count: int
    expected_count: int
    orthonormality_defect: float
    pair_coverage: dict
    pair_coverage_ok: bool
    completeness_rank: int
    passed: bool

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status}: {self.basis_count}/{self.expected_count} bases, "
                f"orthonormality defect {self.orthonormality_defect:.2e}, "
                f"pair coverage {'exact' if self.pair_coverage_ok else 'BROKEN'}, "
                f"completeness rank {self.completeness_rank}/{self.dim ** 2}")


def verify_basis_set(bs: BasisSet) -> VerificationReport:
    """Check basis count, orthonormality, once-per-pair coverage and
    informational completeness (projector family spans all of operator
    space). Failures are reported, not raised."""
    d = bs.dim
    defect = 0.0
    for basis in bs.bases:
        gram = basis.vectors.conj() @ basis.vectors.T
        defect = max(defect, float(np.max(np.abs(gram - np.eye(d)))))

    coverage = Counter()
    for basis in bs.bases:
        for tag in basis.provenance:
            if isinstance(tag, Pair) and tag.sign == +1:
                coverage[(tag.alpha, tag.j, tag.k)] += 1
    expected_pairs = {(alpha, j, k) for alpha in (0, 1) for j, k in pair_list(d)}
    coverage_ok = (set(coverage) == expected_pairs
                   and all(c == 1 for c in coverage.values()))

    projectors = np.array([np.outer(v, v.conj()).ravel()
                           for basis in bs.bases for v in basis.vectors])
    svals = np.linalg.svd(projectors, compute_uv=False)
    rank = int(np.sum(svals > COMPLETENESS_SV_TOL))

    passed = (len(bs.bases) == n_bases(d)
              and defect <= ORTHONORMALITY_TOL
              and coverage_ok
              and rank == d * d)
    return VerificationReport(
        dim=d,
        basis_count=len(bs.bases),
        expected_count=n_bases(d),
        orthonormality_defect=defect,
        pair_coverage=dict(coverage),
        pair_coverage_ok=coverage_ok,
        completeness_rank=rank,
        passed=passed,
    )


# --- JSON serialization -----------------------------------------------------


def _tag_to_json(tag) -> dict:
    if isinstance(tag, Computational):
        return {"kind": "computational", "index": tag.index}
    return {"kind": "pair", "alpha": tag.alpha, "j": tag.j, "k": tag.k,
            "sign": "+" if tag.sign > 0 else "-"}


def _tag_from_json(obj) -> object:
    if obj["kind"] == "computational":
        return Computational(int(obj["index"]))
    return Pair(int(obj["alpha"]), int(obj["j"]), int(obj["k"]),
                +1 if obj["sign"] == "+" else -1)


def _cmatrix_to_json(m: np.ndarray) -> list:
    return [[[float(e.real), float(e.imag)] for e in row] for row in np.asarray(m)]


def _cmatrix_from_json(rows) -> np.ndarray:
    return np.array([[complex(e[0], e[1]) for e in row] for row in rows])


def basis_set_to_json(bs: BasisSet) -> dict:
    return {
        "dim": bs.dim,
        "frame": _cmatrix_to_json(bs.frame),
        "bases": [
            {
                "label": b.label,
                "vectors": _cmatrix_to_json(b.vectors),
                "provenance": [_tag_to_json(t) for t in b.provenance],
            }
            for b in bs.bases
        ],
    }


def basis_set_from_json(obj: dict) -> BasisSet:
    d = int(obj["dim"])
    bases = tuple(
        MeasurementBasis(
            d,
            int(b["label"]),
            _cmatrix_from_json(b["vectors"]),
            tuple(_tag_from_json(t) for t in b["provenance"]),
        )
        for b in obj["bases"]
    )
    return BasisSet(d, bases, _cmatrix_from_json(obj["frame"]))


def save_basis_set(bs: BasisSet, path) -> None:
    with open(path, "w") as fh:
        json.dump(basis_set_to_json(bs), fh, sort_keys=True)
        fh.write("\n")


def load_basis_set(path) -> BasisSet:
    with open(path) as fh:
        return basis_set_from_json(json.load(fh))
