import json

import numpy as np
import pytest

from haqt import (DensityMatrix, PureState, bures_distance_sq,
                  density_matrix_from_json, density_matrix_to_json,
                  derive_rng, eigendecompose, fidelity, infidelity,
                  load_state, random_full_rank, random_pure, save_state)

def ket(d, i):
    return PureState.basis_state(d, i).density()


class TestDensityMatrix:
    def test_accepts_valid(self):
        rho = DensityMatrix.from_matrix(np.diag([0.7, 0.3]).astype(complex))
        assert rho.dim == 2

    def test_rejects_non_hermitian(self):
        m = np.array([[0.5, 0.1], [0.3, 0.5]], dtype=complex)
        with pytest.raises(ValueError, match="Hermitian"):
            DensityMatrix.from_matrix(m)

    def test_rejects_bad_trace(self):
        with pytest.raises(ValueError, match="trace"):
            DensityMatrix.from_matrix(np.diag([0.7, 0.7]).astype(complex))

    def test_rejects_negative_eigenvalue(self):
        with pytest.raises(ValueError, match="negative eigenvalue"):
            DensityMatrix.from_matrix(np.diag([1.2, -0.2]).astype(complex))

    def test_immutable(self):
        rho = DensityMatrix.maximally_mixed(2)
        with pytest.raises(ValueError):
            rho.matrix[0, 0] = 5.0


class TestPureState:
    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError, match="unit norm"):
            PureState.from_amplitudes([1.0, 1.0])

    def test_density_is_valid(self):
        psi = PureState.from_amplitudes(np.array([1, 1j]) / np.sqrt(2))
        rho = psi.density()
        assert rho.dim == 2


class TestFidelity:
    def test_identity_case(self, rng):
        rho = random_full_rank(4, rng)
        assert fidelity(rho, rho) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_pure_states(self):
        assert fidelity(ket(2, 0), ket(2, 1)) == pytest.approx(0.0, abs=1e-12)

    def test_mixed_vs_pure(self):
        assert fidelity(DensityMatrix.maximally_mixed(2), ket(2, 0)) == pytest.approx(0.5)

    def test_symmetric(self, rng):
        a, b = random_full_rank(3, rng), random_full_rank(3, rng)
        assert fidelity(a, b) == pytest.approx(fidelity(b, a), abs=1e-10)

    def test_unitary_invariance(self, rng):
        a, b = random_full_rank(3, rng), random_full_rank(3, rng)
        g = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        u, _ = np.linalg.qr(g)
        ua = DensityMatrix.from_matrix(u @ a.matrix @ u.conj().T)
        ub = DensityMatrix.from_matrix(u @ b.matrix @ u.conj().T)
        assert fidelity(ua, ub) == pytest.approx(fidelity(a, b), abs=1e-9)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            fidelity(DensityMatrix.maximally_mixed(2), DensityMatrix.maximally_mixed(3))

    def test_range(self, rng):
        for _ in range(20):
            v = infidelity(random_full_rank(3, rng), random_full_rank(3, rng))
            assert 0.0 <= v <= 1.0


class TestInfidelity:
    def test_zero_on_equal(self, rng):
        rho = random_full_rank(3, rng)
        assert infidelity(rho, rho) == pytest.approx(0.0, abs=1e-12)

    def test_orthogonal(self):
        assert infidelity(ket(2, 0), ket(2, 1)) == pytest.approx(1.0)

    def test_mixed_vs_pure(self):
        assert infidelity(DensityMatrix.maximally_mixed(2), ket(2, 0)) == pytest.approx(0.5)


class TestBures:
    def test_zero_on_equal(self, rng):
        rho = random_full_rank(2, rng)
        assert bures_distance_sq(rho, rho) == pytest.approx(0.0, abs=1e-10)

    def test_orthogonal(self):
        assert bures_distance_sq(ket(2, 0), ket(2, 1)) == pytest.approx(2.0)

    def test_mixed_vs_pure(self):
        expected = 2.0 - np.sqrt(2.0)   # 2 (1 - 1/sqrt(2))
        got = bures_distance_sq(DensityMatrix.maximally_mixed(2), ket(2, 0))
        assert got == pytest.approx(expected, abs=1e-12)


class TestRandomStates:
    def test_pure_deterministic(self):
        a = random_pure(4, derive_rng(11)).amplitudes
        b = random_pure(4, derive_rng(11)).amplitudes
        assert np.array_equal(a, b)

    def test_full_rank_deterministic(self):
        a = random_full_rank(3, derive_rng(11)).matrix
        b = random_full_rank(3, derive_rng(11)).matrix
        assert np.array_equal(a, b)

    def test_mean_is_maximally_mixed(self):
        rng = derive_rng(5)
        acc = np.zeros((3, 3), dtype=complex)
        n = 10_000
        for _ in range(n):
            acc += random_full_rank(3, rng).matrix
        assert np.max(np.abs(acc / n - np.eye(3) / 3)) < 0.01

    def test_full_rank_positive(self):
        rng = derive_rng(6)
        for _ in range(1000):
            w = np.linalg.eigvalsh(random_full_rank(2, rng).matrix)
            assert w.min() > 0

    @pytest.mark.parametrize("func", [random_pure, random_full_rank])
    def test_small_dim_rejected(self, func, rng):
        with pytest.raises(ValueError):
            func(1, rng)


class TestEigendecompose:
    def test_diagonal_input(self):
        eig = eigendecompose(np.diag([0.7, 0.3]).astype(complex))
        assert np.allclose(eig.eigenvalues, [0.7, 0.3])
        assert np.allclose(eig.eigenvectors, np.eye(2))

    def test_degenerate_is_reproducible(self):
        a = eigendecompose(DensityMatrix.maximally_mixed(2))
        b = eigendecompose(DensityMatrix.maximally_mixed(2))
        assert np.allclose(a.eigenvalues, [0.5, 0.5])
        assert np.array_equal(a.eigenvectors, b.eigenvectors)

    def test_balanced_interference_frame(self):
        h = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
        rho = h @ np.diag([0.9, 0.1]).astype(complex) @ h.conj().T
        eig = eigendecompose(rho)
        assert np.allclose(eig.eigenvalues, [0.9, 0.1], atol=1e-12)
        overlap = np.abs(eig.eigenvectors.conj().T @ h)
        assert np.allclose(overlap, np.eye(2), atol=1e-10)

    def test_reconstruction_round_trip(self, rng):
        for _ in range(10):
            rho = random_full_rank(5, rng)
            eig = eigendecompose(rho)
            assert np.linalg.norm(eig.reconstruct() - rho.matrix) < 1e-9

    def test_phase_convention(self, rng):
        rho = random_full_rank(4, rng)
        eig = eigendecompose(rho)
        for c in range(4):
            col = eig.eigenvectors[:, c]
            first = col[np.flatnonzero(np.abs(col) > 1e-8)[0]]
            assert abs(first.imag) < 1e-12
            assert first.real > 0

    def test_sorted_descending(self, rng):
        eig = eigendecompose(random_full_rank(6, rng))
        assert np.all(np.diff(eig.eigenvalues) <= 1e-15)

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError, match="Hermitian"):
            eigendecompose(np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex))


class TestSerialization:
    def test_round_trip(self, rng, tmp_path):
        rho = random_full_rank(3, rng)
        path = tmp_path / "state.json"
        save_state(rho, path)
        back = load_state(path)
        assert np.array_equal(back.matrix, rho.matrix)

    def test_rejects_invalid_payload(self):
        payload = density_matrix_to_json(DensityMatrix.maximally_mixed(2))
        payload["matrix"][0][0] = [0.9, 0.0]   # breaks unit trace
        with pytest.raises(ValueError):
            density_matrix_from_json(payload)

    def test_rejects_shape_mismatch(self):
        payload = density_matrix_to_json(DensityMatrix.maximally_mixed(2))
        payload["dim"] = 3
        with pytest.raises(ValueError):
            density_matrix_from_json(payload)

    def test_file_is_plain_json(self, tmp_path):
        path = tmp_path / "state.json"
        save_state(DensityMatrix.maximally_mixed(2), path)
        obj = json.loads(path.read_text())
        assert obj["dim"] == 2
