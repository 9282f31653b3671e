import numpy as np
import pytest

from haqt import (DensityMatrix, FisherMatrix, alpha, build_basis_set, cfim,
                  cfim_block, cfim_haqt, eigendecompose, gill_massar_bound,
                  optimality_gap, qfim, random_full_rank, save_matrix_csv,
                  sld_qfim_oracle)
from haqt.gellmann import a_block_size
from haqt.bases import n_bases

import oracles
from conftest import conditioned_state


def aligned_state(eig) -> DensityMatrix:
    return DensityMatrix.from_matrix(np.diag(eig.eigenvalues).astype(complex))


class TestQfim:
    def test_qubit_maximally_mixed(self):
        eig = eigendecompose(DensityMatrix.maximally_mixed(2))
        j = qfim(eig).matrix
        assert np.allclose(j, np.eye(3))

    def test_qutrit_maximally_mixed(self):
        eig = eigendecompose(DensityMatrix.maximally_mixed(3))
        j = qfim(eig).matrix
        # pair entries 1/(1/3 + 1/3); diagonal sector sum_m c^2 * 3/4 = 3/2
        assert np.allclose(j[:6, :6], 1.5 * np.eye(6))
        assert np.allclose(j[6:, 6:], 1.5 * np.eye(2))

    @pytest.mark.parametrize("d", [2, 3, 4, 5])
    def test_matches_sld_oracle(self, d):
        for trial in range(20):
            eig = eigendecompose(conditioned_state(d, 300 + trial, 1e-3, d))
            a = qfim(eig).matrix
            b = sld_qfim_oracle(eig).matrix
            assert np.max(np.abs(a - b)) <= 1e-8

    def test_rank_deficient_rejected(self):
        eig = eigendecompose(np.diag([1.0, 0.0]).astype(complex))
        with pytest.raises(ValueError, match="QFIM singular"):
            qfim(eig)

    def test_block_structure(self, rng):
        eig = eigendecompose(random_full_rank(4, rng))
        j = qfim(eig)
        assert np.max(np.abs(j.ad_block())) <= 1e-12
        assert np.linalg.eigvalsh(j.matrix).min() > 0


class TestSldOracle:
    def test_qubit_pair_entry_is_unit(self):
        # for any qubit state the two eigenvalues sum to one
        eig = eigendecompose(np.diag([1 - 1e-3, 1e-3]).astype(complex))
        j = sld_qfim_oracle(eig).matrix
        assert j[0, 0] == pytest.approx(1.0, abs=1e-12)
        assert j[1, 1] == pytest.approx(1.0, abs=1e-12)

    def test_degenerate_spectrum_well_defined(self):
        eig = eigendecompose(np.diag([0.4, 0.4, 0.2]).astype(complex))
        a = sld_qfim_oracle(eig).matrix
        b = qfim(eig).matrix
        assert np.max(np.abs(a - b)) <= 1e-10


class TestCfim:
    @pytest.mark.parametrize("d", [2, 3, 4, 5, 6])
    def test_offdiagonal_block_equals_scaled_qfim(self, d):
        m = n_bases(d)
        for trial in range(10):
            eig = eigendecompose(conditioned_state(d, 400 + trial, 1e-2, d))
            rho = aligned_state(eig)
            i_mat = cfim_haqt(rho, build_basis_set(d)).matrix
            j_mat = qfim(eig).matrix
            na = a_block_size(d)
            assert np.max(np.abs(i_mat[:na, :na] - j_mat[:na, :na] / m)) <= 1e-9
            assert np.max(np.abs(i_mat[:na, na:])) <= 1e-9

    @pytest.mark.parametrize("d", [2, 3, 4, 5])
    def test_diag_block_dominates_block_prediction(self, d):
        # the diagonal sector of the measured-data information exceeds the
        # closed-form prediction (equality only at d = 2)
        for trial in range(5):
            eig = eigendecompose(conditioned_state(d, 430 + trial, 1e-2, d))
            rho = aligned_state(eig)
            i_mat = cfim_haqt(rho, build_basis_set(d)).matrix
            block = cfim_block(eig).matrix
            na = a_block_size(d)
            gap = np.linalg.eigvalsh(i_mat[na:, na:] - block[na:, na:]).min()
            assert gap >= -1e-10
            if d == 2:
                assert np.max(np.abs(i_mat - block)) <= 1e-12

    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_matches_finite_difference_oracle(self, d):
        bs = build_basis_set(d)
        vec_list = [b.vectors for b in bs.bases]
        for trial in range(3):
            eig = eigendecompose(conditioned_state(d, 460 + trial, 5e-2, d))
            rho = aligned_state(eig)
            analytic = cfim_haqt(rho, bs).matrix
            fd = oracles.fd_cfim(rho.matrix, vec_list)
            scale = np.max(np.abs(fd))
            assert np.max(np.abs(analytic - fd)) / scale <= 1e-4

    def test_general_position_cfim_psd(self, rng):
        # not aligned with any eigenframe: still a valid information matrix
        rho = conditioned_state(3, 470, 1e-2)
        i_mat = cfim(rho, build_basis_set(3)).matrix
        assert np.linalg.eigvalsh(i_mat).min() >= -1e-10

    def test_rank_deficient_state_rejected(self):
        rho = DensityMatrix.from_matrix(np.diag([1.0, 0.0]).astype(complex))
        with pytest.raises(ValueError, match="singular"):
            cfim_haqt(rho, build_basis_set(2))

    def test_wrong_set_size_rejected(self):
        from haqt import observable_basis_set
        rho = DensityMatrix.maximally_mixed(3)
        with pytest.raises(ValueError, match="minimal basis set"):
            cfim_haqt(rho, observable_basis_set(3))


class TestBounds:
    def test_gill_massar_values(self):
        assert gill_massar_bound(2, 1) == pytest.approx(2.25)
        assert gill_massar_bound(3, 1000) == pytest.approx(0.008)
        assert gill_massar_bound(10, 398100) == pytest.approx(1089 / 1592400)

    def test_gill_massar_scaling(self):
        for n in (10, 1000, 12345):
            assert gill_massar_bound(4, n) * n == pytest.approx(gill_massar_bound(4, 1))

    def test_alpha_values(self):
        assert alpha(2) == pytest.approx(1.0)
        assert alpha(3) == pytest.approx(1.5)
        assert alpha(5) == pytest.approx(10 / 6)
        assert alpha(10) == pytest.approx(19 / 11)
        assert abs(alpha(10 ** 6) - 2.0) < 1e-5

    def test_input_validation(self):
        with pytest.raises(ValueError):
            gill_massar_bound(1, 100)
        with pytest.raises(ValueError):
            gill_massar_bound(3, 0)
        with pytest.raises(ValueError):
            alpha(1)


class TestOptimalityGap:
    @pytest.mark.parametrize("d", [2, 3, 4, 5, 6])
    def test_nonnegative_for_adaptive_measurement(self, d):
        for trial in range(5):
            eig = eigendecompose(conditioned_state(d, 500 + trial, 1e-2, d))
            rho = aligned_state(eig)
            i_fm = cfim_haqt(rho, build_basis_set(d))
            j_fm = qfim(eig)
            assert optimality_gap(i_fm, j_fm, d) >= -1e-8

    def test_offdiagonal_block_saturates(self, rng):
        d = 4
        eig = eigendecompose(conditioned_state(d, 510, 1e-2))
        rho = aligned_state(eig)
        i_fm = cfim_haqt(rho, build_basis_set(d))
        j_fm = qfim(eig)
        gap = optimality_gap(i_fm.a_block(), j_fm.a_block(), d)
        assert abs(gap) <= 1e-9

    def test_qubit_full_matrix_saturates(self):
        eig = eigendecompose(conditioned_state(2, 511, 5e-2))
        rho = aligned_state(eig)
        gap = optimality_gap(cfim_haqt(rho, build_basis_set(2)), qfim(eig), 2)
        assert abs(gap) <= 1e-9

    def test_singular_qfim_rejected(self):
        i_fm = np.eye(3)
        j_fm = np.diag([1.0, 1.0, 0.0])
        with pytest.raises(ValueError, match="singular"):
            optimality_gap(i_fm, j_fm, 2)


class TestFisherMatrixType:
    def test_rejects_asymmetric(self):
        m = np.eye(3)
        m[0, 1] = 0.5
        with pytest.raises(ValueError, match="symmetric"):
            FisherMatrix(2, m, "quantum")

    def test_rejects_bad_kind(self):
        with pytest.raises(ValueError, match="kind"):
            FisherMatrix(2, np.eye(3), "mystery")

    def test_csv_export(self, tmp_path, rng):
        eig = eigendecompose(random_full_rank(2, rng))
        fm = qfim(eig)
        path = tmp_path / "fisher.csv"
        save_matrix_csv(fm, path)
        back = np.loadtxt(path, delimiter=",")
        assert np.array_equal(back, fm.matrix)
