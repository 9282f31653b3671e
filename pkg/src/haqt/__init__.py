"""haqt: adaptive projective tomography for qudits.

Minimal measurement-basis construction for arbitrary finite dimension,
finite-shot measurement simulation, maximum-likelihood reconstruction,
Fisher-information and Gill-Massar bound analysis, and a seeded Monte
Carlo benchmark harness.
"""

__version__ = "0.1.0"

from .bases import (BasisSet, Computational, MeasurementBasis, Pair,
                    VerificationReport, build_basis_set, load_basis_set,
                    n_bases, observable_basis_set, rotate_basis_set,
                    save_basis_set, verify_basis_set)
from .bench import (BenchCell, BenchReport, ExperimentSpec, TrialRecord,
                    emit_report, flat_phase_target, run_experiment,
                    slit_state)
from .estimator import (MleOptions, TomographyResult, linear_inversion,
                        mle_reconstruct, mle_reconstruct_pooled,
                        project_to_physical)
from .fisher import (FisherMatrix, alpha, cfim, cfim_block, cfim_haqt,
                     gill_massar_bound, optimality_gap, qfim,
                     save_matrix_csv, sld_qfim_oracle)
from .gellmann import (all_operators, bloch_from_state, diagonal_op,
                       offdiag_op, pair_state, state_from_bloch)
from .measurement import (CountData, OutcomeDistribution, allocate_shots,
                          born_probabilities, load_counts, sample_counts,
                          save_counts, simulate_measurement)
from .protocols import (PROTOCOL_HAQT, PROTOCOL_SQT, PROTOCOLS,
                        ProtocolConfig, ProtocolRun, run_haqt, run_protocol,
                        run_sqt)
from .rng import derive_rng
from .states import (DensityMatrix, EigenDecomposition, PureState,
                     bures_distance_sq, density_matrix_from_json,
                     density_matrix_to_json, eigendecompose, fidelity,
                     infidelity, load_state, random_full_rank, random_pure,
                     save_state)

__all__ = [
    "__version__",
    "BasisSet", "Computational", "MeasurementBasis", "Pair",
    "VerificationReport", "build_basis_set", "load_basis_set", "n_bases",
    "observable_basis_set", "rotate_basis_set", "save_basis_set",
    "verify_basis_set",
    "BenchCell", "BenchReport", "ExperimentSpec", "TrialRecord",
    "emit_report", "flat_phase_target", "run_experiment", "slit_state",
    "MleOptions", "TomographyResult", "linear_inversion", "mle_reconstruct",
    "mle_reconstruct_pooled", "project_to_physical",
    "FisherMatrix", "alpha", "cfim", "cfim_block", "cfim_haqt",
    "gill_massar_bound", "optimality_gap", "qfim", "save_matrix_csv",
    "sld_qfim_oracle",
    "all_operators", "bloch_from_state", "diagonal_op", "offdiag_op",
    "pair_state", "state_from_bloch",
    "CountData", "OutcomeDistribution", "allocate_shots",
    "born_probabilities", "load_counts", "sample_counts", "save_counts",
    "simulate_measurement",
    "PROTOCOL_HAQT", "PROTOCOL_SQT", "PROTOCOLS", "ProtocolConfig",
    "ProtocolRun", "run_haqt", "run_protocol", "run_sqt",
    "derive_rng",
    "DensityMatrix", "EigenDecomposition", "PureState", "bures_distance_sq",
    "density_matrix_from_json", "density_matrix_to_json", "eigendecompose",
    "fidelity", "infidelity", "load_state", "random_full_rank",
    "random_pure", "save_state",
]
