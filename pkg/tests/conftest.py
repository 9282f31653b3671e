import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from haqt import DensityMatrix, derive_rng, random_full_rank


def conditioned_state(d, seed, min_eig=0.0, *path) -> DensityMatrix:
    """Hilbert-Schmidt-random full-rank state with a spectral floor,
    drawn by rejection from a named stream."""
    rng = derive_rng(seed, 0xFACE, *path)
    while True:
        rho = random_full_rank(d, rng)
        if np.linalg.eigvalsh(rho.matrix).min() >= min_eig:
            return rho


@pytest.fixture
def rng():
    return derive_rng(20250809)
